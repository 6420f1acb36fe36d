"""Labeled residual corpora: CSV I/O, train/validation split, synthetic bench.

The on-disk format is a single CSV with header ``t,r1,...,rn,label,theta``.
Each scenario is one block of rows whose ``t`` column increases; ``t``
resetting marks the start of the next scenario.  Within a block an optional
fault-free prefix (label NF, theta 0) is followed by one constant fault
label, so the fault onset is recoverable from the label switch.

The synthetic bench generates residual scenarios as correlated Gaussian
noise plus, after the onset, a fault shift ``(theta / 100) * excitation(t) *
signature``.  Two of the default class signatures are nearly parallel so the
bench reproduces the overlap of hard-to-separate fault pairs.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .batching import Batch, ResidualSeries, partition
from .errors import DataError
from .gaussian import GaussianPdf, estimate_gaussian, estimate_gaussian_trimmed
from .modes import FaultMode, ModeRegistry

NF_LABEL = "NF"


@dataclass(frozen=True, eq=False)
class LabeledScenario:
    """One recorded scenario: a residual series with a single fault class.

    Samples before ``onset`` are fault free; from ``onset`` on they carry
    ``label`` and fault size ``theta``.  A fault-free scenario has
    ``label = NF``, ``theta = 0`` and ``onset = 0``.
    """

    label: str
    theta: float
    series: ResidualSeries
    onset: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.onset <= len(self.series):
            raise ValueError(f"onset {self.onset} outside the series bounds")
        if self.label == NF_LABEL:
            if self.theta != 0.0:
                raise ValueError("a fault-free scenario must have theta = 0")
            if self.onset != 0:
                raise ValueError("a fault-free scenario has no onset")


def scenario_pdfs(
    scenario: LabeledScenario,
    batch_size: int,
    trim_fraction: float = 0.0,
) -> list[GaussianPdf]:
    """Batch a scenario and fit one Gaussian pdf per batch.

    The fault-free prefix and the faulty remainder are partitioned
    separately, so no batch ever straddles the onset; segment remainders
    shorter than a batch are dropped.  Offsets refer to the full scenario.
    """
    segments = []
    if scenario.onset > 0:
        segments.append((0, scenario.onset, NF_LABEL, 0.0))
    if scenario.onset < len(scenario.series):
        segments.append((scenario.onset, len(scenario.series), scenario.label, scenario.theta))
    out: list[GaussianPdf] = []
    for start, stop, label, theta in segments:
        if stop - start < batch_size:
            continue
        samples = scenario.series.samples[start:stop]
        for batch in partition(ResidualSeries(samples), batch_size):
            batch = Batch(batch.samples, offset=batch.offset + start, label=label, theta=theta)
            if trim_fraction > 0.0:
                out.append(estimate_gaussian_trimmed(batch, trim_fraction))
            else:
                out.append(estimate_gaussian(batch))
    return out


def corpus_pdfs(
    scenarios,
    batch_size: int,
    trim_fraction: float = 0.0,
) -> dict[str, list[GaussianPdf]]:
    """Batch every scenario and group the fitted pdfs by fault class."""
    grouped: dict[str, list[GaussianPdf]] = {}
    for scenario in scenarios:
        for pdf in scenario_pdfs(scenario, batch_size, trim_fraction):
            grouped.setdefault(pdf.label, []).append(pdf)
    return grouped


def split(
    pdfs_by_class: dict[str, list[GaussianPdf]],
    train_fraction: float = 0.67,
    seed=0,
    nf_label: str = NF_LABEL,
) -> tuple[ModeRegistry, dict[str, list[GaussianPdf]]]:
    """Split each class into train/validation pdfs and build the registry.

    ``floor(train_fraction * m)`` pdfs of each class train its mode; the
    fault-free training pdfs are additionally merged into every fault mode,
    which guarantees that no fault is harder to distinguish from its own mode
    than from the fault-free one.  The split is seeded and reproducible;
    train and validation are disjoint and restore the input.
    """
    if nf_label not in pdfs_by_class:
        raise ValueError(f"corpus has no fault-free class {nf_label!r}")
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction must be in (0, 1], got {train_fraction}")
    rng = np.random.default_rng(seed)
    train: dict[str, list[GaussianPdf]] = {}
    validation: dict[str, list[GaussianPdf]] = {}
    for label in sorted(pdfs_by_class):
        pdfs = pdfs_by_class[label]
        if len(pdfs) < 3:
            raise ValueError(f"class {label!r} has only {len(pdfs)} pdfs; need >= 3 to split")
        perm = rng.permutation(len(pdfs))
        cut = int(np.floor(train_fraction * len(pdfs)))
        train[label] = [pdfs[i] for i in np.sort(perm[:cut])]
        validation[label] = [pdfs[i] for i in np.sort(perm[cut:])]
    nf_train = tuple(train[nf_label])
    modes = {nf_label: FaultMode(nf_label, nf_train, includes_nf=False)}
    for label in sorted(train):
        if label == nf_label:
            continue
        modes[label] = FaultMode(label, tuple(train[label]) + nf_train, includes_nf=True)
    return ModeRegistry(modes=modes, nf_label=nf_label), validation


# ---------------------------------------------------------------------------
# synthetic bench


def _unit(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    return vec / np.linalg.norm(vec)


def _default_signatures() -> dict[str, np.ndarray]:
    raw = {
        "f1": (1.00, 0.15, 0.05, 0.10),
        "f2": (0.10, 1.00, 0.20, 0.05),
        "f3": (0.05, 0.20, 1.00, 0.50),
        # f4 is nearly parallel to f3 (cosine ~ 0.996): the overlapping pair.
        "f4": (0.10, 0.25, 0.95, 0.55),
    }
    return {label: _unit(vec) for label, vec in raw.items()}


def _default_noise_cov() -> np.ndarray:
    corr = np.array(
        [
            [1.0, 0.3, 0.1, 0.0],
            [0.3, 1.0, 0.2, 0.1],
            [0.1, 0.2, 1.0, 0.3],
            [0.0, 0.1, 0.3, 1.0],
        ]
    )
    return 0.05**2 * corr


_DEFAULT_MAGNITUDES = (-20.0, -15.0, -10.0, -5.0, 5.0, 10.0, 15.0)


@dataclass(frozen=True, eq=False)
class SyntheticBenchConfig:
    """Configuration of the synthetic residual bench.

    ``magnitudes`` are percentages; the additive fault shift of class c at
    magnitude theta is ``(theta / 100) * excitation(t) * signatures[c]``.
    ``excitation`` is an optional explicit per-sample profile in [0, 1]; by
    default a smooth deterministic profile around 0.75 is used, whose
    batch-to-batch variation is kept small enough that neighboring
    magnitudes do not alias through the excitation.
    """

    n: int = 4
    signatures: dict[str, np.ndarray] = field(default_factory=_default_signatures)
    magnitudes: dict[str, tuple[float, ...]] | None = None
    noise_cov: np.ndarray = field(default_factory=_default_noise_cov)
    samples_per_scenario: int = 6000
    nf_scenarios: int = 4
    onset: int = 1200
    excitation: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        signatures = {k: np.asarray(v, dtype=float) for k, v in self.signatures.items()}
        if not signatures:
            raise ValueError("bench needs at least one fault class signature")
        for label, vec in signatures.items():
            if label == NF_LABEL:
                raise ValueError(f"{NF_LABEL!r} cannot be used as a fault class label")
            if vec.shape != (self.n,):
                raise ValueError(f"signature of {label!r} must have length n = {self.n}")
            if not np.linalg.norm(vec) > 0.0:
                raise ValueError(f"signature of {label!r} must be non-zero")
        object.__setattr__(self, "signatures", signatures)
        magnitudes = self.magnitudes
        if magnitudes is None:
            magnitudes = {label: _DEFAULT_MAGNITUDES for label in signatures}
        magnitudes = {k: tuple(float(m) for m in v) for k, v in magnitudes.items()}
        if set(magnitudes) != set(signatures):
            raise ValueError("magnitudes must be given for exactly the signature classes")
        object.__setattr__(self, "magnitudes", magnitudes)
        cov = np.asarray(self.noise_cov, dtype=float)
        if cov.shape != (self.n, self.n):
            raise ValueError(f"noise covariance must be {self.n} x {self.n}")
        np.linalg.cholesky(cov)  # must be positive definite
        object.__setattr__(self, "noise_cov", cov)
        if not 0 <= self.onset < self.samples_per_scenario:
            raise ValueError("onset must lie inside the scenario")
        if self.nf_scenarios < 1:
            raise ValueError("the bench needs at least one fault-free scenario")
        if self.excitation is not None:
            exc = np.asarray(self.excitation, dtype=float)
            if exc.shape != (self.samples_per_scenario,):
                raise ValueError("excitation must provide one value per sample")
            if np.any(exc < 0.0) or np.any(exc > 1.0):
                raise ValueError("excitation values must lie in [0, 1]")
            object.__setattr__(self, "excitation", exc)

    def excitation_profile(self) -> np.ndarray:
        if self.excitation is not None:
            return self.excitation
        t = np.arange(self.samples_per_scenario)
        return 0.75 + 0.07 * np.sin(2.0 * np.pi * t / 1900.0) + 0.04 * np.sin(2.0 * np.pi * t / 41.0)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "signatures": {k: v.tolist() for k, v in self.signatures.items()},
            "magnitudes": {k: list(v) for k, v in self.magnitudes.items()},
            "noise_cov": self.noise_cov.tolist(),
            "samples_per_scenario": self.samples_per_scenario,
            "nf_scenarios": self.nf_scenarios,
            "onset": self.onset,
            "excitation": None if self.excitation is None else self.excitation.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticBenchConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown bench config keys: {sorted(unknown)}")
        return cls(**doc)


def generate_bench(config: SyntheticBenchConfig) -> list[LabeledScenario]:
    """Generate the synthetic corpus: fault-free scenarios, then one scenario
    per (class, magnitude) in configuration order.  Deterministic per seed;
    the fault contribution is exactly linear in the magnitude."""
    rng = np.random.default_rng(config.seed)
    noise_chol = np.linalg.cholesky(config.noise_cov)
    excitation = config.excitation_profile()
    total = config.samples_per_scenario
    scenarios: list[LabeledScenario] = []

    def noise_block() -> np.ndarray:
        return rng.standard_normal((total, config.n)) @ noise_chol.T

    for _ in range(config.nf_scenarios):
        series = ResidualSeries(
            noise_block(),
            labels=np.full(total, NF_LABEL, dtype=object),
            thetas=np.zeros(total),
        )
        scenarios.append(LabeledScenario(NF_LABEL, 0.0, series, onset=0))
    for label, signature in config.signatures.items():
        for theta in config.magnitudes[label]:
            samples = noise_block()
            faulty = slice(config.onset, total)
            samples[faulty] += (theta / 100.0) * excitation[faulty, None] * signature
            labels = np.full(total, NF_LABEL, dtype=object)
            labels[faulty] = label
            thetas = np.zeros(total)
            thetas[faulty] = theta
            scenarios.append(
                LabeledScenario(
                    label, float(theta), ResidualSeries(samples, labels, thetas), onset=config.onset
                )
            )
    return scenarios


# ---------------------------------------------------------------------------
# CSV interchange


def _header(n: int) -> list[str]:
    return ["t", *[f"r{i}" for i in range(1, n + 1)], "label", "theta"]


def write_csv(path, scenarios) -> None:
    """Write scenarios to one CSV file; floats keep full round-trip precision."""
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("nothing to write")
    n = scenarios[0].series.n
    if any(s.series.n != n for s in scenarios):
        raise ValueError("all scenarios must share one residual dimension")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_header(n))
        for scenario in scenarios:
            series = scenario.series
            for t in range(len(series)):
                faulty = t >= scenario.onset and scenario.label != NF_LABEL
                label = scenario.label if faulty else NF_LABEL
                theta = scenario.theta if faulty else 0.0
                writer.writerow(
                    [t, *[repr(float(v)) for v in series.samples[t]], label, repr(float(theta))]
                )


def _block_to_scenario(rows: list[tuple[int, np.ndarray, str, float]], start_line: int) -> LabeledScenario:
    labels = [r[2] for r in rows]
    switches = [i for i in range(1, len(labels)) if labels[i] != labels[i - 1]]
    if len(switches) > 1:
        raise DataError(
            f"line {start_line + switches[1]}: more than one label switch inside a scenario block"
        )
    samples = np.vstack([r[1] for r in rows])
    thetas = np.array([r[3] for r in rows])
    label_arr = np.array(labels, dtype=object)

    def check_nf(i: int) -> None:
        if thetas[i] != 0.0:
            raise DataError(f"line {start_line + i}: fault-free samples must have theta = 0")

    def check_constant_theta(indices) -> float:
        theta = thetas[indices[0]]
        for i in indices[1:]:
            if thetas[i] != theta:
                raise DataError(f"line {start_line + i}: fault size changes within one scenario")
        return float(theta)

    series = ResidualSeries(samples, labels=label_arr, thetas=thetas)
    if not switches:
        label = labels[0]
        if label == NF_LABEL:
            for i in range(len(rows)):
                check_nf(i)
            return LabeledScenario(NF_LABEL, 0.0, series, onset=0)
        theta = check_constant_theta(list(range(len(rows))))
        return LabeledScenario(label, theta, series, onset=0)
    onset = switches[0]
    if labels[0] != NF_LABEL:
        raise DataError(
            f"line {start_line}: a scenario block may only switch from {NF_LABEL} to a fault class"
        )
    for i in range(onset):
        check_nf(i)
    theta = check_constant_theta(list(range(onset, len(rows))))
    return LabeledScenario(labels[onset], theta, series, onset=onset)


def load_csv(path) -> list[LabeledScenario]:
    """Read a scenario corpus written by :func:`write_csv`.

    Scenario blocks are delimited by the ``t`` column resetting.  Malformed
    headers, rows or label patterns raise :class:`DataError` naming the line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        n = len(header) - 3
        if n < 1 or header != _header(n):
            raise DataError(
                f"{path}: header must be t,r1,...,rn,label,theta; got {','.join(header)}"
            )
        scenarios: list[LabeledScenario] = []
        block: list[tuple[int, np.ndarray, str, float]] = []
        block_start = 2
        prev_t = None
        for row in reader:
            line = reader.line_num
            if len(row) != n + 3:
                raise DataError(f"{path}: line {line}: expected {n + 3} fields, got {len(row)}")
            try:
                t = int(row[0])
                values = np.array([float(c) for c in row[1 : n + 1]])
                theta = float(row[n + 2])
            except ValueError as exc:
                raise DataError(f"{path}: line {line}: {exc}") from None
            label = row[n + 1]
            if prev_t is not None and t <= prev_t:
                scenarios.append(_block_to_scenario(block, block_start))
                block = []
                block_start = line
            elif prev_t is None:
                block_start = line
            block.append((t, values, label, theta))
            prev_t = t
        if block:
            scenarios.append(_block_to_scenario(block, block_start))
    if not scenarios:
        raise DataError(f"{path}: no data rows")
    return scenarios
