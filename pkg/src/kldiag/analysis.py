"""Report builders: distinguishability tables, rejection matrices, size tables.

These are the library-level computations behind the command line interface;
every function returns plain rows (lists of dicts) ready for CSV or JSON
serialization.  All randomness is seeded, so reports are reproducible.
"""

from __future__ import annotations

import numpy as np

from .classifier import DiagnosisOutput, classify
from .dataset import NF_LABEL, corpus_pdfs, split
from .gaussian import GaussianPdf
from .modes import FaultMode, ModeRegistry, distinguishability, quantile_report
from .size_estimation import _derived_rng, baseline_mean_size, estimate_size
from .thresholds import OneClassModel, tune

REPORT_QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


def build_modes_all_data(
    pdfs_by_class: dict[str, list[GaussianPdf]],
    nf_label: str = NF_LABEL,
) -> ModeRegistry:
    """Registry built from every available pdf (no held-out validation)."""
    if nf_label not in pdfs_by_class:
        raise ValueError(f"corpus has no fault-free class {nf_label!r}")
    nf_members = tuple(pdfs_by_class[nf_label])
    modes = {nf_label: FaultMode(nf_label, nf_members, includes_nf=False)}
    for label in sorted(pdfs_by_class):
        if label == nf_label:
            continue
        modes[label] = FaultMode(label, tuple(pdfs_by_class[label]) + nf_members, includes_nf=True)
    return ModeRegistry(modes=modes, nf_label=nf_label)


def _mode_columns(registry: ModeRegistry) -> list[str]:
    return [registry.nf_label, *sorted(registry.fault_labels())]


def _grouped_by_magnitude(pdfs: list[GaussianPdf]) -> dict[float, list[GaussianPdf]]:
    grouped: dict[float, list[GaussianPdf]] = {}
    for pdf in pdfs:
        theta = 0.0 if pdf.theta is None else float(pdf.theta)
        grouped.setdefault(theta, []).append(pdf)
    return grouped


def distinguishability_rows(
    registry: ModeRegistry,
    eval_pdfs_by_class: dict[str, list[GaussianPdf]],
    quantiles=REPORT_QUANTILES,
) -> list[dict]:
    """Quantiles and mean of D against every mode, per (class, magnitude).

    Cells without any evaluation pdf are reported with ``count = 0`` and
    empty statistics rather than dropped.
    """
    rows = []
    columns = _mode_columns(registry)
    for true_label in sorted(eval_pdfs_by_class):
        grouped = _grouped_by_magnitude(eval_pdfs_by_class[true_label])
        for theta in sorted(grouped):
            group = grouped[theta]
            for mode_label in columns:
                mode = registry.modes[mode_label]
                row = {
                    "true_class": true_label,
                    "magnitude": theta,
                    "mode": mode_label,
                    "count": len(group),
                }
                if group:
                    values = np.array([distinguishability(p, mode)[0] for p in group])
                    qs = quantile_report(values, quantiles)
                    for frac, q in zip(quantiles, qs):
                        row[f"q{int(round(frac * 100))}"] = float(q)
                    row["mean"] = float(values.mean())
                else:
                    for frac in quantiles:
                        row[f"q{int(round(frac * 100))}"] = None
                    row["mean"] = None
                rows.append(row)
    return rows


def batch_size_sweep_rows(scenarios, batch_sizes, trim_fraction: float = 0.0) -> list[dict]:
    """Mean distinguishability from the fault-free mode per batch size.

    Rebatches the corpus at every requested size and reports, per
    (class, magnitude, batch size), the mean D against the fault-free mode
    built from all data at that size.
    """
    rows = []
    for batch_size in batch_sizes:
        by_class = corpus_pdfs(scenarios, batch_size, trim_fraction)
        registry = build_modes_all_data(by_class)
        nf_mode = registry.nf_mode
        for label in sorted(by_class):
            if label == NF_LABEL:
                continue
            for theta, group in sorted(_grouped_by_magnitude(by_class[label]).items()):
                values = [distinguishability(p, nf_mode)[0] for p in group]
                rows.append(
                    {
                        "true_class": label,
                        "magnitude": theta,
                        "batch_size": int(batch_size),
                        "count": len(group),
                        "mean_d_nf": float(np.mean(values)),
                    }
                )
    return rows


def _train_models(registry: ModeRegistry, alpha: float) -> dict[str, OneClassModel]:
    return {label: tune(mode, alpha) for label, mode in registry.modes.items()}


def rejection_matrix_rows(
    scenarios,
    *,
    batch_size: int = 100,
    trim_fraction: float = 0.0,
    alpha: float = 0.05,
    train_fraction: float = 0.67,
    seed: int = 0,
    mc_runs: int = 10,
    hold_out: str | None = None,
) -> tuple[list[dict], list[DiagnosisOutput]]:
    """Monte-Carlo rejection probabilities, plus the first run's diagnoses.

    Every run re-splits the corpus with seed ``seed + run``, tunes all
    one-class models and classifies the validation pdfs.  The matrix entry
    for (true class, magnitude, tested class) is the fraction of validation
    pdfs whose distinguishability exceeded the tested class's threshold,
    pooled over runs.  ``hold_out`` removes one class from training entirely;
    its pdfs are classified as validation data in every run.
    """
    if mc_runs < 1:
        raise ValueError("mc_runs must be >= 1")
    by_class = corpus_pdfs(scenarios, batch_size, trim_fraction)
    if hold_out is not None:
        if hold_out not in by_class:
            raise ValueError(f"hold-out class {hold_out!r} not present in the corpus")
        if hold_out == NF_LABEL:
            raise ValueError("the fault-free class cannot be held out")
    rejected: dict[tuple[str, float, str], int] = {}
    seen: dict[tuple[str, float, str], int] = {}
    diagnoses: list[DiagnosisOutput] = []
    for run in range(mc_runs):
        train_input = {k: v for k, v in by_class.items() if k != hold_out}
        registry, validation = split(train_input, train_fraction, seed + run)
        if hold_out is not None:
            validation[hold_out] = list(by_class[hold_out])
        models = _train_models(registry, alpha)
        for true_label in sorted(validation):
            for pdf in validation[true_label]:
                diagnosis = classify(pdf, models)
                if run == 0:
                    diagnoses.append(diagnosis)
                theta = 0.0 if pdf.theta is None else float(pdf.theta)
                for tested, (d, j) in diagnosis.scores.items():
                    key = (true_label, theta, tested)
                    seen[key] = seen.get(key, 0) + 1
                    rejected[key] = rejected.get(key, 0) + (1 if d > j else 0)
    rows = []
    for key in sorted(seen):
        true_label, theta, tested = key
        rows.append(
            {
                "true_class": true_label,
                "magnitude": theta,
                "tested_class": tested,
                "rejection_probability": rejected[key] / seen[key],
                "count": seen[key],
                "runs": mc_runs,
            }
        )
    return rows, diagnoses


def size_table_rows(
    scenarios,
    *,
    batch_size: int = 100,
    trim_fraction: float = 0.0,
    train_fraction: float = 0.67,
    seed: int = 0,
    neighbors: int = 10,
    mc_samples: int = 1000,
) -> list[dict]:
    """Fault size estimation intervals per (class, magnitude).

    Splits once, then estimates the size of every validation pdf of each
    fault class against that class's mode, with the unweighted nearest-
    neighbor mean as baseline.  Fault-free validation pdfs are included as
    the magnitude-0 row of every class.  Reports the [10%, 90%] interval of
    both estimators.
    """
    by_class = corpus_pdfs(scenarios, batch_size, trim_fraction)
    registry, validation = split(by_class, train_fraction, seed)
    rows = []
    for label in sorted(registry.fault_labels()):
        mode = registry.modes[label]
        eval_pdfs = list(validation.get(label, [])) + list(validation.get(NF_LABEL, []))
        estimates: dict[float, list[tuple[float, float]]] = {}
        for idx, pdf in enumerate(eval_pdfs):
            rng = _derived_rng(seed + idx, label)
            est = estimate_size(pdf, mode, l=neighbors, v=mc_samples, seed=rng)
            base = baseline_mean_size(pdf, mode, l=neighbors)
            theta = 0.0 if pdf.theta is None else float(pdf.theta)
            estimates.setdefault(theta, []).append((est.theta_hat, base))
        for theta in sorted(estimates):
            pairs = np.asarray(estimates[theta])
            kl_lo, kl_hi = np.quantile(pairs[:, 0], [0.1, 0.9])
            mean_lo, mean_hi = np.quantile(pairs[:, 1], [0.1, 0.9])
            rows.append(
                {
                    "class": label,
                    "magnitude": theta,
                    "count": int(pairs.shape[0]),
                    "kl_q10": float(kl_lo),
                    "kl_q90": float(kl_hi),
                    "mean_q10": float(mean_lo),
                    "mean_q90": float(mean_hi),
                }
            )
    return rows
