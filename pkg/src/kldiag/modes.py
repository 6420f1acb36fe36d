"""Fault modes (sets of Gaussian pdfs) and distinguishability measures.

A fault mode approximates everything that is known about one fault class by
the finite set of pdfs estimated from its training batches.  The
distinguishability of a pdf p from mode j is the smallest divergence to any
member,

    D_j(p) = min_q K(p || q)  over the members q of mode j,

so enlarging a mode can only lower D_j(p).  When the fault-free pdfs are
merged into every fault mode, D_fault(p) <= D_nf(p) holds for every p, which
makes detection at least as easy as isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import kl_gaussian
from .gaussian import GaussianPdf


@dataclass(frozen=True, eq=False)
class FaultMode:
    """A labeled, finite set of Gaussian pdfs of equal dimension."""

    label: str
    members: tuple[GaussianPdf, ...]
    includes_nf: bool = False

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise ValueError("a fault mode needs at least one member pdf")
        dim = members[0].dim
        if any(m.dim != dim for m in members):
            raise ValueError("all member pdfs must share one dimension")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def member_thetas(self) -> np.ndarray:
        """Fault sizes of all members; raises when any member lacks one."""
        thetas = [m.theta for m in self.members]
        if any(t is None for t in thetas):
            raise ValueError(f"mode {self.label!r} has members without a fault size")
        return np.asarray(thetas, dtype=float)


@dataclass(frozen=True, eq=False)
class ModeRegistry:
    """All known fault modes keyed by label, with a designated fault-free mode."""

    modes: dict[str, FaultMode]
    nf_label: str = "NF"

    def __post_init__(self) -> None:
        modes = dict(self.modes)
        if self.nf_label not in modes:
            raise ValueError(f"registry is missing the fault-free mode {self.nf_label!r}")
        dim = None
        for label, mode in modes.items():
            if mode.label != label:
                raise ValueError(f"mode labeled {mode.label!r} stored under key {label!r}")
            if dim is None:
                dim = mode.dim
            elif mode.dim != dim:
                raise ValueError("all modes in a registry must share one dimension")
        object.__setattr__(self, "modes", modes)

    @property
    def nf_mode(self) -> FaultMode:
        return self.modes[self.nf_label]

    @property
    def dim(self) -> int:
        return self.nf_mode.dim

    def fault_labels(self) -> list[str]:
        return [label for label in self.modes if label != self.nf_label]


def _kl_scan(p: GaussianPdf, members: tuple[GaussianPdf, ...]) -> np.ndarray:
    # The naive exhaustive scan; deliberately the single code path every
    # search variant reduces to, so results agree bit for bit.
    return np.array([kl_gaussian(p, q) for q in members])


def distinguishability(p: GaussianPdf, mode: FaultMode) -> tuple[float, int]:
    """Smallest divergence from ``p`` to any member of ``mode``.

    Returns ``(value, argmin_index)``; ties resolve to the lowest member
    index.  Zero when ``p`` is itself a member.
    """
    values = _kl_scan(p, mode.members)
    idx = int(np.argmin(values))
    return float(values[idx]), idx


def within_class(mode: FaultMode) -> np.ndarray:
    """Leave-one-out distinguishability of every member against its own mode.

    Entry i is ``min_{k != i} K(member_i || member_k)``; requires at least
    two members.  These values feed the rejection-threshold tuning.
    """
    if len(mode) < 2:
        raise ValueError("within-class distinguishability needs at least 2 members")
    out = np.empty(len(mode))
    for i, p in enumerate(mode.members):
        values = _kl_scan(p, mode.members)
        values[i] = np.inf
        out[i] = values.min()
    return out


def ordered_subset(p: GaussianPdf, mode: FaultMode, l: int) -> list[tuple[GaussianPdf, float | None]]:
    """The ``min(l, M)`` members closest to ``p`` in divergence, ascending.

    Ties keep the lower member index first.  Returns ``(member, theta)``
    pairs; fault sizes may be None when members carry none.
    """
    if l < 1:
        raise ValueError("subset size l must be >= 1")
    values = _kl_scan(p, mode.members)
    order = np.argsort(values, kind="stable")[: min(l, len(mode))]
    return [(mode.members[i], mode.members[i].theta) for i in order]


def quantile_report(values, quantiles=(0.1, 0.25, 0.5, 0.75, 0.9)) -> np.ndarray:
    """Linear-interpolation quantiles of a non-empty value collection."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot summarize an empty value collection")
    quantiles = np.asarray(quantiles, dtype=float)
    if np.any(quantiles < 0.0) or np.any(quantiles > 1.0):
        raise ValueError("quantile fractions must lie in [0, 1]")
    return np.quantile(values, quantiles)


@dataclass(frozen=True, eq=False)
class ClusteredIndex:
    """K-medoid clustering of a mode under symmetrized divergence.

    Speeds up nearest-member queries: a query first visits only the cluster
    representatives and then expands the promising clusters.
    """

    mode: FaultMode
    medoids: tuple[int, ...]
    clusters: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "medoids", tuple(int(m) for m in self.medoids))
        object.__setattr__(self, "clusters", tuple(np.asarray(c, dtype=int) for c in self.clusters))


def _kmedoids(dissim: np.ndarray, k: int) -> list[int]:
    m = dissim.shape[0]
    if k >= m:
        return list(range(m))
    # Deterministic seeding: most central point first, then farthest-first.
    medoids = [int(np.argmin(dissim.sum(axis=1)))]
    while len(medoids) < k:
        nearest = dissim[:, medoids].min(axis=1)
        nearest[medoids] = -np.inf
        medoids.append(int(np.argmax(nearest)))
    for _ in range(100):
        assign = np.argmin(dissim[:, medoids], axis=1)
        updated = []
        for c in range(k):
            idx = np.flatnonzero(assign == c)
            if idx.size == 0:
                updated.append(medoids[c])
                continue
            costs = dissim[np.ix_(idx, idx)].sum(axis=1)
            updated.append(int(idx[np.argmin(costs)]))
        if updated == medoids:
            break
        medoids = updated
    return medoids


def build_search_index(mode: FaultMode, cluster_count: int) -> ClusteredIndex:
    """Cluster a mode's members with k-medoids under (K(p||q) + K(q||p)) / 2.

    The symmetrized divergence is used only to group members; searches still
    evaluate the directed divergence.  Deterministic for fixed inputs.
    """
    m = len(mode)
    if not 1 <= cluster_count <= m:
        raise ValueError(f"cluster_count must be in [1, {m}], got {cluster_count}")
    directed = np.empty((m, m))
    for i, p in enumerate(mode.members):
        directed[i] = _kl_scan(p, mode.members)
    dissim = 0.5 * (directed + directed.T)
    medoids = _kmedoids(dissim, cluster_count)
    assign = np.argmin(dissim[:, medoids], axis=1)
    assign[np.asarray(medoids)] = np.arange(len(medoids))  # a medoid stays in its own cluster
    clusters = tuple(np.flatnonzero(assign == c) for c in range(len(medoids)))
    return ClusteredIndex(mode=mode, medoids=tuple(medoids), clusters=clusters)


def pruned_search(index: ClusteredIndex, p: GaussianPdf, slack: float = 3.0) -> tuple[float, int]:
    """Approximate nearest-member query through a clustered index.

    Evaluates ``K(p || representative)`` for every cluster, then expands each
    cluster whose representative divergence is within ``slack`` times the
    best representative divergence.  The result is an upper bound of the
    exhaustive minimum and equals it whenever the true argmin's cluster is
    expanded.  ``slack = inf`` expands everything and reproduces the
    exhaustive scan.
    """
    if not slack >= 1.0:
        raise ValueError("slack must be >= 1")
    members = index.mode.members
    values: dict[int, float] = {
        int(m): kl_gaussian(p, members[m]) for m in index.medoids
    }
    best_rep = min(values.values())
    expand_all = np.isinf(slack)
    limit = np.inf if expand_all else slack * best_rep
    for c, medoid in enumerate(index.medoids):
        if values[int(medoid)] <= limit:
            for j in index.clusters[c]:
                j = int(j)
                if j not in values:
                    values[j] = kl_gaussian(p, members[j])
    idx, val = min(values.items(), key=lambda kv: (kv[1], kv[0]))
    return float(val), int(idx)
