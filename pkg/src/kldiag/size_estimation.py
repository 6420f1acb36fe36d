"""Fault size estimation from the nearest labeled training pdfs."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .classifier import DiagnosisOutput, Verdict
from .gaussian import GaussianPdf
from .modes import FaultMode, ModeRegistry, ordered_subset

_ZERO_WEIGHT = 1e-12
_STOP_TOL = 1e-8
_MAX_ITER = 500


@dataclass(frozen=True, eq=False)
class SizeEstimate:
    """Result of a fault size estimation against one mode.

    ``weights`` are the mixture weights over the ``neighbors`` (nearest
    members), ``theta_hat`` the weighted fault size, ``objective_trace`` the
    per-iteration Monte-Carlo objective (non-increasing).
    """

    weights: np.ndarray
    theta_hat: float
    neighbors: tuple[tuple[GaussianPdf, float], ...]
    sample_count: int
    objective_trace: tuple[float, ...]

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float).copy()
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "neighbors", tuple(self.neighbors))
        object.__setattr__(self, "objective_trace", tuple(self.objective_trace))


def _derived_rng(seed, label: str) -> np.random.Generator:
    # Stable per-label stream: hash() is salted per process, crc32 is not.
    tag = zlib.crc32(label.encode("utf-8"))
    base = 0 if seed is None else seed
    return np.random.default_rng(np.random.SeedSequence([base, tag]))


def estimate_size(
    p: GaussianPdf,
    mode: FaultMode,
    l: int = 10,
    v: int = 1000,
    seed=None,
) -> SizeEstimate:
    """Estimate the fault size of ``p`` by mixture matching within ``mode``.

    The ``l`` members of ``mode`` nearest to ``p`` in divergence form a
    candidate mixture sum_k w_k q_k.  The Monte-Carlo divergence

        (1/v) sum_g [ log p(x_g) - log(sum_k w_k q_k(x_g)) ],  x_g ~ p,

    is minimized over the weight simplex with multiplicative (EM) updates
    from a uniform start; the samples are drawn once up front, so the run is
    deterministic for a fixed seed.  Iteration stops when the objective
    improves by less than 1e-8 or after 500 iterations.  The estimate is
    ``theta_hat = sum_k w_k theta_k``, a convex combination of the neighbor
    fault sizes (no extrapolation outside their range).  Weights below 1e-12
    are reported as exact zeros; ``theta_hat`` is computed before that
    rounding.

    Requires ``v >= 100`` samples and members that carry fault sizes.
    """
    if l < 1:
        raise ValueError("neighbor count l must be >= 1")
    if v < 100:
        raise ValueError(f"need at least 100 Monte-Carlo samples, got {v}")
    neighbors = ordered_subset(p, mode, l)
    if any(theta is None for _, theta in neighbors):
        raise ValueError(f"mode {mode.label!r} has members without a fault size")
    thetas = np.array([theta for _, theta in neighbors], dtype=float)

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = p.sample(v, rng)
    log_p = p.log_density(x)

    if len(neighbors) == 1:
        only = neighbors[0][0]
        objective = float(np.mean(log_p - only.log_density(x)))
        return SizeEstimate(
            weights=np.ones(1),
            theta_hat=float(thetas[0]),
            neighbors=tuple(neighbors),
            sample_count=v,
            objective_trace=(objective,),
        )

    log_q = np.column_stack([q.log_density(x) for q, _ in neighbors])

    def objective_of(log_w: np.ndarray) -> float:
        return float(np.mean(log_p - logsumexp(log_w + log_q, axis=1)))

    weights = np.full(len(neighbors), 1.0 / len(neighbors))
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    objective = objective_of(log_w)
    trace = [objective]
    for _ in range(_MAX_ITER):
        joint = log_w + log_q
        responsibilities = np.exp(joint - logsumexp(joint, axis=1)[:, None])
        weights = responsibilities.mean(axis=0)
        weights = weights / weights.sum()
        with np.errstate(divide="ignore"):
            log_w = np.log(weights)
        updated = objective_of(log_w)
        if updated > objective:
            # EM cannot increase the objective beyond floating-point rounding;
            # keep the previous iterate and stop.
            break
        trace.append(updated)
        improvement = objective - updated
        objective = updated
        if improvement < _STOP_TOL:
            break

    theta_hat = float(np.dot(weights, thetas))
    reported = weights.copy()
    reported[reported < _ZERO_WEIGHT] = 0.0
    return SizeEstimate(
        weights=reported,
        theta_hat=theta_hat,
        neighbors=tuple(neighbors),
        sample_count=v,
        objective_trace=tuple(trace),
    )


def baseline_mean_size(p: GaussianPdf, mode: FaultMode, l: int = 10) -> float:
    """Unweighted mean fault size of the ``l`` nearest members of ``mode``."""
    neighbors = ordered_subset(p, mode, l)
    if any(theta is None for _, theta in neighbors):
        raise ValueError(f"mode {mode.label!r} has members without a fault size")
    return float(np.mean([theta for _, theta in neighbors]))


def estimate_for_diagnosis(
    p: GaussianPdf,
    diagnosis: DiagnosisOutput,
    registry: ModeRegistry,
    l: int = 10,
    v: int = 1000,
    seed=None,
) -> dict[str, SizeEstimate]:
    """Size estimates for every hypothesis of a diagnosis.

    Returns an empty mapping for the ``no_fault`` and ``unknown`` verdicts.
    Each hypothesis label gets an independent random stream derived from
    ``seed`` and the label, so results do not depend on evaluation order.
    """
    if diagnosis.verdict is not Verdict.HYPOTHESES:
        return {}
    out: dict[str, SizeEstimate] = {}
    for label in diagnosis.hypotheses:
        if label not in registry.modes:
            raise ValueError(f"hypothesis {label!r} is not a registered mode")
        out[label] = estimate_size(p, registry.modes[label], l=l, v=v, seed=_derived_rng(seed, label))
    return out
