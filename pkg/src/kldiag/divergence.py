"""Kullback-Leibler divergence between Gaussian pdfs and Gaussian mixtures.

For two multivariate normals p and q of dimension n the divergence has the
closed form

    K(p || q) = 1/2 [ tr(Sq^-1 Sp) + (mq - mp)^T Sq^-1 (mq - mp) - n
                      + log(det Sq / det Sp) ]

which is what :func:`kl_gaussian` evaluates, through the cached Cholesky
factors of both pdfs.  Against a Gaussian mixture no closed form exists and
:func:`kl_monte_carlo` estimates the defining expectation E_p[log p - log q]
by sampling from p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .gaussian import GaussianPdf


def kl_gaussian(p: GaussianPdf, q: GaussianPdf) -> float:
    """Exact KL divergence K(p || q) between two Gaussian pdfs.

    Non-negative, zero only for identical parameters, and asymmetric in
    general.  Tiny negative values produced by floating-point rounding are
    clamped to 0.
    """
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    w = q.chol_inv
    a = w @ p.chol
    d = w @ (q.mean - p.mean)
    kl = 0.5 * (
        float(np.sum(a * a)) + float(np.sum(d * d)) - p.dim + q.log_det - p.log_det
    )
    if not np.isfinite(kl):
        raise ValueError(
            "KL divergence is not finite; an input covariance was probably not regularized"
        )
    return kl if kl > 0.0 else 0.0


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Convex combination of Gaussian pdfs with weights on the unit simplex."""

    weights: np.ndarray
    components: tuple[GaussianPdf, ...]

    def __post_init__(self) -> None:
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        components = tuple(self.components)
        if len(components) < 1:
            raise ValueError("mixture needs at least one component")
        if weights.shape != (len(components),):
            raise ValueError("one weight per component required")
        if np.any(weights < 0.0):
            raise ValueError("mixture weights must be non-negative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1 within 1e-12")
        dim = components[0].dim
        if any(c.dim != dim for c in components):
            raise ValueError("mixture components must share one dimension")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def log_density(self, x: np.ndarray):
        """Log mixture density, evaluated in log space for stability."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        logs = np.stack([c.log_density(pts) for c in self.components], axis=1)
        out = logsumexp(logs, axis=1, b=self.weights)
        return float(out[0]) if single else out

    def density(self, x: np.ndarray):
        return np.exp(self.log_density(x))


def kl_monte_carlo(p: GaussianPdf, q: GaussianMixture, v: int = 1000, seed=None) -> float:
    """Monte-Carlo estimate of K(p || q) for a Gaussian mixture q.

    Draws ``v`` samples x_1..x_v from p and returns the sample mean of
    log p(x) - log q(x).  Deterministic for a fixed seed; the estimate may be
    slightly negative for nearly identical distributions and is not clamped.
    """
    if v < 1:
        raise ValueError("need at least one Monte-Carlo sample")
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    x = p.sample(v, seed)
    return float(np.mean(p.log_density(x) - q.log_density(x)))
