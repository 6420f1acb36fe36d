"""Gaussian modeling of residual batches.

A batch of multivariate residual samples is summarized by a multivariate
normal pdf with the sample mean and the unbiased sample covariance.  The
covariance is regularized toward positive definiteness so that every pdf
admits a Cholesky factorization; all downstream solves go through that
factor, the covariance inverse is never formed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

_LOG_2PI = float(np.log(2.0 * np.pi))


def regularize_covariance(cov: np.ndarray) -> np.ndarray:
    """Symmetrize ``cov`` and lift a (numerically) singular spectrum.

    When the smallest eigenvalue falls below ``1e-10 * trace/n`` (or below an
    absolute floor of ``1e-12``, which covers the all-zero covariance of a
    constant batch), ``delta = max(1e-9 * trace/n, 1e-12)`` is added to the
    diagonal.  Well-conditioned inputs pass through unchanged.
    """
    cov = np.asarray(cov, dtype=float)
    cov = 0.5 * (cov + cov.T)
    n = cov.shape[0]
    scale = float(np.trace(cov)) / n
    eigmin = float(np.linalg.eigvalsh(cov)[0])
    if eigmin < max(1e-10 * scale, 1e-12):
        delta = max(1e-9 * scale, 1e-12)
        cov = cov + delta * np.eye(n)
    return cov


@dataclass(frozen=True, eq=False)
class GaussianPdf:
    """Multivariate normal fitted to one batch of residuals.

    Parameters
    ----------
    mean : ndarray, shape (n,)
        Sample mean of the batch.
    cov : ndarray, shape (n, n)
        Symmetric positive definite covariance.
    label : str, optional
        Fault class the source batch belongs to.
    theta : float, optional
        Fault size of the source batch.
    offset : int, optional
        Index of the first sample of the source batch in its series.

    Instances are immutable.  The Cholesky factor, its (triangular) inverse
    and the log-determinant are computed once on first use and cached, so
    repeated density and divergence evaluations stay cheap and are safe to
    share across threads.
    """

    mean: np.ndarray
    cov: np.ndarray
    label: str | None = None
    theta: float | None = None
    offset: int | None = None

    def __post_init__(self) -> None:
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float)).copy()
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float)).copy()
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance shape {cov.shape} does not match mean of size {mean.size}"
            )
        if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @cached_property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor L with cov = L @ L.T."""
        try:
            return np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError(
                "covariance is not positive definite; estimate it through "
                "estimate_gaussian (which regularizes) or regularize_covariance"
            ) from exc

    @cached_property
    def chol_inv(self) -> np.ndarray:
        # L^{-1} from a triangular solve against the identity; with it both
        # Sigma^{-1} x and tr(Sigma^{-1} A) reduce to plain matmuls.
        return solve_triangular(self.chol, np.eye(self.dim), lower=True, check_finite=False)

    @cached_property
    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def log_density(self, x: np.ndarray):
        """Log pdf at ``x`` (vector) or at each row of ``x`` (matrix)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, pdf has {self.dim}")
        y = (pts - self.mean) @ self.chol_inv.T
        out = -0.5 * (self.dim * _LOG_2PI + self.log_det + np.einsum("ij,ij->i", y, y))
        return float(out[0]) if single else out

    def density(self, x: np.ndarray):
        """Pdf value at ``x``; strictly positive, maximal at the mean."""
        return np.exp(self.log_density(x))

    def mahalanobis_sq(self, x: np.ndarray) -> np.ndarray:
        """Squared Mahalanobis distance of each row of ``x`` to the mean."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, pdf has {self.dim}")
        y = (pts - self.mean) @ self.chol_inv.T
        return np.einsum("ij,ij->i", y, y)

    def sample(self, count: int, seed=None) -> np.ndarray:
        """Draw ``count`` iid samples; deterministic for a fixed seed.

        ``seed`` may be anything ``numpy.random.default_rng`` accepts, or an
        existing Generator.
        """
        if count < 1:
            raise ValueError("sample count must be >= 1")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        z = rng.standard_normal((count, self.dim))
        return z @ self.chol.T + self.mean


def _fit(samples: np.ndarray, label=None, theta=None, offset=None) -> GaussianPdf:
    count = samples.shape[0]
    mu = samples.mean(axis=0)
    centered = samples - mu
    cov = (centered.T @ centered) / (count - 1)
    return GaussianPdf(mu, regularize_covariance(cov), label=label, theta=theta, offset=offset)


def estimate_gaussian(batch) -> GaussianPdf:
    """Fit a Gaussian pdf to a batch: sample mean, unbiased (N-1) covariance.

    The covariance is regularized (see :func:`regularize_covariance`) so the
    result always factorizes.  Batch provenance (label, fault size, offset)
    is carried onto the pdf.
    """
    return _fit(batch.samples, label=batch.label, theta=batch.theta, offset=batch.offset)


def estimate_gaussian_trimmed(batch, trim_fraction: float = 0.1) -> GaussianPdf:
    """Outlier-robust Gaussian fit.

    Fits the full batch first, ranks samples by Mahalanobis distance under
    that fit, drops the ``ceil(trim_fraction * N)`` most distant samples and
    refits on the survivors.  ``trim_fraction = 0`` reproduces
    :func:`estimate_gaussian` exactly.
    """
    if not 0.0 <= trim_fraction < 0.5:
        raise ValueError(f"trim_fraction must be in [0, 0.5), got {trim_fraction}")
    if trim_fraction == 0.0:
        return estimate_gaussian(batch)
    samples = batch.samples
    count, n = samples.shape
    drop = int(np.ceil(trim_fraction * count))
    if count - drop < n + 2:
        raise ValueError(
            f"trimming {drop} of {count} samples leaves fewer than n + 2 = {n + 2} survivors"
        )
    full = _fit(samples)
    dist = full.mahalanobis_sq(samples)
    order = np.argsort(dist, kind="stable")  # ties resolved by sample index
    keep = np.sort(order[: count - drop])
    return _fit(samples[keep], label=batch.label, theta=batch.theta, offset=batch.offset)
