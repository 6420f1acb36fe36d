"""One-class rejection thresholds from within-class divergence statistics.

The within-class distinguishability values of a mode are smoothed with a
Gaussian kernel density estimate, reflected at zero because divergences are
non-negative, and the rejection threshold J is the point where the smoothed
cdf reaches 1 - alpha.  A pdf p is then rejected by the mode's one-class
classifier when its distinguishability exceeds J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gaussian import GaussianPdf
from .modes import FaultMode, distinguishability, within_class

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class KdeDistribution:
    """Gaussian KDE over non-negative values, reflected at zero."""

    points: np.ndarray
    bandwidth: float

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).ravel().copy()
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        if not self.bandwidth > 0.0:
            raise ValueError("bandwidth must be positive")

    def density(self, x):
        """Pdf of the reflected KDE; zero on the negative axis."""
        x = np.asarray(x, dtype=float)
        z1 = (x[..., None] - self.points) / self.bandwidth
        z2 = (x[..., None] + self.points) / self.bandwidth
        kernel = np.exp(-0.5 * z1 * z1) + np.exp(-0.5 * z2 * z2)
        out = kernel.mean(axis=-1) / (self.bandwidth * _SQRT_2PI)
        return np.where(x < 0.0, 0.0, out)

    def cdf(self, x):
        """Distribution function; 0 at (and below) zero, monotone to 1."""
        x = np.asarray(x, dtype=float)
        z1 = (x[..., None] - self.points) / self.bandwidth
        z2 = (x[..., None] + self.points) / self.bandwidth
        out = (ndtr(z1) + ndtr(z2) - 1.0).mean(axis=-1)
        return np.where(x <= 0.0, 0.0, np.clip(out, 0.0, 1.0))


def fit_kde(values) -> KdeDistribution:
    """Fit the reflected Gaussian KDE to at least five non-negative values.

    Bandwidth follows the Silverman rule of thumb,
    ``h = 0.9 * min(sd, IQR / 1.34) * m**(-1/5)``, taking the minimum over
    the strictly positive spread measures only.  When both vanish (all
    values equal to some c) the fallback is ``h = max(1e-6, 0.01 * c)``.
    """
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size < 5:
        raise ValueError(f"need at least 5 values to fit a KDE, got {vals.size}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("KDE input values must be finite")
    if np.any(vals < 0.0):
        raise ValueError("KDE input values must be non-negative")
    sd = float(vals.std(ddof=1))
    q25, q75 = np.quantile(vals, [0.25, 0.75])
    spreads = [s for s in (sd, (q75 - q25) / 1.34) if s > 0.0]
    if spreads:
        h = 0.9 * min(spreads) * vals.size ** (-0.2)
    else:
        h = max(1e-6, 0.01 * float(vals[0]))
    return KdeDistribution(points=vals, bandwidth=float(h))


def select_threshold(kde: KdeDistribution, alpha: float) -> float:
    """Solve cdf(J) = 1 - alpha by bisection; ``alpha`` in (0, 0.5].

    The returned J is strictly positive and satisfies
    ``|cdf(J) - (1 - alpha)| <= 1e-6``.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must be in (0, 0.5], got {alpha}")
    target = 1.0 - alpha
    lo = 0.0
    hi = max(float(kde.points.max()) + 6.0 * kde.bandwidth, kde.bandwidth)
    while float(kde.cdf(hi)) < target:
        hi *= 2.0
    mid = 0.5 * hi
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        value = float(kde.cdf(mid))
        if abs(value - target) <= 5e-7:
            break
        if value < target:
            lo = mid
        else:
            hi = mid
    return float(mid)


@dataclass(frozen=True, eq=False)
class OneClassModel:
    """A tuned one-class classifier for a single fault mode."""

    mode: FaultMode
    threshold: float
    alpha: float
    tuning_values: np.ndarray

    def __post_init__(self) -> None:
        if not self.threshold > 0.0:
            raise ValueError("threshold must be positive")
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError(f"alpha must be in (0, 0.5], got {self.alpha}")
        vals = np.asarray(self.tuning_values, dtype=float).ravel().copy()
        vals.setflags(write=False)
        object.__setattr__(self, "tuning_values", vals)

    @property
    def label(self) -> str:
        return self.mode.label

    def evaluate(self, p: GaussianPdf) -> tuple[float, int]:
        """Distinguishability of ``p`` from the mode, with the argmin member."""
        return distinguishability(p, self.mode)

    def rejects(self, p: GaussianPdf) -> bool:
        """True when the mode's fault hypothesis is rejected for ``p``."""
        return self.evaluate(p)[0] > self.threshold


def tune(mode: FaultMode, alpha: float = 0.05) -> OneClassModel:
    """Tune a mode's rejection threshold from its within-class statistics.

    Computes the leave-one-out within-class distinguishability of every
    member, fits the reflected KDE and selects J with cdf(J) = 1 - alpha.
    Requires at least 6 members.
    """
    if len(mode) < 6:
        raise ValueError(f"mode {mode.label!r} has {len(mode)} members; tuning needs >= 6")
    values = within_class(mode)
    kde = fit_kde(values)
    threshold = select_threshold(kde, alpha)
    return OneClassModel(mode=mode, threshold=threshold, alpha=alpha, tuning_values=values)
