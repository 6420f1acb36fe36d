"""Residual series and their partition into fixed-size batches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ResidualSeries:
    """A multivariate residual time series with optional per-sample labels.

    ``samples`` has shape (T, n).  ``labels`` and ``thetas``, when present,
    give the fault class and fault size of each sample.
    """

    samples: np.ndarray
    labels: np.ndarray | None = None
    thetas: np.ndarray | None = None

    def __post_init__(self) -> None:
        samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if samples.ndim != 2 or samples.shape[1] < 1:
            raise ValueError("samples must be a (T, n) array with n >= 1")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        for name in ("labels", "thetas"):
            value = getattr(self, name)
            if value is None:
                continue
            value = np.asarray(value)
            if value.shape != (samples.shape[0],):
                raise ValueError(f"{name} must have one entry per sample")
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class Batch:
    """A contiguous window of a residual series, all samples one fault class."""

    samples: np.ndarray
    offset: int
    label: str | None = None
    theta: float | None = None

    def __post_init__(self) -> None:
        samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        count, n = samples.shape
        if count < n + 2:
            raise ValueError(
                f"batch of {count} samples is too small for {n}-dimensional "
                f"residuals (need at least n + 2 = {n + 2})"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.samples.shape[0]


def _constant(values: np.ndarray, what: str, offset: int):
    first = values[0]
    if values.dtype.kind == "f":
        mixed = bool(np.any(values != first))
    else:
        mixed = any(v != first for v in values)
    if mixed:
        raise ValueError(
            f"mixed {what} inside the batch starting at sample {offset}; "
            "input looks mislabeled"
        )
    return first


def partition(series: ResidualSeries, batch_size: int) -> list[Batch]:
    """Split a series into consecutive non-overlapping batches of ``batch_size``.

    Produces ``floor(T / batch_size)`` batches; the trailing remainder is
    discarded.  Requires ``batch_size >= n + 2`` so each batch supports a
    covariance estimate.  When the series carries labels or fault sizes they
    must be constant within every batch.
    """
    n = series.n
    if batch_size < n + 2:
        raise ValueError(
            f"batch_size {batch_size} too small for {n}-dimensional residuals "
            f"(need at least n + 2 = {n + 2})"
        )
    total = len(series)
    if total < batch_size:
        raise ValueError(f"series of {total} samples is shorter than one batch ({batch_size})")
    batches = []
    for start in range(0, (total // batch_size) * batch_size, batch_size):
        stop = start + batch_size
        label = theta = None
        if series.labels is not None:
            label = str(_constant(series.labels[start:stop], "labels", start))
        if series.thetas is not None:
            theta = float(_constant(series.thetas[start:stop], "fault sizes", start))
        batches.append(Batch(series.samples[start:stop], offset=start, label=label, theta=theta))
    return batches
