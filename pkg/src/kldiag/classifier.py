"""Open-set classification of residual batch pdfs.

Every batch is scored against every tuned one-class model and the verdict is
assembled from three cases:

1. the fault-free hypothesis is accepted (D_nf <= J_nf): verdict ``no_fault``;
2. otherwise every fault class j with D_j < J_j is a hypothesis: verdict
   ``hypotheses`` with the surviving labels;
3. no class survives: verdict ``unknown`` (a fault outside the training set).

Boundary conventions: equality keeps the fault-free verdict in case 1 but
counts as rejection for the fault classes in case 2.  All scores are always
computed and reported, whatever the verdict.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .gaussian import GaussianPdf
from .thresholds import OneClassModel


class Verdict(str, enum.Enum):
    NO_FAULT = "no_fault"
    HYPOTHESES = "hypotheses"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DiagnosisOutput:
    """Outcome of classifying one batch pdf against all known classes."""

    verdict: Verdict
    hypotheses: tuple[str, ...]
    scores: Mapping[str, tuple[float, float]]  # label -> (distinguishability, threshold)
    offset: int | None = None
    source_label: str | None = None
    source_theta: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "hypotheses": list(self.hypotheses),
            "scores": {
                label: {"distinguishability": d, "threshold": j}
                for label, (d, j) in self.scores.items()
            },
            "offset": self.offset,
            "source_label": self.source_label,
            "source_theta": self.source_theta,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))


def _indexed(models: Sequence[OneClassModel] | Mapping[str, OneClassModel]) -> dict[str, OneClassModel]:
    if isinstance(models, Mapping):
        items = list(models.values())
    else:
        items = list(models)
    indexed: dict[str, OneClassModel] = {}
    for model in items:
        if model.label in indexed:
            raise ValueError(f"duplicate model for class {model.label!r}")
        indexed[model.label] = model
    return indexed


def classify(
    p: GaussianPdf,
    models: Sequence[OneClassModel] | Mapping[str, OneClassModel],
    nf_label: str = "NF",
) -> DiagnosisOutput:
    """Apply the open-set decision rule to one batch pdf.

    ``models`` must contain a model for the fault-free class ``nf_label``.
    Classes are scored independently; the hypothesis set keeps the model
    order, and an empty set yields the ``unknown`` verdict.
    """
    indexed = _indexed(models)
    if nf_label not in indexed:
        raise ValueError(f"no model for the fault-free class {nf_label!r}")
    scores = {label: (model.evaluate(p)[0], model.threshold) for label, model in indexed.items()}
    d_nf, j_nf = scores[nf_label]
    if d_nf <= j_nf:
        verdict, hypotheses = Verdict.NO_FAULT, ()
    else:
        hypotheses = tuple(
            label for label, (d, j) in scores.items() if label != nf_label and d < j
        )
        verdict = Verdict.HYPOTHESES if hypotheses else Verdict.UNKNOWN
    return DiagnosisOutput(
        verdict=verdict,
        hypotheses=hypotheses,
        scores=scores,
        offset=p.offset,
        source_label=p.label,
        source_theta=p.theta,
    )


def classify_stream(
    pdfs: Iterable[GaussianPdf],
    models: Sequence[OneClassModel] | Mapping[str, OneClassModel],
    nf_label: str = "NF",
) -> list[DiagnosisOutput]:
    """Classify a sequence of batch pdfs in order; empty input, empty output."""
    indexed = _indexed(models)
    return [classify(p, indexed, nf_label) for p in pdfs]
