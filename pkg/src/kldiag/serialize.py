"""Versioned JSON persistence for mode registries and tuned classifiers.

Floats are serialized through Python's shortest round-trip repr, so means,
covariances, thresholds and tuning values survive a save/load cycle bit for
bit.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DataError
from .gaussian import GaussianPdf
from .modes import FaultMode, ModeRegistry
from .thresholds import OneClassModel

REGISTRY_FORMAT = "kldiag-registry"
REGISTRY_VERSION = 1


def _member_to_dict(pdf: GaussianPdf) -> dict:
    doc = {"mean": pdf.mean.tolist(), "covariance": pdf.cov.tolist()}
    if pdf.theta is not None:
        doc["theta"] = float(pdf.theta)
    provenance = {}
    if pdf.label is not None:
        provenance["label"] = pdf.label
    if pdf.offset is not None:
        provenance["offset"] = int(pdf.offset)
    if provenance:
        doc["provenance"] = provenance
    return doc


def _member_from_dict(doc: dict) -> GaussianPdf:
    provenance = doc.get("provenance", {})
    return GaussianPdf(
        np.asarray(doc["mean"], dtype=float),
        np.asarray(doc["covariance"], dtype=float),
        label=provenance.get("label"),
        theta=doc.get("theta"),
        offset=provenance.get("offset"),
    )


def registry_to_dict(registry: ModeRegistry, models: dict[str, OneClassModel] | None = None) -> dict:
    doc = {
        "format": REGISTRY_FORMAT,
        "version": REGISTRY_VERSION,
        "nf_label": registry.nf_label,
        "dimension": registry.dim,
        "modes": [],
    }
    for label, mode in registry.modes.items():
        entry = {
            "label": label,
            "includes_nf": mode.includes_nf,
            "members": [_member_to_dict(m) for m in mode.members],
        }
        if models and label in models:
            model = models[label]
            entry["classifier"] = {
                "threshold": float(model.threshold),
                "alpha": float(model.alpha),
                "tuning_values": model.tuning_values.tolist(),
            }
        doc["modes"].append(entry)
    return doc


def registry_from_dict(doc: dict) -> tuple[ModeRegistry, dict[str, OneClassModel]]:
    try:
        if doc.get("format") != REGISTRY_FORMAT:
            raise DataError(f"not a {REGISTRY_FORMAT} document")
        if doc.get("version") != REGISTRY_VERSION:
            raise DataError(f"unsupported registry version {doc.get('version')!r}")
        modes: dict[str, FaultMode] = {}
        models: dict[str, OneClassModel] = {}
        for entry in doc["modes"]:
            label = entry["label"]
            members = tuple(_member_from_dict(m) for m in entry["members"])
            mode = FaultMode(label, members, includes_nf=bool(entry.get("includes_nf", False)))
            modes[label] = mode
            classifier = entry.get("classifier")
            if classifier is not None:
                models[label] = OneClassModel(
                    mode=mode,
                    threshold=float(classifier["threshold"]),
                    alpha=float(classifier["alpha"]),
                    tuning_values=np.asarray(classifier["tuning_values"], dtype=float),
                )
        registry = ModeRegistry(modes=modes, nf_label=doc["nf_label"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"malformed registry document: {exc}") from exc
    return registry, models


def save_registry(path, registry: ModeRegistry, models: dict[str, OneClassModel] | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(registry_to_dict(registry, models), fh, indent=2)
        fh.write("\n")


def load_registry(path) -> tuple[ModeRegistry, dict[str, OneClassModel]]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    return registry_from_dict(doc)
