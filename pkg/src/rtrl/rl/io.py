"""Metrics CSV and parameter checkpoints.

Both formats are deterministic: floats are written with repr (shortest
round-trip), keys are sorted, and nothing time- or host-dependent goes in,
so rerunning the same seed yields byte-identical files.
"""

from __future__ import annotations

import base64
import csv
import json
from dataclasses import dataclass

import numpy as np

from ..pipeline.topology import PipelineTopology, topology_from_text, topology_to_text

__all__ = ["METRIC_COLUMNS", "MetricsWriter", "Checkpoint", "save_checkpoint", "load_checkpoint"]

METRIC_COLUMNS = ("step", "episodic_return", "actor_loss", "critic_loss", "entropy_coef")

SCHEMA_VERSION = 1


class MetricsWriter:
    """Appends rows with the fixed metric columns; blanks for absent values."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(METRIC_COLUMNS)

    def log(self, step, episodic_return=None, actor_loss=None, critic_loss=None, entropy_coef=None):
        row = [int(step)]
        for v in (episodic_return, actor_loss, critic_loss, entropy_coef):
            row.append("" if v is None else repr(float(v)))
        self._writer.writerow(row)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def _encode_array(arr: np.ndarray) -> dict:
    a = np.asarray(arr, dtype=np.float64)
    return {
        "shape": list(a.shape),
        "data_b64": base64.b64encode(a.astype("<f8").tobytes()).decode("ascii"),
    }


def _decode_array(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data_b64"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(entry["shape"])


@dataclass(frozen=True)
class Checkpoint:
    topology: PipelineTopology | None
    config: dict
    params: dict
    extra: dict


def save_checkpoint(path, params: dict, *, topology: PipelineTopology | None = None, config: dict | None = None, extra: dict | None = None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "topology": topology_to_text(topology) if topology is not None else None,
        "config": config or {},
        "extra": extra or {},
        "params": {name: _encode_array(arr) for name, arr in sorted(params.items())},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))


def load_checkpoint(path) -> Checkpoint:
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"checkpoint schema {version!r} not supported (expected {SCHEMA_VERSION})")
    topology = topology_from_text(doc["topology"]) if doc.get("topology") else None
    params = {name: _decode_array(entry) for name, entry in doc["params"].items()}
    return Checkpoint(topology=topology, config=doc.get("config", {}), params=params, extra=doc.get("extra", {}))
