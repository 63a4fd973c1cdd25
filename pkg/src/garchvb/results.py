"""Versioned result documents, sample tables and reproducibility digests."""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .params import InnovationKind, param_names
from .variational import FitResult, VariationalState

__all__ = [
    "SCHEMA_VERSION",
    "TIMING_KEYS",
    "fit_to_doc",
    "state_from_doc",
    "write_json",
    "read_json",
    "write_table",
    "read_samples_csv",
    "write_samples_csv",
    "numeric_digest",
]

SCHEMA_VERSION = 1

# wall-clock fields are recorded but excluded from reproducibility digests
TIMING_KEYS = frozenset({"wall_time", "wall_times", "mean_seconds", "seconds", "created"})


def fit_to_doc(result: FitResult, seed=None, **extra) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "type": "svb_fit",
        "model": result.kind.value,
        "method": result.method.value,
        "parameter_names": list(param_names(result.kind)),
        "seed": seed,
        "state": result.state.to_dict(),
        "elbo_trace": np.asarray(result.elbo_trace).tolist(),
        "final_elbo": result.final_elbo(),
        "iterations": int(result.iterations),
        "stopped_by": result.stopped_by.value,
        "optimizer": result.config.to_dict(),
        "wall_time": result.wall_time,
    }
    doc.update(extra)
    return doc


def state_from_doc(doc) -> VariationalState:
    """Variational state from a fit or sequential document."""
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    if "state" in doc:
        return VariationalState.from_dict(doc["state"])
    if "final_state" in doc:
        return VariationalState.from_dict(doc["final_state"])
    raise ValueError("document holds no variational state")


def model_from_doc(doc) -> InnovationKind:
    return InnovationKind.parse(doc["model"])


def write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n")


def read_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"document not found: {path}")
    return json.loads(path.read_text())


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    return str(v)


def write_table(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_samples_csv(path, names, samples):
    write_table(path, list(names), np.asarray(samples, dtype=float))


def read_samples_csv(path):
    """Return ``(names, samples)`` from a CSV with a header row of parameter names."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"samples file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = [[float(c) for c in row] for row in reader if row]
    return names, np.array(rows, dtype=float).reshape(-1, len(names))


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def numeric_digest(path) -> str:
    """SHA-256 of a file's content with wall-clock fields removed.

    JSON documents drop timing keys at any depth; CSV tables drop timing
    columns.  Other files are hashed verbatim.
    """
    path = Path(path)
    h = hashlib.sha256()
    if path.suffix == ".json":
        doc = _strip_timing(json.loads(path.read_text()))
        h.update(json.dumps(doc, sort_keys=True).encode())
    elif path.suffix == ".csv":
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        keep = [i for i, name in enumerate(rows[0] if rows else []) if name not in TIMING_KEYS]
        for row in rows:
            h.update((",".join(row[i] for i in keep if i < len(row)) + "\n").encode())
    else:
        h.update(path.read_bytes())
    return h.hexdigest()
