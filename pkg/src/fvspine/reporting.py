"""Artifact writers: atomic, deterministic, and hashable.

Every run writes JSON and CSV next to each other.  CSV bytes depend only on
the payload, so a rerun with the same seed produces identical files; the
JSON carries wall-clock fields for the humans, which the determinism hash
strips before digesting.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile

import numpy as np

SCHEMA_VERSION = 1

# keys that legitimately differ between identical reruns
VOLATILE_KEYS = ("wall_clock_s", "timestamp", "hostname")


def _atomic_write_bytes(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _plain(obj):
    """Recursively coerce numpy and dataclass values to JSON-native ones."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_json(path: str, payload: dict) -> dict:
    """Atomically write payload as JSON with the schema version stamped in.

    Returns the stamped, JSON-native dict actually written.
    """
    doc = dict(_plain(payload))
    doc["schema_version"] = SCHEMA_VERSION
    data = json.dumps(doc, sort_keys=True, indent=2,
                      allow_nan=True) + "\n"
    _atomic_write_bytes(path, data.encode())
    return doc


def format_cell(v) -> str:
    """One CSV cell; floats use shortest round-trip form."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: str, header, rows) -> None:
    """Atomically write rows under a header; bytes depend only on values."""
    header = list(header)
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise ValueError(
                f"row width {len(row)} does not match header {len(header)}")
        lines.append(",".join(format_cell(v) for v in row))
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def determinism_hash(payload: dict) -> str:
    """SHA-256 over the canonical JSON form with volatile keys removed."""
    def strip(obj):
        if isinstance(obj, dict):
            return {k: strip(v) for k, v in obj.items()
                    if k not in VOLATILE_KEYS}
        if isinstance(obj, list):
            return [strip(v) for v in obj]
        return obj

    doc = strip(_plain(payload))
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      allow_nan=True)
    return hashlib.sha256(blob.encode()).hexdigest()
