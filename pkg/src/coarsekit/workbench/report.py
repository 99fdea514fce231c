"""Versioned JSON reports.

Numbers that come out of an algorithm are wrapped as
``{"value": ..., "mode": ...}`` so a heuristic bound can never be read as an
exact value.  ``generated_at`` is the only non-deterministic field; it honours
``SOURCE_DATE_EPOCH`` when set.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from datetime import datetime, timezone

import numpy as np

__all__ = ["SCHEMA_VERSION", "MODES", "VERDICTS", "tagged", "build_report", "dumps", "strip_timestamp", "file_digest"]

SCHEMA_VERSION = "1.0"
MODES = ("exact", "flow", "heuristic", "numeric")
VERDICTS = ("certified", "refuted", "evidence-only")


def tagged(value, mode: str) -> dict:
    """Attach the producing mode to a number."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    return {"value": _plain(value), "mode": mode}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_plain(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        # JSON has no infinities; keep them as strings
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.isoformat(timespec="seconds")


def file_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def build_report(command: str, parameters: dict, results: list, verdict: str, provenance: dict) -> dict:
    if verdict not in VERDICTS:
        raise ValueError(f"unknown verdict {verdict!r}")
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": _plain(parameters),
        "results": _plain(results),
        "verdict": verdict,
        "provenance": _plain(provenance),
        "generated_at": _timestamp(),
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def strip_timestamp(text: str) -> dict:
    """Parsed report without ``generated_at``, for determinism checks."""
    doc = json.loads(text)
    doc.pop("generated_at", None)
    return doc
