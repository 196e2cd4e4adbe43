"""Deterministic file emission: CSV, JSON, run manifests.

Identical configurations must produce byte-identical data payloads, so all
floats are serialized with 17 significant digits, JSON keys are sorted, and
files are written atomically (temp file then rename).  Manifests carry a
timestamp that is excluded from the config hash.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from typing import Iterable, Sequence

from . import __version__
from . import specfun

MANIFEST_SCHEMA_VERSION = "1"
REPORT_SCHEMA_VERSION = "1"


def fmt_float(value: float) -> str:
    """17-significant-digit decimal form; nan/inf spelled out."""
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated, LF-terminated, header always present."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt_float(cell) for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path: str, obj) -> None:
    atomic_write_text(path, canonical_json(obj))


def config_hash(parameters: dict) -> str:
    blob = json.dumps(parameters, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def build_manifest(command: str, parameters: dict) -> dict:
    """Run manifest: full parameter set, derived constants, config hash.

    The timestamp is informational only and never participates in the hash
    or in determinism comparisons.
    """
    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "tool": "wavefront",
        "tool_version": __version__,
        "command": command,
        "parameters": parameters,
        "numerics": {
            "gauss_legendre_order": specfun.GAUSS_LEGENDRE_ORDER,
            "bessel_series_cutoff": specfun.SERIES_CUTOFF,
            "bessel_order_limit": specfun.ORDER_LIMIT,
        },
        "config_hash": config_hash(parameters),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
    }


def write_manifest(path: str, command: str, parameters: dict) -> dict:
    manifest = build_manifest(command, parameters)
    write_json(path, manifest)
    return manifest
