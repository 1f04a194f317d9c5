"""Readers for the simulation CLI's file formats.

CSV files open with a `# schema_version=N` marker line followed by a header
row; JSON envelopes carry a top-level schema_version field.  Files from an
unknown schema are refused up front.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(ValueError):
    """Input file missing or carrying an unsupported schema version."""


class IoError(OSError):
    """Input file unreadable or structurally broken."""


def _check_version(version, path, known):
    if version not in known:
        raise SchemaError(
            f"{path}: schema_version {version!r} not supported (known: {known})"
        )


def read_table(path, known_versions=("1",)) -> list[dict]:
    """Parse one CSV output file into a list of per-row dicts of strings."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise IoError(f"cannot read {path}: {err}") from err
    if not lines or not lines[0].startswith("# schema_version="):
        raise SchemaError(f"{path}: missing schema_version marker line")
    _check_version(lines[0].split("=", 1)[1].strip(), path, known_versions)
    reader = csv.DictReader(lines[1:])
    rows = list(reader)
    if reader.fieldnames is None:
        raise SchemaError(f"{path}: missing header row")
    return rows


def read_envelope(path, known_versions=("1",)) -> dict:
    """Parse one JSON envelope and verify its schema version."""
    path = Path(path)
    try:
        body = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise IoError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path}: not valid JSON: {err}") from err
    _check_version(str(body.get("schema_version")), path, known_versions)
    return body
