"""Deterministic report writers: JSON and CSV with a resolved-config header.

Formatting rules: shortest round-trip float representation, '.' decimal,
LF line endings, fixed column order, config keys sorted.  Identical configs
produce byte-identical files.
"""

from __future__ import annotations

import json
import sys
from typing import Iterable, Mapping, Sequence


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_json(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n"


def render_csv(config: Mapping, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [f"# {key}={_fmt(config[key])}" for key in sorted(config)]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    """Write to a file, or stdout when path is '-' (LF endings either way)."""
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)
