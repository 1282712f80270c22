"""CSV artifacts with ``#`` metadata lines and a schema-version check.

Every file starts with ``# schema-version: N`` followed by ``# key: value``
lines (kind, seed, config echo), then a header row and data rows. Readers
refuse files whose schema version differs from :data:`SCHEMA_VERSION`.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from osmaxwell.errors import SchemaError

SCHEMA_VERSION = 1


def fmt_float(x) -> str:
    """Fixed, platform-independent text for a float (17 significant digits)."""
    return format(float(x), ".17g")


def fmt_complex(z) -> str:
    z = complex(z)
    return f"{fmt_float(z.real)}{'+' if z.imag >= 0 else '-'}{fmt_float(abs(z.imag))}j"


def fmt_params(params) -> str:
    return ";".join(fmt_complex(p) for p in params)


def parse_params(text) -> tuple:
    return tuple(complex(p) for p in text.split(";")) if text else ()


def render_csv(kind, columns, rows, meta=()) -> str:
    """Text of one artifact; ``meta`` is a sequence of ``(key, value)`` pairs."""
    buf = io.StringIO()
    buf.write(f"# schema-version: {SCHEMA_VERSION}\n")
    buf.write(f"# kind: {kind}\n")
    for key, value in meta:
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, kind, columns, rows, meta=()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(kind, columns, rows, meta))
    return path


def read_csv(path, kind=None):
    """``(meta, rows)`` where rows are dicts keyed by the header row."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("#") and not body:
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    version = meta.get("schema-version")
    if version != str(SCHEMA_VERSION):
        raise SchemaError(f"{path}: schema-version {version!r}, expected {SCHEMA_VERSION}")
    if kind is not None and meta.get("kind") != kind:
        raise SchemaError(f"{path}: kind {meta.get('kind')!r}, expected {kind!r}")
    return meta, list(csv.DictReader(body))
