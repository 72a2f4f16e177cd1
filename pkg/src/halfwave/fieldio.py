"""Text artifacts: field files, CSV tables, summary blocks, flat configs.

Field files are '#'-prefixed key = value header lines followed by three
columns (x, re, im) printed with %.17g, which round-trips float64
exactly.  Configs and summaries share the same flat key = value syntax,
so a summary block can be fed back in as a config.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import Field, make_grid

__all__ = [
    "write_field",
    "read_field",
    "write_csv",
    "write_summary",
    "format_value",
    "parse_config",
]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def coerce_value(text: str):
    """Best-effort typing of a config token: int, then float, then str."""
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def write_field(path, field: Field, header: dict | None = None) -> None:
    lines = [f"# n = {field.grid.n}", f"# length = {format_value(field.grid.length)}"]
    for key, value in (header or {}).items():
        lines.append(f"# {key} = {format_value(value)}")
    values = field.values.astype(complex)
    for x, v in zip(field.grid.x, values):
        lines.append("%.17g %.17g %.17g" % (x, v.real, v.imag))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> tuple[Field, dict]:
    header: dict = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, raw = line[1:].partition("=")
            header[key.strip()] = coerce_value(raw.strip())
            continue
        rows.append([float(tok) for tok in line.split()])
    if "n" not in header or "length" not in header:
        raise ValueError(f"{path}: field file must declare n and length")
    grid = make_grid(int(header["n"]), float(header["length"]))
    data = np.asarray(rows)
    if data.shape != (grid.n, 3):
        raise ValueError(
            f"{path}: expected {grid.n} rows of (x, re, im), got shape {data.shape}"
        )
    return Field(grid, data[:, 1] + 1j * data[:, 2]), header


def write_csv(path, names: list[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_summary(path, mapping: dict) -> None:
    lines = [f"{key} = {format_value(value)}" for key, value in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_config(path) -> dict:
    """Flat key = value file; '#' starts a comment; later keys win."""
    out: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        out[key.strip()] = coerce_value(raw.strip())
    return out
