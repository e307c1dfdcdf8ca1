"""Readers for the experiment record formats.

A record directory contains config.json, series.csv (header row, float
columns), summary.txt (`key = value` lines) and optionally spectra.csv and
interface.csv.  The reader validates columns by name and never repairs or
recomputes anything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """A record file does not match the documented schema."""


REQUIRED_SERIES = ("t", "l2", "linf", "tail")
REQUIRED_SUMMARY = ("status", "t_final")


@dataclass
class Record:
    path: Path
    config: dict
    columns: list
    series: dict
    summary: dict
    summary_raw: dict
    spectra: tuple | None = None
    interface: dict | None = None

    @property
    def name(self) -> str:
        return self.path.name

    def column(self, name: str) -> np.ndarray:
        if name not in self.series:
            raise SchemaError(f"{self.path}: series column {name!r} missing")
        return self.series[name]


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _read_csv(path: Path):
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise SchemaError(f"{path}:{i}: expected {len(header)} fields, "
                              f"got {len(parts)}")
        rows.append([float(p) for p in parts])
    data = np.array(rows) if rows else np.zeros((0, len(header)))
    return header, {name: data[:, j] for j, name in enumerate(header)}


def load_record(path) -> Record:
    path = Path(path)
    series_path = path / "series.csv"
    summary_path = path / "summary.txt"
    config_path = path / "config.json"
    for p in (series_path, summary_path, config_path):
        if not p.exists():
            raise SchemaError(f"{path}: missing {p.name}")
    config = json.loads(config_path.read_text())

    columns, series = _read_csv(series_path)
    for name in REQUIRED_SERIES:
        if name not in columns:
            raise SchemaError(f"{series_path}: required column {name!r} missing")

    summary = {}
    summary_raw = {}
    for i, line in enumerate(summary_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if " = " not in line:
            raise SchemaError(f"{summary_path}:{i}: expected 'key = value'")
        key, value = line.split(" = ", 1)
        summary[key.strip()] = _parse_value(value.strip())
        summary_raw[key.strip()] = value.strip()
    for name in REQUIRED_SUMMARY:
        if name not in summary:
            raise SchemaError(f"{summary_path}: required key {name!r} missing")

    spectra = None
    if (path / "spectra.csv").exists():
        header, data = _read_csv(path / "spectra.csv")
        if header[0] != "t" or not all(h.startswith("a") for h in header[1:]):
            raise SchemaError(f"{path / 'spectra.csv'}: expected columns t,a0,a1,...")
        amps = np.column_stack([data[h] for h in header[1:]]) if data["t"].size \
            else np.zeros((0, len(header) - 1))
        spectra = (data["t"], amps)

    interface = None
    if (path / "interface.csv").exists():
        header, data = _read_csv(path / "interface.csv")
        for name in ("alpha", "h_initial", "h_final"):
            if name not in header:
                raise SchemaError(f"{path / 'interface.csv'}: column {name!r} missing")
        interface = data

    return Record(path=path, config=config, columns=columns, series=series,
                  summary=summary, summary_raw=summary_raw, spectra=spectra,
                  interface=interface)


def discover_records(input_dir) -> list:
    """Record directories under input_dir, sorted by name for determinism."""
    root = Path(input_dir)
    if not root.exists():
        raise SchemaError(f"input directory {root} does not exist")
    found = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and (child / "series.csv").exists():
            found.append(child)
    return found
