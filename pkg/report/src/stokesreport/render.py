"""Batch rendering: all records are validated first (schema errors abort
before any output is written), then figures and one index page are emitted."""

from __future__ import annotations

import html
from dataclasses import dataclass, field
from pathlib import Path

from .figures import FIGURE_BUILDERS
from .reader import SchemaError, discover_records, load_record

ALL_FIGURES = tuple(name for name, _, _ in FIGURE_BUILDERS)


@dataclass
class ReportSpec:
    input_dir: str
    output_dir: str
    figures: tuple = ALL_FIGURES

    def __post_init__(self):
        unknown = set(self.figures) - set(ALL_FIGURES)
        if unknown:
            raise ValueError(f"unknown figures requested: {sorted(unknown)}")


def render(spec: ReportSpec) -> Path:
    """Render every record; returns the path of the index page."""
    paths = discover_records(spec.input_dir)
    # validate everything up front: schema mismatch must not leave partial output
    records = [load_record(p) for p in paths]

    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    sections = []
    for record in records:
        figure_links = []
        for name, builder, applicable in FIGURE_BUILDERS:
            if name not in spec.figures or not applicable(record):
                continue
            target = out / f"{record.name}__{name}.png"
            made = builder(record, target)
            if made is not None:
                figure_links.append(target.name)
        rows = "\n".join(
            f"<tr><td>{html.escape(key)}</td><td>{html.escape(raw)}</td></tr>"
            for key, raw in record.summary_raw.items())
        links = "\n".join(
            f'<p><a href="{name}"><img src="{name}" width="420"></a></p>'
            for name in figure_links)
        sections.append(
            f"<h2>{html.escape(record.name)}</h2>\n"
            f"<table>{rows}</table>\n{links}")

    body = "\n".join(sections) if sections else "<p>no records</p>"
    index = out / "index.html"
    index.write_text(
        "<!DOCTYPE html>\n<html><head><title>stokeswave report</title>\n"
        "<style>body{font-family:sans-serif;margin:2em}"
        "table{border-collapse:collapse}td{border:1px solid #999;"
        "padding:2px 8px;font-family:monospace}</style></head>\n"
        f"<body><h1>experiment report</h1>\n{body}\n</body></html>\n")
    return index
