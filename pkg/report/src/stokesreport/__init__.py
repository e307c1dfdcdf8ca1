"""Static report generation for stokeswave experiment records."""

from .reader import Record, SchemaError, discover_records, load_record
from .render import ALL_FIGURES, ReportSpec, render

__version__ = "0.1.0"
