"""Figure renderer for the simulation harness's CSV exports."""

from .render import (AGGREGATE_COLUMNS, INTERVENTION_COLUMNS, FigureSpec,
                     SchemaError, annotation_for, render, write_layout)

__version__ = "0.1.0"
