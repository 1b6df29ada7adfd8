"""Offline rendering of continual-learning experiment CSV/JSON outputs."""

from .io import METRICS_COLUMNS, SchemaError, read_metrics, read_summary, read_trajectory
from .render import render, render_forgetting_regret, render_rates, render_trajectory

__version__ = "0.1.0"
