"""Pool-based active learning with hybrid confidence/diversity batch selection."""

__version__ = "0.1.0"
