"""Operating envelopes: coverage-constrained, variance-regularised box search."""

__version__ = "0.1.0"
