"""Conformal credal set predictors for distribution-labeled classification."""

__version__ = "0.1.0"
