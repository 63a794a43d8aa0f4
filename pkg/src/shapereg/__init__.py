"""Local-averaging regression with shape-regularity diagnostics."""

__version__ = "0.1.0"
