"""Exact counting-matrix machinery and KDE reductions for radial kernels."""
__version__ = "0.1.0"
