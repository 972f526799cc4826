"""Numerical laboratory for bilinear Rubio de Francia square functions on Z_N."""

__version__ = "0.1.0"
