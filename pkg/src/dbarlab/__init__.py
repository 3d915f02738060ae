"""Desk-scale verification lab for boundary-data stability of magnetic
Schrodinger operators on planar domains."""

__version__ = "0.1.0"
