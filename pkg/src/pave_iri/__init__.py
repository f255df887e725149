"""Estimate pavement roughness (IRI) classes from distress measurements."""

__version__ = "0.1.0"
