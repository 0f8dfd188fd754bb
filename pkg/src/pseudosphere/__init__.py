"""Kuran gap, touching sets and spherical flatness indices of bounded domains."""

__version__ = "0.1.0"
