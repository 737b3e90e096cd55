"""Hecke operators on the 2-sphere from the Hurwitz quaternion order."""

__version__ = "0.1.0"
