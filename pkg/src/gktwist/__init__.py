"""Twistor construction of generalized Kähler structures over affine surfaces."""

__version__ = "0.1.0"
