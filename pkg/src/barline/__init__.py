"""Score-performance alignment and understanding toolkit for piano music."""

__version__ = "0.1.0"
