"""Green House / Red House environmental monitoring link simulator."""

__version__ = "0.1.0"
