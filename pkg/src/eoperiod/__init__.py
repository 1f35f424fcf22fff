"""Periodicities of EO-theories and the C4 slice spectral sequence at height 2."""

__version__ = "0.1.0"
