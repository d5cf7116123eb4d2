"""Pseudo-spectral Navier-Stokes on the periodic box with negative-Sobolev regularity monitors."""

__version__ = "0.1.0"
