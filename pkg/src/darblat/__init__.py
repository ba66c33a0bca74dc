"""Darboux standardization and dNLS-like normal forms for AL/Salerno lattices."""

from darblat.polyring import MIndex, Poly, RadialSeries, radial_expand

__all__ = ["MIndex", "Poly", "RadialSeries", "radial_expand"]

__version__ = "0.1.0"
