"""Hopf-link calculus, cable geometry and coarsening homotopies for maps S^3 -> S^2."""
from . import errors, links, monodromy, cable_geometry, coarsening, bounds

__version__ = "0.1.0"
