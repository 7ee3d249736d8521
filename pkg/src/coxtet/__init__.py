"""Generalized hyperbolic Coxeter tetrahedra and their immersed turnovers."""

__version__ = "0.1.0"
