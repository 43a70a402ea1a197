"""Numerical toolkit for lightlike manifolds, their Cartan connections and
ambient Lorentzian metrics."""

__version__ = "0.1.0"
