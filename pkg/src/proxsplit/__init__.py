"""Proximal splitting toolkit: operators, proximity catalog, solvers."""

from . import convex_sets, hilbert, model, oracles, prox_lib, solvers

__version__ = "0.1.0"

__all__ = ["convex_sets", "hilbert", "model", "oracles", "prox_lib", "solvers"]
