"""Last passage percolation with shocks: simulation and limit-law checks."""

__version__ = "0.1.0"
