"""Cold-start cutting plane separator configuration for MILP solvers."""

__version__ = "0.1.0"
