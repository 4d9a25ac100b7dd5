"""zetalab: numerical laboratory for Mobius-sum growth conditions, weighted
sequence-space norms, the Beurling integral identity, and truncated
power-series operator diagnostics."""

from .ntcore import SieveTables, build_sieve

__all__ = ["SieveTables", "build_sieve"]
__version__ = "0.1.0"
