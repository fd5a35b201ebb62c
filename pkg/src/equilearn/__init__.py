"""Learning ground-state properties of equivariant spin chains from a single ground state."""

__version__ = "0.1.0"
