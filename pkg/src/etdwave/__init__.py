"""Event-triggered damping of the 1D wave equation: certificates,
closed-loop simulation and verification."""

__version__ = "0.1.0"
