"""Two driven atoms in a cavity as a degenerate parametric amplifier."""

__version__ = "0.1.0"
