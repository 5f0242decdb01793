"""ADE lattice height models, their loop gases, and curve measurements."""

__version__ = "0.1.0"
