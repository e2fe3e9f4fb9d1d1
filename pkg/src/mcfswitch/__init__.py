"""Four-core multicore-fiber core-selective switch simulator."""

__version__ = "0.1.0"
