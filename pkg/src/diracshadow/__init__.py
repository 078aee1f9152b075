"""Free Dirac fields with square-root-of-delta initial data: propagators, pairings and limits."""

__version__ = "0.1.0"
