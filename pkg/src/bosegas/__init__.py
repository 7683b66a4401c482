"""bosegas: condensation thermodynamics, thermal loop fields, and the loop gas."""

__version__ = "0.1.0"
