"""Exact computation of flagged Jacobian factors of unibranch plane curve
singularities and their geometric superpolynomials."""

__version__ = "0.1.0"
