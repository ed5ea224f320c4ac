"""Smallest singular values of shifted inhomogeneous random matrices.

Numerical companion: variance profiles, reproducible sampling, the
submatrix graph and its certificates, Monte-Carlo checks and spectral
distribution experiments.
"""

__version__ = "0.1.0"
