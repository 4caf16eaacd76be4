"""Eigenvalue clusters of the Robin Laplacian on the hemisphere.

Modules: numerics (quadrature, eigensolvers), harmonics (equator amplitudes
and Legendre functions), boundary (trigonometric boundary functions),
cluster (cluster operators and gap spectra), density (limit functionals),
galerkin (independent full solver), sl1d (one-dimensional companion),
acceptance (criterion suite) and cli.
"""
__version__ = "0.1.0"
