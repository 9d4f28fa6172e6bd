"""Finite-dimensional machinery for symplectic factorization problems
with additional symmetry: moment maps and Kempf-Ness flow for quiver
problems, exact stability tests for flag / Grassmann / toric / Kronecker-
pencil families, integral theta-class counts, and a desk-scale abelian
vortex solver.
"""

__version__ = "0.1.0"
