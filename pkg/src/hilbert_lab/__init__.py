"""Numerical laboratory for planar Hilbert geometries.

Modules: ``geometry`` (convex domains), ``metric`` (distance, Finsler norm,
Busemann density), ``cantor`` (Cantor-Lebesgue functions and domains),
``entropy`` (sphere lengths, ball volumes, series), ``tree`` (Cantor trees
and ordered embeddings) and ``cli``.
"""

__version__ = "0.1.0"
