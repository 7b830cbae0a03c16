"""Exact algebraic KK-theory at desk scale.

Finitely presented algebroids, tensor and J algebroids with their classifying
maps, simplicial polynomial rings, the ♯-product on representatives, groupoid
convolution algebras and the Green–Julg and index pipelines.  Every identity
the constructions rest on is exposed as an executable check.
"""

from .core import Algebroid, Elem, Failure, Homomorphism, check_algebroid, ring_algebroid
from .rings import QQ, ZZ, Zmod, parse_poly

__version__ = "0.1.0"

__all__ = [
    "Algebroid", "Elem", "Failure", "Homomorphism", "check_algebroid", "ring_algebroid",
    "QQ", "ZZ", "Zmod", "parse_poly", "__version__",
]
