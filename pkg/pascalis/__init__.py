"""
pascalis - exact analysis of polynomial maps through their Pascal sequences
"""

from .coeff import QQ, Coefficient, FieldSpec
from .errors import AlgebraError, InputError, PascalisError, ResourceLimit
from .mapfile import parse_map, read_map, serialize_map
from .nilpotency import nilpotency_index, strong_nilpotency
from .pascal import invert, pascal_check, pascal_tableau
from .poly import Ambient, Poly
from .polymap import PolyMap, compose, jacobian, normalize

__version__ = "1.0.0"

__all__ = [
    "QQ",
    "AlgebraError",
    "Ambient",
    "Coefficient",
    "FieldSpec",
    "InputError",
    "PascalisError",
    "Poly",
    "PolyMap",
    "ResourceLimit",
    "compose",
    "invert",
    "jacobian",
    "nilpotency_index",
    "normalize",
    "parse_map",
    "pascal_check",
    "pascal_tableau",
    "read_map",
    "serialize_map",
    "strong_nilpotency",
]
