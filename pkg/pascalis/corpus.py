"""
pascalis - Example maps

Built-in examples (`builtin("nagata")`, `builtin("identity(4)")`, ...) with
their known facts, and seeded random generators for property suites.
Golden maps are read from data/golden/*.map.
"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .coeff import FieldSpec, QQ
from .config import get_config
from .errors import UnknownExample
from .mapfile import load_map_file
from .poly import Ambient, Poly
from .polymap import PolyMap, compose, conjugate, extend, linear_map

logger = logging.getLogger(__name__)

NOT_WITHIN_BOUND = "not_within_bound"

_NONZERO_COEFFS = np.array([-3, -2, -1, 1, 2, 3])
_CALL = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*(?:\((.*)\))?\s*$")


# =========================================================================
# Named examples
# =========================================================================

@dataclass
class ExpectedFacts:
    """Known facts about an example; `provenance` maps each fact to literature/derived/trivial."""

    pascal_index: Any = None            # int, NOT_WITHIN_BOUND or None (unknown)
    inverse: Optional[PolyMap] = None
    nilpotency_index: Optional[int] = None
    strongly_nilpotent: Optional[bool] = None
    strong_index: Optional[int] = None
    tame: Optional[bool] = None
    triangular: Optional[str] = None
    keller_constant: Optional[int] = None
    provenance: Dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for key in ("pascal_index", "nilpotency_index", "strongly_nilpotent", "strong_index",
                    "tame", "triangular", "keller_constant"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        out["inverse_known"] = self.inverse is not None
        out["provenance"] = dict(sorted(self.provenance.items()))
        return out


@dataclass
class NamedExample:
    name: str
    map: PolyMap
    expected: ExpectedFacts


BUILTIN_NAMES = (
    "identity(n)",
    "nagata",
    "vasyunin",
    "fibonacci_affine(a, b)",
    "gh_composition",
    "simple_triangular",
    "nagata_extended_4",
)


@lru_cache(maxsize=None)
def _golden(name: str) -> PolyMap:
    path = get_config().golden_dir() / f"{name}.map"
    logger.debug("[Corpus] loading %s", path)
    return load_map_file(path).map


def golden_map(name: str) -> PolyMap:
    return _golden(name)


def _ints(args: Sequence[str], name: str) -> List[int]:
    try:
        return [int(a) for a in args]
    except ValueError:
        raise UnknownExample(f"{name}({', '.join(args)})") from None


def identity_example(n: int) -> NamedExample:
    amb = Ambient(n)
    ident = PolyMap.identity(amb)
    facts = ExpectedFacts(
        pascal_index=1, inverse=ident, nilpotency_index=1, strongly_nilpotent=True, strong_index=1,
        tame=True, triangular="upper", keller_constant=1,
        provenance={k: "trivial" for k in ("pascal_index", "inverse", "nilpotency_index",
                                           "strongly_nilpotent", "tame", "triangular",
                                           "keller_constant")},
    )
    return NamedExample(f"identity({n})", ident, facts)


def fibonacci_affine(a: Any = 0, b: Any = 0) -> PolyMap:
    """(2 x1 + x2 + a, x1 + x2 + b)."""
    amb = Ambient(2)
    x1, x2 = amb.variables()
    return PolyMap([x1.scale(2) + x2 + Poly.constant(amb, a), x1 + x2 + Poly.constant(amb, b)])


def gh_composition() -> PolyMap:
    """G o H with G = (x1 + x2^3, x2), H = (x1, x2 + x1^2)."""
    amb = Ambient(2)
    x1, x2 = amb.variables()
    g = PolyMap([x1 + x2 ** 3, x2])
    h = PolyMap([x1, x2 + x1 ** 2])
    return compose(g, h)


def simple_triangular() -> PolyMap:
    amb = Ambient(2)
    x1, x2 = amb.variables()
    return PolyMap([x1 + x2 ** 2, x2])


def builtin(name: str) -> NamedExample:
    """Resolve a built-in example by name, e.g. "nagata" or "fibonacci_affine(1, 2)"."""
    match = _CALL.match(name)
    if not match:
        raise UnknownExample(name)
    key, arg_text = match.group(1), match.group(2)
    args = [a.strip() for a in arg_text.split(",")] if arg_text and arg_text.strip() else []

    if key == "identity":
        values = _ints(args, key) if args else [2]
        if len(values) != 1 or values[0] < 1:
            raise UnknownExample(name)
        return identity_example(values[0])

    if args and key != "fibonacci_affine":
        raise UnknownExample(name)

    if key == "nagata":
        return NamedExample("nagata", golden_map("nagata"), ExpectedFacts(
            pascal_index=3, strongly_nilpotent=False, tame=False, triangular="none",
            keller_constant=1,
            provenance={"pascal_index": "literature", "strongly_nilpotent": "literature", "tame": "literature",
                        "triangular": "derived", "keller_constant": "literature"},
        ))
    if key == "vasyunin":
        return NamedExample("vasyunin", golden_map("vasyunin"), ExpectedFacts(
            pascal_index=NOT_WITHIN_BOUND, inverse=golden_map("vasyunin_inverse"),
            nilpotency_index=5, strongly_nilpotent=False, tame=True, triangular="none",
            keller_constant=1,
            provenance={"pascal_index": "literature", "inverse": "literature", "nilpotency_index": "literature",
                        "strongly_nilpotent": "literature", "tame": "literature", "triangular": "derived",
                        "keller_constant": "derived"},
        ))
    if key == "fibonacci_affine":
        try:
            values = [Fraction(a) for a in args] if args else [Fraction(0), Fraction(0)]
        except ValueError:
            raise UnknownExample(name) from None
        if len(values) != 2:
            raise UnknownExample(name)
        a, b = values
        label = f"fibonacci_affine({a}, {b})"
        return NamedExample(label, fibonacci_affine(a, b), ExpectedFacts(
            pascal_index=NOT_WITHIN_BOUND, tame=True, keller_constant=1,
            provenance={"pascal_index": "literature", "tame": "trivial", "keller_constant": "derived"},
        ))
    if key == "gh_composition":
        return NamedExample("gh_composition", gh_composition(), ExpectedFacts(
            pascal_index=NOT_WITHIN_BOUND, tame=True, triangular="none", keller_constant=1,
            provenance={"pascal_index": "literature", "tame": "trivial", "triangular": "derived",
                        "keller_constant": "derived"},
        ))
    if key == "simple_triangular":
        f = simple_triangular()
        x1, x2 = f.ambient.variables()
        return NamedExample("simple_triangular", f, ExpectedFacts(
            pascal_index=2, inverse=PolyMap([x1 - x2 ** 2, x2]), nilpotency_index=2,
            strongly_nilpotent=True, strong_index=2, tame=True, triangular="upper",
            keller_constant=1,
            provenance={k: "trivial" for k in ("pascal_index", "inverse", "nilpotency_index",
                                               "strongly_nilpotent", "tame", "triangular",
                                               "keller_constant")},
        ))
    if key == "nagata_extended_4":
        return NamedExample("nagata_extended_4", extend(golden_map("nagata")), ExpectedFacts(
            pascal_index=3, strongly_nilpotent=False, tame=True, keller_constant=1,
            provenance={"pascal_index": "derived", "strongly_nilpotent": "derived",
                        "tame": "literature", "keller_constant": "derived"},
        ))
    raise UnknownExample(name)


def list_builtins() -> List[NamedExample]:
    """One instance of every built-in (identity(3), fibonacci_affine(1, 2))."""
    names = ["identity(3)", "nagata", "vasyunin", "fibonacci_affine(1, 2)", "gh_composition",
             "simple_triangular", "nagata_extended_4"]
    return [builtin(n) for n in names]


# =========================================================================
# Random generators
# =========================================================================

def _random_poly(amb: Ambient, variables: Sequence[int], rng: np.random.Generator,
                 min_deg: int, max_deg: int, num_terms: int,
                 exact_degree: Optional[int] = None) -> Poly:
    terms: Dict[Tuple[int, ...], int] = {}
    for _ in range(num_terms):
        deg = exact_degree if exact_degree is not None else int(rng.integers(min_deg, max_deg + 1))
        split = rng.multinomial(deg, [1.0 / len(variables)] * len(variables))
        exps = [0] * amb.n
        for var, e in zip(variables, split):
            exps[var] = int(e)
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + int(rng.choice(_NONZERO_COEFFS))
    return Poly.from_dict(amb, terms)


def random_triangular(n: int, max_deg: int, seed: int, *, field: FieldSpec = QQ,
                      homogeneous_degree: Optional[int] = None) -> PolyMap:
    """x_i + H_i(x_{i+1}, ..., x_n), H_n = 0, ord H_i >= 2."""
    if n < 1 or max_deg < 2:
        raise ValueError("random_triangular needs n >= 1 and max_deg >= 2")
    rng = np.random.default_rng(seed)
    amb = Ambient(n, field)
    comps = []
    for i in range(n):
        x_i = amb.var(i)
        if i == n - 1:
            comps.append(x_i)
            continue
        h = _random_poly(amb, list(range(i + 1, n)), rng, 2, max_deg,
                         int(rng.integers(1, 3)), homogeneous_degree)
        comps.append(x_i + h)
    return PolyMap(comps)


def _unimodular(n: int, rng: np.random.Generator, ops: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer matrix T with det +-1 and its inverse, from elementary row operations."""
    t = np.identity(n, dtype=object)
    t_inv = np.identity(n, dtype=object)
    if n < 2:
        return t, t_inv
    for _ in range(ops):
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        c = int(rng.choice(_NONZERO_COEFFS))
        t[i, :] = t[i, :] + c * t[j, :]
        t_inv[:, j] = t_inv[:, j] - c * t_inv[:, i]
    return t, t_inv


def _as_rows(matrix: np.ndarray) -> List[List[int]]:
    return [[int(v) for v in row] for row in matrix]


@dataclass
class TameSample:
    map: PolyMap
    inverse: PolyMap
    factors: List[str]


def random_tame(n: int, num_factors: int, max_deg: int, seed: int) -> TameSample:
    """Composition of random elementary and affine factors, inverse tracked alongside.

    An affine factor is T X + b with T unimodular and b in [-3, 3]^n.
    """
    if n < 2:
        raise ValueError("random_tame needs n >= 2")
    rng = np.random.default_rng(seed)
    amb = Ambient(n)
    f = PolyMap.identity(amb)
    g = PolyMap.identity(amb)
    labels = []
    for _ in range(num_factors):
        if rng.random() < 0.6:
            i = int(rng.integers(n))
            others = [j for j in range(n) if j != i]
            a = _random_poly(amb, others, rng, 1, max_deg, int(rng.integers(1, 3)))
            comps = list(amb.variables())
            inv_comps = list(amb.variables())
            comps[i] = comps[i] + a
            inv_comps[i] = inv_comps[i] - a
            factor, factor_inv = PolyMap(comps), PolyMap(inv_comps)
            labels.append(f"elementary(x{i + 1})")
        else:
            t, t_inv = _unimodular(n, rng, n)
            shift = PolyMap([Poly.constant(amb, int(b)) for b in rng.integers(-3, 4, size=n)])
            factor = linear_map(_as_rows(t), amb) + shift
            factor_inv = compose(linear_map(_as_rows(t_inv), amb), PolyMap.identity(amb) - shift)
            labels.append("affine")
        f = compose(factor, f)
        g = compose(g, factor_inv)
    return TameSample(f, g, labels)


@dataclass
class LinearConjugate:
    map: PolyMap                 # T^{-1} o F o T
    t: List[List[int]]
    t_inv: List[List[int]]


def random_linear_conjugate(f: PolyMap, seed: int, ops: Optional[int] = None) -> LinearConjugate:
    rng = np.random.default_rng(seed)
    t, t_inv = _unimodular(f.n, rng, ops if ops is not None else f.n)
    t_rows, t_inv_rows = _as_rows(t), _as_rows(t_inv)
    amb = f.ambient
    conj = conjugate(f, linear_map(t_rows, amb), linear_map(t_inv_rows, amb))
    return LinearConjugate(conj, t_rows, t_inv_rows)


@dataclass
class AffineSample:
    map: PolyMap                 # X + A X
    a: List[List[int]]


def random_affine(n: int, seed: int, nilpotent: bool) -> AffineSample:
    """X + A X with A either nilpotent (conjugated strictly upper) or generic."""
    rng = np.random.default_rng(seed)
    if nilpotent:
        upper = np.triu(rng.integers(-3, 4, size=(n, n)), k=1).astype(object)
        u, u_inv = _unimodular(n, rng, n)
        a = u.dot(upper).dot(u_inv)
    else:
        a = rng.integers(-3, 4, size=(n, n)).astype(object)
    a_rows = _as_rows(a)
    amb = Ambient(n)
    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    combined = [[ident[i][j] + a_rows[i][j] for j in range(n)] for i in range(n)]
    return AffineSample(linear_map(combined, amb), a_rows)
