"""
pascalis - Polynomial maps K^n -> K^n

PolyMap holds n components over one Ambient. This module also carries the
map-level algebra the rest of the engine builds on:

- composition, iteration, conjugation by linear maps
- Jacobian matrices and exact determinants (cofactor / Bareiss)
- the Keller test
- normalisation to F = X + H with F(0) = 0 and J_F(0) = I
- triangularity and elementary/affine predicates
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator, List, Optional, Sequence, Tuple

from .coeff import Coefficient, FieldSpec, Raw
from .errors import (
    AmbientMismatch,
    ArityMismatch,
    NotInverse,
    NotSquare,
    SingularLinearPart,
    SingularMatrix,
)
from .poly import (
    NEG_INF,
    POS_INF,
    Ambient,
    Degree,
    Poly,
    SubstitutionCache,
    TruncLike,
    as_bound,
    format_poly,
)

logger = logging.getLogger(__name__)

ConstantMatrix = List[List[Raw]]


# =========================================================================
# PolyMap
# =========================================================================

class PolyMap:
    """Ordered n-tuple of polynomials over one Ambient K[x1..xn]."""

    __slots__ = ("ambient", "components")

    def __init__(self, components: Sequence[Poly]):
        comps = tuple(components)
        if not comps:
            raise ArityMismatch("a map needs at least one component")
        ambient = comps[0].ambient
        for c in comps:
            if c.ambient != ambient:
                raise AmbientMismatch("map components live in different ambients")
        if len(comps) != ambient.n:
            raise ArityMismatch(f"{len(comps)} components over {ambient.n} variables")
        self.ambient = ambient
        self.components: Tuple[Poly, ...] = comps

    @classmethod
    def identity(cls, ambient: Ambient) -> "PolyMap":
        return cls(ambient.variables())

    @classmethod
    def zero(cls, ambient: Ambient) -> "PolyMap":
        return cls([ambient.zero() for _ in range(ambient.n)])

    @property
    def n(self) -> int:
        return self.ambient.n

    @property
    def field(self) -> FieldSpec:
        return self.ambient.field

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Poly]:
        return iter(self.components)

    def __getitem__(self, i: int) -> Poly:
        return self.components[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.ambient == other.ambient and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __repr__(self) -> str:
        inner = "; ".join(format_poly(c) for c in self.components)
        return f"PolyMap({self.ambient}: {inner})"

    # ------------------------------------------------------------------
    # Componentwise helpers
    # ------------------------------------------------------------------

    def degree(self) -> Degree:
        return max(c.degree() for c in self.components)

    def degrees(self) -> Tuple[Degree, ...]:
        return tuple(c.degree() for c in self.components)

    def orders(self) -> Tuple[Degree, ...]:
        return tuple(c.order() for c in self.components)

    def term_counts(self) -> Tuple[int, ...]:
        return tuple(c.term_count for c in self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def is_identity(self) -> bool:
        return self == PolyMap.identity(self.ambient)

    def add(self, other: "PolyMap", trunc: TruncLike = None) -> "PolyMap":
        return PolyMap([a.add(b, trunc) for a, b in zip(self.components, other.components)])

    def sub(self, other: "PolyMap", trunc: TruncLike = None) -> "PolyMap":
        return PolyMap([a.sub(b, trunc) for a, b in zip(self.components, other.components)])

    def scale(self, value: Any) -> "PolyMap":
        return PolyMap([c.scale(value) for c in self.components])

    def truncate(self, trunc: TruncLike) -> "PolyMap":
        return PolyMap([c.truncate(trunc) for c in self.components])

    def homogeneous_component(self, d: int) -> "PolyMap":
        return PolyMap([c.homogeneous_component(d) for c in self.components])

    def constant_part(self) -> List[Raw]:
        return [c.constant_term() for c in self.components]

    def linear_matrix(self) -> ConstantMatrix:
        """J_F(0): entry (i, j) is the coefficient of x_j in F_i."""
        units = self.ambient.unit_keys
        return [[c._terms.get(units[j], 0) for j in range(self.n)] for c in self.components]

    def with_field(self, field: FieldSpec) -> "PolyMap":
        return PolyMap([c.with_field(field) for c in self.components])

    def renamed(self, names: Sequence[str]) -> "PolyMap":
        return PolyMap([c.renamed(names) for c in self.components])

    def __add__(self, other: "PolyMap") -> "PolyMap":
        return self.add(other)

    def __sub__(self, other: "PolyMap") -> "PolyMap":
        return self.sub(other)


# =========================================================================
# Composition
# =========================================================================

def compose(f: PolyMap, g: PolyMap, trunc: TruncLike = None,
            ceiling: Optional[int] = None) -> PolyMap:
    """(f o g)_i = f_i(g_1, ..., g_n)."""
    if f.n != g.n:
        raise ArityMismatch(f"cannot compose maps of arity {f.n} and {g.n}")
    if f.ambient != g.ambient:
        raise AmbientMismatch(f"{f.ambient} vs {g.ambient}")
    cache = SubstitutionCache(f.ambient, g.components, trunc, ceiling)
    return PolyMap([cache.apply(c) for c in f.components])


def iterate(f: PolyMap, k: int, trunc: TruncLike = None) -> PolyMap:
    """F^k (F^0 = identity)."""
    if k < 0:
        raise ValueError("iteration count must be >= 0")
    result = PolyMap.identity(f.ambient).truncate(trunc)
    for _ in range(k):
        result = compose(f, result, trunc)
    return result


def increment(f: PolyMap, k: int, trunc: TruncLike = None) -> PolyMap:
    """F^(k+1) - F^k: one application of the difference operator to the orbit."""
    current = iterate(f, k, trunc)
    return compose(f, current, trunc).sub(current, trunc)


def extend(f: PolyMap, extra: int = 1) -> PolyMap:
    """(F, x_{n+1}, ..., x_{n+extra}) over K^(n+extra)."""
    if extra < 0:
        raise ValueError("extra must be >= 0")
    names = list(f.ambient.names)
    taken = set(names)
    idx = f.n
    while len(names) < f.n + extra:
        idx += 1
        candidate = f"x{idx}"
        while candidate in taken:
            candidate = "_" + candidate
        names.append(candidate)
        taken.add(candidate)
    big = Ambient(f.n + extra, f.field, tuple(names))
    embedding = big.variables()[: f.n]
    cache = SubstitutionCache(f.ambient, embedding)
    comps = [cache.apply(c) for c in f.components] + big.variables()[f.n:]
    return PolyMap(comps)


# =========================================================================
# Matrices
# =========================================================================

class PolyMatrix:
    """Matrix with polynomial entries over one Ambient."""

    __slots__ = ("ambient", "rows")

    def __init__(self, ambient: Ambient, rows: Sequence[Sequence[Poly]]):
        self.ambient = ambient
        self.rows: Tuple[Tuple[Poly, ...], ...] = tuple(tuple(r) for r in rows)
        for row in self.rows:
            for entry in row:
                if entry.ambient != ambient:
                    raise AmbientMismatch("matrix entries live in different ambients")

    @classmethod
    def identity(cls, ambient: Ambient, size: int) -> "PolyMatrix":
        return cls(ambient, [[ambient.one() if i == j else ambient.zero() for j in range(size)]
                             for i in range(size)])

    @classmethod
    def from_constants(cls, ambient: Ambient, values: Sequence[Sequence[Any]]) -> "PolyMatrix":
        return cls(ambient, [[Poly.constant(ambient, v) for v in row] for row in values])

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def is_square(self) -> bool:
        r, c = self.shape
        return r == c

    def __getitem__(self, idx: Tuple[int, int]) -> Poly:
        i, j = idx
        return self.rows[i][j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.ambient == other.ambient and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.rows for e in row)

    def first_nonzero(self) -> Optional[Tuple[int, int, Poly]]:
        for i, row in enumerate(self.rows):
            for j, e in enumerate(row):
                if not e.is_zero():
                    return i, j, e
        return None

    def matmul(self, other: "PolyMatrix", trunc: TruncLike = None) -> "PolyMatrix":
        r, inner = self.shape
        inner2, c = other.shape
        if inner != inner2:
            raise ArityMismatch(f"cannot multiply {r}x{inner} by {inner2}x{c}")
        if self.ambient != other.ambient:
            raise AmbientMismatch(f"{self.ambient} vs {other.ambient}")
        zero = self.ambient.zero()
        rows = []
        for i in range(r):
            row = []
            for j in range(c):
                acc = zero
                for t in range(inner):
                    a = self.rows[i][t]
                    b = other.rows[t][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc.add(a.mul(b, trunc))
                row.append(acc)
            rows.append(row)
        return PolyMatrix(self.ambient, rows)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self.matmul(other)

    def power(self, k: int) -> "PolyMatrix":
        if not self.is_square():
            raise NotSquare(f"matrix of shape {self.shape}")
        result = PolyMatrix.identity(self.ambient, self.shape[0])
        for _ in range(k):
            result = result.matmul(self)
        return result

    def substitute(self, images: Sequence[Poly]) -> "PolyMatrix":
        """Apply x_j -> images[j] to every entry."""
        target = images[0].ambient
        cache = SubstitutionCache(self.ambient, images)
        return PolyMatrix(target, [[cache.apply(e) for e in row] for row in self.rows])

    def format_rows(self) -> List[List[str]]:
        return [[format_poly(e) for e in row] for row in self.rows]


def jacobian(f: PolyMap) -> PolyMatrix:
    """J_F with entry (i, j) = dF_i / dx_j."""
    return PolyMatrix(f.ambient, [[c.derivative(j) for j in range(f.n)] for c in f.components])


def determinant(m: PolyMatrix) -> Poly:
    """Exact determinant: cofactor expansion up to 4x4, Bareiss beyond."""
    if not m.is_square():
        raise NotSquare(f"determinant of a {m.shape[0]}x{m.shape[1]} matrix")
    size = m.shape[0]
    if size == 0:
        return m.ambient.one()
    if size <= 4:
        return _cofactor(m.ambient, [list(r) for r in m.rows])
    return _bareiss(m.ambient, [list(r) for r in m.rows])


def _cofactor(ambient: Ambient, rows: List[List[Poly]]) -> Poly:
    size = len(rows)
    if size == 1:
        return rows[0][0]
    if size == 2:
        return rows[0][0].mul(rows[1][1]).sub(rows[0][1].mul(rows[1][0]))
    total = ambient.zero()
    for j, entry in enumerate(rows[0]):
        if entry.is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = entry.mul(_cofactor(ambient, minor))
        total = total.sub(term) if j % 2 else total.add(term)
    return total


def _bareiss(ambient: Ambient, rows: List[List[Poly]]) -> Poly:
    size = len(rows)
    sign = 1
    prev = ambient.one()
    for k in range(size - 1):
        if rows[k][k].is_zero():
            swap = next((i for i in range(k + 1, size) if not rows[i][k].is_zero()), None)
            if swap is None:
                return ambient.zero()
            rows[k], rows[swap] = rows[swap], rows[k]
            sign = -sign
        pivot = rows[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = pivot.mul(rows[i][j]).sub(rows[i][k].mul(rows[k][j]))
                rows[i][j] = num.exact_divide(prev)
            rows[i][k] = ambient.zero()
        prev = pivot
    det = rows[-1][-1]
    return det if sign > 0 else det.neg()


# =========================================================================
# Constant (field) matrices
# =========================================================================

def invert_constant_matrix(matrix: Sequence[Sequence[Any]], field: FieldSpec) -> ConstantMatrix:
    """Exact Gauss-Jordan inverse over the field; SingularMatrix if none exists."""
    size = len(matrix)
    if any(len(row) != size for row in matrix):
        raise NotSquare("constant matrix is not square")
    work = [[field.reduce(v) for v in row] + [1 if i == j else 0 for j in range(size)]
            for i, row in enumerate(matrix)]
    for col in range(size):
        pivot_row = next((r for r in range(col, size) if work[r][col]), None)
        if pivot_row is None:
            raise SingularMatrix(f"matrix is singular (column {col + 1})")
        work[col], work[pivot_row] = work[pivot_row], work[col]
        inv = field.inv(work[col][col])
        work[col] = [field.mul(v, inv) for v in work[col]]
        for r in range(size):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [field.sub(a, field.mul(factor, b)) for a, b in zip(work[r], work[col])]
    return [row[size:] for row in work]


def linear_map(matrix: Sequence[Sequence[Any]], ambient: Ambient) -> PolyMap:
    """X -> T X for a constant n x n matrix T."""
    if len(matrix) != ambient.n or any(len(row) != ambient.n for row in matrix):
        raise ArityMismatch(f"linear map needs a {ambient.n}x{ambient.n} matrix")
    variables = ambient.variables()
    comps = []
    for row in matrix:
        acc = ambient.zero()
        for coeff, var in zip(row, variables):
            acc = acc.add(var.scale(coeff))
        comps.append(acc)
    return PolyMap(comps)


def matrix_map(matrix: Sequence[Sequence[Raw]], images: PolyMap) -> PolyMap:
    """Componentwise T * images for a constant matrix T."""
    comps = []
    for row in matrix:
        acc = images.ambient.zero()
        for coeff, comp in zip(row, images.components):
            if coeff:
                acc = acc.add(comp.scale(coeff))
        comps.append(acc)
    return PolyMap(comps)


# =========================================================================
# Keller test and normal form
# =========================================================================

@dataclass(frozen=True)
class KellerStatus:
    is_keller: bool
    constant: Optional[Coefficient]   # det J_F when it is a nonzero constant
    determinant: Poly


def is_keller(f: PolyMap) -> KellerStatus:
    det = determinant(jacobian(f))
    if det.is_constant() and not det.is_zero():
        return KellerStatus(True, Coefficient(f.field, det.constant_term()), det)
    return KellerStatus(False, None, det)


@dataclass(frozen=True)
class NormalForm:
    """F = X + H with F(0) = 0, J_F(0) = I and ord H_i >= 2."""

    map: PolyMap
    h: PolyMap
    orders: Tuple[Degree, ...]    # d_i (POS_INF when H_i = 0)
    degrees: Tuple[Degree, ...]   # D_i (NEG_INF when H_i = 0)
    d: Optional[int]              # min finite d_i, None when H = 0
    D: Optional[int]              # max finite D_i, None when H = 0
    linear_part: Tuple[Tuple[Raw, ...], ...] = ()
    translation: Tuple[Raw, ...] = ()

    @property
    def ambient(self) -> Ambient:
        return self.map.ambient

    @property
    def n(self) -> int:
        return self.map.n

    @property
    def field(self) -> FieldSpec:
        return self.map.field

    @property
    def is_identity(self) -> bool:
        return self.h.is_zero()

    def nonzero_components(self) -> List[int]:
        return [i for i, c in enumerate(self.h.components) if not c.is_zero()]


def normal_form_of(g: PolyMap, linear_part: Sequence[Sequence[Raw]] = (),
                   translation: Sequence[Raw] = ()) -> NormalForm:
    """Wrap a map already satisfying G(0) = 0, J_G(0) = I."""
    h = g.sub(PolyMap.identity(g.ambient))
    orders = h.orders()
    degrees = h.degrees()
    finite_orders = [o for o in orders if o != POS_INF]
    finite_degrees = [d for d in degrees if d != NEG_INF]
    return NormalForm(
        map=g,
        h=h,
        orders=orders,
        degrees=degrees,
        d=int(min(finite_orders)) if finite_orders else None,
        D=int(max(finite_degrees)) if finite_degrees else None,
        linear_part=tuple(tuple(r) for r in linear_part),
        translation=tuple(translation),
    )


def normalize(f: PolyMap) -> NormalForm:
    """G = A^{-1} (F - F(0)) with A = J_F(0)."""
    field = f.field
    translation = f.constant_part()
    a = f.linear_matrix()
    try:
        a_inv = invert_constant_matrix(a, field)
    except SingularMatrix as exc:
        raise SingularLinearPart(f"linear part J_F(0) is singular: {exc}") from exc
    shifted = PolyMap([c.sub(Poly.constant(f.ambient, t)) for c, t in zip(f.components, translation)])
    g = matrix_map(a_inv, shifted)
    nf = normal_form_of(g, a, translation)
    logger.info("[Normalize] d=%s D=%s orders=%s", nf.d, nf.D, list(nf.orders))
    return nf


def denormalize_inverse(nf: NormalForm, g_inv: PolyMap) -> PolyMap:
    """Inverse of the original F = A G + c from the inverse of G: G^{-1}(A^{-1}(Y - c))."""
    amb = nf.ambient
    if not nf.linear_part:
        return g_inv
    a_inv = invert_constant_matrix(nf.linear_part, nf.field)
    translation = nf.translation or (0,) * nf.n
    shift = PolyMap([y.sub(Poly.constant(amb, c)) for y, c in zip(amb.variables(), translation)])
    return compose(g_inv, matrix_map(a_inv, shift))


# =========================================================================
# Structural predicates
# =========================================================================

class Triangularity(str, Enum):
    UPPER = "upper"   # F_i in K[x_i, ..., x_n]
    LOWER = "lower"   # F_i in K[x_1, ..., x_i]
    NONE = "none"


def is_triangular(f: PolyMap) -> Triangularity:
    used = [c.variables_used() for c in f.components]
    if all(all(j >= i for j in vs) for i, vs in enumerate(used)):
        return Triangularity.UPPER
    if all(all(j <= i for j in vs) for i, vs in enumerate(used)):
        return Triangularity.LOWER
    return Triangularity.NONE


def is_elementary(f: PolyMap) -> Optional[int]:
    """Index i when F = (x_1, ..., x_i + a, ..., x_n) with a free of x_i.

    The identity counts as elementary at index 0.
    """
    moved = [i for i, c in enumerate(f.components) if c != f.ambient.var(i)]
    if not moved:
        return 0
    if len(moved) > 1:
        return None
    i = moved[0]
    a = f.components[i].sub(f.ambient.var(i))
    return None if i in a.variables_used() else i


def is_affine(f: PolyMap) -> bool:
    return all(d <= 1 for d in f.degrees())


def conjugate(f: PolyMap, t: PolyMap, t_inv: PolyMap) -> PolyMap:
    """T^{-1} o F o T after verifying that t_inv really inverts t."""
    if not compose(t, t_inv).is_identity():
        raise NotInverse("t o t_inv is not the identity")
    return compose(t_inv, compose(f, t))
