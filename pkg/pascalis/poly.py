"""
pascalis - Sparse multivariate polynomials

Monomials are packed into a single int:

    key = deg << (EXP_BITS * n) | e_1 << (EXP_BITS * (n-1)) | ... | e_n

so multiplying monomials is integer addition, and comparing keys is the
graded-lexicographic order (x1 > x2 > ... > xn). Every exponent is bounded
by the total degree, which is checked against MAX_DEGREE before products
are formed; fields can therefore never carry into their neighbours.

A Poly is immutable once built. Coefficients are raw field values (see
coeff.py); zero coefficients are never stored.
"""

import logging
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .coeff import Coefficient, FieldSpec, QQ, Raw
from .errors import (
    AmbientMismatch,
    ArityMismatch,
    DivisionByZero,
    ExponentOverflow,
    InexactDivision,
    MixedFields,
    ResourceLimit,
)

logger = logging.getLogger(__name__)

EXP_BITS = 32
MAX_DEGREE = (1 << EXP_BITS) - 1

NEG_INF = -math.inf   # degree of the zero polynomial
POS_INF = math.inf    # order of the zero polynomial

Monomial = Tuple[int, ...]
Degree = Union[int, float]


# =========================================================================
# Ambient ring K[x1..xn]
# =========================================================================

@dataclass(frozen=True)
class Ambient:
    """Polynomial ring K[x1..xn]. Names are cosmetic and ignored by ==."""

    n: int
    field: FieldSpec = QQ
    names: Tuple[str, ...] = dc_field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ArityMismatch("ambient needs at least one variable")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(self.n)))
        elif len(self.names) != self.n:
            raise ArityMismatch(f"{len(self.names)} names for {self.n} variables")
        else:
            object.__setattr__(self, "names", tuple(self.names))

    @cached_property
    def degree_shift(self) -> int:
        return EXP_BITS * self.n

    @cached_property
    def unit_keys(self) -> Tuple[int, ...]:
        """Packed key of each variable x_i."""
        top = 1 << self.degree_shift
        return tuple(top | (1 << (EXP_BITS * (self.n - 1 - i))) for i in range(self.n))

    def pack(self, exponents: Sequence[int]) -> int:
        if len(exponents) != self.n:
            raise ArityMismatch(f"monomial of length {len(exponents)} in {self.n} variables")
        key = 0
        total = 0
        for e in exponents:
            if e < 0:
                raise ValueError(f"negative exponent {e}")
            total += e
            key = (key << EXP_BITS) | e
        if total > MAX_DEGREE:
            raise ExponentOverflow(f"degree {total} exceeds {MAX_DEGREE}")
        return (total << self.degree_shift) | key

    def unpack(self, key: int) -> Monomial:
        mask = MAX_DEGREE
        return tuple((key >> (EXP_BITS * (self.n - 1 - i))) & mask for i in range(self.n))

    def key_degree(self, key: int) -> int:
        return key >> self.degree_shift

    def exponent(self, key: int, i: int) -> int:
        return (key >> (EXP_BITS * (self.n - 1 - i))) & MAX_DEGREE

    def renamed(self, names: Sequence[str]) -> "Ambient":
        return Ambient(self.n, self.field, tuple(names))

    def with_field(self, field: FieldSpec) -> "Ambient":
        return Ambient(self.n, field, self.names)

    # shorthands
    def zero(self) -> "Poly":
        return Poly(self)

    def one(self) -> "Poly":
        return Poly(self, {0: 1})

    def var(self, i: int) -> "Poly":
        return Poly.variable(self, i)

    def variables(self) -> List["Poly"]:
        return [Poly.variable(self, i) for i in range(self.n)]

    def __str__(self) -> str:
        return f"{self.field}[{', '.join(self.names)}]"


# =========================================================================
# Truncation bound
# =========================================================================

@dataclass(frozen=True)
class TruncationBound:
    """Drop every term of total degree > max_degree (None = keep all)."""

    max_degree: Optional[int] = None

    @property
    def bounded(self) -> bool:
        return self.max_degree is not None

    def __str__(self) -> str:
        return "unbounded" if self.max_degree is None else f"<= {self.max_degree}"


UNBOUNDED = TruncationBound()

TruncLike = Union[TruncationBound, int, None]


def as_bound(trunc: TruncLike) -> TruncationBound:
    if trunc is None:
        return UNBOUNDED
    if isinstance(trunc, TruncationBound):
        return trunc
    if trunc < 0:
        raise ValueError(f"truncation degree must be >= 0, got {trunc}")
    return TruncationBound(int(trunc))


# =========================================================================
# Kernels (raw term dicts)
# =========================================================================

def _degree_of(terms: Dict[int, Raw], shift: int) -> Degree:
    return max(terms) >> shift if terms else NEG_INF


def _check_product_degree(a: Dict[int, Raw], b: Dict[int, Raw], shift: int) -> None:
    if a and b and (max(a) >> shift) + (max(b) >> shift) > MAX_DEGREE:
        raise ExponentOverflow("product degree exceeds exponent width")


def _mul_terms(a: Dict[int, Raw], b: Dict[int, Raw], field: FieldSpec,
               limit: Optional[int] = None) -> Dict[int, Raw]:
    """Product of term dicts; keys >= limit (i.e. degree > N) are skipped."""
    if len(a) < len(b):
        a, b = b, a
    out: Dict[int, Raw] = {}
    get = out.get
    if limit is None:
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
    else:
        a_sorted = sorted(a.items())
        for kb, cb in b.items():
            room = limit - kb
            for ka, ca in a_sorted:
                if ka >= room:
                    break
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
    return field.canonical(out)


def _limit_key(ambient: Ambient, bound: TruncationBound) -> Optional[int]:
    """Smallest packed key of degree max_degree + 1."""
    if bound.max_degree is None:
        return None
    return (bound.max_degree + 1) << ambient.degree_shift


def _truncate_terms(terms: Dict[int, Raw], limit: Optional[int]) -> Dict[int, Raw]:
    if limit is None:
        return terms
    return {k: c for k, c in terms.items() if k < limit}


# =========================================================================
# Polynomial
# =========================================================================

class Poly:
    """Immutable sparse polynomial over an Ambient."""

    __slots__ = ("ambient", "_terms")

    def __init__(self, ambient: Ambient, terms: Optional[Dict[int, Raw]] = None):
        # terms must already be canonical (packed keys, reduced, nonzero)
        self.ambient = ambient
        self._terms: Dict[int, Raw] = terms if terms is not None else {}

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_dict(cls, ambient: Ambient, mapping: Mapping[Sequence[int], Any]) -> "Poly":
        terms: Dict[int, Raw] = {}
        for exps, value in mapping.items():
            key = ambient.pack(tuple(exps))
            terms[key] = terms.get(key, 0) + ambient.field.reduce(value)
        return cls(ambient, ambient.field.canonical(terms))

    @classmethod
    def constant(cls, ambient: Ambient, value: Any) -> "Poly":
        return cls(ambient, ambient.field.canonical({0: ambient.field.reduce(value)}))

    @classmethod
    def variable(cls, ambient: Ambient, i: int) -> "Poly":
        if not 0 <= i < ambient.n:
            raise ArityMismatch(f"variable index {i} outside 0..{ambient.n - 1}")
        return cls(ambient, {ambient.unit_keys[i]: 1})

    # ------------------------------------------------------------------
    # Inspection
    # ------------------------------------------------------------------

    @property
    def field(self) -> FieldSpec:
        return self.ambient.field

    @property
    def term_count(self) -> int:
        return len(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(k == 0 for k in self._terms)

    def constant_term(self) -> Raw:
        return self._terms.get(0, 0)

    def raw_items(self) -> Iterator[Tuple[int, Raw]]:
        """(packed key, raw coefficient) in descending graded-lex order."""
        for key in sorted(self._terms, reverse=True):
            yield key, self._terms[key]

    def items(self) -> Iterator[Tuple[Monomial, Raw]]:
        """(exponent tuple, raw coefficient) in descending graded-lex order."""
        unpack = self.ambient.unpack
        for key, value in self.raw_items():
            yield unpack(key), value

    def coefficient(self, exponents: Sequence[int]) -> Coefficient:
        return Coefficient(self.field, self._terms.get(self.ambient.pack(exponents), 0))

    def degree(self) -> Degree:
        return _degree_of(self._terms, self.ambient.degree_shift)

    def order(self) -> Degree:
        if not self._terms:
            return POS_INF
        return min(self._terms) >> self.ambient.degree_shift

    def degrees_present(self) -> List[int]:
        shift = self.ambient.degree_shift
        return sorted({k >> shift for k in self._terms})

    def variables_used(self) -> List[int]:
        used = set()
        for key in self._terms:
            for i in range(self.ambient.n):
                if i not in used and self.ambient.exponent(key, i):
                    used.add(i)
        return sorted(used)

    def is_homogeneous(self) -> bool:
        return len(self.degrees_present()) <= 1

    def homogeneous_component(self, d: int) -> "Poly":
        shift = self.ambient.degree_shift
        return Poly(self.ambient, {k: c for k, c in self._terms.items() if k >> shift == d})

    def truncate(self, trunc: TruncLike) -> "Poly":
        limit = _limit_key(self.ambient, as_bound(trunc))
        if limit is None:
            return self
        return Poly(self.ambient, _truncate_terms(self._terms, limit))

    def leading_term(self) -> Tuple[Monomial, Coefficient]:
        if not self._terms:
            raise DivisionByZero("zero polynomial has no leading term")
        key = max(self._terms)
        return self.ambient.unpack(key), Coefficient(self.field, self._terms[key])

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if other.ambient != self.ambient:
            if other.ambient.field != self.ambient.field:
                raise MixedFields(f"{self.ambient.field} vs {other.ambient.field}")
            raise AmbientMismatch(f"{self.ambient} vs {other.ambient}")

    def _coerce(self, other: Any) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.constant(self.ambient, other)

    def add(self, other: "Poly", trunc: TruncLike = None) -> "Poly":
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        limit = _limit_key(self.ambient, as_bound(trunc))
        return Poly(self.ambient, self.field.canonical(_truncate_terms(out, limit)))

    def sub(self, other: "Poly", trunc: TruncLike = None) -> "Poly":
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) - c
        limit = _limit_key(self.ambient, as_bound(trunc))
        return Poly(self.ambient, self.field.canonical(_truncate_terms(out, limit)))

    def mul(self, other: "Poly", trunc: TruncLike = None) -> "Poly":
        other = self._coerce(other)
        _check_product_degree(self._terms, other._terms, self.ambient.degree_shift)
        limit = _limit_key(self.ambient, as_bound(trunc))
        return Poly(self.ambient, _mul_terms(self._terms, other._terms, self.field, limit))

    def scale(self, value: Any) -> "Poly":
        c = self.field.reduce(value)
        if not c:
            return Poly(self.ambient)
        return Poly(self.ambient, self.field.canonical({k: v * c for k, v in self._terms.items()}))

    def neg(self) -> "Poly":
        return Poly(self.ambient, self.field.canonical({k: -v for k, v in self._terms.items()}))

    def pow(self, k: int, trunc: TruncLike = None) -> "Poly":
        if k < 0:
            raise ValueError("negative power")
        result = self.ambient.one().truncate(trunc)
        base = self
        while k:
            if k & 1:
                result = result.mul(base, trunc)
            k >>= 1
            if k:
                base = base.mul(base, trunc)
        return result

    def derivative(self, i: int) -> "Poly":
        if not 0 <= i < self.ambient.n:
            raise ArityMismatch(f"variable index {i} outside 0..{self.ambient.n - 1}")
        unit = self.ambient.unit_keys[i]
        out = {}
        for key, c in self._terms.items():
            e = self.ambient.exponent(key, i)
            if e:
                out[key - unit] = c * e
        return Poly(self.ambient, self.field.canonical(out))

    def evaluate(self, values: Sequence[Any]) -> Coefficient:
        if len(values) != self.ambient.n:
            raise ArityMismatch(f"{len(values)} values for {self.ambient.n} variables")
        fld = self.field
        point = [fld.reduce(v) for v in values]
        total: Raw = 0
        for exps, c in self.items():
            term = c
            for v, e in zip(point, exps):
                if e:
                    term = term * fld.power(v, e)
            total = total + term
        return Coefficient(fld, fld.norm(total))

    def exact_divide(self, divisor: "Poly") -> "Poly":
        """Quotient of an exact division; InexactDivision if a remainder is left."""
        self._check(divisor)
        if divisor.is_zero():
            raise DivisionByZero("division by the zero polynomial")
        fld = self.field
        amb = self.ambient
        lead = max(divisor._terms)
        lead_exps = amb.unpack(lead)
        lead_inv = fld.inv(divisor._terms[lead])
        rest = {k: c for k, c in divisor._terms.items() if k != lead}
        remainder = dict(self._terms)
        quotient: Dict[int, Raw] = {}
        while remainder:
            top = max(remainder)
            if any(r < l for r, l in zip(amb.unpack(top), lead_exps)):
                raise InexactDivision("leading monomial not divisible")
            q_key = top - lead
            q_val = fld.mul(remainder.pop(top), lead_inv)
            quotient[q_key] = q_val
            for k, c in rest.items():
                key = q_key + k
                value = fld.norm(remainder.get(key, 0) - q_val * c)
                if value:
                    remainder[key] = value
                else:
                    remainder.pop(key, None)
        return Poly(amb, fld.canonical(quotient))

    def with_field(self, field: FieldSpec) -> "Poly":
        """Reinterpret the coefficients in another field."""
        amb = self.ambient.with_field(field)
        terms = {k: field.reduce(c) for k, c in self._terms.items()}
        return Poly(amb, field.canonical(terms))

    def renamed(self, names: Sequence[str]) -> "Poly":
        return Poly(self.ambient.renamed(names), self._terms)

    # ------------------------------------------------------------------
    # Operators
    # ------------------------------------------------------------------

    def __add__(self, other: Any) -> "Poly":
        return self.add(other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Poly":
        return self.sub(other)

    def __rsub__(self, other: Any) -> "Poly":
        return self._coerce(other).sub(self)

    def __mul__(self, other: Any) -> "Poly":
        if isinstance(other, Poly):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __neg__(self) -> "Poly":
        return self.neg()

    def __pow__(self, k: int) -> "Poly":
        return self.pow(k)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly):
            return self.ambient == other.ambient and self._terms == other._terms
        if isinstance(other, (int, Coefficient)):
            try:
                return self == Poly.constant(self.ambient, other)
            except MixedFields:
                return False
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ambient, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"Poly({self.ambient}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)


# =========================================================================
# Substitution
# =========================================================================

class SubstitutionCache:
    """Memoised images of monomials under one fixed substitution x_j -> images[j].

    image(m) = image(m - e_j) * images[j] where j is the last variable of m.
    Reusable across many polynomials (e.g. every step of a tableau). With a
    term ceiling, every image produced is checked against it. With a work
    limit, the intermediate terms one apply() touches (products while
    building images plus accumulation) are counted and bounded as well.
    """

    def __init__(self, source: Ambient, images: Sequence[Poly], trunc: TruncLike = None,
                 ceiling: Optional[int] = None, max_cached_terms: Optional[int] = None,
                 work_limit: Optional[int] = None):
        if len(images) != source.n:
            raise ArityMismatch(f"{len(images)} images for {source.n} variables")
        target = images[0].ambient
        for img in images:
            if img.ambient != target:
                raise AmbientMismatch("substitution images live in different ambients")
        if target.field != source.field:
            raise MixedFields(f"{source.field} vs {target.field}")
        self.source = source
        self.target = target
        self.images = tuple(images)
        self.bound = as_bound(trunc)
        self.limit = _limit_key(target, self.bound)
        self.ceiling = ceiling
        self.max_cached_terms = max_cached_terms
        # monomials of degree > N map to zero when no image has a constant term
        self.positive_order = all(img.order() >= 1 for img in images)
        self._memo: Dict[int, Dict[int, Raw]] = {0: _truncate_terms({0: 1}, self.limit)}
        self._cached_terms = 0
        self.work_limit = work_limit
        self.work = 0
        self._work_start = 0

    def _spend(self, amount: int) -> None:
        self.work += amount
        spent = self.work - self._work_start
        if self.work_limit is not None and spent > self.work_limit:
            raise ResourceLimit(step=0, terms=spent, ceiling=self.work_limit,
                                unit="intermediate terms")

    def _unit(self, key: int) -> int:
        amb = self.source
        for j in range(amb.n - 1, -1, -1):
            if amb.exponent(key, j):
                return j
        raise AssertionError("constant monomial has no last variable")

    def _remember(self, key: int, terms: Dict[int, Raw]) -> None:
        if self.max_cached_terms is not None and self._cached_terms > self.max_cached_terms:
            logger.debug("[Substitute] cache reset after %d terms", self._cached_terms)
            self._memo = {0: self._memo[0]}
            self._cached_terms = 0
        self._memo[key] = terms
        self._cached_terms += len(terms)

    def image(self, key: int) -> Dict[int, Raw]:
        memo = self._memo
        found = memo.get(key)
        if found is not None:
            return found
        if (self.positive_order and self.bound.max_degree is not None
                and self.source.key_degree(key) > self.bound.max_degree):
            return {}
        chain = []
        cur = key
        while cur not in memo:
            j = self._unit(cur)
            chain.append((cur, j))
            cur -= self.source.unit_keys[j]
        terms = memo[cur]
        shift = self.target.degree_shift
        fld = self.target.field
        for cur, j in reversed(chain):
            factor = self.images[j]._terms
            _check_product_degree(terms, factor, shift)
            self._spend(len(terms) * len(factor))
            terms = _mul_terms(terms, factor, fld, self.limit)
            if self.ceiling is not None and len(terms) > self.ceiling:
                raise ResourceLimit(step=0, terms=len(terms), ceiling=self.ceiling)
            self._remember(cur, terms)
        return terms

    def apply(self, p: Poly) -> Poly:
        if p.ambient != self.source:
            raise AmbientMismatch(f"{p.ambient} vs substitution source {self.source}")
        out: Dict[int, Raw] = {}
        get = out.get
        ceiling = self.ceiling
        self._work_start = self.work
        for key, c in p._terms.items():
            img = self.image(key)
            self._spend(len(img))
            for k, v in img.items():
                out[k] = get(k, 0) + c * v
            if ceiling is not None and len(out) > ceiling:
                out = self.target.field.canonical(out)
                get = out.get
                if len(out) > ceiling:
                    raise ResourceLimit(step=0, terms=len(out), ceiling=ceiling)
        return Poly(self.target, self.target.field.canonical(out))


def substitute(p: Poly, images: Sequence[Poly], trunc: TruncLike = None,
               cache: Optional[SubstitutionCache] = None,
               ceiling: Optional[int] = None) -> Poly:
    """p(images[0], ..., images[n-1]), truncating after every product."""
    if cache is None:
        cache = SubstitutionCache(p.ambient, images, trunc, ceiling)
    return cache.apply(p)


# =========================================================================
# Functional API
# =========================================================================

def poly_add(a: Poly, b: Poly, trunc: TruncLike = None) -> Poly:
    return a.add(b, trunc)


def poly_sub(a: Poly, b: Poly, trunc: TruncLike = None) -> Poly:
    return a.sub(b, trunc)


def poly_mul(a: Poly, b: Poly, trunc: TruncLike = None) -> Poly:
    return a.mul(b, trunc)


def degree(p: Poly) -> Degree:
    return p.degree()


def order(p: Poly) -> Degree:
    return p.order()


def homogeneous_component(p: Poly, d: int) -> Poly:
    return p.homogeneous_component(d)


def poly_equal(a: Poly, b: Poly) -> bool:
    a._check(b)
    return a._terms == b._terms


def sum_polys(ambient: Ambient, polys: Iterable[Poly], trunc: TruncLike = None) -> Poly:
    out: Dict[int, Raw] = {}
    for p in polys:
        if p.ambient != ambient:
            raise AmbientMismatch(f"{p.ambient} vs {ambient}")
        for k, c in p._terms.items():
            out[k] = out.get(k, 0) + c
    limit = _limit_key(ambient, as_bound(trunc))
    return Poly(ambient, ambient.field.canonical(_truncate_terms(out, limit)))


# =========================================================================
# Formatting
# =========================================================================

def format_monomial(exponents: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(names, exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    """Canonical text: graded-lex descending, "1/2*x1^2*x3", "0" for zero."""
    if p.is_zero():
        return "0"
    names = p.ambient.names
    out = []
    for exps, c in p.items():
        negative = c < 0 if p.field.p is None else False
        magnitude = -c if negative else c
        mono = format_monomial(exps, names)
        if not mono:
            body = str(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{magnitude}*{mono}"
        if not out:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


def format_degree(value: Degree) -> Union[int, str]:
    """JSON-friendly degree/order: ints stay ints, infinities become strings."""
    if value == POS_INF:
        return "inf"
    if value == NEG_INF:
        return "-inf"
    return int(value)
