"""
pascalis - Nilpotency of Jacobian matrices

nilpotency_index:      smallest k with J^k = 0
strong_nilpotency:     J(Y1) J(Y2) ... J(Yn) = 0 over fresh variable sets
quick_inverse_jh2:     (J_H)^2 = 0  =>  F^{-1} = X - H
johnston_bound_check:  deg F^{-1} <= (deg F)^(p-1) for strong index p
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .errors import ArityMismatch, NotSquare, NotStronglyNilpotent
from .poly import Ambient
from .polymap import (
    NormalForm,
    PolyMap,
    PolyMatrix,
    compose,
    invert_constant_matrix,
    jacobian,
    linear_map,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StrongNilpotency:
    strongly_nilpotent: bool
    index: Optional[int]                  # p, minimal prefix length with a zero product
    witness: Optional[str] = None         # "(row, col): entry" of the n-factor product
    finite_field_caveat: bool = False     # symbolic test only sufficient over GF(p)


@dataclass(frozen=True)
class NilpotencyReport:
    nilpotent: bool
    nilpotency_index: Optional[int]
    strongly_nilpotent: bool
    strong_index_p: Optional[int]
    witness: Optional[str] = None
    finite_field_caveat: bool = False


def _require_square(jh: PolyMatrix) -> int:
    if not jh.is_square():
        raise NotSquare(f"matrix of shape {jh.shape}")
    return jh.shape[0]


def nilpotency_index(jh: PolyMatrix) -> Optional[int]:
    """Smallest k <= n with jh^k = 0, None when jh^n != 0."""
    size = _require_square(jh)
    power = jh
    for k in range(1, size + 1):
        if power.is_zero():
            return k
        if k < size:
            power = power.matmul(jh)
    return None


def _fresh_ambient(base: Ambient, size: int) -> Ambient:
    taken = set(base.names)
    prefix = "y"
    while any(f"{prefix}{s}_{j}" in taken for s in range(1, size + 1) for j in range(1, base.n + 1)):
        prefix = "_" + prefix
    names = tuple(f"{prefix}{s}_{j}" for s in range(1, size + 1) for j in range(1, base.n + 1))
    return Ambient(len(names), base.field, names)


def strong_nilpotency(jh: PolyMatrix) -> StrongNilpotency:
    """Symbolic test with n fresh variable sets y{s}_{j}, prefix products with early exit."""
    size = _require_square(jh)
    base = jh.ambient
    if base.n != size:
        raise ArityMismatch(f"{size}x{size} matrix over {base.n} variables")
    caveat = base.field.is_finite
    if jh.is_zero():
        return StrongNilpotency(True, 1, None, caveat)

    fresh = _fresh_ambient(base, size)
    variables = fresh.variables()
    product = None
    for s in range(size):
        factor = jh.substitute(variables[s * base.n:(s + 1) * base.n])
        product = factor if product is None else product.matmul(factor)
        logger.info("[Nilpotency] prefix product of %d factor(s): %s",
                    s + 1, "zero" if product.is_zero() else "nonzero")
        if product.is_zero():
            return StrongNilpotency(True, s + 1, None, caveat)

    row, col, entry = product.first_nonzero()
    witness = f"({row + 1}, {col + 1}): {entry}"
    return StrongNilpotency(False, None, witness, caveat)


def strong_nilpotency_numeric(jh: PolyMatrix, vectors: Sequence[Sequence[Any]]) -> PolyMatrix:
    """J(v_1) J(v_2) ... J(v_p) as a constant matrix over jh's ambient."""
    size = _require_square(jh)
    amb = jh.ambient
    result = PolyMatrix.identity(amb, size)
    for v in vectors:
        if len(v) != amb.n:
            raise ArityMismatch(f"vector of length {len(v)} for {amb.n} variables")
        values = [[entry.evaluate(v) for entry in row] for row in jh.rows]
        result = result.matmul(PolyMatrix.from_constants(amb, values))
    return result


def nilpotency_report(f: NormalForm) -> NilpotencyReport:
    jh = jacobian(f.h)
    index = nilpotency_index(jh)
    strong = strong_nilpotency(jh)
    return NilpotencyReport(
        nilpotent=index is not None,
        nilpotency_index=index,
        strongly_nilpotent=strong.strongly_nilpotent,
        strong_index_p=strong.index,
        witness=strong.witness,
        finite_field_caveat=strong.finite_field_caveat,
    )


def verify_triangularization(f: NormalForm, t: Sequence[Sequence[Any]]) -> bool:
    """T^{-1} o F o T = X + H' with H'_i in K[x_{i+1}, ..., x_n] (H'_n constant)."""
    amb = f.ambient
    t_inv = invert_constant_matrix(t, f.field)
    t_map = linear_map(t, amb)
    t_inv_map = linear_map(t_inv, amb)
    conj = compose(t_inv_map, compose(f.map, t_map))
    h = conj.sub(PolyMap.identity(amb))
    for i, comp in enumerate(h):
        if any(j <= i for j in comp.variables_used()):
            return False
    return True


def quick_inverse_jh2(f: NormalForm) -> Optional[PolyMap]:
    """X - H when (J_H)^2 = 0 and the composition confirms it (char 0 only)."""
    ident = PolyMap.identity(f.ambient)
    if f.is_identity:
        return ident
    if f.field.is_finite:
        logger.info("[Nilpotency] (J_H)^2 shortcut skipped over %s", f.field)
        return None
    jh = jacobian(f.h)
    if not jh.matmul(jh).is_zero():
        return None
    candidate = ident.sub(f.h)
    if not compose(candidate, f.map).is_identity():
        logger.warning("[Nilpotency] X - H failed verification despite (J_H)^2 = 0")
        return None
    return candidate


def johnston_bound_check(f: NormalForm, inverse: PolyMap,
                         strong: Optional[StrongNilpotency] = None) -> bool:
    """deg inverse <= (deg F)^(p - 1)."""
    if strong is None:
        strong = strong_nilpotency(jacobian(f.h))
    if not strong.strongly_nilpotent:
        raise NotStronglyNilpotent("J_H is not strongly nilpotent")
    return inverse.degree() <= f.map.degree() ** (strong.index - 1)
