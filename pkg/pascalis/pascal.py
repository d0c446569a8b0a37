"""
pascalis - Pascal sequences of polynomial maps

For F = X + H the sequence is

    P_0 = X,   P_{k+1} = P_k o F - P_k

and F is Pascal finite with index m when P_m = 0 (P_{m-1} != 0). Each
component evolves on its own (P_{k+1}^i only needs P_k^i), so a tableau is
built component by component; with jobs > 1 the components run in worker
processes.

Every operation accepts either a NormalForm or a raw PolyMap. For raw maps
P_1 = F - X, which is what the affine examples need.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .coeff import binomial_in_field
from .config import get_config
from .errors import DegenerateMap, NotHomogeneous, NotNormalForm, ResourceLimit
from .poly import (
    NEG_INF,
    POS_INF,
    UNBOUNDED,
    Degree,
    Poly,
    SubstitutionCache,
    TruncationBound,
    TruncLike,
    as_bound,
    format_degree,
    sum_polys,
)
from .polymap import (
    NormalForm,
    PolyMap,
    compose,
    denormalize_inverse,
    normal_form_of,
    normalize,
)

logger = logging.getLogger(__name__)

PascalSource = Union[NormalForm, PolyMap]


def source_map(source: PascalSource) -> PolyMap:
    return source.map if isinstance(source, NormalForm) else source


def as_normal_form(source: PascalSource) -> Optional[NormalForm]:
    """NormalForm view of the source when F(0) = 0 and J_F(0) = I, else None."""
    if isinstance(source, NormalForm):
        return source
    if any(source.constant_part()):
        return None
    n = source.n
    lin = source.linear_matrix()
    if any(lin[i][j] != (1 if i == j else 0) for i in range(n) for j in range(n)):
        return None
    return normal_form_of(source)


# =========================================================================
# Result types
# =========================================================================

@dataclass(frozen=True)
class StepStats:
    """Per-component shape of one tableau step."""

    k: int
    degrees: Tuple[Degree, ...]
    orders: Tuple[Degree, ...]
    term_counts: Tuple[int, ...]

    @classmethod
    def of(cls, k: int, step: PolyMap) -> "StepStats":
        return cls(k, step.degrees(), step.orders(), step.term_counts())

    @property
    def total_terms(self) -> int:
        return sum(self.term_counts)

    @property
    def is_zero(self) -> bool:
        return self.total_terms == 0

    def to_dict(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "degrees": [format_degree(d) for d in self.degrees],
            "orders": [format_degree(o) for o in self.orders],
            "term_count": self.total_terms,
        }


@dataclass
class PascalTableau:
    source: PolyMap
    steps: List[PolyMap]
    trunc: TruncationBound
    m_max: int

    @property
    def stats(self) -> List[StepStats]:
        return [StepStats.of(k, s) for k, s in enumerate(self.steps)]

    @property
    def last_index(self) -> int:
        return len(self.steps) - 1

    @property
    def reached_zero(self) -> bool:
        return len(self.steps) > 1 and self.steps[-1].is_zero()

    @property
    def index(self) -> Optional[int]:
        return self.last_index if self.reached_zero else None

    def component_indices(self) -> Tuple[Optional[int], ...]:
        """First k >= 1 with P_k^i = 0 per component (None if not reached)."""
        out = []
        for i in range(self.source.n):
            found = None
            for k in range(1, len(self.steps)):
                if self.steps[k][i].is_zero():
                    found = k
                    break
            out.append(found)
        return tuple(out)

    def step(self, k: int) -> PolyMap:
        """P_k, also past the stored range once the tableau has reached zero."""
        if k < len(self.steps):
            return self.steps[k]
        if self.reached_zero:
            return PolyMap.zero(self.source.ambient)
        raise IndexError(f"step {k} was not computed (m_max = {self.m_max})")


class PascalOutcome(str, Enum):
    FINITE = "finite"
    NOT_WITHIN_BOUND = "not_within_bound"


@dataclass
class ProbeResult:
    certified: bool
    truncation: Optional[int]          # N at which P_{m_max} was seen nonzero
    attempts: List[int] = field(default_factory=list)
    evidence: List[StepStats] = field(default_factory=list)
    reason: str = ""
    hit_limit: bool = False


@dataclass
class PascalStatus:
    outcome: PascalOutcome
    m_max: int
    index: Optional[int] = None
    component_indices: Tuple[Optional[int], ...] = ()
    evidence: List[StepStats] = field(default_factory=list)
    exact_steps: int = 0
    probe: Optional[ProbeResult] = None

    @property
    def is_finite(self) -> bool:
        return self.outcome is PascalOutcome.FINITE


@dataclass
class InverseResult:
    inverse: PolyMap
    m_used: int
    verified: bool
    component_m: Tuple[int, ...] = ()
    truncation: Optional[int] = None


def pascal_index_of(status: PascalStatus) -> Optional[int]:
    return status.index if status.is_finite else None


# =========================================================================
# Tableau
# =========================================================================

def delta(source: PascalSource, p: PolyMap, trunc: TruncLike = None) -> PolyMap:
    """P o F - P."""
    f = source_map(source)
    bound = as_bound(trunc)
    return compose(p, f, bound).sub(p, bound)


@dataclass
class _ComponentRun:
    index: int
    sequence: List[Poly]
    limit_step: Optional[int] = None
    limit_terms: int = 0
    limit_unit: str = "terms"


def _run_component(f: PolyMap, i: int, m_max: int, bound: TruncationBound,
                   ceiling: Optional[int], cache_terms: Optional[int],
                   work_limit: Optional[int] = None,
                   cache: Optional[SubstitutionCache] = None) -> _ComponentRun:
    if cache is None:
        cache = SubstitutionCache(f.ambient, f.components, bound, ceiling, cache_terms,
                                  work_limit)
    current = f.ambient.var(i).truncate(bound)
    sequence = [current]
    for k in range(1, m_max + 1):
        if current.is_zero():
            break
        try:
            nxt = cache.apply(current).sub(current)
        except ResourceLimit as exc:
            return _ComponentRun(i, sequence, k, exc.terms, exc.unit)
        if ceiling is not None and nxt.term_count > ceiling:
            return _ComponentRun(i, sequence, k, nxt.term_count)
        sequence.append(nxt)
        logger.info("[Pascal] x%d step %d: deg=%s ord=%s terms=%d",
                    i + 1, k, format_degree(nxt.degree()), format_degree(nxt.order()),
                    nxt.term_count)
        current = nxt
    return _ComponentRun(i, sequence)


def _run_components(f: PolyMap, m_max: int, bound: TruncationBound, ceiling: Optional[int],
                    cache_terms: Optional[int], work_limit: Optional[int],
                    jobs: int) -> List[_ComponentRun]:
    moving = [i for i in range(f.n) if f[i] != f.ambient.var(i)]
    if jobs > 1 and len(moving) > 1:
        try:
            with ProcessPoolExecutor(max_workers=min(jobs, len(moving))) as pool:
                futures = [pool.submit(_run_component, f, i, m_max, bound, ceiling,
                                           cache_terms, work_limit)
                           for i in range(f.n)]
                return [fut.result() for fut in futures]
        except (OSError, ImportError, NotImplementedError, BrokenProcessPool) as exc:
            logger.warning("[Pascal] worker pool unavailable (%s), running sequentially", exc)
    cache = SubstitutionCache(f.ambient, f.components, bound, ceiling, cache_terms, work_limit)
    runs = []
    horizon = m_max
    for i in range(f.n):
        run = _run_component(f, i, horizon, bound, ceiling, cache_terms, work_limit, cache)
        if run.limit_step is not None:
            # later components are only needed below the failed step
            horizon = min(horizon, run.limit_step - 1)
        runs.append(run)
    return runs


def _assemble(f: PolyMap, runs: Sequence[_ComponentRun], length: int) -> List[PolyMap]:
    zero = f.ambient.zero()
    steps = []
    for k in range(length):
        steps.append(PolyMap([r.sequence[k] if k < len(r.sequence) else zero for r in runs]))
    return steps


def pascal_tableau(source: PascalSource, m_max: int, trunc: TruncLike = None, *,
                   term_ceiling: Optional[int] = None, jobs: int = 1) -> PascalTableau:
    """P_0, ..., P_m up to the first zero step or m_max.

    Raises ResourceLimit (with the completed steps in `partial`) when a
    polynomial produced along the way exceeds `term_ceiling` terms, or when
    one step touches more than `term_ceiling * pascal.work_factor`
    intermediate terms. Once a component stops, the remaining components
    run only below that step.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    f = source_map(source)
    bound = as_bound(trunc)
    cfg = get_config()
    cache_terms = cfg.get_int("pascal.cache_terms", minimum=1)
    work_limit = None
    if term_ceiling is not None:
        work_limit = term_ceiling * cfg.get_int("pascal.work_factor", minimum=1)
    runs = _run_components(f, m_max, bound, term_ceiling, cache_terms, work_limit, jobs)

    failed = [r for r in runs if r.limit_step is not None]
    if failed:
        first = min(failed, key=lambda r: (r.limit_step, r.index))
        length = min(first.limit_step, max(len(r.sequence) for r in runs))
        partial = PascalTableau(f, _assemble(f, runs, length), bound, m_max)
        logger.warning("[Pascal] term ceiling %s hit at step %d (x%d, %d %s)",
                       term_ceiling, first.limit_step, first.index + 1,
                       first.limit_terms, first.limit_unit)
        raise ResourceLimit(first.limit_step, first.limit_terms, term_ceiling,
                            component=first.index, partial=partial, unit=first.limit_unit)

    length = max(len(r.sequence) for r in runs)
    return PascalTableau(f, _assemble(f, runs, length), bound, m_max)


# =========================================================================
# Criterion bound and default m_max
# =========================================================================

def criterion_bound(f: NormalForm, i: int) -> int:
    """m = floor((D^(n-1) - d_i)/(d - 1) + 1) + 1."""
    if f.is_identity:
        raise DegenerateMap("H = 0: the map is the identity")
    d_i = f.orders[i]
    if d_i == POS_INF:
        raise DegenerateMap(f"H_{i + 1} = 0: component {i + 1} is fixed")
    value = Fraction(f.D ** (f.n - 1) - int(d_i), f.d - 1) + 1
    return math.floor(value) + 1


def default_m_max(source: PascalSource) -> int:
    cfg = get_config()
    cap = cfg.get_int("pascal.m_max_cap", minimum=1)
    multiplier = cfg.get_int("pascal.m_max_multiplier", minimum=1)
    nf = as_normal_form(source)
    if nf is None or nf.is_identity:
        return cap
    bound = max(criterion_bound(nf, i) for i in nf.nonzero_components())
    return max(1, min(cap, multiplier * bound))


# =========================================================================
# Finiteness check
# =========================================================================

def initial_truncation(source: PascalSource, m_max: int) -> Optional[int]:
    """First probe truncation (m_max - 1)(d - 1) + D, None when no probe applies."""
    f = source_map(source)
    if any(f.constant_part()):
        return None
    h = f.sub(PolyMap.identity(f.ambient))
    if h.is_zero():
        return None
    d = int(min(o for o in h.orders() if o != POS_INF))
    D = int(max(g for g in h.degrees() if g != NEG_INF))
    return max(1, (m_max - 1) * max(d - 1, 0) + D)


def refutation_probe(source: PascalSource, m_max: int, n0: Optional[int] = None, *,
                     doublings: Optional[int] = None,
                     term_ceiling: Optional[int] = None) -> ProbeResult:
    """Certify P_{m_max} != 0 from a truncated tableau.

    With F(0) = 0 substitution never lowers the order, so the tableau
    truncated at N is exactly the degree <= N part of the untruncated one.
    A nonzero truncated P_{m_max} is therefore a certificate.
    """
    f = source_map(source)
    if any(f.constant_part()):
        return ProbeResult(False, None, reason="F(0) != 0")
    start = initial_truncation(f, m_max)
    if start is None:
        return ProbeResult(False, None, reason="identity map")
    if n0 is None:
        n0 = start
    if n0 < 1:
        raise ValueError("probe truncation must be >= 1")
    if doublings is None:
        doublings = get_config().get_int("pascal.probe_doublings")

    attempts = []
    truncation = n0
    for _ in range(doublings + 1):
        attempts.append(truncation)
        logger.info("[Probe] truncation %d, m_max %d", truncation, m_max)
        try:
            tab = pascal_tableau(f, m_max, truncation, term_ceiling=term_ceiling)
        except ResourceLimit as exc:
            logger.info("[Probe] gave up at truncation %d: %s", truncation, exc)
            return ProbeResult(False, None, attempts, reason=str(exc), hit_limit=True)
        if tab.last_index == m_max and not tab.steps[-1].is_zero():
            logger.info("[Probe] P_%d nonzero below degree %d: certified", m_max, truncation + 1)
            return ProbeResult(True, truncation, attempts, tab.stats)
        truncation *= 2
    return ProbeResult(False, None, attempts, reason="truncated tableau vanished")


def _refuted(m_max: int, probe: ProbeResult, partial: Optional[PascalTableau]) -> PascalStatus:
    evidence = partial.stats if partial is not None else []
    return PascalStatus(
        outcome=PascalOutcome.NOT_WITHIN_BOUND,
        m_max=m_max,
        component_indices=partial.component_indices() if partial is not None else (),
        evidence=evidence,
        exact_steps=len(evidence) - 1 if evidence else 0,
        probe=probe,
    )


def pascal_check(source: PascalSource, m_max: Optional[int] = None, *,
                 term_ceiling: Optional[int] = None, jobs: int = 1,
                 probe_doublings: Optional[int] = None,
                 probe_truncation: Optional[int] = None,
                 use_probe: bool = True) -> PascalStatus:
    """Finite(m) for the minimal m <= m_max, else NotWithinBound with evidence.

    When F(0) = 0 one truncated attempt at `probe_truncation` (default
    (m_max - 1)(d - 1) + D) runs first. If it certifies, the exact steps
    are computed only as evidence, under the smaller `pascal.evidence_ceiling`.
    Otherwise the exact tableau decides, and a ResourceLimit there falls back
    to the remaining doublings of the probe. `use_probe=False` leaves only the
    exact tableau.
    """
    if m_max is None:
        m_max = default_m_max(source)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    cfg = get_config()
    if term_ceiling is None:
        term_ceiling = cfg.term_ceiling()
    if probe_doublings is None:
        probe_doublings = cfg.get_int("pascal.probe_doublings")

    start = initial_truncation(source, m_max)
    n0 = probe_truncation if probe_truncation is not None else start
    quick: Optional[ProbeResult] = None
    if start is not None and use_probe:
        quick = refutation_probe(source, m_max, n0, doublings=0, term_ceiling=term_ceiling)

    if quick is not None and quick.certified:
        ceiling = min(term_ceiling, cfg.get_int("pascal.evidence_ceiling", minimum=1))
        try:
            tab = pascal_tableau(source, m_max, UNBOUNDED, term_ceiling=ceiling, jobs=jobs)
        except ResourceLimit as exc:
            logger.info("[Pascal] exact evidence stops at step %d", exc.step)
            return _refuted(m_max, quick, exc.partial)
        return _refuted(m_max, quick, tab)

    try:
        tab = pascal_tableau(source, m_max, UNBOUNDED, term_ceiling=term_ceiling, jobs=jobs)
    except ResourceLimit as exc:
        if quick is None or quick.hit_limit or probe_doublings == 0:
            raise
        probe = refutation_probe(source, m_max, 2 * n0, doublings=probe_doublings - 1,
                                 term_ceiling=term_ceiling)
        if not probe.certified:
            raise
        probe.attempts = quick.attempts + probe.attempts
        return _refuted(m_max, probe, exc.partial)

    if tab.reached_zero:
        indices = tuple(k if k is not None else 1 for k in tab.component_indices())
        logger.info("[Pascal] finite, index %d (per component %s)", tab.index, list(indices))
        return PascalStatus(PascalOutcome.FINITE, m_max, tab.index, indices,
                            tab.stats, tab.last_index)
    logger.info("[Pascal] no zero step up to m_max = %d", m_max)
    return PascalStatus(PascalOutcome.NOT_WITHIN_BOUND, m_max, None, tab.component_indices(),
                        tab.stats, tab.last_index)


# =========================================================================
# Inversion
# =========================================================================

def _alternating_sum(tab: PascalTableau, i: int, count: int, trunc: TruncLike) -> Poly:
    amb = tab.source.ambient
    terms = []
    for l in range(count):
        if l >= len(tab.steps):
            break
        p = tab.steps[l][i]
        terms.append(p if l % 2 == 0 else p.neg())
    return sum_polys(amb, terms, trunc)


def _verify_inverse(g: PolyMap, f: PolyMap) -> bool:
    logger.info("[Invert] verifying G o F = X")
    if not compose(g, f).is_identity():
        return False
    if f.field.is_finite:
        logger.info("[Invert] verifying F o G = X")
        return compose(f, g).is_identity()
    return True


def invert(f: NormalForm, *, term_ceiling: Optional[int] = None, jobs: int = 1) -> InverseResult:
    """Inverse by the truncated alternating-sum criterion, verified by composition."""
    if f.is_identity:
        ident = PolyMap.identity(f.ambient)
        return InverseResult(ident, 1, True, (1,) * f.n, None)

    truncation = f.D ** (f.n - 1)
    component_m = tuple(criterion_bound(f, i) if f.orders[i] != POS_INF else 1
                        for i in range(f.n))
    m_used = max(component_m)
    logger.info("[Invert] truncation %d, criterion m per component %s", truncation, list(component_m))
    tab = pascal_tableau(f, max(1, m_used - 1), truncation, term_ceiling=term_ceiling, jobs=jobs)
    g = PolyMap([_alternating_sum(tab, i, component_m[i], truncation) for i in range(f.n)])
    verified = _verify_inverse(g, f.map)
    if not verified:
        logger.warning("[Invert] candidate inverse failed verification")
    return InverseResult(g, m_used, verified, component_m, truncation)


def formal_inverse_truncated(source: PascalSource, order_n: int, *,
                             term_ceiling: Optional[int] = None) -> PolyMap:
    """Degree <= order_n part of the formal inverse sum_k (-1)^k P_k (any field).

    A map with F(0) = 0 but J_F(0) != I is first brought to X + H by A^{-1};
    the result is composed back, which keeps degrees.
    """
    if order_n < 1:
        raise ValueError("order_n must be >= 1")
    if isinstance(source, NormalForm):
        return _formal_inverse_of(source, order_n, term_ceiling)
    nf = as_normal_form(source)
    if nf is not None:
        return _formal_inverse_of(nf, order_n, term_ceiling)
    if any(source.constant_part()):
        raise NotNormalForm("formal inverse around the origin needs F(0) = 0")
    nf = normalize(source)
    g = _formal_inverse_of(nf, order_n, term_ceiling)
    return denormalize_inverse(nf, g).truncate(order_n)


def _formal_inverse_of(nf: NormalForm, order_n: int, term_ceiling: Optional[int]) -> PolyMap:
    if nf.is_identity:
        return PolyMap.identity(nf.ambient)
    d = nf.d
    if d < 2:
        raise NotNormalForm(f"H must have order >= 2, got {d}")
    count = 1
    while (count - 1) * (d - 1) + d <= order_n:
        count += 1
    # P_0 .. P_{count-1} may contribute below degree order_n + 1
    if count == 1:
        return PolyMap.identity(nf.ambient).truncate(order_n)
    tab = pascal_tableau(nf, count - 1, order_n, term_ceiling=term_ceiling)
    return PolyMap([_alternating_sum(tab, i, count, order_n) for i in range(nf.n)])


# =========================================================================
# Identities
# =========================================================================

def reconstruction_check(source: PascalSource, m: int, trunc: TruncLike = None, *,
                         term_ceiling: Optional[int] = None) -> bool:
    """X == sum_{k<m} (-1)^k P_k(F) + (-1)^m P_m(X).

    With a truncation the identity is checked modulo degree > N, which needs F(0) = 0.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    f = source_map(source)
    bound = as_bound(trunc)
    if bound.bounded and any(f.constant_part()):
        raise ValueError("a truncated reconstruction check needs F(0) = 0")
    tab = pascal_tableau(f, m, bound, term_ceiling=term_ceiling)
    total = PolyMap.zero(f.ambient)
    for k in range(m):
        image = compose(tab.step(k), f, bound, term_ceiling)
        total = total.add(image, bound) if k % 2 == 0 else total.sub(image, bound)
    last = tab.step(m)
    total = total.add(last, bound) if m % 2 == 0 else total.sub(last, bound)
    return total == PolyMap.identity(f.ambient).truncate(bound)


def binomial_relation_check(source: PascalSource, m: int, trunc: TruncLike = None) -> bool:
    """sum_{l=0}^{m} (-1)^(m-l) C(m, l) F^l == 0 (F^0 = X)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    f = source_map(source)
    bound = as_bound(trunc)
    power = PolyMap.identity(f.ambient).truncate(bound)
    total = PolyMap.zero(f.ambient)
    for l in range(m + 1):
        if l:
            power = compose(f, power, bound)
        c = binomial_in_field(m, l, f.field)
        term = power.scale(c)
        total = total.add(term, bound) if (m - l) % 2 == 0 else total.sub(term, bound)
    return total.is_zero()


def homogeneous_layers_check(source: PascalSource, k_max: int = 6,
                             trunc: TruncLike = None, *,
                             term_ceiling: Optional[int] = None) -> bool:
    """Every homogeneous layer of P_k^i has degree (k + j - 1)(d - 1) + 1 with
    1 <= j <= (d^k - 1)/(d - 1) - k + 1.
    """
    nf = source if isinstance(source, NormalForm) else as_normal_form(source)
    if nf is None:
        raise NotHomogeneous("map is not in normal form")
    if nf.is_identity:
        return True
    layer_degrees = set()
    for i in nf.nonzero_components():
        layer_degrees.update(nf.h[i].degrees_present())
    if len(layer_degrees) != 1:
        raise NotHomogeneous(f"H has layers of degrees {sorted(layer_degrees)}")
    d = layer_degrees.pop()

    tab = pascal_tableau(nf, k_max, trunc, term_ceiling=term_ceiling)
    for k in range(1, len(tab.steps)):
        max_j = (d ** k - 1) // (d - 1) - k + 1
        for comp in tab.steps[k]:
            for e in comp.degrees_present():
                if (e - 1) % (d - 1):
                    return False
                j = (e - 1) // (d - 1) - k + 1
                if j < 1 or j > max_j:
                    logger.info("[Layers] P_%d has a layer of degree %d (j=%d)", k, e, j)
                    return False
    return True
