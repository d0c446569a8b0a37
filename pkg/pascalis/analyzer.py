#!/usr/bin/env python3
"""
Map Analyzer: staged analysis pipeline

Stages run in a fixed order. A stage whose prerequisite failed is recorded
as "skipped" instead of aborting the run; ResourceLimit always propagates.
"""

import logging
import time
from typing import Any, Dict, Optional

import numpy as np

from .config import PascalisConfig, get_config
from .errors import SingularLinearPart
from .mapfile import serialize_components
from .nilpotency import (
    johnston_bound_check,
    nilpotency_index,
    quick_inverse_jh2,
    strong_nilpotency,
    strong_nilpotency_numeric,
)
from .pascal import invert, pascal_check
from .poly import format_degree, format_poly
from .polymap import (
    NormalForm,
    PolyMap,
    denormalize_inverse,
    is_keller,
    jacobian,
    normalize,
)
from .report import AnalysisReport, build_report

logger = logging.getLogger(__name__)


class MapAnalyzer:
    """
    Runs keller -> normal_form -> pascal -> inverse -> nilpotency -> bounds
    """

    STAGE_ORDER = ["keller", "normal_form", "pascal", "inverse", "nilpotency", "bounds"]
    STAGE_NAMES = {
        "keller": "Keller test",
        "normal_form": "Normal form",
        "pascal": "Pascal check",
        "inverse": "Inversion",
        "nilpotency": "Nilpotency",
        "bounds": "Degree bounds",
    }

    def __init__(self, config: Optional[PascalisConfig] = None, debug_mode: bool = False,
                 m_max: Optional[int] = None, term_ceiling: Optional[int] = None,
                 jobs: int = 1, record_timings: bool = False,
                 probe_truncation: Optional[int] = None, use_probe: bool = True,
                 seed: int = 0):
        self.config = config or get_config()
        self.debug_mode = debug_mode
        self.m_max = m_max
        self.term_ceiling = term_ceiling if term_ceiling is not None else self.config.term_ceiling()
        self.jobs = jobs
        self.record_timings = record_timings
        self.probe_truncation = probe_truncation
        self.use_probe = use_probe
        self.seed = seed

        # state shared between stages of one run
        self._nf: Optional[NormalForm] = None
        self._inverse: Optional[PolyMap] = None
        self._normal_inverse: Optional[PolyMap] = None
        self._strong = None

    def analyze(self, f: PolyMap, name: str = "map") -> AnalysisReport:
        self._nf = None
        self._inverse = None
        self._normal_inverse = None
        self._strong = None

        stages: Dict[str, Dict[str, Any]] = {}
        timings: Dict[str, int] = {}

        for stage in self.STAGE_ORDER:
            if self.debug_mode:
                logger.info("=" * 60)
                logger.info("[%s] %s", stage, self.STAGE_NAMES[stage])
            start = time.perf_counter()
            stages[stage] = getattr(self, f"_stage_{stage}")(f)
            elapsed = int((time.perf_counter() - start) * 1000)
            timings[stage] = elapsed if self.record_timings else 0
            logger.info("[Analyze] %s: %s (%d ms)", stage,
                        stages[stage].get("status", "done"), elapsed)

        return build_report(name, f.n, str(f.field), stages, timings)

    # ==================== stages ====================

    def _stage_keller(self, f: PolyMap) -> Dict[str, Any]:
        status = is_keller(f)
        if status.is_keller:
            return {"status": "yes", "constant": str(status.constant)}
        return {"status": "no", "determinant": format_poly(status.determinant)}

    def _stage_normal_form(self, f: PolyMap) -> Dict[str, Any]:
        try:
            nf = normalize(f)
        except SingularLinearPart as e:
            return {"status": "failed", "message": str(e)}
        self._nf = nf
        return {
            "status": "ok",
            "d": nf.d,
            "D": nf.D,
            "per_component": [{"d_i": format_degree(o), "D_i": format_degree(g)}
                              for o, g in zip(nf.orders, nf.degrees)],
        }

    def _stage_pascal(self, f: PolyMap) -> Dict[str, Any]:
        # the sequence is not invariant under affine normalisation, so it runs on F itself
        if self._nf is None:
            return {"status": "skipped"}
        status = pascal_check(f, self.m_max, term_ceiling=self.term_ceiling, jobs=self.jobs,
                              probe_truncation=self.probe_truncation, use_probe=self.use_probe)
        return {
            "status": "ok",
            "outcome": status.outcome.value,
            "index": status.index,
            "per_component_indices": list(status.component_indices),
            "m_max": status.m_max,
            "exact_steps": status.exact_steps,
            "probe_truncation": status.probe.truncation if status.probe else None,
            "evidence": [s.to_dict() for s in status.evidence],
            "probe_evidence": [s.to_dict() for s in status.probe.evidence] if status.probe else [],
        }

    def _stage_inverse(self, f: PolyMap) -> Dict[str, Any]:
        nf = self._nf
        if nf is None:
            return {"status": "skipped"}

        # 1. (J_H)^2 = 0 shortcut
        g_inv = quick_inverse_jh2(nf)
        if g_inv is not None:
            method, m_used, verified = ("identity" if nf.is_identity else "jh2_shortcut"), 1, True
        else:
            # 2. truncated alternating sum of the Pascal sequence
            result = invert(nf, term_ceiling=self.term_ceiling, jobs=self.jobs)
            g_inv, method, m_used, verified = result.inverse, "criterion", result.m_used, result.verified

        # 3. undo the affine normalisation
        inverse = denormalize_inverse(nf, g_inv)

        self._normal_inverse = g_inv if verified else None
        self._inverse = inverse if verified else None
        return {
            "status": "ok" if verified else "failed",
            "present": True,
            "method": method,
            "degree": int(inverse.degree()),
            "m_used": m_used,
            "verified": verified,
            "components": serialize_components(inverse),
        }

    def _stage_nilpotency(self, f: PolyMap) -> Dict[str, Any]:
        nf = self._nf
        if nf is None:
            return {"status": "skipped"}
        jh = jacobian(nf.h)
        index = nilpotency_index(jh)
        strong = strong_nilpotency(jh)
        self._strong = strong
        # n seeded integer points: J(v_1)...J(v_n) = 0 whenever J_H is strongly nilpotent
        rng = np.random.default_rng(self.seed)
        points = [[int(v) for v in rng.integers(-3, 4, size=f.n)] for _ in range(f.n)]
        sampled = strong_nilpotency_numeric(jh, points)
        return {
            "status": "ok",
            "nilpotent": index is not None,
            "index": index,
            "strongly_nilpotent": strong.strongly_nilpotent,
            "strong_index": strong.index,
            "witness_entry": strong.witness,
            "finite_field_caveat": strong.finite_field_caveat,
            "sample_seed": self.seed,
            "sampled_product_zero": sampled.is_zero(),
        }

    def _stage_bounds(self, f: PolyMap) -> Dict[str, Any]:
        if self._inverse is None:
            return {}
        deg_f = int(f.degree())
        ok = self._inverse.degree() <= deg_f ** (f.n - 1)
        result = {"deg_bound_n_minus_1": "ok" if ok else "violated"}
        if self._strong is not None and self._strong.strongly_nilpotent:
            johnston = johnston_bound_check(self._nf, self._normal_inverse, self._strong)
            result["johnston"] = "ok" if johnston else "violated"
        return result
