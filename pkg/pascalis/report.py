"""
pascalis - Analysis report (schema pascalis-report/1)

Pydantic models whose field order is the JSON key order, the converter
from analyzer stage results, and JSON/text rendering.
"""

import json
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

from .config import PascalisConfig, get_config

SCHEMA_ID = "pascalis-report/1"

DegreeValue = Union[int, str]


# Response Models
class KellerSection(BaseModel):
    status: str                          # "yes" | "no"
    constant: Optional[str] = None       # det J_F when constant
    determinant: Optional[str] = None    # nonconstant witness


class ComponentShape(BaseModel):
    d_i: DegreeValue
    D_i: DegreeValue


class NormalFormSection(BaseModel):
    status: str                          # "ok" | "failed"
    d: Optional[int] = None
    D: Optional[int] = None
    per_component: List[ComponentShape] = []
    message: Optional[str] = None


class EvidenceStep(BaseModel):
    k: int
    degrees: List[DegreeValue]
    orders: List[DegreeValue]
    term_count: int


class PascalSection(BaseModel):
    status: str                          # "ok" | "skipped"
    outcome: Optional[str] = None        # "finite" | "not_within_bound"
    index: Optional[int] = None
    per_component_indices: List[Optional[int]] = []
    m_max: Optional[int] = None
    exact_steps: int = 0
    probe_truncation: Optional[int] = None
    evidence: List[EvidenceStep] = []
    probe_evidence: List[EvidenceStep] = []   # truncated steps behind the certificate


class InverseSection(BaseModel):
    status: str                          # "ok" | "failed" | "skipped"
    present: bool = False
    method: Optional[str] = None         # "jh2_shortcut" | "criterion" | "identity"
    degree: Optional[int] = None
    m_used: Optional[int] = None
    verified: Optional[bool] = None
    components: List[str] = []


class NilpotencySection(BaseModel):
    status: str                          # "ok" | "skipped"
    nilpotent: Optional[bool] = None
    index: Optional[int] = None
    strongly_nilpotent: Optional[bool] = None
    strong_index: Optional[int] = None
    witness_entry: Optional[str] = None
    finite_field_caveat: bool = False
    sample_seed: Optional[int] = None
    sampled_product_zero: Optional[bool] = None   # J(v_1)...J(v_n) at seeded points


class BoundsSection(BaseModel):
    deg_bound_n_minus_1: str = "not_applicable"   # "ok" | "violated" | "not_applicable"
    johnston: str = "not_applicable"


class AnalysisReport(BaseModel):
    report_schema: str = Field(default=SCHEMA_ID, serialization_alias="schema")
    map_name: str
    n: int
    field: str
    keller: KellerSection
    normal_form: NormalFormSection
    pascal: PascalSection
    inverse: InverseSection
    nilpotency: NilpotencySection
    bounds: BoundsSection
    timings_ms: Dict[str, int] = {}


def build_report(name: str, n: int, field: str, stages: Dict[str, Dict[str, Any]],
                 timings: Dict[str, int]) -> AnalysisReport:
    """Convert analyzer stage results into the report model."""
    keller = stages.get("keller", {})
    normal_form = stages.get("normal_form", {})
    pascal = stages.get("pascal", {})
    inverse = stages.get("inverse", {})
    nilpotency = stages.get("nilpotency", {})
    bounds = stages.get("bounds", {})

    return AnalysisReport(
        map_name=name,
        n=n,
        field=field,
        keller=KellerSection(**keller),
        normal_form=NormalFormSection(**normal_form),
        pascal=PascalSection(**pascal),
        inverse=InverseSection(**inverse),
        nilpotency=NilpotencySection(**nilpotency),
        bounds=BoundsSection(**bounds),
        timings_ms=dict(timings),
    )


def report_dict(report: BaseModel) -> Dict[str, Any]:
    return report.model_dump(by_alias=True)


def emit_report(report: BaseModel, indent: Optional[int] = None) -> str:
    """Stable-key-order JSON text."""
    if indent is None:
        indent = get_config().get("output.indent", 2)
    return json.dumps(report_dict(report), indent=indent, ensure_ascii=False)


def emit_json(payload: Any, indent: Optional[int] = None) -> str:
    if indent is None:
        indent = get_config().get("output.indent", 2)
    if isinstance(payload, BaseModel):
        payload = report_dict(payload)
    return json.dumps(payload, indent=indent, ensure_ascii=False)


# =========================================================================
# Text rendering
# =========================================================================

def _header(config: PascalisConfig, key: str) -> str:
    return config.get(f"messages.headers.{key}", f"[{key}]")


def format_text_report(report: AnalysisReport, config: Optional[PascalisConfig] = None) -> str:
    """Human-readable view of a report."""
    config = config or get_config()
    out: List[str] = []
    bar = "=" * 70

    out.append(bar)
    out.append(f"  {_header(config, 'main_title')}: {report.map_name}")
    out.append(bar)
    out.append(f"n = {report.n}, field = {report.field}")

    # 1. Keller
    out.append("")
    out.append(_header(config, "keller"))
    if report.keller.status == "yes":
        out.append(f"  det J_F = {report.keller.constant}")
    else:
        out.append(f"  not Keller, det J_F = {report.keller.determinant}")

    # 2. Normal form
    out.append("")
    out.append(_header(config, "normal_form"))
    nf = report.normal_form
    if nf.status == "ok":
        out.append(f"  d = {nf.d}, D = {nf.D}")
        for i, shape in enumerate(nf.per_component, start=1):
            out.append(f"  H_{i}: order {shape.d_i}, degree {shape.D_i}")
    else:
        out.append(f"  {nf.message}")

    # 3. Pascal
    out.append("")
    out.append(_header(config, "pascal"))
    pascal = report.pascal
    if pascal.status == "skipped":
        out.append(f"  {config.get('messages.status.skipped', 'skipped')}")
    elif pascal.outcome == "finite":
        out.append(f"  Pascal finite, index {pascal.index} "
                   f"(per component {pascal.per_component_indices})")
    else:
        out.append(f"  no zero step up to m_max = {pascal.m_max} "
                   f"({pascal.exact_steps} exact steps)")
        if pascal.probe_truncation is not None:
            out.append(f"  certified by truncation at degree {pascal.probe_truncation}")
        for step in pascal.evidence:
            out.append(f"    k={step.k:<3d} deg={step.degrees} terms={step.term_count}")
        if pascal.probe_evidence:
            out.append(f"  truncated steps (degree <= {pascal.probe_truncation}):")
            for step in pascal.probe_evidence:
                out.append(f"    k={step.k:<3d} deg={step.degrees} terms={step.term_count}")

    # 4. Inverse
    out.append("")
    out.append(_header(config, "inverse"))
    inv = report.inverse
    if inv.present:
        state = "verified" if inv.verified else "NOT verified"
        out.append(f"  {inv.method}, degree {inv.degree}, {state}")
        for i, comp in enumerate(inv.components, start=1):
            out.append(f"  G_{i} = {comp}")
    else:
        out.append(f"  {config.get(f'messages.status.{inv.status}', inv.status)}")

    # 5. Nilpotency
    out.append("")
    out.append(_header(config, "nilpotency"))
    nil = report.nilpotency
    if nil.status == "ok":
        out.append(f"  nilpotent: {nil.nilpotent} (index {nil.index})")
        out.append(f"  strongly nilpotent: {nil.strongly_nilpotent} (p = {nil.strong_index})")
        if nil.witness_entry:
            out.append(f"  witness {nil.witness_entry}")
        if nil.sampled_product_zero is not None:
            out.append(f"  product at {report.n} seeded points (seed {nil.sample_seed}) "
                       f"is zero: {nil.sampled_product_zero}")
        if nil.finite_field_caveat:
            out.append("  note: symbolic test over a finite field")
    else:
        out.append(f"  {config.get('messages.status.skipped', 'skipped')}")

    # 6. Bounds
    out.append("")
    out.append(_header(config, "bounds"))
    out.append(f"  deg F^-1 <= (deg F)^(n-1): {report.bounds.deg_bound_n_minus_1}")
    out.append(f"  Johnston bound: {report.bounds.johnston}")

    if any(report.timings_ms.values()):
        out.append("")
        out.append("  " + ", ".join(f"{k} {v} ms" for k, v in report.timings_ms.items()))
    out.append(bar)
    return "\n".join(out)
