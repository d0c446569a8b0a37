"""
pascalis - Command line interface

    pascalis analyze builtin:nagata
    pascalis analyze vasyunin.map --m-max 12 --format text
    pascalis invert builtin:vasyunin > inverse.map
    pascalis pascal builtin:gh_composition --m-max 10
    pascalis compose f.map g.map
    pascalis corpus --generate triangular --n 4 --seed 7

Inputs are map files, "-" for stdin, or builtin:<name>.
Exit codes: 0 success, 1 input or algebra error, 2 resource ceiling hit,
3 inverse candidate failed verification.
"""

import logging
import os
import sys
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import typer
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from typer.core import TyperGroup

from .analyzer import MapAnalyzer
from .coeff import FieldSpec
from .config import PascalisConfig, get_config, reset_config
from .corpus import builtin, list_builtins, random_tame, random_triangular
from .errors import InputError, InvalidField, PascalisError, ResourceLimit
from .logs import setup_logging
from .mapfile import read_map, serialize_map
from .nilpotency import nilpotency_report, quick_inverse_jh2, strong_nilpotency_numeric
from .pascal import default_m_max, invert, pascal_check, pascal_tableau
from .poly import format_poly
from .polymap import compose, denormalize_inverse, is_keller, iterate, jacobian, normalize
from .report import (
    KellerSection,
    NilpotencySection,
    PascalSection,
    emit_json,
    emit_report,
    format_text_report,
)

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RESOURCE = 2
EXIT_NOT_VERIFIED = 3


class _PascalisGroup(TyperGroup):
    """Bad flags or arguments exit with the input-error code; 2 belongs to ResourceLimit."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_INPUT
            raise


app = typer.Typer(cls=_PascalisGroup, add_completion=False,
                  help="Exact analysis of polynomial maps through their Pascal sequences.")


class OutputFormat(str, Enum):
    json = "json"
    text = "text"


class Generator(str, Enum):
    triangular = "triangular"
    tame = "tame"


class CliConfig(BaseModel):
    """Validated overrides of one invocation."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    input: Optional[str] = None
    m_max: Optional[int] = Field(default=None, ge=1)
    truncation: Optional[int] = Field(default=None, ge=0)    # None = unbounded
    term_ceiling: Optional[int] = Field(default=None, ge=1)
    field: Optional[FieldSpec] = None
    format: Optional[OutputFormat] = None
    seed: int = 0
    jobs: Optional[int] = Field(default=None, ge=0)
    verbose: bool = False
    timings: bool = False

    @field_validator("truncation", mode="before")
    @classmethod
    def _parse_truncation(cls, value: Any) -> Any:
        if value is None or isinstance(value, int):
            return value
        text = str(value).strip().lower()
        if text == "unbounded":
            return None
        try:
            return int(text)
        except ValueError:
            raise ValueError("truncation must be a natural number or 'unbounded'") from None

    @field_validator("field", mode="before")
    @classmethod
    def _parse_field(cls, value: Any) -> Any:
        if value is None or isinstance(value, FieldSpec):
            return value
        try:
            return FieldSpec.parse(str(value))
        except InvalidField as e:
            raise ValueError(str(e)) from None

    def output_format(self, config: PascalisConfig) -> OutputFormat:
        if self.format is not None:
            return self.format
        return OutputFormat(config.get("output.format", "json"))

    def resolved_jobs(self, config: PascalisConfig) -> int:
        if self.jobs is None:
            return config.jobs()
        return self.jobs or (os.cpu_count() or 1)

    def resolved_ceiling(self, config: PascalisConfig) -> int:
        # flag > PASCALIS_TERM_CEILING > config file
        if self.term_ceiling is not None:
            return self.term_ceiling
        return config.term_ceiling()


# =========================================================================
# Plumbing
# =========================================================================

def _fail(message: str, code: int) -> None:
    typer.echo(message, err=True)
    raise typer.Exit(code=code)


def _make_config(config_path: Optional[Path], **overrides: Any) -> CliConfig:
    try:
        cfg = CliConfig(**overrides)
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
                            for err in e.errors())
        _fail(f"error: invalid options: {details}", EXIT_INPUT)
    setup_logging(verbose=cfg.verbose)
    if config_path is not None:
        try:
            reset_config(str(config_path))
        except PascalisError as e:
            _fail(f"error: {e}", e.exit_code)
    return cfg


def _run(body: Callable[[], int]) -> None:
    """Run a command body and translate errors into exit codes."""
    try:
        code = body()
    except ResourceLimit as e:
        _fail(f"error: {e}", EXIT_RESOURCE)
    except PascalisError as e:
        _fail(f"error: {e}", e.exit_code)
    except OSError as e:
        _fail(f"error: {e}", EXIT_INPUT)
    if code:
        raise typer.Exit(code=code)


def load_input(source: str, field: Optional[FieldSpec] = None) -> Tuple[str, Any]:
    """(name, map) for a file path, "-" (stdin) or builtin:<name>."""
    if source.startswith(BUILTIN_PREFIX):
        example = builtin(source[len(BUILTIN_PREFIX):])
        f = example.map
        if field is not None and field != f.field:
            f = f.with_field(field)
        return example.name, f
    if source == "-":
        mapfile = read_map(sys.stdin.read(), field)
        return mapfile.name or "stdin", mapfile.map
    path = Path(source)
    mapfile = read_map(path.read_text(encoding="utf-8"), field)
    return mapfile.name or path.stem, mapfile.map


def _echo_payload(payload: Dict[str, Any], fmt: OutputFormat) -> None:
    if fmt == OutputFormat.json:
        typer.echo(emit_json(payload))
        return
    for key, value in payload.items():
        if isinstance(value, list):
            typer.echo(f"{key}:")
            for item in value:
                typer.echo(f"  {item}")
        else:
            typer.echo(f"{key}: {value}")


# ==================== analyze ====================

@app.command()
def analyze(
    source: str = typer.Argument(..., help="Map file, '-' for stdin, or builtin:<name>."),
    m_max: Optional[int] = typer.Option(None, "--m-max", help="Largest Pascal step to compute."),
    field: Optional[str] = typer.Option(None, "--field", help="q or gf:P (overrides the file)."),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", case_sensitive=False),
    jobs: Optional[int] = typer.Option(None, "--jobs", help="Worker processes (0 = all cores)."),
    term_ceiling: Optional[int] = typer.Option(None, "--term-ceiling",
                                               help="Largest polynomial, in terms, any step may produce."),
    truncate: Optional[str] = typer.Option(
        None, "--truncate",
        help="First truncation of the non-finiteness certificate, N or 'unbounded'."),
    seed: int = typer.Option(0, "--seed", help="Seed of the sampled strong-nilpotency points."),
    timings: bool = typer.Option(False, "--timings/--no-timings", help="Record stage timings."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Progress diagnostics on stderr."),
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML configuration file."),
) -> None:
    """Full report: Keller, normal form, Pascal check, inverse, nilpotency, bounds."""
    cfg = _make_config(config_path, command="analyze", input=source, m_max=m_max, field=field,
                       format=fmt, jobs=jobs, term_ceiling=term_ceiling, verbose=verbose,
                       timings=timings, truncation=truncate, seed=seed)

    def body() -> int:
        config = get_config()
        if cfg.truncation == 0:
            raise InputError("--truncate must be >= 1 or 'unbounded' for analyze")
        name, f = load_input(cfg.input, cfg.field)
        # --truncate unbounded: exact tableau only
        use_probe = truncate is None or cfg.truncation is not None
        analyzer = MapAnalyzer(config, m_max=cfg.m_max,
                               term_ceiling=cfg.resolved_ceiling(config),
                               jobs=cfg.resolved_jobs(config), record_timings=cfg.timings,
                               probe_truncation=cfg.truncation, use_probe=use_probe,
                               seed=cfg.seed)
        report = analyzer.analyze(f, name)
        if cfg.output_format(config) == OutputFormat.text:
            typer.echo(format_text_report(report, config))
        else:
            typer.echo(emit_report(report))
        return EXIT_OK

    _run(body)


# ==================== invert ====================

@app.command("invert")
def invert_cmd(
    source: str = typer.Argument(..., help="Map file, '-' for stdin, or builtin:<name>."),
    field: Optional[str] = typer.Option(None, "--field"),
    jobs: Optional[int] = typer.Option(None, "--jobs"),
    term_ceiling: Optional[int] = typer.Option(None, "--term-ceiling"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Print the inverse map in map-file format."""
    cfg = _make_config(config_path, command="invert", input=source, field=field, jobs=jobs,
                       term_ceiling=term_ceiling, verbose=verbose)

    def body() -> int:
        config = get_config()
        name, f = load_input(cfg.input, cfg.field)
        nf = normalize(f)
        g_inv = quick_inverse_jh2(nf)
        verified = True
        if g_inv is None:
            result = invert(nf, term_ceiling=cfg.resolved_ceiling(config),
                            jobs=cfg.resolved_jobs(config))
            g_inv, verified = result.inverse, result.verified
        inverse = denormalize_inverse(nf, g_inv)
        metadata = {} if verified else {"verified": "false"}
        typer.echo(serialize_map(inverse, f"{name}_inverse", metadata), nl=False)
        if not verified:
            typer.echo("error: inverse candidate failed composition verification", err=True)
            return EXIT_NOT_VERIFIED
        return EXIT_OK

    _run(body)


# ==================== pascal ====================

@app.command("pascal")
def pascal_cmd(
    source: str = typer.Argument(..., help="Map file, '-' for stdin, or builtin:<name>."),
    m_max: Optional[int] = typer.Option(None, "--m-max"),
    truncate: Optional[str] = typer.Option(None, "--truncate", help="N or 'unbounded'."),
    field: Optional[str] = typer.Option(None, "--field"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", case_sensitive=False),
    jobs: Optional[int] = typer.Option(None, "--jobs"),
    term_ceiling: Optional[int] = typer.Option(None, "--term-ceiling"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Pascal finiteness check, or a truncated tableau with --truncate N."""
    cfg = _make_config(config_path, command="pascal", input=source, m_max=m_max,
                       truncation=truncate, field=field, format=fmt, jobs=jobs,
                       term_ceiling=term_ceiling, verbose=verbose)

    def body() -> int:
        config = get_config()
        name, f = load_input(cfg.input, cfg.field)
        ceiling = cfg.resolved_ceiling(config)
        jobs_ = cfg.resolved_jobs(config)
        if cfg.truncation is not None:
            m = cfg.m_max or default_m_max(f)
            tab = pascal_tableau(f, m, cfg.truncation, term_ceiling=ceiling, jobs=jobs_)
            payload = {
                "map_name": name,
                "truncation": cfg.truncation,
                "m_max": m,
                "reached_zero": tab.reached_zero,
                "index": tab.index,
                "steps": [s.to_dict() for s in tab.stats],
            }
            if cfg.output_format(config) == OutputFormat.text:
                payload["steps"] = [f"k={s.k} deg={s.degrees} terms={s.total_terms}"
                                    for s in tab.stats]
            _echo_payload(payload, cfg.output_format(config))
            return EXIT_OK

        status = pascal_check(f, cfg.m_max, term_ceiling=ceiling, jobs=jobs_)
        section = PascalSection(
            status="ok",
            outcome=status.outcome.value,
            index=status.index,
            per_component_indices=list(status.component_indices),
            m_max=status.m_max,
            exact_steps=status.exact_steps,
            probe_truncation=status.probe.truncation if status.probe else None,
            evidence=[s.to_dict() for s in status.evidence],
            probe_evidence=[s.to_dict() for s in status.probe.evidence] if status.probe else [],
        )
        payload = {"map_name": name, **section.model_dump()}
        if cfg.output_format(config) == OutputFormat.text:
            payload["evidence"] = [f"k={s.k} deg={s.degrees} terms={s.total_terms}"
                                   for s in status.evidence]
            if status.probe is not None:
                payload["probe_evidence"] = [f"k={s.k} deg={s.degrees} terms={s.total_terms}"
                                             for s in status.probe.evidence]
        _echo_payload(payload, cfg.output_format(config))
        return EXIT_OK

    _run(body)


# ==================== nilpotent ====================

def _parse_vectors(text: str, n: int) -> List[List[Fraction]]:
    vectors = []
    for chunk in text.split(";"):
        values = [v.strip() for v in chunk.split(",")]
        if len(values) != n:
            raise InputError(f"--vectors: each vector needs {n} entries, got {chunk!r}")
        try:
            vectors.append([Fraction(v) for v in values])
        except (ValueError, ZeroDivisionError):
            raise InputError(f"--vectors: not a rational vector: {chunk!r}") from None
    return vectors


@app.command()
def nilpotent(
    source: str = typer.Argument(..., help="Map file, '-' for stdin, or builtin:<name>."),
    vectors: Optional[str] = typer.Option(
        None, "--vectors", help="Evaluate J_H(v1)...J_H(vk), e.g. '1,0,0;0,1,0'."),
    field: Optional[str] = typer.Option(None, "--field"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", case_sensitive=False),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Nilpotency and strong nilpotency of J_H."""
    cfg = _make_config(config_path, command="nilpotent", input=source, field=field, format=fmt,
                       verbose=verbose)

    def body() -> int:
        config = get_config()
        name, f = load_input(cfg.input, cfg.field)
        nf = normalize(f)
        rep = nilpotency_report(nf)
        section = NilpotencySection(
            status="ok",
            nilpotent=rep.nilpotent,
            index=rep.nilpotency_index,
            strongly_nilpotent=rep.strongly_nilpotent,
            strong_index=rep.strong_index_p,
            witness_entry=rep.witness,
            finite_field_caveat=rep.finite_field_caveat,
        )
        payload: Dict[str, Any] = {"map_name": name, **section.model_dump()}
        if vectors is not None:
            product = strong_nilpotency_numeric(jacobian(nf.h), _parse_vectors(vectors, nf.n))
            payload["numeric_product"] = product.format_rows()
        _echo_payload(payload, cfg.output_format(config))
        return EXIT_OK

    _run(body)


# ==================== keller ====================

@app.command()
def keller(
    source: str = typer.Argument(..., help="Map file, '-' for stdin, or builtin:<name>."),
    field: Optional[str] = typer.Option(None, "--field"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", case_sensitive=False),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Is det J_F a nonzero constant?"""
    cfg = _make_config(config_path, command="keller", input=source, field=field, format=fmt)

    def body() -> int:
        name, f = load_input(cfg.input, cfg.field)
        status = is_keller(f)
        if status.is_keller:
            section = KellerSection(status="yes", constant=str(status.constant))
        else:
            section = KellerSection(status="no", determinant=format_poly(status.determinant))
        _echo_payload({"map_name": name, **section.model_dump()}, cfg.output_format(get_config()))
        return EXIT_OK

    _run(body)


# ==================== compose / iterate ====================

@app.command("compose")
def compose_cmd(
    outer: str = typer.Argument(..., help="F: map file, '-' or builtin:<name>."),
    inner: str = typer.Argument(..., help="G: map file, '-' or builtin:<name>."),
    truncate: Optional[str] = typer.Option(None, "--truncate", help="N or 'unbounded'."),
    field: Optional[str] = typer.Option(None, "--field"),
    term_ceiling: Optional[int] = typer.Option(None, "--term-ceiling"),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Print F o G."""
    cfg = _make_config(config_path, command="compose", input=outer, truncation=truncate,
                       field=field, term_ceiling=term_ceiling)

    def body() -> int:
        name_f, f = load_input(outer, cfg.field)
        name_g, g = load_input(inner, cfg.field)
        result = compose(f, g, cfg.truncation, cfg.resolved_ceiling(get_config()))
        typer.echo(serialize_map(result, f"{name_f}_o_{name_g}"), nl=False)
        return EXIT_OK

    _run(body)


@app.command("iterate")
def iterate_cmd(
    source: str = typer.Argument(..., help="Map file, '-' for stdin, or builtin:<name>."),
    k: int = typer.Argument(..., min=0, help="Number of iterations."),
    truncate: Optional[str] = typer.Option(None, "--truncate", help="N or 'unbounded'."),
    field: Optional[str] = typer.Option(None, "--field"),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Print F^k (F^0 = X)."""
    cfg = _make_config(config_path, command="iterate", input=source, truncation=truncate,
                       field=field)

    def body() -> int:
        name, f = load_input(cfg.input, cfg.field)
        typer.echo(serialize_map(iterate(f, k, cfg.truncation), f"{name}_iterate_{k}"), nl=False)
        return EXIT_OK

    _run(body)


# ==================== corpus ====================

@app.command()
def corpus(
    generate: Optional[Generator] = typer.Option(
        None, "--generate", case_sensitive=False, help="Print a random map instead of the list."),
    n: int = typer.Option(3, "--n", min=1, help="Number of variables of a generated map."),
    max_deg: int = typer.Option(3, "--max-deg", min=2),
    factors: int = typer.Option(3, "--factors", min=1, help="Factors of a tame map."),
    seed: int = typer.Option(0, "--seed"),
    field: Optional[str] = typer.Option(None, "--field"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", case_sensitive=False),
    config_path: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """List built-in examples with their known facts, or generate a seeded random map."""
    cfg = _make_config(config_path, command="corpus", seed=seed, field=field, format=fmt)

    def body() -> int:
        if generate == Generator.triangular:
            f = random_triangular(n, max_deg, cfg.seed)
            if cfg.field is not None:
                f = f.with_field(cfg.field)
            label = f"random_triangular(n={n}, max_deg={max_deg}, seed={cfg.seed})"
            typer.echo(serialize_map(f, label), nl=False)
            return EXIT_OK
        if generate == Generator.tame:
            if n < 2:
                raise InputError("tame maps need --n >= 2")
            sample = random_tame(n, factors, max_deg, cfg.seed)
            label = f"random_tame(n={n}, factors={factors}, max_deg={max_deg}, seed={cfg.seed})"
            typer.echo(serialize_map(sample.map, label, {"factors": " ".join(sample.factors)}),
                       nl=False)
            return EXIT_OK

        entries = []
        for example in list_builtins():
            entries.append({"name": example.name, "n": example.map.n,
                            "degree": int(example.map.degree()), **example.expected.as_dict()})
        if cfg.output_format(get_config()) == OutputFormat.text:
            for entry in entries:
                facts = ", ".join(f"{k}={v}" for k, v in entry.items()
                                  if k not in ("name", "provenance"))
                typer.echo(f"{entry['name']}: {facts}")
        else:
            typer.echo(emit_json({"builtins": entries}))
        return EXIT_OK

    _run(body)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
