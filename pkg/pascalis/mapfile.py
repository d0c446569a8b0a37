"""
pascalis - Map file format

    # name: nagata
    # source: anything you like
    vars: x1 x2 x3
    field: Q
    x1 - 2*x1*x2*x3 - 2*x2^3 - x1^2*x3^3 - 2*x1*x2^2*x3^2 - x2^4*x3
    x2 + x1*x3^2 + x2^2*x3
    x3

One expression per component, explicit '*', natural exponents after '^',
rationals written p/q. '#' starts a comment; "# key: value" comment lines
are kept as metadata. The field line is optional (default Q).

Parsing is recursive descent with one token of lookahead; every error
carries the 1-based line and column of the offending token.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .coeff import FieldSpec, QQ
from .errors import (
    DivisionByZero,
    InvalidField,
    MapArityMismatch,
    MapSyntaxError,
    NonNaturalExponent,
    UnknownVariable,
    ZeroDenominator,
)
from .poly import MAX_DEGREE, Ambient, Poly, format_poly
from .polymap import PolyMap

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_META = re.compile(r"^\s*#\s*([A-Za-z_][A-Za-z0-9_\-]*)\s*:\s*(.*?)\s*$")
_OPERATORS = "+-*/^()"
_DIGITS = "0123456789"


@dataclass
class MapFile:
    names: Tuple[str, ...]
    field: FieldSpec
    map: PolyMap
    name: Optional[str] = None
    metadata: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class _Token:
    kind: str      # "num" | "ident" | "op" | "end"
    text: str
    column: int


def _tokenize(content: str, lineno: int) -> List[_Token]:
    tokens = []
    pos = 0
    while pos < len(content):
        ch = content[pos]
        if ch.isspace():
            pos += 1
        elif ch in _DIGITS:
            start = pos
            while pos < len(content) and content[pos] in _DIGITS:
                pos += 1
            tokens.append(_Token("num", content[start:pos], start + 1))
        elif IDENT.match(content, pos):
            match = IDENT.match(content, pos)
            tokens.append(_Token("ident", match.group(0), pos + 1))
            pos = match.end()
        elif ch in _OPERATORS:
            tokens.append(_Token("op", ch, pos + 1))
            pos += 1
        else:
            raise MapSyntaxError(lineno, pos + 1, "a number, variable, operator or parenthesis", ch)
    tokens.append(_Token("end", "", len(content) + 1))
    return tokens


class _ExpressionParser:
    """expr := ["-"] term (("+" | "-") term)*  over one line."""

    def __init__(self, tokens: List[_Token], lineno: int, ambient: Ambient,
                 index_of: Dict[str, int]):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.ambient = ambient
        self.index_of = index_of

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def accept(self, op: str) -> Optional[_Token]:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.advance()
        return None

    def error(self, expected: str) -> MapSyntaxError:
        tok = self.peek()
        return MapSyntaxError(self.lineno, tok.column, expected, tok.text or "end of line")

    def parse_line(self) -> Poly:
        result = self.parse_expr()
        if self.peek().kind != "end":
            raise self.error("'+', '-', '*' or end of line")
        return result

    def parse_expr(self) -> Poly:
        negate = self.accept("-") is not None
        result = self.parse_term()
        if negate:
            result = result.neg()
        while True:
            if self.accept("+"):
                result = result.add(self.parse_term())
            elif self.accept("-"):
                result = result.sub(self.parse_term())
            else:
                return result

    def parse_term(self) -> Poly:
        result = self.parse_factor()
        while self.accept("*"):
            result = result.mul(self.parse_factor())
        return result

    def parse_factor(self) -> Poly:
        base = self.parse_base()
        if self.accept("^"):
            tok = self.peek()
            if tok.kind != "num":
                raise NonNaturalExponent(self.lineno, tok.column, tok.text or "end of line")
            self.advance()
            exponent = int(tok.text)
            if exponent > MAX_DEGREE:
                raise NonNaturalExponent(self.lineno, tok.column, tok.text)
            base = base.pow(exponent)
        return base

    def parse_base(self) -> Poly:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            value = Fraction(int(tok.text))
            if self.accept("/"):
                den = self.peek()
                if den.kind != "num":
                    raise self.error("a positive integer denominator")
                self.advance()
                if int(den.text) == 0:
                    raise ZeroDenominator(self.lineno, den.column)
                value = Fraction(int(tok.text), int(den.text))
                try:
                    return Poly.constant(self.ambient, value)
                except DivisionByZero:
                    raise ZeroDenominator(self.lineno, den.column) from None
            return Poly.constant(self.ambient, value)
        if tok.kind == "ident":
            self.advance()
            if tok.text not in self.index_of:
                raise UnknownVariable(tok.text, self.lineno, tok.column)
            return self.ambient.var(self.index_of[tok.text])
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            if not self.accept(")"):
                raise self.error("')'")
            return inner
        raise self.error("a number, variable or '('")


def _first_column(content: str) -> int:
    return len(content) - len(content.lstrip()) + 1


def read_map(text: str, field: Optional[FieldSpec] = None) -> MapFile:
    """Parse map text; `field` overrides the header's field line."""
    names: Optional[Tuple[str, ...]] = None
    spec: Optional[FieldSpec] = None
    ambient: Optional[Ambient] = None
    index_of: Dict[str, int] = {}
    components: List[Poly] = []
    metadata: Dict[str, str] = {}
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        meta = _META.match(raw)
        if meta:
            metadata[meta.group(1)] = meta.group(2)
            continue
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue
        stripped = content.strip()
        col = _first_column(content)

        if names is None:
            if not stripped.startswith("vars:"):
                raise MapSyntaxError(lineno, col, "'vars:' header", stripped.split()[0])
            declared = stripped[len("vars:"):].split()
            if not declared:
                raise MapSyntaxError(lineno, col + len(stripped), "a variable name", "end of line")
            offset = content.index("vars:") + len("vars:")
            for name in declared:
                at = content.index(name, offset)
                offset = at + len(name)
                if not IDENT.fullmatch(name):
                    raise MapSyntaxError(lineno, at + 1, "a variable name", name)
                if name in index_of:
                    raise MapSyntaxError(lineno, at + 1, "a variable name not declared before", name)
                index_of[name] = len(index_of)
            names = tuple(declared)
            continue

        if ambient is None:
            if stripped.startswith("field:"):
                try:
                    spec = FieldSpec.parse(stripped[len("field:"):])
                except InvalidField:
                    at = content.index("field:") + len("field:")
                    raise MapSyntaxError(lineno, at + 1, "Q or GF(p) with p prime",
                                         stripped[len("field:"):].strip()) from None
                ambient = Ambient(len(names), field or spec, names)
                continue
            ambient = Ambient(len(names), field or QQ, names)

        if len(components) == len(names):
            raise MapArityMismatch(
                f"more than {len(names)} component lines for {len(names)} variables", lineno, col)
        parser = _ExpressionParser(_tokenize(content, lineno), lineno, ambient, index_of)
        components.append(parser.parse_line())

    if names is None:
        raise MapSyntaxError(max(last_line, 1), 1, "'vars:' header", "end of input")
    if ambient is None:
        ambient = Ambient(len(names), field or QQ, names)
    if len(components) != len(names):
        raise MapArityMismatch(
            f"{len(components)} component lines for {len(names)} variables", last_line + 1, 1)
    return MapFile(names, ambient.field, PolyMap(components), metadata.get("name"), metadata)


def parse_map(text: str, field: Optional[FieldSpec] = None) -> PolyMap:
    return read_map(text, field).map


def load_map_file(path: Path, field: Optional[FieldSpec] = None) -> MapFile:
    return read_map(Path(path).read_text(encoding="utf-8"), field)


def serialize_map(f: PolyMap, name: Optional[str] = None,
                  metadata: Optional[Dict[str, str]] = None) -> str:
    """Canonical text; parse_map(serialize_map(f)) == f."""
    lines = []
    if name:
        lines.append(f"# name: {name}")
    for key, value in (metadata or {}).items():
        if key != "name":
            lines.append(f"# {key}: {value}")
    lines.append("vars: " + " ".join(f.ambient.names))
    lines.append(f"field: {f.field}")
    lines.extend(format_poly(c) for c in f.components)
    return "\n".join(lines) + "\n"


def serialize_components(f: PolyMap) -> List[str]:
    return [format_poly(c) for c in f.components]
