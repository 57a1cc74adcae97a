"""Line-oriented scene description format (``.scn``).

Example::

    scene "mzi" polarization off
    source s:1+0i, vac:0
    beamsplitter s vac -> a b theta=pi/4
    mirror a -> a2 freq=3 amp=0.01
    beamsplitter a2 b -> d1 d2
    detect d1 as D1
    detect d2 as D2

See ``docs/scene-format.md`` for the full grammar.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import (
    Attenuator,
    BeamSplitter,
    Block,
    Circuit,
    Detector,
    Linear,
    Mirror,
    Phase,
    Polarizer,
    PolRotator,
    VibrationSpec,
)
from .errors import BasisError, ParseError, SceneTopologyError, SemanticError, TopologyError
from .hilbert import BasisLabel

NORM_TOL = 1e-9

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#.*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<badstring>")
  | (?P<arrow>->)
  | (?P<punct>[,:=@])
  | (?P<atom>(?:(?!->)[^\s,:=@\#"])+)
    """,
    re.VERBOSE,
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*\Z")
_FLOAT = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_NUMBER = re.compile(rf"[+-]?{_FLOAT}\Z")
_COMPLEX = re.compile(rf"(?P<re>[+-]?{_FLOAT})(?:(?P<im>[+-]{_FLOAT})i)?\Z")
CONSTANTS = {"pi": math.pi, "pi/2": math.pi / 2, "pi/4": math.pi / 4, "pi/8": math.pi / 8}

# kind -> (class, inputs, outputs, allowed keys)
KINDS = {
    "beamsplitter": (BeamSplitter, 2, 2, ("theta", "phi")),
    "phase": (Phase, 1, 1, ("theta",)),
    "mirror": (Mirror, 1, 1, ("name", "freq", "amp", "phase")),
    "attenuate": (Attenuator, 1, 1, ("t",)),
    "block": (Block, 1, 0, ()),
    "polrot": (PolRotator, 1, 1, ("angle",)),
    "polarizer": (Polarizer, 1, 1, ("axis",)),
}
_REQUIRED = {"phase": ("theta",), "attenuate": ("t",), "polrot": ("angle",), "polarizer": ("axis",)}
_POL_KINDS = ("polrot", "polarizer")
_AXES = ("H", "V", "L", "R")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


@dataclass
class SourceEntry:
    wire: str
    pol: str | None
    amp: complex
    column: int


@dataclass
class SourceStmt:
    entries: list[SourceEntry]
    line: int


@dataclass
class DetectStmt:
    wire: str
    pol: str | None
    name: str
    line: int
    column: int


@dataclass
class ElementStmt:
    kind: str
    inputs: list[str]
    outputs: list[str]
    params: dict
    line: int
    column: int


@dataclass
class SceneDoc:
    name: str
    polarization: bool
    statements: list = field(default_factory=list)

    @property
    def sources(self) -> list[SourceStmt]:
        return [s for s in self.statements if isinstance(s, SourceStmt)]

    @property
    def detectors(self) -> list[DetectStmt]:
        return [s for s in self.statements if isinstance(s, DetectStmt)]

    @property
    def elements(self) -> list[ElementStmt]:
        return [s for s in self.statements if isinstance(s, ElementStmt)]


def _tokenize(text: str, line: int) -> list[Token]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the atom branch matches any other char
            raise ParseError("unexpected character", line, pos + 1)
        kind = m.lastgroup
        if kind == "badstring":
            raise ParseError("unterminated string", line, pos + 1, "closing '\"'")
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), pos + 1))
        pos = m.end()
    return tokens


class _Line:
    """Cursor over one line's tokens."""

    def __init__(self, tokens: list[Token], line: int, length: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line
        self.end_col = length + 1

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def column(self) -> int:
        tok = self.peek()
        return tok.column if tok else self.end_col

    def fail(self, message: str, expected: str | None = None, column: int | None = None):
        raise ParseError(message, self.line, self.column() if column is None else column, expected)

    def next(self, expected: str) -> Token:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of line", expected)
        self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text and tok.kind in ("punct", "arrow", "atom"):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            self.fail(f"found {tok.text!r}" if tok else "unexpected end of line", repr(text))
        self.pos += 1
        return tok

    def ident(self, what: str) -> Token:
        tok = self.next(what)
        if tok.kind != "atom" or not _IDENT.match(tok.text):
            self.fail(f"invalid {what} {tok.text!r}", what, tok.column)
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            self.fail(f"unexpected {tok.text!r}", "end of line")


def _complex(tok: Token, cur: _Line) -> complex:
    m = _COMPLEX.match(tok.text) if tok.kind == "atom" else None
    if m is None:
        cur.fail(f"invalid complex literal {tok.text!r}", "complex number like 0.7+0.7i", tok.column)
    value = complex(float(m["re"]), float(m["im"]) if m["im"] else 0.0)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        cur.fail(f"complex literal {tok.text!r} overflows", "finite number", tok.column)
    return value


def _number(tok: Token, cur: _Line) -> float:
    text = tok.text
    sign = 1.0
    if text[:1] in "+-" and text[1:] in CONSTANTS:
        sign, text = (-1.0 if text[0] == "-" else 1.0), text[1:]
    if text in CONSTANTS:
        return sign * CONSTANTS[text]
    if tok.kind != "atom" or not _NUMBER.match(tok.text):
        cur.fail(f"invalid number {tok.text!r}", "number or one of pi, pi/2, pi/4, pi/8", tok.column)
    value = float(tok.text)
    if not math.isfinite(value):
        cur.fail(f"number {tok.text!r} overflows", "finite number", tok.column)
    return value


def _header(cur: _Line) -> tuple[str, bool]:
    cur.expect("scene")
    tok = cur.next("scene name string")
    if tok.kind != "string":
        cur.fail(f"found {tok.text!r}", "scene name string", tok.column)
    name = re.sub(r"\\(.)", r"\1", tok.text[1:-1])
    polarization = False
    if cur.accept("polarization"):
        tok = cur.next("'on' or 'off'")
        if tok.text not in ("on", "off"):
            cur.fail(f"found {tok.text!r}", "'on' or 'off'", tok.column)
        polarization = tok.text == "on"
    cur.done()
    return name, polarization


def _source(cur: _Line, polarization: bool) -> SourceStmt:
    entries = []
    while True:
        wire = cur.ident("wire name")
        pol = None
        if cur.accept("@"):
            tok = cur.next("H or V")
            if tok.text not in ("H", "V"):
                cur.fail(f"found {tok.text!r}", "H or V", tok.column)
            if not polarization:
                raise SemanticError("polarized source entry in a polarization-off scene", cur.line, tok.column)
            pol = tok.text
        cur.expect(":")
        amp = _complex(cur.next("complex amplitude"), cur)
        entries.append(SourceEntry(wire.text, pol, amp, wire.column))
        if not cur.accept(","):
            break
    cur.done()
    return SourceStmt(entries, cur.line)


def _detect(cur: _Line, polarization: bool, column: int) -> DetectStmt:
    wire = cur.ident("wire name").text
    pol = None
    if cur.accept("pol"):
        cur.expect("=")
        tok = cur.next("H, V, L or R")
        if tok.text not in _AXES:
            cur.fail(f"found {tok.text!r}", "H, V, L or R", tok.column)
        if not polarization:
            raise SemanticError("detector polarization in a polarization-off scene", cur.line, tok.column)
        pol = tok.text
    name = wire
    if cur.accept("as"):
        name = cur.ident("detector name").text
    cur.done()
    return DetectStmt(wire, pol, name, cur.line, column)


def _wires(cur: _Line) -> list[str]:
    out = []
    while (tok := cur.peek()) is not None and tok.kind == "atom" and "=" not in tok.text:
        if cur.pos + 1 < len(cur.tokens) and cur.tokens[cur.pos + 1].text == "=":
            break
        out.append(cur.ident("wire name").text)
    return out


def _element(cur: _Line, kind: str, polarization: bool, column: int) -> ElementStmt:
    _, n_in, n_out, keys = KINDS[kind]
    inputs = _wires(cur)
    outputs: list[str] = []
    if kind != "block" or cur.peek() is not None:
        cur.expect("->")
        outputs = _wires(cur)
    if len(inputs) != n_in or len(outputs) != n_out:
        cur.fail(
            f"{kind} needs {n_in} input(s) and {n_out} output(s), got {len(inputs)} and {len(outputs)}",
            f"{n_in} -> {n_out} wires",
            column,
        )
    params = {}
    while cur.peek() is not None:
        key = cur.ident("parameter name")
        if key.text not in keys:
            allowed = ", ".join(keys) if keys else "no parameters"
            cur.fail(f"unknown parameter {key.text!r} for {kind}", allowed, key.column)
        if key.text in params:
            cur.fail(f"parameter {key.text!r} given twice", None, key.column)
        cur.expect("=")
        tok = cur.next(f"value for {key.text}")
        if key.text == "name":
            if tok.kind != "atom" or not _IDENT.match(tok.text):
                cur.fail(f"invalid name {tok.text!r}", "identifier", tok.column)
            params["name"] = tok.text
        elif key.text == "axis":
            if tok.text not in _AXES:
                cur.fail(f"found {tok.text!r}", "H, V, L or R", tok.column)
            params["axis"] = tok.text
        else:
            params[key.text] = _number(tok, cur)
    for req in _REQUIRED.get(kind, ()):
        if req not in params:
            cur.fail(f"{kind} requires {req}=", f"{req}=value", column)
    if kind in _POL_KINDS and not polarization:
        raise SemanticError(f"{kind} element in a polarization-off scene", cur.line, column)
    return ElementStmt(kind, inputs, outputs, params, cur.line, column)


def parse(text: str) -> SceneDoc:
    """Parse scene text into a :class:`SceneDoc` (no wiring checks yet)."""
    doc: SceneDoc | None = None
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        cur = _Line(_tokenize(raw, lineno), lineno, len(raw))
        head = cur.peek()
        if head is None:
            continue
        if doc is None:
            doc = SceneDoc(*_header(cur))
            continue
        word = cur.next("statement")
        if word.kind != "atom":
            cur.fail(f"found {word.text!r}", "source, detect or an element kind", word.column)
        if word.text == "scene":
            cur.fail("duplicate scene header", None, word.column)
        elif word.text == "source":
            if doc.sources:
                raise SemanticError(
                    f"second source statement (first on line {doc.sources[0].line})", lineno, word.column
                )
            doc.statements.append(_source(cur, doc.polarization))
        elif word.text == "detect":
            doc.statements.append(_detect(cur, doc.polarization, word.column))
        elif word.text in KINDS:
            doc.statements.append(_element(cur, word.text, doc.polarization, word.column))
        else:
            cur.fail(f"unknown statement {word.text!r}", "source, detect or " + ", ".join(KINDS), word.column)
    if doc is None:
        raise ParseError("empty scene", 1, 1, "'scene'")
    if not doc.sources:
        raise SemanticError("scene has no source statement", last_line, 1)
    if not doc.detectors:
        raise SemanticError("scene has no detect statement", last_line, 1)
    return doc


def _build_element(stmt: ElementStmt):
    cls = KINDS[stmt.kind][0]
    p = dict(stmt.params)
    ins, outs = tuple(stmt.inputs), tuple(stmt.outputs)
    if stmt.kind == "mirror":
        vib = None
        if "freq" in p or "amp" in p:
            if "freq" not in p or "amp" not in p:
                raise SemanticError("a vibrating mirror needs both freq= and amp=", stmt.line, stmt.column)
            vib = VibrationSpec(p["freq"], p["amp"], p.get("phase", 0.0))
        elif "phase" in p:
            raise SemanticError("mirror phase= only applies with freq= and amp=", stmt.line, stmt.column)
        return Mirror(ins, outs, vibration=vib, name=p.get("name"))
    if stmt.kind == "block":
        return Block(ins)
    return cls(ins, outs, **p)


def lower(doc: SceneDoc) -> Circuit:
    """Check wiring and build the :class:`Circuit`."""
    produced: dict[str, int] = {}
    consumed: dict[str, int] = {}

    def produce(wire: str, line: int, col: int) -> None:
        if wire in produced:
            raise SemanticError(f"wire {wire!r} produced on line {produced[wire]} and again on line {line}", line, col)
        produced[wire] = line

    def consume(wire: str, line: int, col: int) -> None:
        if wire in consumed:
            raise SemanticError(f"wire {wire!r} consumed on line {consumed[wire]} and again on line {line}", line, col)
        consumed[wire] = line

    (src,) = doc.sources
    source: dict[BasisLabel, complex] = {}
    for e in src.entries:
        pol = (e.pol or "H") if doc.polarization else None
        lab = BasisLabel(e.wire, pol)
        if lab in source:
            raise SemanticError(f"source entry {e.wire!r} repeated", src.line, e.column)
        source[lab] = e.amp
        if e.wire not in produced:
            produce(e.wire, src.line, e.column)
    norm2 = math.fsum(abs(a) ** 2 for a in source.values())
    if abs(norm2 - 1.0) > NORM_TOL:
        raise SemanticError(f"source amplitudes have squared norm {norm2!r}, not 1", src.line, 1)

    elements = []
    for stmt in doc.elements:
        for w in stmt.outputs:
            produce(w, stmt.line, stmt.column)
        for w in stmt.inputs:
            consume(w, stmt.line, stmt.column)
        try:
            elements.append(_build_element(stmt))
        except (ValueError, TopologyError) as exc:
            raise SemanticError(str(exc), stmt.line, stmt.column) from None
    names: dict[str, int] = {}
    detectors = []
    for d in doc.detectors:
        consume(d.wire, d.line, d.column)
        if d.name in names:
            raise SemanticError(f"detector name {d.name!r} already used on line {names[d.name]}", d.line, d.column)
        names[d.name] = d.line
        detectors.append(Detector(d.name, d.wire, d.pol))

    lines = {w: ln for w, ln in produced.items()}
    for w, ln in consumed.items():
        if w not in produced:
            raise SemanticError(f"unknown wire {w!r} (never produced)", ln, 1)
    for w, ln in produced.items():
        if w not in consumed:
            raise SemanticError(f"wire {w!r} is never consumed or detected", lines[w], 1)

    try:
        return Circuit(source, elements, detectors, name=doc.name, polarization=doc.polarization)
    except TopologyError as exc:
        line = min((s.line for s in doc.elements), default=1)
        raise SceneTopologyError(str(exc), line, 1) from None
    except BasisError as exc:  # pragma: no cover - polarization checks run during parsing
        raise SemanticError(str(exc), 1, 1) from None


def load(text: str) -> Circuit:
    return lower(parse(text))


def load_file(path: str | Path) -> Circuit:
    return load(Path(path).read_text(encoding="utf-8"))


# -- emitting ------------------------------------------------------------


def _fmt_number(x: float) -> str:
    for name, value in CONSTANTS.items():
        if x == value:
            return name
        if x == -value:
            return "-" + name
    return repr(float(x))


def _fmt_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    sign = "-" if im < 0 else "+"
    return f"{re_!r}{sign}{abs(im)!r}i"


def dump(c: Circuit) -> str:
    """Scene text that lowers back to an equivalent circuit."""
    name = c.name.replace("\\", "\\\\").replace('"', '\\"')
    lines = [f'scene "{name}" polarization {"on" if c.polarization else "off"}']
    entries = []
    for w, vec in c.source.items():
        entries.append(f"{w}:{_fmt_complex(vec[0])}")
        if c.polarization and vec[1] != 0:
            entries.append(f"{w}@V:{_fmt_complex(vec[1])}")
    lines.append("source " + ", ".join(entries))
    for e in c.elements:
        if isinstance(e, Linear):
            raise ValueError("linear probe elements have no scene-file form")
        head = f"{e.kind} {' '.join(e.inputs)} -> {' '.join(e.outputs)}".rstrip()
        params = e.params()
        if isinstance(e, Mirror) and params.get("name") == e.outputs[0]:
            params.pop("name")
        parts = [head]
        for k, v in params.items():
            parts.append(f"{k}={v if isinstance(v, str) else _fmt_number(v)}")
        lines.append(" ".join(parts))
    for d in c.detectors:
        text = f"detect {d.wire}"
        if d.pol is not None:
            text += f" pol={d.pol}"
        if d.name != d.wire:
            text += f" as {d.name}"
        lines.append(text)
    return "\n".join(lines) + "\n"
