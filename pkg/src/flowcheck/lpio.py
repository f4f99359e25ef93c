"""Text formats: LP models, assignment files and cost-matrix instance files."""

from __future__ import annotations

import io
import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, TextIO

from .core import (Assignment, Constraint, Instance, ModelConfig, Relation, format_rational,
                   key_order, ordered_map, partitions_of, relabel, resolve_threads)
from .model_blp import admissible

WRAP = 200

_NAME = re.compile(r"^([xyz])((?:_\d+)+)$")
_TERM = re.compile(r"([+-])?\s*(?:(\d+(?:/\d+)?)\s+)?([xyz](?:_\d+)+)")
_LABEL = re.compile(r"^\s*([A-Za-z][\w.]*):\s*(.*)$")
_RELATION = re.compile(r"(<=|>=|=)\s*(-?\d+(?:/\d+)?)\s*$")


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class InadmissibleVariable(ValueError):
    pass


def var_name(key) -> str:
    kind = {3: "x", 6: "y", 9: "z"}[len(key)]
    return kind + "_" + "_".join(str(k) for k in key)


def parse_var_name(name: str) -> tuple:
    m = _NAME.match(name.strip())
    if not m:
        raise ValueError(f"not a variable name: {name!r}")
    key = tuple(int(part) for part in m.group(2)[1:].split("_"))
    if {3: "x", 6: "y", 9: "z"}.get(len(key)) != m.group(1):
        raise ValueError(f"{name!r}: {m.group(1)} takes {'369'['xyz'.index(m.group(1))]} indices")
    return key


# ---------------------------------------------------------------------------
# LP emission


def _render_terms(terms) -> str:
    """Signed terms (" +name", " -name", " +c name"), wrapped every ~WRAP characters."""
    parts = []
    length = 0
    last_cut = 0
    for coef, key in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        factor = "" if mag == 1 else f"{format_number(mag)} "
        piece = f" {sign}{factor}{var_name(key)}"
        parts.append(piece)
        length += len(piece)
        if length - last_cut > WRAP:
            last_cut = length
            parts.append(" \n")
            length += 2
    text = "".join(parts)
    if text.startswith(" +"):
        text = text[2:]
    return text


def format_number(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else format_rational(q)


def render_constraint(con: Constraint) -> str:
    return f"{con.label}: {_render_terms(con.terms)}{con.relation.value}{format_number(con.rhs)}\n"


def _objective_terms(model) -> list:
    terms = model.objective_terms
    return list(terms() if callable(terms) else terms)


def _declared(model) -> Iterable:
    declared = getattr(model, "declared_variables", None)
    return declared() if declared is not None else ()


def emit_lp(model, sink: TextIO, pins: Optional[Assignment] = None,
            total_flow: Optional[int] = None, threads: Optional[int] = None) -> int:
    """Write the model as LP text; returns the number of characters written.

    Bounds cover every variable of the model (objective, constraints and any
    declared universe) in canonical order; keys present in ``pins`` are
    fixed to their value.  Output does not depend on ``threads``.
    """
    threads = resolve_threads(threads)
    if total_flow is None:
        total_flow = model.config.total_flow_constant
    written = 0

    def put(text):
        nonlocal written
        sink.write(text)
        written += len(text)

    objective = _objective_terms(model)
    keys = {key for _, key in objective}
    keys.update(_declared(model))
    put("Minimize cost: \n")
    put(_render_terms(objective) + "\n")
    put("Subject to\n")

    def body(con):
        return f"{_render_terms(con.terms)}{con.relation.value}{format_number(con.rhs)}\n"

    parts = partitions_of(model)
    if threads <= 1:
        offset = 0
        for _, stream in parts:
            count = 0
            for con in stream():
                put(f"{relabel(con.label, offset)}: {body(con)}")
                keys.update(key for _, key in con.terms)
                count += 1
            offset += count
    else:
        def render(part):
            lines, used = [], set()
            for con in part[1]():
                lines.append((con.label, body(con)))
                used.update(key for _, key in con.terms)
            return lines, used

        offset = 0
        for lines, used in ordered_map(render, parts, threads):
            for label, text in lines:
                put(f"{relabel(label, offset)}: {text}")
            offset += len(lines)
            keys |= used
    put("Bounds\n")
    for key in sorted(keys, key=key_order):
        name = var_name(key)
        if pins is not None and key in pins:
            v = format_number(pins[key])
            put(f"{v} <= {name} <= {v}\n")
        else:
            put(f"0 <= {name} <= {total_flow}\n")
    put("End\n")
    return written


def emit_lp_text(model, **kw) -> str:
    buf = io.StringIO()
    emit_lp(model, buf, **kw)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# LP parsing (used by tests and the check command)


@dataclass
class LpDocument:
    objective: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    sections: list = field(default_factory=list)

    @property
    def labels(self) -> list:
        return [c.label for c in self.constraints]


def _parse_terms(body: str, line_no: int) -> list:
    terms = []
    pos = 0
    body = body.strip()
    while pos < len(body):
        m = _TERM.match(body, pos)
        if not m:
            raise ParseError(line_no, f"cannot read term at {body[pos:pos + 30]!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        coef = sign * coef
        terms.append((int(coef) if coef.denominator == 1 else coef, parse_var_name(m.group(3))))
        pos = m.end()
        while pos < len(body) and body[pos].isspace():
            pos += 1
    return terms


def parse_lp(text: str) -> LpDocument:
    doc = LpDocument()
    section = None
    pending = None  # (label, body so far, first line number)
    for line_no, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if pending is None and stripped in ("Minimize cost:", "Subject to", "Bounds", "End"):
            section = stripped
            doc.sections.append(stripped)
            continue
        if not stripped:
            continue
        if section == "Minimize cost:":
            doc.objective += _parse_terms(stripped, line_no)
        elif section == "Subject to":
            if pending is None:
                m = _LABEL.match(line)
                if not m:
                    raise ParseError(line_no, "constraint without label")
                pending = (m.group(1), m.group(2), line_no)
            else:
                pending = (pending[0], pending[1] + " " + line, pending[2])
            rel = _RELATION.search(pending[1])
            if rel:
                label, body, first = pending
                terms = _parse_terms(body[:rel.start()], first)
                doc.constraints.append(Constraint(tuple(terms), Relation(rel.group(1)),
                                                  Fraction(rel.group(2)), label))
                pending = None
        elif section == "Bounds":
            parts = stripped.split("<=")
            if len(parts) != 3:
                raise ParseError(line_no, "bound must read 'lo <= name <= hi'")
            doc.bounds[parse_var_name(parts[1])] = (Fraction(parts[0].strip()), Fraction(parts[2].strip()))
        else:
            raise ParseError(line_no, f"text outside any section: {stripped[:40]!r}")
    if pending is not None:
        raise ParseError(pending[2], f"constraint {pending[0]} has no relation")
    return doc


# ---------------------------------------------------------------------------
# assignment files

_RECORD = re.compile(r"^\s*([xyz][\d_]+)\s*(?:=|\t|\s)\s*(\S+)\s*$")


def write_assignment(a: Assignment, sink: TextIO) -> int:
    """One "name<TAB>p/q" record per key, canonical order, after a
    "#total_flow" header.  Returns the record count."""
    sink.write(f"#total_flow\t{format_rational(a.total_flow)}\n")
    count = 0
    for key in sorted(a, key=key_order):
        sink.write(f"{var_name(key)}\t{format_rational(a[key])}\n")
        count += 1
    return count


def read_assignment(source: TextIO, config: Optional[ModelConfig] = None,
                    n: Optional[int] = None, total_flow=None) -> Assignment:
    """Parse an assignment file.  With a config, every name must be
    admissible for an ``n``-node instance (n defaults to the largest index)."""
    values = {}
    flow = total_flow
    for line_no, line in enumerate(source, 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            head = stripped[1:].replace("=", " ").split()
            if head and head[0] == "total_flow" and len(head) == 2 and total_flow is None:
                flow = Fraction(head[1])
            continue
        m = _RECORD.match(stripped)
        if not m:
            raise ParseError(line_no, f"expected 'name<TAB>value', got {stripped[:60]!r}")
        try:
            key = parse_var_name(m.group(1))
            value = Fraction(m.group(2))
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from None
        if key in values:
            raise ParseError(line_no, f"duplicate variable {m.group(1)}")
        values[key] = value
    if config is not None and values:
        size = n or max(max(k) for k in values)
        for key in values:
            if not admissible(key, config, size, size):
                raise InadmissibleVariable(f"inadmissible variable {var_name(key)}")
    return Assignment(values, flow if flow is not None else 1)


# ---------------------------------------------------------------------------
# instance files


def write_instance(instance: Instance, sink: TextIO):
    sink.write(f"{instance.n}\n")
    for row in instance.cost:
        sink.write(" ".join(str(c) for c in row) + "\n")


def read_instance(source: TextIO, name: str = "") -> Instance:
    rows = []
    n = None
    for line_no, line in enumerate(source, 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        try:
            numbers = [int(tok) for tok in stripped.split()]
        except ValueError:
            raise ParseError(line_no, "expected integers") from None
        if n is None:
            if len(numbers) != 1:
                raise ParseError(line_no, "first line must hold the node count")
            n = numbers[0]
            continue
        if len(numbers) != n:
            raise ParseError(line_no, f"row has {len(numbers)} entries, expected {n}")
        rows.append(numbers)
    if n is None or len(rows) != n:
        raise ParseError(0, f"expected {n} cost rows, found {len(rows)}")
    return Instance(rows, name)
