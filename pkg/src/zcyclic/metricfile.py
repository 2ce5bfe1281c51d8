"""Line-oriented metric definition files.

::

    # comment
    dim = 4
    coords = x1, x2, x3, x4
    param a
    assume x1 > 0
    g[1,1] = x1^2
    g[4,4] = -x1^(-2)
    phi = a/x1^6 - 1/x1^4
    oneform A = [-6/x1, 0, 0, 0]

Indices are 1-based; unlisted metric entries are zero and ``g[j,i]`` is
filled from ``g[i,j]``.
"""

from __future__ import annotations

import re

import sympy as sp

from .symexpr import ExprError, ExprSyntaxError, SymbolTable, UnknownSymbolError, parse_expr, to_string
from .tensor import Chart, MetricSpec


class MetricFileError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_RULES = [
    ("dim", re.compile(r"dim\s*=\s*(?P<value>\S.*)$")),
    ("coords", re.compile(r"coords\s*=\s*(?P<value>.*)$")),
    ("param", re.compile(rf"param\s+(?P<value>{_NAME})\s*$")),
    ("assume", re.compile(rf"assume\s+(?P<name>{_NAME})\s*(?P<rel>>|<|!=)\s*0\s*$")),
    ("g", re.compile(r"g\[\s*(?P<i>\d+)\s*,\s*(?P<j>\d+)\s*\]\s*=\s*(?P<value>.*)$")),
    ("phi", re.compile(r"phi\s*=\s*(?P<value>.*)$")),
    ("oneform", re.compile(rf"oneform\s+(?P<name>{_NAME})\s*=\s*\[(?P<value>.*)\]\s*$")),
]


def _split_top(text: str) -> list[tuple[str, int]]:
    """Split on commas outside parentheses; keep each piece's offset."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


def parse_metric_file(text: str, name: str = "") -> MetricSpec:
    dim = None
    coords: list[str] = []
    params: list[str] = []
    assumptions: dict[str, str] = {}
    entries: list[tuple[int, int, str, int, int]] = []
    phi = None
    forms: list[tuple[str, str, int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        for kind, rx in _RULES:
            m = rx.match(body)
            if m:
                break
        else:
            raise MetricFileError(f"unrecognized statement {body!r}", lineno, indent + 1)
        col = indent + (m.start("value") if "value" in m.groupdict() else 0) + 1
        if kind == "dim":
            try:
                dim = int(m["value"])
            except ValueError:
                raise MetricFileError("dim must be an integer", lineno, col) from None
        elif kind == "coords":
            coords = [c.strip() for c in m["value"].split(",")]
            if not all(re.fullmatch(_NAME, c) for c in coords):
                raise MetricFileError("coords must be comma-separated names", lineno, col)
        elif kind == "param":
            params.append(m["value"])
        elif kind == "assume":
            assumptions[m["name"]] = m["rel"]
        elif kind == "g":
            entries.append((int(m["i"]), int(m["j"]), m["value"], lineno, col))
        elif kind == "phi":
            phi = (m["value"], lineno, col)
        else:
            forms.append((m["name"], m["value"], lineno, col))

    if dim is None:
        raise MetricFileError("missing 'dim = <n>'", 1)
    if len(coords) != dim:
        raise MetricFileError(f"dim = {dim} but {len(coords)} coordinates given", 1)
    try:
        chart = Chart.create(coords, params, assumptions)
    except (ExprError, ValueError) as exc:
        raise MetricFileError(str(exc), 1) from None
    table = chart.symbols

    def expr(src: str, lineno: int, col: int):
        try:
            return parse_expr(src, table)
        except ExprSyntaxError as exc:
            raise MetricFileError(str(exc), lineno, col + exc.pos) from None
        except UnknownSymbolError as exc:
            raise MetricFileError(f"unknown symbol {exc.name!r}", lineno, col) from None
        except ExprError as exc:
            raise MetricFileError(str(exc), lineno, col) from None

    g = [[sp.S.Zero] * dim for _ in range(dim)]
    seen: dict[tuple[int, int], tuple[sp.Expr, int]] = {}
    for i, j, src, lineno, col in entries:
        if not (1 <= i <= dim and 1 <= j <= dim):
            raise MetricFileError(f"index g[{i},{j}] outside 1..{dim}", lineno)
        value = expr(src, lineno, col)
        key = (min(i, j), max(i, j))
        if key in seen and sp.simplify(seen[key][0] - value) != 0:
            raise MetricFileError(
                f"g[{i},{j}] conflicts with line {seen[key][1]} (metric must be symmetric)",
                lineno)
        seen[key] = (value, lineno)
        g[i - 1][j - 1] = g[j - 1][i - 1] = value

    oneforms = []
    for fname, src, lineno, col in forms:
        pieces = _split_top(src)
        if len(pieces) != dim:
            raise MetricFileError(f"1-form {fname} has {len(pieces)} components, expected {dim}",
                                  lineno, col)
        oneforms.append((fname, tuple(expr(p, lineno, col + off) for p, off in pieces)))

    phi_expr = expr(*phi) if phi is not None else None
    try:
        return MetricSpec(chart, tuple(map(tuple, g)), phi_expr, tuple(oneforms), name)
    except (ExprError, ValueError) as exc:
        raise MetricFileError(str(exc), 1) from None


def format_metric_file(m: MetricSpec, header: str = "") -> str:
    table: SymbolTable = m.symbols
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"dim = {m.dim}", "coords = " + ", ".join(m.chart.coords)]
    lines += [f"param {p}" for p in table.params]
    lines += [f"assume {k} {v} 0" for k, v in table.assumptions.items()]
    for i in range(m.dim):
        for j in range(i, m.dim):
            if m.g[i][j] != 0:
                lines.append(f"g[{i + 1},{j + 1}] = {to_string(m.g[i][j])}")
    if m.phi is not None:
        lines.append(f"phi = {to_string(m.phi)}")
    for name, comps in m.oneforms:
        lines.append(f"oneform {name} = [" + ", ".join(to_string(c) for c in comps) + "]")
    return "\n".join(lines) + "\n"
