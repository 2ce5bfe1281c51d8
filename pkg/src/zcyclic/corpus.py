"""Built-in example metrics with their published component tables.

Tables use 1-based index tuples exactly as printed in the literature; the
comma slot (derivative index) is last.  ``table_frame`` records a constant
coordinate change ``x = J y`` when a table was published in coordinates that
differ from the printed line element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .symexpr import parse_expr
from .tensor import Chart, MetricSpec, Symmetry, fully_symmetric, RIEMANN, TensorField

SYM2 = fully_symmetric(2)
TABLE_SYMMETRIES: dict[str, Symmetry] = {
    "R": RIEMANN,
    "S": SYM2,
    "Z": SYM2,
    "dR": RIEMANN.extended(1),
    "dS": SYM2.extended(1),
    "dZ": SYM2.extended(1),
}


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    metric: MetricSpec
    tables: dict[str, dict[tuple[int, ...], str]]
    expected: dict[str, object] = field(default_factory=dict)
    note: str = ""
    table_frame: tuple[tuple[int, ...], ...] | None = None
    flagged: bool = False

    def expected_tensor(self, key: str) -> TensorField:
        """Published table as a tensor (0-based, canonical representatives)."""
        sym = TABLE_SYMMETRIES[key]
        comps: dict[tuple[int, ...], sp.Expr] = {}
        for idx, text in self.tables.get(key, {}).items():
            rep, sign = sym.canonical(tuple(i - 1 for i in idx))
            if sign == 0:
                raise ValueError(f"{self.name}: {key}{idx} is forced zero by symmetry")
            value = parse_expr(text, self.metric.symbols)
            value = value if sign == 1 else -value
            if rep in comps and sp.simplify(comps[rep] - value) != 0:
                raise ValueError(f"{self.name}: inconsistent entries for {key}{idx}")
            comps[rep] = value
        return TensorField(self.metric.dim, sym, comps)


def _goedel() -> CorpusEntry:
    chart = Chart.create(["t", "ph", "r", "z"], assumptions={"r": ">"})
    metric = MetricSpec.from_strings(
        chart,
        {(1, 1): "1", (1, 2): "r^2/8", (2, 2): "-r^2/8", (3, 3): "-1", (4, 4): "-1"},
        oneforms={k: ["0", "0", "-4*r/(8+r^2)", "0"] for k in "ABD"},
        name="E1",
    )
    q = "r^3/(64*(r^2+8))"
    return CorpusEntry(
        name="E1",
        metric=metric,
        tables={
            "R": {(1, 2, 1, 2): "-r^2/64", (1, 3, 1, 3): "-1/(r^2+8)",
                  (1, 3, 2, 3): "-1/(r^2+8)", (2, 3, 2, 3): "-1/(r^2+8)"},
            "S": {(1, 1): "-2/(r^2+8)", (1, 2): "-(r^2+16)/(8*(r^2+8))",
                  (2, 2): "-(r^2+16)/(8*(r^2+8))", (3, 3): "8/(r^2+8)^2"},
            "dR": {(1, 2, 1, 2, 3): f"2*{q}", (1, 2, 1, 3, 2): q, (1, 2, 2, 3, 1): f"-{q}",
                   (1, 3, 1, 3, 3): "4*r/(r^2+8)^2", (1, 3, 2, 3, 3): "4*r/(r^2+8)^2",
                   (2, 3, 2, 3, 3): "4*r/(r^2+8)^2"},
            "dS": {(1, 1, 3): "6*r/(r^2+8)^2", (1, 3, 1): "r/(r^2+8)^2",
                   (1, 2, 3): "r*(r^2+24)/(4*(r^2+8)^2)",
                   (2, 2, 3): "r*(r^2+24)/(4*(r^2+8)^2)",
                   (1, 3, 2): "r/(8*(r^2+8))", (2, 3, 1): "r/(8*(r^2+8))",
                   (2, 3, 2): "r/(8*(r^2+8))", (3, 3, 3): "-32*r/(r^2+8)^3"},
        },
        expected={"wcrs": "holds", "wrs": "fails", "proper_wcrs": True,
                  "uniform_forced": True},
        note=("Goedel-type metric (dt + h dph)^2 - f^2 dph^2 - dr^2 - dz^2 with "
              "h = r^2/8, f = r*sqrt(8+r^2)/8. The published tables are the "
              "components in coordinates with t = y1 + y2, ph = y2."),
        table_frame=((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)),
    )


def goedel_unsimplified_g22() -> sp.Expr:
    """``h^2 - f^2`` with the published profile functions, before normalizing."""
    r = sp.Symbol("r", real=True, positive=True)
    h = r**2 / 8
    f = r / 8 * sp.sqrt(8 + r**2)
    return sp.Add(h**2, -(f**2), evaluate=False)


def _lorentz_x1() -> CorpusEntry:
    chart = Chart.create(["x1", "x2", "x3", "x4"], params=["a"], assumptions={"x1": ">"})
    metric = MetricSpec.from_strings(
        chart,
        {(1, 1): "x1^2", (2, 2): "x1^2", (3, 3): "x1^2", (4, 4): "-x1^(-2)"},
        phi="a/x1^6 - 1/x1^4",
        oneforms={k: ["-6/x1", "0", "0", "0"] for k in "ABD"},
        name="E2",
    )
    return CorpusEntry(
        name="E2",
        metric=metric,
        tables={
            "R": {(1, 2, 1, 2): "1", (1, 3, 1, 3): "1", (2, 3, 2, 3): "-1",
                  (1, 4, 1, 4): "3/x1^4", (2, 4, 2, 4): "-1/x1^4", (3, 4, 3, 4): "-1/x1^4"},
            "S": {(1, 1): "1/x1^2", (2, 2): "-1/x1^2", (3, 3): "-1/x1^2",
                  (4, 4): "-1/x1^6"},
            "dR": {(1, 2, 1, 2, 1): "-4/x1", (1, 2, 2, 3, 3): "-2/x1",
                   (1, 3, 1, 3, 1): "-4/x1", (1, 3, 2, 3, 2): "2/x1",
                   (2, 3, 2, 3, 1): "4/x1", (1, 4, 1, 4, 1): "-12/x1^5",
                   (1, 4, 2, 4, 2): "4/x1^5", (1, 4, 3, 4, 3): "4/x1^5",
                   (2, 4, 2, 4, 1): "4/x1^5", (3, 4, 3, 4, 1): "4/x1^5"},
            "dS": {(1, 1, 1): "-4/x1^3", (1, 2, 2): "2/x1^3", (1, 3, 3): "2/x1^3",
                   (2, 2, 1): "4/x1^3", (3, 3, 1): "4/x1^3", (4, 4, 1): "4/x1^7"},
            "Z": {(1, 1): "a/x1^4", (2, 2): "-(2*x1^2-a)/x1^4",
                  (3, 3): "-(2*x1^2-a)/x1^4", (4, 4): "-a/x1^8"},
            "dZ": {(1, 1, 1): "-6*a/x1^5", (1, 2, 2): "2/x1^3", (1, 3, 3): "2/x1^3",
                   (2, 2, 1): "2*(4*x1^2-3*a)/x1^5", (3, 3, 1): "2*(4*x1^2-3*a)/x1^5",
                   (4, 4, 1): "6*a/x1^9"},
        },
        expected={"wczs": "holds", "wzs": "fails", "proper_wczs": True,
                  "quasi_einstein": "none", "F_zero": True, "uniform_forced": True},
        note="Lorentzian metric on x1 > 0 with a constant parameter a.",
    )


def _open_subset() -> CorpusEntry:
    chart = Chart.create(["x1", "x2", "x3", "x4"], params=["alpha", "beta"],
                         assumptions={"x1": ">", "alpha": "!=", "beta": "!="})
    metric = MetricSpec.from_strings(
        chart,
        {(1, 1): "exp(x1)*((x3)^2+x3+1)", (1, 2): "1", (3, 3): "1", (4, 4): "x1^2"},
        oneforms={"A": ["alpha", "0", "0", "0"], "B": ["beta", "0", "0", "0"],
                  "D": ["3-alpha-beta", "0", "0", "0"]},
        name="E3",
    )
    return CorpusEntry(
        name="E3",
        metric=metric,
        tables={
            "R": {(1, 3, 1, 3): "-exp(x1)"},
            "dR": {(1, 3, 1, 3, 1): "-exp(x1)"},
            "S": {(1, 1): "exp(x1)"},
            "dS": {(1, 1, 1): "exp(x1)"},
        },
        expected={"wcrs": "holds", "wcrs_family_dimension": 2, "wrs": "holds",
                  "proper_wcrs": False, "recurrent": ("1", "0", "0", "0"),
                  "ricci_recurrent": ("1", "0", "0", "0"),
                  "quasi_einstein": "rank_one_null_generator"},
        note="Open subset of R^4; recurrent and Ricci recurrent.",
    )


def _refuted(phi: str, label: str) -> CorpusEntry:
    chart = Chart.create(["x1", "x2", "x3", "x4"], assumptions={"x4": ">"})
    metric = MetricSpec.from_strings(
        chart,
        {(1, 1): "x4^(4/3)", (2, 2): "x4^(4/3)", (3, 3): "x4^(4/3)", (4, 4): "1"},
        phi=phi,
        name=label,
    )
    if label == "E4-phi1":
        tables = {"dZ": {(1, 4, 1): "-8/(9*x4^(5/3))"}}
        expected = {"wczs": "fails"}
    else:
        tables = {}
        expected = {"wzs": "holds"}
    return CorpusEntry(
        name=label,
        metric=metric,
        tables=tables,
        expected=expected,
        note=("Transcribed from the cited earlier example, "
              "ds^2 = (x4)^(4/3) [(dx1)^2 + (dx2)^2 + (dx3)^2] + (dx4)^2; "
              "only the quoted Z_{14,1} value is checked against the table."),
        flagged=True,
    )


def builtin_entries(include_flagged: bool = False) -> list[CorpusEntry]:
    entries = [_goedel(), _lorentz_x1(), _open_subset()]
    if include_flagged:
        entries += [_refuted("1/x4^2", "E4-phi1"), _refuted("2/(3*x4^2)", "E4-phi2")]
    return entries


def get_entry(name: str) -> CorpusEntry:
    for e in builtin_entries(include_flagged=True):
        if e.name.lower() == name.lower():
            return e
    raise KeyError(f"no builtin metric named {name!r}")


def flat_metric(dim: int = 4) -> MetricSpec:
    chart = Chart.create([f"x{i}" for i in range(1, dim + 1)])
    return MetricSpec.from_strings(chart, {(i, i): "1" for i in range(1, dim + 1)},
                                   name="flat")
