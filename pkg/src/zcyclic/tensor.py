"""Charts, metrics and the Levi-Civita curvature pipeline.

Index conventions (0-based internally, 1-based in reports and corpus tables):

* ``Gamma[k][i][j]`` is the Christoffel symbol of the second kind.
* ``R[h, i, j, k]`` is the (0,4) curvature tensor with the sign fixed by
  ``R_hijk = g_he R^e_ijk``, ``R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + ...``;
  this reproduces ``R_1212 = -r^2/64`` for the Goedel-type corpus metric.
* ``S[i, j] = g^{hk} R[h, i, j, k]``.
* A covariant derivative appends the differentiation slot last, so
  ``nabla(T)[i, j, k]`` is the comma component ``T_{ij,k}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterator, Mapping, Sequence

import sympy as sp

from .symexpr import (
    Expr,
    ExprError,
    SymbolTable,
    is_zero,
    normalize,
    parse_expr,
    to_string,
)


class DegenerateMetric(ExprError):
    pass


# ------------------------------------------------------------- symmetries


Perm = tuple[int, ...]


@dataclass(frozen=True)
class Symmetry:
    """Index symmetry group given by signed slot permutations.

    A generator ``(perm, sign)`` states ``T[idx[perm[0]], idx[perm[1]], ...]
    == sign * T[idx]``.
    """

    rank: int
    generators: tuple[tuple[Perm, int], ...] = ()
    name: str = "none"

    @cached_property
    def elements(self) -> tuple[tuple[Perm, int], ...]:
        ident = tuple(range(self.rank))
        seen = {ident: 1}
        frontier = [ident]
        while frontier:
            nxt = []
            for p in frontier:
                for g, s in self.generators:
                    q = tuple(p[g[i]] for i in range(self.rank))
                    sign = seen[p] * s
                    if q not in seen:
                        seen[q] = sign
                        nxt.append(q)
            frontier = nxt
        return tuple(seen.items())

    def canonical(self, idx: Sequence[int]) -> tuple[tuple[int, ...], int]:
        """Orbit representative (lexicographic minimum) and the sign relating
        ``T[idx]`` to ``T[rep]``; sign 0 means the component is forced zero."""
        best = None
        best_sign = 0
        signs: dict[tuple[int, ...], set[int]] = {}
        for p, s in self.elements:
            j = tuple(idx[p[i]] for i in range(self.rank))
            signs.setdefault(j, set()).add(s)
            if best is None or j < best:
                best, best_sign = j, s
        if any(len(v) > 1 for v in signs.values()):
            return best, 0
        return best, best_sign

    def representatives(self, dim: int) -> list[tuple[int, ...]]:
        reps = []
        for idx in itertools.product(range(dim), repeat=self.rank):
            rep, sign = self.canonical(idx)
            if rep == idx and sign != 0:
                reps.append(idx)
        return reps

    def extended(self, extra: int = 1) -> "Symmetry":
        """Same symmetries on the leading slots, ``extra`` free slots appended."""
        tail = tuple(range(self.rank, self.rank + extra))
        gens = tuple((p + tail, s) for p, s in self.generators)
        return Symmetry(self.rank + extra, gens, f"{self.name}+{extra}")


def no_symmetry(rank: int) -> Symmetry:
    return Symmetry(rank)


def fully_symmetric(rank: int) -> Symmetry:
    gens = []
    for i in range(rank - 1):
        p = list(range(rank))
        p[i], p[i + 1] = p[i + 1], p[i]
        gens.append((tuple(p), 1))
    return Symmetry(rank, tuple(gens), "symmetric")


RIEMANN = Symmetry(
    4,
    (((1, 0, 2, 3), -1), ((0, 1, 3, 2), -1), ((2, 3, 0, 1), 1)),
    "riemann",
)


# ---------------------------------------------------------- tensor fields


@dataclass(frozen=True)
class TensorField:
    """Covariant tensor; only canonical orbit representatives are stored."""

    dim: int
    symmetry: Symmetry
    components: Mapping[tuple[int, ...], Expr]

    @property
    def valence(self) -> int:
        return self.symmetry.rank

    def __getitem__(self, idx) -> Expr:
        if isinstance(idx, int):
            idx = (idx,)
        rep, sign = self.symmetry.canonical(idx)
        if sign == 0:
            return sp.S.Zero
        value = self.components.get(rep, sp.S.Zero)
        return value if sign == 1 else -value

    def nonzero(self) -> dict[tuple[int, ...], Expr]:
        return {k: v for k, v in self.components.items() if v != 0}

    def is_zero(self, symbols: SymbolTable) -> bool:
        return all(is_zero(v, symbols) for v in self.components.values())

    def all_indices(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.dim), repeat=self.valence)

    def map(self, fn: Callable[[Expr], Expr]) -> "TensorField":
        return TensorField(self.dim, self.symmetry, {k: fn(v) for k, v in self.components.items()})

    @classmethod
    def build(cls, dim: int, symmetry: Symmetry,
              fn: Callable[[tuple[int, ...]], Expr]) -> "TensorField":
        comps = {}
        for rep in symmetry.representatives(dim):
            value = normalize(fn(rep))
            if value != 0:
                comps[rep] = value
        return cls(dim, symmetry, comps)


# ----------------------------------------------------------------- charts


@dataclass(frozen=True)
class Chart:
    coords: tuple[str, ...]
    symbols: SymbolTable

    def __post_init__(self):
        if self.coords != self.symbols.coords:
            raise ValueError("chart coordinates must match the symbol table")
        if len(self.coords) < 3:
            raise ValueError(f"dimension must be at least 3, got {len(self.coords)}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def xs(self) -> tuple[sp.Symbol, ...]:
        return self.symbols.coord_symbols()

    @classmethod
    def create(cls, coords: Sequence[str], params: Sequence[str] = (),
               assumptions: Mapping[str, str] | None = None) -> "Chart":
        table = SymbolTable(tuple(coords), tuple(params), dict(assumptions or {}))
        return cls(tuple(coords), table)


@dataclass(frozen=True)
class MetricSpec:
    """Chart plus metric components, optional scalar ``phi`` and 1-forms.

    ``phi is None`` means no Z-tensor was requested; ``z_tensor`` then uses
    ``phi = 0``.
    """

    chart: Chart
    g: tuple[tuple[Expr, ...], ...]
    phi: Expr | None = None
    oneforms: tuple[tuple[str, tuple[Expr, ...]], ...] = field(default=())
    name: str = ""

    def __post_init__(self):
        n = self.chart.dim
        if len(self.g) != n or any(len(row) != n for row in self.g):
            raise ValueError(f"metric must be {n}x{n}")
        g = tuple(tuple(normalize(x) for x in row) for row in self.g)
        for i, j in itertools.combinations(range(n), 2):
            if g[i][j] != g[j][i]:
                raise ValueError(f"metric is not symmetric at ({i + 1},{j + 1})")
        object.__setattr__(self, "g", g)
        if self.phi is not None:
            object.__setattr__(self, "phi", normalize(self.phi))
        forms = []
        for fname, comps in self.oneforms:
            if len(comps) != n:
                raise ValueError(f"1-form {fname} needs {n} components")
            forms.append((fname, tuple(normalize(c) for c in comps)))
        object.__setattr__(self, "oneforms", tuple(forms))
        if is_zero(self.matrix.det(method="berkowitz"), self.symbols):
            raise DegenerateMetric("det(g) vanishes identically")

    @classmethod
    def from_strings(cls, chart: Chart, g: Mapping[tuple[int, int], str],
                     phi: str | None = None,
                     oneforms: Mapping[str, Sequence[str]] | None = None,
                     name: str = "") -> "MetricSpec":
        """Build from 1-based ``{(i, j): text}`` entries; unlisted entries are 0
        and the lower triangle is filled by symmetry."""
        n = chart.dim
        rows = [[sp.S.Zero] * n for _ in range(n)]
        for (i, j), text in g.items():
            e = parse_expr(text, chart.symbols)
            rows[i - 1][j - 1] = e
            rows[j - 1][i - 1] = e
        forms = tuple(
            (k, tuple(parse_expr(c, chart.symbols) for c in v))
            for k, v in (oneforms or {}).items()
        )
        p = parse_expr(phi, chart.symbols) if phi is not None else None
        return cls(chart, tuple(map(tuple, rows)), p, forms, name)

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def symbols(self) -> SymbolTable:
        return self.chart.symbols

    @property
    def matrix(self) -> sp.Matrix:
        return sp.Matrix(self.g)

    def oneform(self, name: str) -> tuple[Expr, ...] | None:
        for k, v in self.oneforms:
            if k == name:
                return v
        return None

    def with_phi(self, phi: Expr | None) -> "MetricSpec":
        return MetricSpec(self.chart, self.g, phi, self.oneforms, self.name)

    def pullback_linear(self, jac: Sequence[Sequence[int]]) -> "MetricSpec":
        """Same metric in coordinates ``y`` with ``x = jac @ y`` (constant).

        Coordinate names are kept; ``x^b`` is substituted by ``sum jac[b][a] y^a``.
        """
        xs = self.chart.xs
        sub = {xs[b]: sum(sp.Integer(jac[b][a]) * xs[a] for a in range(self.dim))
               for b in range(self.dim)}
        n = self.dim

        def conv(e):
            return normalize(sp.sympify(e).xreplace(sub))

        g = tuple(
            tuple(conv(sum(jac[b][i] * jac[c][j] * self.g[b][c]
                           for b in range(n) for c in range(n)))
                  for j in range(n))
            for i in range(n)
        )
        forms = tuple(
            (k, tuple(conv(sum(jac[b][a] * v[b] for b in range(n))) for a in range(n)))
            for k, v in self.oneforms
        )
        phi = conv(self.phi) if self.phi is not None else None
        return MetricSpec(self.chart, g, phi, forms, self.name)


def pullback_tensor(t: TensorField, chart: Chart, jac: Sequence[Sequence[int]]) -> TensorField:
    """Components of a covariant tensor in coordinates ``y`` with ``x = jac @ y``."""
    xs = chart.xs
    n = t.dim
    sub = {xs[b]: sum(sp.Integer(jac[b][a]) * xs[a] for a in range(n)) for b in range(n)}

    def comp(idx):
        total = sp.S.Zero
        for src in itertools.product(range(n), repeat=t.valence):
            w = 1
            for b, a in zip(src, idx):
                w *= jac[b][a]
                if not w:
                    break
            if w:
                total += w * t[src]
        return sp.sympify(total).xreplace(sub)

    return TensorField.build(n, t.symmetry, comp)


# -------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class Connection:
    """Christoffel symbols of the second kind, ``gamma[k][i][j]``."""

    gamma: tuple[tuple[tuple[Expr, ...], ...], ...]

    def __call__(self, k: int, i: int, j: int) -> Expr:
        return self.gamma[k][i][j]


class Curvature:
    """Lazily computed curvature data of one metric (cached per metric)."""

    def __init__(self, m: MetricSpec):
        self.m = m
        self.n = m.dim
        self.xs = m.chart.xs

    def d(self, e: Expr, k: int) -> Expr:
        return sp.diff(e, self.xs[k])

    @cached_property
    def g(self) -> TensorField:
        return TensorField.build(self.n, fully_symmetric(2), lambda ij: self.m.g[ij[0]][ij[1]])

    @cached_property
    def ginv(self) -> sp.Matrix:
        inv = self.m.matrix.inv(method="LU")
        return inv.applyfunc(normalize)

    @cached_property
    def first_kind(self) -> list:
        n, g = self.n, self.m.g
        return [[[normalize((self.d(g[j][l], i) + self.d(g[i][l], j) - self.d(g[i][j], l)) / 2)
                  for j in range(n)] for i in range(n)] for l in range(n)]

    @cached_property
    def connection(self) -> Connection:
        n, gi, c1 = self.n, self.ginv, self.first_kind
        table = []
        for k in range(n):
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    if j < i:
                        row.append(rows[j][i])
                    else:
                        row.append(normalize(sum(gi[k, l] * c1[l][i][j] for l in range(n))))
                rows.append(tuple(row))
            table.append(tuple(rows))
        return Connection(tuple(table))

    @cached_property
    def riemann(self) -> TensorField:
        n, g, c1 = self.n, self.m.g, self.first_kind
        gam = self.connection.gamma

        def comp(idx):
            a, b, c, d = idx
            second = (self.d(self.d(g[a][d], b), c) + self.d(self.d(g[b][c], a), d)
                      - self.d(self.d(g[a][c], b), d) - self.d(self.d(g[b][d], a), c)) / 2
            quad = sum(c1[f][a][d] * gam[f][b][c] - c1[f][a][c] * gam[f][b][d]
                       for f in range(n))
            return second + quad

        return TensorField.build(n, RIEMANN, comp)

    @cached_property
    def ricci(self) -> TensorField:
        n, gi, R = self.n, self.ginv, self.riemann
        return TensorField.build(
            n, fully_symmetric(2),
            lambda bc: sum(gi[a, d] * R[a, bc[0], bc[1], d]
                           for a in range(n) for d in range(n) if gi[a, d] != 0),
        )

    @cached_property
    def scalar(self) -> Expr:
        n, gi, S = self.n, self.ginv, self.ricci
        return normalize(sum(gi[i, j] * S[i, j] for i in range(n) for j in range(n)))

    def z(self, phi: Expr | None = None) -> TensorField:
        phi = self.m.phi if phi is None else phi
        phi = sp.S.Zero if phi is None else phi
        S = self.ricci
        return TensorField.build(self.n, fully_symmetric(2),
                                 lambda ij: S[ij] + phi * self.m.g[ij[0]][ij[1]])

    def nabla(self, t: TensorField) -> TensorField:
        n, gam = self.n, self.connection.gamma

        def comp(idx):
            *rest, l = idx
            rest = tuple(rest)
            total = self.d(t[rest], l)
            for s, i_s in enumerate(rest):
                for mm in range(n):
                    c = gam[mm][l][i_s]
                    if c != 0:
                        j = rest[:s] + (mm,) + rest[s + 1:]
                        total -= c * t[j]
            return total

        return TensorField.build(n, t.symmetry.extended(1), comp)

    @cached_property
    def nabla_ricci(self) -> TensorField:
        return self.nabla(self.ricci)

    @cached_property
    def nabla_riemann(self) -> TensorField:
        return self.nabla(self.riemann)


@lru_cache(maxsize=64)
def curvature(m: MetricSpec) -> Curvature:
    return Curvature(m)


def inverse_metric(m: MetricSpec) -> sp.Matrix:
    return curvature(m).ginv


def christoffel(m: MetricSpec) -> Connection:
    return curvature(m).connection


def riemann(m: MetricSpec) -> TensorField:
    return curvature(m).riemann


def ricci(m: MetricSpec) -> TensorField:
    return curvature(m).ricci


def scalar_curvature(m: MetricSpec) -> Expr:
    return curvature(m).scalar


def covariant_derivative(t: TensorField, m: MetricSpec) -> TensorField:
    if t.dim != m.dim:
        raise ValueError("tensor and metric dimensions differ")
    return curvature(m).nabla(t)


def z_tensor(m: MetricSpec) -> TensorField:
    """``Z = S + phi*g``; ``phi`` missing is read as zero."""
    return curvature(m).z()


def metric_tensor(m: MetricSpec) -> TensorField:
    return curvature(m).g


def format_components(t: TensorField) -> dict[str, str]:
    """1-based index labels mapped to canonical strings, nonzero only."""
    return {"".join(str(i + 1) for i in k): to_string(v)
            for k, v in sorted(t.nonzero().items())}
