"""Purely numeric curvature pipeline used to cross-check the symbolic one.

Only the metric components are evaluated; every derivative is a nested
central difference carried out in mpmath at ``DPS`` digits, so truncation
(``h^2``) and cancellation (``10^-DPS / h^3``) both stay far below the
comparison tolerance.  The Riemann tensor is assembled from derivatives of
the Christoffel symbols, not from second derivatives of ``g``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import mpmath
import sympy as sp

from .symexpr import SingularEvaluation, evaluate
from .tensor import MetricSpec, curvature

DPS = 60
STEP = mpmath.mpf("1e-12")
# Error denominators never drop below this, so a tensor that vanishes
# identically is compared in absolute terms instead of against its own noise.
ABS_FLOOR = mpmath.mpf("1e-12")


class NumericPipeline:
    def __init__(self, m: MetricSpec, point: dict[str, float], h=STEP):
        self.m = m
        self.n = m.dim
        self.h = h
        self.coords = m.chart.coords
        self.params = {k: mpmath.mpf(v) for k, v in point.items() if k not in self.coords}
        self.x0 = [mpmath.mpf(point[c]) for c in self.coords]

    def metric(self, x):
        vals = dict(self.params)
        vals.update(zip(self.coords, x))
        return mpmath.matrix([[evaluate(e, vals, backend="mp") for e in row] for row in self.m.g])

    def _shift(self, x, k, s):
        y = list(x)
        y[k] += s * self.h
        return y

    def _diff(self, fn, x, k):
        """Central difference of a function returning nested lists/matrices."""
        plus, minus = fn(self._shift(x, k, 1)), fn(self._shift(x, k, -1))
        return _combine(plus, minus, 1 / (2 * self.h))

    def christoffel(self, x):
        n = self.n
        g = self.metric(x)
        gi = g ** -1
        dg = [self._diff(self.metric, x, k) for k in range(n)]
        return [[[sum(gi[k, l] * (dg[i][j, l] + dg[j][i, l] - dg[l][i, j]) for l in range(n)) / 2
                  for j in range(n)] for i in range(n)] for k in range(n)]

    def riemann(self, x):
        n = self.n
        G = self.christoffel(x)
        dG = [self._diff(self.christoffel, x, c) for c in range(n)]
        g = self.metric(x)
        up = [[[[dG[c][a][d][b] - dG[d][a][c][b]
                 + sum(G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b] for e in range(n))
                 for d in range(n)] for c in range(n)] for b in range(n)] for a in range(n)]
        return [[[[sum(g[a, e] * up[e][b][c][d] for e in range(n))
                   for d in range(n)] for c in range(n)] for b in range(n)] for a in range(n)]

    def ricci(self, x):
        n = self.n
        R = self.riemann(x)
        gi = self.metric(x) ** -1
        return [[sum(gi[a, d] * R[a][b][c][d] for a in range(n) for d in range(n))
                 for c in range(n)] for b in range(n)]

    def nabla_ricci(self, x):
        n = self.n
        S = self.ricci(x)
        G = self.christoffel(x)
        dS = [self._diff(self.ricci, x, k) for k in range(n)]
        return [[[dS[k][i][j]
                  - sum(G[mm][k][i] * S[mm][j] + G[mm][k][j] * S[i][mm] for mm in range(n))
                  for k in range(n)] for j in range(n)] for i in range(n)]


def _combine(a, b, f):
    if isinstance(a, mpmath.matrix):
        return (a - b) * f
    if isinstance(a, list):
        return [_combine(x, y, f) for x, y in zip(a, b)]
    return (a - b) * f


@dataclass
class ValidationResult:
    seed: int
    points: int
    max_rel_error: float
    worst: tuple[str, tuple[int, ...]] | None
    per_tensor: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "points": self.points,
            "max_rel_error": self.max_rel_error,
            "worst_component": None if self.worst is None else
            f"{self.worst[0]}{''.join(str(i + 1) for i in self.worst[1])}",
            "per_tensor": self.per_tensor,
        }


def _flatten(obj, prefix=()):
    if isinstance(obj, list):
        for i, x in enumerate(obj):
            yield from _flatten(x, prefix + (i,))
    else:
        yield prefix, obj


def validate(m: MetricSpec, seed: int = 0, points: int = 5) -> ValidationResult:
    """Largest relative disagreement between symbolic Gamma, R, S, nabla S and
    their finite-difference counterparts at seeded admissible points.

    Each component error is scaled by the largest magnitude in the same tensor
    at that point, floored at ``ABS_FLOOR``.
    """
    c = curvature(m)
    n = m.dim
    gam = c.connection.gamma
    symbolic = {
        "Gamma": lambda k, i, j: gam[k][i][j],
        "R": lambda *idx: c.riemann[idx],
        "S": lambda *idx: c.ricci[idx],
        "dS": lambda *idx: c.nabla_ricci[idx],
    }
    rng = random.Random(seed)
    per: dict[str, float] = {k: 0.0 for k in symbolic}
    worst, worst_at = 0.0, None
    done = attempts = 0
    with mpmath.workdps(DPS):
        while done < points:
            attempts += 1
            if attempts > 64 * points:
                raise SingularEvaluation("no admissible sample points found")
            raw = m.symbols.sample_point(rng)
            point = {s.name: v for s, v in raw.items()}
            pipe = NumericPipeline(m, point)
            try:
                numeric = {
                    "Gamma": pipe.christoffel(pipe.x0),
                    "R": pipe.riemann(pipe.x0),
                    "S": pipe.ricci(pipe.x0),
                    "dS": pipe.nabla_ricci(pipe.x0),
                }
            except (SingularEvaluation, ZeroDivisionError):
                continue
            done += 1
            for name, table in numeric.items():
                flat = list(_flatten(table))
                scale = max(max(abs(v) for _, v in flat), ABS_FLOOR)
                for idx, num in flat:
                    sym = evaluate(sp.sympify(symbolic[name](*idx)), point, backend="mp")
                    denom = max(abs(sym), abs(num), scale)
                    err = float(abs(sym - num) / denom)
                    if err > per[name]:
                        per[name] = err
                    if err > worst:
                        worst, worst_at = err, (name, idx)
    return ValidationResult(seed, points, worst, worst_at, per)
