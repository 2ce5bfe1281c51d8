"""Linear systems whose coefficients live in the expression field.

Gauss-Jordan elimination without division (each row update is
``pivot*row - entry*pivot_row``), pivots decided by :func:`zero_test`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import sympy as sp

from .symexpr import Expr, ExprError, SymbolTable, UndecidableZero, kernels, normalize, zero_test


class UndecidablePivot(ExprError):
    def __init__(self, expr: Expr):
        self.expr = expr
        super().__init__(f"undecidable pivot: {expr}")


@dataclass
class LinearSolution:
    """Affine solution set ``particular + span(basis)`` of ``M x = b``."""

    status: str  # "inconsistent" | "unique" | "family"
    particular: tuple[Expr, ...] | None = None
    basis: list[tuple[Expr, ...]] = field(default_factory=list)
    pivots: list[int] = field(default_factory=list)
    numeric: bool = False  # some pivot decision came from numeric probing


class _ZeroOracle:
    def __init__(self, symbols: SymbolTable, seed: int):
        self.symbols = symbols
        self.seed = seed
        self.numeric = False
        self._cache: dict[Expr, bool] = {}

    def __call__(self, e: Expr) -> bool:
        if e == 0:
            return True
        hit = self._cache.get(e)
        if hit is None:
            try:
                v = zero_test(e, self.symbols, self.seed)
            except UndecidableZero as exc:
                raise UndecidablePivot(exc.expr) from exc
            self.numeric |= v.method == "numeric"
            hit = self._cache[e] = v.is_zero
        return hit


def _pivot_key(e: Expr) -> tuple:
    const = e.is_Number
    return (0 if const else 1, len(kernels(e)), sp.count_ops(e))


def solve_linear(rows: Sequence[Sequence[Expr]], rhs: Sequence[Expr],
                 symbols: SymbolTable, seed: int = 0) -> LinearSolution:
    nvars = len(rows[0]) if rows else 0
    aug = [[normalize(x) for x in row] + [normalize(b)] for row, b in zip(rows, rhs)]
    zero = _ZeroOracle(symbols, seed)
    # numerically vanishing entries are replaced by exact zeros up front
    for row in aug:
        for j, x in enumerate(row):
            if x != 0 and zero(x):
                row[j] = sp.S.Zero

    pivots: list[int] = []
    r = 0
    for col in range(nvars):
        cands = [i for i in range(r, len(aug)) if aug[i][col] != 0]
        if not cands:
            continue
        best = min(cands, key=lambda i: (_pivot_key(aug[i][col]), i))
        aug[r], aug[best] = aug[best], aug[r]
        prow = aug[r]
        p = prow[col]
        for i, row in enumerate(aug):
            if i == r or row[col] == 0:
                continue
            f = row[col]
            new = [normalize(p * x - f * y) for x, y in zip(row, prow)]
            aug[i] = [sp.S.Zero if (x != 0 and zero(x)) else x for x in new]
        pivots.append(col)
        r += 1
        if r == len(aug):
            break

    for row in aug[r:]:
        if row[-1] != 0:
            return LinearSolution("inconsistent", numeric=zero.numeric)

    particular = [sp.S.Zero] * nvars
    for i, col in enumerate(pivots):
        particular[col] = normalize(aug[i][-1] / aug[i][col])
    free = [c for c in range(nvars) if c not in pivots]
    basis = []
    for fcol in free:
        v = [sp.S.Zero] * nvars
        v[fcol] = sp.S.One
        for i, col in enumerate(pivots):
            v[col] = normalize(-aug[i][fcol] / aug[i][col])
        basis.append(tuple(v))
    return LinearSolution("family" if basis else "unique", tuple(particular), basis,
                          pivots, zero.numeric)
