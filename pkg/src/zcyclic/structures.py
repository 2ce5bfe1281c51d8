"""Weakly cyclic symmetry conditions as linear systems in the 1-forms.

For a symmetric (0,2) tensor ``T`` with covariant derivative ``T_{ij,k}``:

* cyclic:  T_{ij,k} + T_{kj,i} + T_{ik,j} = A_k T_ij + B_i T_kj + D_j T_ik
* reduced: the same with A = B = D = E
* weak:    T_{ij,k}                       = A_k T_ij + B_i T_kj + D_j T_ik

With ``T = Z = S + phi*g`` these are WCZS / WZS, with ``T = S`` WCRS / WRS.
Equations are imposed for every ordered index triple, since the right-hand
side is not symmetric when A, B, D differ.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy as sp

from .linsolve import UndecidablePivot, solve_linear
from .symexpr import Expr, ExprError, SingularEvaluation, evaluate, is_zero, normalize, to_string
from .tensor import MetricSpec, TensorField, curvature, fully_symmetric, no_symmetry

log = logging.getLogger(__name__)

OneForm = tuple[Expr, ...]

CONDITIONS = (
    "wczs", "wcrs", "wzs", "wrs", "recurrent", "ricci-recurrent",
    "gray-a", "codazzi", "einstein", "quasi-einstein",
)


@dataclass
class SolutionSpace:
    """Affine family of 1-form tuples solving one defining condition.

    ``basis`` spans the homogeneous solutions over the expression field; its
    members are combined with constant coefficients when sampling.
    """

    status: str  # "inconsistent" | "unique" | "family" | "degenerate"
    names: tuple[str, ...]
    dim: int
    particular: tuple[OneForm, ...] | None = None
    basis: list[tuple[OneForm, ...]] = field(default_factory=list)
    numeric: bool = False

    @property
    def family_dimension(self) -> int:
        return len(self.basis) if self.status == "family" else 0

    @property
    def solvable(self) -> bool:
        return self.status in ("unique", "family")

    def member(self, coeffs: Sequence[Expr] = ()) -> tuple[OneForm, ...]:
        if self.particular is None:
            raise ValueError(f"no solutions ({self.status})")
        coeffs = list(coeffs) + [0] * (len(self.basis) - len(coeffs))
        out = []
        for f, base in enumerate(self.particular):
            out.append(tuple(
                normalize(base[i] + sum(c * b[f][i] for c, b in zip(coeffs, self.basis)))
                for i in range(self.dim)
            ))
        return tuple(out)

    def coefficients_of(self, forms: Sequence[OneForm], symbols) -> tuple[Expr, ...] | None:
        """Basis coefficients reaching ``forms``, or None if not in the family."""
        if self.particular is None:
            return None
        target = [normalize(forms[f][i] - self.particular[f][i])
                  for f in range(len(self.names)) for i in range(self.dim)]
        if not self.basis:
            return () if all(is_zero(x, symbols) for x in target) else None
        rows = [[b[f][i] for b in self.basis]
                for f in range(len(self.names)) for i in range(self.dim)]
        sol = solve_linear(rows, target, symbols)
        return None if sol.status == "inconsistent" else sol.particular

    def forces_equal(self, symbols) -> bool | None:
        """Whether every member has all its 1-forms equal (A = B = D)."""
        if self.particular is None or len(self.names) < 2:
            return None
        vecs = [self.particular] + list(self.basis)
        return all(
            is_zero(v[0][i] - v[f][i], symbols)
            for v in vecs for f in range(1, len(self.names)) for i in range(self.dim)
        )

    def to_dict(self) -> dict:
        def forms(t):
            return {name: [to_string(x) for x in f] for name, f in zip(self.names, t)}

        return {
            "status": self.status,
            "family_dimension": self.family_dimension,
            "particular": forms(self.particular) if self.particular else None,
            "basis": [forms(b) for b in self.basis],
            "zero_test": "numeric" if self.numeric else "exact",
        }


# ------------------------------------------------------- left-hand sides


def _cyclic(dt: TensorField, k: int, i: int, j: int) -> Expr:
    return dt[i, j, k] + dt[k, j, i] + dt[i, k, j]


def _check_symmetric(t: TensorField):
    if t.valence != 2:
        raise ValueError("a (0,2) tensor is required")
    if t.symmetry.name != "symmetric":
        for i, j in itertools.combinations(range(t.dim), 2):
            if normalize(t[i, j] - t[j, i]) != 0:
                raise ValueError("the tensor must be symmetric")


def cyclic_covariant_sum(t: TensorField, m: MetricSpec) -> TensorField:
    """``L_kij = T_ij,k + T_kj,i + T_ik,j``, stored as a fully symmetric tensor."""
    _check_symmetric(t)
    dt = curvature(m).nabla(t)
    return TensorField.build(t.dim, fully_symmetric(3), lambda kij: _cyclic(dt, *kij))


def cyclic_covariant_sum_raw(t: TensorField, m: MetricSpec) -> dict[tuple[int, int, int], Expr]:
    """Every ordered slot of the cyclic sum, computed without symmetry."""
    dt = curvature(m).nabla(t)
    return {kij: normalize(_cyclic(dt, *kij))
            for kij in itertools.product(range(t.dim), repeat=3)}


def _rhs(t: TensorField, A, B, D, k, i, j) -> Expr:
    return A[k] * t[i, j] + B[i] * t[k, j] + D[j] * t[i, k]


def wc_residual(m: MetricSpec, t: TensorField, A: OneForm, B: OneForm, D: OneForm) -> TensorField:
    """Cyclic sum minus ``A_k T_ij + B_i T_kj + D_j T_ik`` for every (k, i, j)."""
    _check_symmetric(t)
    dt = curvature(m).nabla(t)
    return TensorField.build(
        t.dim, no_symmetry(3),
        lambda kij: _cyclic(dt, *kij) - _rhs(t, A, B, D, *kij),
    )


def weak_residual(m: MetricSpec, t: TensorField, A: OneForm, B: OneForm, D: OneForm) -> TensorField:
    _check_symmetric(t)
    dt = curvature(m).nabla(t)
    return TensorField.build(
        t.dim, no_symmetry(3),
        lambda kij: dt[kij[1], kij[2], kij[0]] - _rhs(t, A, B, D, *kij),
    )


# ------------------------------------------------------------- solvers


def _space(sol, names, n, numeric_extra=False) -> SolutionSpace:
    if sol.status == "inconsistent":
        return SolutionSpace("inconsistent", names, n, numeric=sol.numeric)

    def split(vec):
        return tuple(tuple(vec[f * n:(f + 1) * n]) for f in range(len(names)))

    return SolutionSpace(sol.status, names, n, split(sol.particular),
                         [split(b) for b in sol.basis], sol.numeric or numeric_extra)


def _solve(rows, rhs, names, n, m: MetricSpec, seed: int) -> SolutionSpace:
    uniq = {}
    for row, b in zip(rows, rhs):
        row = tuple(normalize(x) for x in row)
        b = normalize(b)
        if all(x == 0 for x in row) and b == 0:
            continue
        uniq.setdefault(row + (b,), (row, b))
    rows = [r for r, _ in uniq.values()]
    rhs = [b for _, b in uniq.values()]
    if not rows:
        return SolutionSpace("unique", names, n, tuple((sp.S.Zero,) * n for _ in names), [])
    return _space(solve_linear(rows, rhs, m.symbols, seed), names, n)


def _degenerate(t: TensorField, m: MetricSpec, names) -> SolutionSpace | None:
    if t.is_zero(m.symbols):
        return SolutionSpace("degenerate", names, m.dim)
    return None


def _abd_system(t: TensorField, lhs) -> tuple[list[list[Expr]], list[Expr]]:
    n = t.dim
    rows, rhs = [], []
    for k, i, j in itertools.product(range(n), repeat=3):
        row = [sp.S.Zero] * (3 * n)
        row[k] += t[i, j]
        row[n + i] += t[k, j]
        row[2 * n + j] += t[i, k]
        rows.append(row)
        rhs.append(lhs(k, i, j))
    return rows, rhs


def cyclic_system(m: MetricSpec, t: TensorField):
    """Rows over the unknowns (A_1..A_n, B_1..B_n, D_1..D_n), one per (k, i, j)."""
    dt = curvature(m).nabla(t)
    return _abd_system(t, lambda k, i, j: _cyclic(dt, k, i, j))


def weak_system(m: MetricSpec, t: TensorField):
    dt = curvature(m).nabla(t)
    return _abd_system(t, lambda k, i, j: dt[i, j, k])


def reduced_system(m: MetricSpec, t: TensorField):
    """Rows over (E_1..E_n); the condition is symmetric so sorted triples suffice."""
    n = t.dim
    dt = curvature(m).nabla(t)
    rows, rhs = [], []
    for k, i, j in itertools.combinations_with_replacement(range(n), 3):
        row = [sp.S.Zero] * n
        row[k] += t[i, j]
        row[i] += t[k, j]
        row[j] += t[i, k]
        rows.append(row)
        rhs.append(_cyclic(dt, k, i, j))
    return rows, rhs


def recurrence_system(m: MetricSpec, t: TensorField):
    n = t.dim
    dt = curvature(m).nabla(t)
    rows, rhs = [], []
    for idx in t.symmetry.representatives(n):
        for l in range(n):
            row = [sp.S.Zero] * n
            row[l] = t[idx]
            rows.append(row)
            rhs.append(dt[idx + (l,)])
    return rows, rhs


def solve_wc_general(m: MetricSpec, t: TensorField, seed: int = 0) -> SolutionSpace:
    """All (A, B, D) with the cyclic condition, as an affine family."""
    _check_symmetric(t)
    names = ("A", "B", "D")
    if (deg := _degenerate(t, m, names)) is not None:
        return deg
    return _solve(*cyclic_system(m, t), names, m.dim, m, seed)


def solve_wc_reduced(m: MetricSpec, t: TensorField, seed: int = 0) -> SolutionSpace:
    """The cyclic condition with a single 1-form E in all three slots."""
    _check_symmetric(t)
    names = ("E",)
    if (deg := _degenerate(t, m, names)) is not None:
        return deg
    return _solve(*reduced_system(m, t), names, m.dim, m, seed)


def solve_weak(m: MetricSpec, t: TensorField, seed: int = 0) -> SolutionSpace:
    """All (A, B, D) with ``T_ij,k = A_k T_ij + B_i T_kj + D_j T_ik``."""
    _check_symmetric(t)
    names = ("A", "B", "D")
    if (deg := _degenerate(t, m, names)) is not None:
        return deg
    return _solve(*weak_system(m, t), names, m.dim, m, seed)


def check_recurrent(m: MetricSpec, t: TensorField, seed: int = 0) -> SolutionSpace:
    """Solve ``nabla T = pi (x) T`` for the recurrence 1-form pi.

    A vanishing tensor is reported as degenerate (vacuously recurrent).
    """
    names = ("pi",)
    if (deg := _degenerate(t, m, names)) is not None:
        return deg
    return _solve(*recurrence_system(m, t), names, m.dim, m, seed)


def gray_class_checks(m: MetricSpec) -> tuple[bool, bool]:
    """(cyclic parallel Ricci tensor, Codazzi-type Ricci tensor)."""
    c = curvature(m)
    S, dS = c.ricci, c.nabla_ricci
    n = m.dim
    class_a = all(
        is_zero(_cyclic(dS, *kij), m.symbols)
        for kij in itertools.combinations_with_replacement(range(n), 3)
    )
    class_b = all(
        is_zero(dS[i, j, k] - dS[i, k, j], m.symbols)
        for i, j, k in itertools.product(range(n), repeat=3) if j < k
    )
    return class_a, class_b


# ------------------------------------------------- rank-one Ricci splits


EIGEN_TOL = 1e-6
EIGEN_POINTS = 5


@dataclass
class RankOneReport:
    """Outcome of searching ``S = a g + b eta (x) eta``.

    ``kind`` is one of einstein, quasi_einstein, rank_one_null_generator,
    none, indeterminate.
    """

    kind: str
    a: Expr | None = None
    b: Expr | None = None
    eta: OneForm | None = None
    causal: str | None = None
    patterns: list[tuple[int, ...]] = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a": None if self.a is None else to_string(self.a),
            "b": None if self.b is None else to_string(self.b),
            "eta": None if self.eta is None else [to_string(x) for x in self.eta],
            "causal": self.causal,
            "eigenvalue_multiplicities": [list(p) for p in self.patterns],
            "note": self.note,
        }


def _cluster(values: np.ndarray, tol: float) -> list[list[complex]]:
    groups: list[list[complex]] = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(g[0] - v) <= tol:
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def _eval_matrix(rows, pt) -> np.ndarray:
    return np.array([[float(evaluate(x, pt)) for x in row] for row in rows])


def _signature(m: MetricSpec, pt) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(_eval_matrix(m.g, pt))
    return int((ev > 0).sum()), int((ev < 0).sum())


def rank_one_ricci_decomposition(m: MetricSpec, seed: int = 0,
                                 points: int = EIGEN_POINTS) -> RankOneReport:
    c = curvature(m)
    n = m.dim
    S = c.ricci
    syms = m.symbols
    G = m.matrix
    Smat = sp.Matrix(n, n, lambda i, j: S[i, j])
    if all(is_zero(Smat[i, j] - c.scalar / n * G[i, j], syms) for i in range(n) for j in range(n)):
        return RankOneReport("einstein", a=normalize(c.scalar / n), note="S = (r/n) g")

    # numeric eigenstructure of g^{-1} S
    patterns = []
    samples = []
    rng = random.Random(seed)
    attempts = 0
    while len(patterns) < points:
        attempts += 1
        if attempts > 64 * points:
            return RankOneReport("indeterminate", patterns=patterns,
                                 note="too many singular sample points")
        pt = syms.sample_point(rng)
        try:
            gnum = _eval_matrix(m.g, pt)
            snum = _eval_matrix(Smat.tolist(), pt)
        except (SingularEvaluation, ZeroDivisionError, OverflowError):
            continue
        mat = np.linalg.solve(gnum, snum)
        ev = np.linalg.eigvals(mat)
        scale = max(np.abs(ev).max(), np.linalg.norm(mat), 1e-300)
        groups = _cluster(ev, EIGEN_TOL * scale)
        patterns.append(tuple(sorted((len(g) for g in groups), reverse=True)))
        samples.append((pt, groups))
    admits = [p[0] >= n - 1 for p in patterns]
    if not any(admits):
        kind = "none"
    elif not all(admits):
        return RankOneReport("indeterminate", patterns=patterns,
                             note="eigenvalue multiplicities differ across sample points")
    else:
        kind = "candidate"

    # symbolic: every admissible a is a root of every 2x2 minor of S - a g
    a = sp.Dummy("a")
    M = Smat - a * G
    minors = []
    for (i, j), (k, l) in itertools.product(itertools.combinations(range(n), 2), repeat=2):
        expr = sp.expand(sp.numer(sp.together(M[i, k] * M[j, l] - M[i, l] * M[j, k])))
        if expr != 0:
            minors.append(sp.Poly(expr, a))
    nonconst = [p for p in minors
                if any(not is_zero(cf, syms) for cf in p.all_coeffs()[:-1])]
    confirmed = None
    candidates = []
    if nonconst:
        pick = min(nonconst, key=lambda p: (p.degree(), sp.count_ops(p.as_expr())))
        candidates = [normalize(r) for r in sp.roots(pick, a, multiple=True)]
        candidates = list(dict.fromkeys(candidates))
    for cand in candidates:
        Mc = (Smat - cand * G).applyfunc(normalize)
        if all(is_zero(Mc[i, k] * Mc[j, l] - Mc[i, l] * Mc[j, k], syms)
               for (i, j), (k, l) in itertools.product(
                   itertools.combinations(range(n), 2), repeat=2)):
            confirmed = (cand, Mc)
            break
    if kind == "none":
        if confirmed is not None:
            return RankOneReport("indeterminate", patterns=patterns,
                                 note="numeric and symbolic rank tests disagree")
        return RankOneReport("none", patterns=patterns,
                             note="no a makes rank(S - a g) <= 1 (all 2x2 minors checked)")
    if confirmed is None:
        return RankOneReport("indeterminate", patterns=patterns,
                             note="numeric candidate not confirmed symbolically")
    aval, Mc = confirmed
    k = next(i for i in range(n) if not is_zero(Mc[i, i], syms))
    w = tuple(Mc[k, j] for j in range(n))
    gi = c.ginv
    norm = normalize(sum(gi[i, j] * w[i] * w[j] for i in range(n) for j in range(n)))
    pt = samples[0][0]
    p_pos, p_neg = _signature(m, pt)
    if is_zero(norm, syms):
        return RankOneReport("rank_one_null_generator", a=aval, b=normalize(1 / Mc[k, k]),
                             eta=w, causal="null", patterns=patterns,
                             note="S - a g = (1/M_kk) w (x) w with g(w, w) = 0")
    signs = {np.sign(float(evaluate(norm, p))) for p, _ in samples}
    if len(signs) != 1:
        return RankOneReport("indeterminate", a=aval, patterns=patterns,
                             note="generator norm changes sign")
    s = int(signs.pop())
    timelike_sign = -1 if p_neg == 1 else (1 if p_pos == 1 and n > 2 else None)
    causal = "timelike" if s == timelike_sign else "spacelike"
    eta = tuple(normalize(x / sp.sqrt(s * norm)) for x in w)
    b = normalize(s * norm / Mc[k, k])
    return RankOneReport("quasi_einstein", a=aval, b=b, eta=eta, causal=causal,
                         patterns=patterns)


# ----------------------------------------------------------- classifier


@dataclass
class ConditionResult:
    structure: str
    verdict: str  # holds | fails | degenerate | error | indeterminate | not-applicable
    solution: SolutionSpace | None = None
    residual: dict[tuple[int, ...], Expr] = field(default_factory=dict)
    detail: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        sol = self.solution
        return {
            "structure": self.structure,
            "verdict": self.verdict,
            "witness": sol.to_dict() if sol else self.detail.get("witness"),
            "family_dimension": sol.family_dimension if sol else None,
            "residual_nonzero_components": {
                "".join(str(i + 1) for i in k): to_string(v)
                for k, v in sorted(self.residual.items())
            },
            **({"error": self.error} if self.error else {}),
            **{k: v for k, v in self.detail.items() if k != "witness"},
        }


def _verdict(space: SolutionSpace) -> str:
    return {"unique": "holds", "family": "holds", "inconsistent": "fails",
            "degenerate": "degenerate"}[space.status]


def verify_witness(m: MetricSpec, t: TensorField, forms: Sequence[OneForm],
                   cyclic: bool = True) -> ConditionResult:
    A, B, D = forms
    res = (wc_residual if cyclic else weak_residual)(m, t, A, B, D)
    bad = {k: v for k, v in res.components.items() if not is_zero(v, m.symbols)}
    return ConditionResult("witness", "fails" if bad else "holds", residual=bad,
                           detail={"witness": {n: [to_string(x) for x in f]
                                               for n, f in zip("ABD", forms)}})


def witness_forms(m: MetricSpec) -> tuple[OneForm, OneForm, OneForm] | None:
    if all(m.oneform(k) is not None for k in "ABD"):
        return tuple(m.oneform(k) for k in "ABD")
    if m.oneform("E") is not None:
        e = m.oneform("E")
        return (e, e, e)
    return None


def run_condition(m: MetricSpec, name: str, seed: int = 0) -> ConditionResult:
    """Solve one named condition; errors are captured in the result."""
    c = curvature(m)
    try:
        if name in ("wczs", "wzs"):
            if m.phi is None:
                return ConditionResult(name, "not-applicable",
                                       detail={"note": "no phi given; see the Ricci variant"})
            t = c.z()
        elif name in ("wcrs", "wrs"):
            t = c.ricci
        if name in ("wczs", "wcrs"):
            space = solve_wc_general(m, t, seed)
            out = ConditionResult(name, _verdict(space), space)
            if space.solvable:
                out.detail["forces_A_eq_B_eq_D"] = space.forces_equal(m.symbols)
                A, B, D = space.particular
                out.detail["F"] = [to_string(normalize(b - d)) for b, d in zip(B, D)]
                if space.family_dimension:
                    out.detail["note"] = ("family coefficients are constants over the "
                                          "expression-field basis")
            return out
        if name in ("wzs", "wrs"):
            space = solve_weak(m, t, seed)
            return ConditionResult(name, _verdict(space), space)
        if name == "recurrent":
            space = check_recurrent(m, c.riemann, seed)
            return ConditionResult(name, _verdict(space), space)
        if name == "ricci-recurrent":
            space = check_recurrent(m, c.ricci, seed)
            return ConditionResult(name, _verdict(space), space)
        if name in ("gray-a", "codazzi"):
            a, b = gray_class_checks(m)
            ok = a if name == "gray-a" else b
            return ConditionResult(name, "holds" if ok else "fails")
        if name in ("einstein", "quasi-einstein"):
            rep = rank_one_ricci_decomposition(m, seed)
            if name == "einstein":
                verdict = "holds" if rep.kind == "einstein" else "fails"
            else:
                verdict = {"quasi_einstein": "holds", "indeterminate": "indeterminate"}.get(
                    rep.kind, "fails")
            return ConditionResult(name, verdict, detail={"rank_one": rep.to_dict()})
    except (UndecidablePivot, ExprError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("condition %s failed: %s", name, exc)
        return ConditionResult(name, "error", error=str(exc))
    raise ValueError(f"unknown structure {name!r}")


@dataclass
class StructureReport:
    metric: MetricSpec
    results: dict[str, ConditionResult]
    witness: ConditionResult | None = None

    def _proper(self, cyc: str, weak: str) -> bool | None:
        a, b = self.results.get(cyc), self.results.get(weak)
        if a is None or b is None:
            return None
        if a.verdict not in ("holds", "fails") or b.verdict not in ("holds", "fails"):
            return None
        return a.verdict == "holds" and b.verdict == "fails"

    @property
    def proper_wczs(self) -> bool | None:
        return self._proper("wczs", "wzs")

    @property
    def proper_wcrs(self) -> bool | None:
        return self._proper("wcrs", "wrs")

    def to_dict(self) -> dict:
        return {
            "results": [r.to_dict() for r in self.results.values()],
            "proper_wczs": self.proper_wczs,
            "proper_wcrs": self.proper_wcrs,
            "witness_check": self.witness.to_dict() if self.witness else None,
        }


def classify(m: MetricSpec, seed: int = 0,
             structures: Sequence[str] = CONDITIONS) -> StructureReport:
    results = {name: run_condition(m, name, seed) for name in CONDITIONS if name in structures}
    witness = None
    forms = witness_forms(m)
    if forms is not None:
        c = curvature(m)
        t = c.z() if m.phi is not None else c.ricci
        witness = verify_witness(m, t, forms)
        witness.structure = "wczs" if m.phi is not None else "wcrs"
    return StructureReport(m, results, witness)
