"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL``/``SKIPPED`` line; the lines are printed
as they happen (visible with ``-s``) and again in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import itertools
import random

import pytest
import sympy as sp

from zcyclic.corpus import builtin_entries, get_entry
from zcyclic.numeric import validate
from zcyclic.structures import (
    check_recurrent,
    classify,
    cyclic_covariant_sum_raw,
    solve_wc_general,
    solve_wc_reduced,
    solve_weak,
    verify_witness,
    wc_residual,
    witness_forms,
)
from zcyclic.symexpr import is_zero, normalize, parse_expr
from zcyclic.tensor import curvature, metric_tensor, pullback_tensor

RESULTS: dict[int, str] = {}
NUMERIC_TOL = 1e-5
NUMERIC_POINTS = 5
NUMERIC_SEED = 0


def record(n, ok, title, detail=""):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {title}" + (f" ({detail})" if detail else "")
    RESULTS[n] = line
    print(line)
    assert ok, line


def corpus(include_flagged=True):
    return builtin_entries(include_flagged=include_flagged)


def target(m):
    c = curvature(m)
    return c.z() if m.phi is not None else c.ricci


# ----------------------------------------------------------------------------

def test_criterion_1_golden_tables():
    mismatches = []
    checked = 0
    for entry in corpus(include_flagged=False):
        m = entry.metric
        c = curvature(m)
        tensors = {"R": c.riemann, "S": c.ricci, "dR": c.nabla_riemann, "dS": c.nabla_ricci}
        if m.phi is not None:
            tensors.update(Z=c.z(), dZ=c.nabla(c.z()))
        if entry.table_frame is not None:
            tensors = {k: pullback_tensor(t, m.chart, entry.table_frame)
                       for k, t in tensors.items()}
        for key in entry.tables:
            want = entry.expected_tensor(key)
            for idx in want.symmetry.representatives(m.dim):
                checked += 1
                if not is_zero(tensors[key][idx] - want[idx], m.symbols):
                    mismatches.append(f"{entry.name} {key}{tuple(i + 1 for i in idx)}")
    # the quoted Example-1 relation, in the table frame
    e1 = get_entry("E1")
    dR = pullback_tensor(curvature(e1.metric).nabla_riemann, e1.metric.chart, e1.table_frame)
    val = parse_expr("r^3/(64*(r^2+8))", e1.metric.symbols)
    rel_ok = all(is_zero(x, e1.metric.symbols) for x in
                 (dR[0, 1, 0, 1, 2] / 2 - val, dR[0, 1, 0, 2, 1] - val, dR[0, 1, 1, 2, 0] + val))
    record(1, not mismatches and rel_ok, "golden curvature tables",
           f"{checked} canonical components; mismatches: {mismatches or 'none'}")


def test_criterion_2_witnesses():
    out = {}
    for name in ("E1", "E2", "E3"):
        m = get_entry(name).metric
        out[name] = verify_witness(m, target(m), witness_forms(m)).verdict
    record(2, set(out.values()) == {"holds"}, "witness verification", str(out))


def test_criterion_3_family_recovery():
    m = get_entry("E3").metric
    t = curvature(m).ricci
    space = solve_wc_general(m, t)
    alpha, beta = m.symbols.symbol("alpha"), m.symbols.symbol("beta")
    z = (sp.S.Zero,) * 3
    witness = ((alpha,) + z, (beta,) + z, (3 - alpha - beta,) + z)
    coeffs = space.coefficients_of(witness, m.symbols)
    member_ok = coeffs is not None and all(
        normalize(a - b) == 0 for got, want in zip(space.member(coeffs), witness)
        for a, b in zip(got, want))
    reduced = solve_wc_reduced(m, t)
    red_ok = reduced.status == "unique" and list(reduced.particular[0]) == [1, 0, 0, 0]
    ok = space.status == "family" and space.family_dimension == 2 and member_ok and red_ok
    record(3, ok, "solver family recovery",
           f"status {space.status}, dimension {space.family_dimension}, "
           f"witness in family {member_ok}, reduced E {reduced.status}")


def test_criterion_4_properness():
    e1, e2, e3 = (get_entry(n).metric for n in ("E1", "E2", "E3"))
    w1 = solve_weak(e1, curvature(e1).ricci).status
    w2 = solve_weak(e2, curvature(e2).z()).status
    w3 = solve_weak(e3, curvature(e3).ricci)
    c3 = curvature(e3)
    pis = [check_recurrent(e3, t) for t in (c3.riemann, c3.ricci)]
    rec_ok = all(p.status == "unique" and list(p.particular[0]) == [1, 0, 0, 0] for p in pis)
    ok = w1 == "inconsistent" and w2 == "inconsistent" and w3.solvable and rec_ok
    record(4, ok, "properness and recurrence",
           f"weak E1 {w1}, E2 {w2}, E3 {w3.status}; recurrence pi=(1,0,0,0) {rec_ok}")


def test_criterion_5_reduction_and_symmetry():
    m = get_entry("E3").metric
    t = curvature(m).ricci
    space = solve_wc_general(m, t)
    rng = random.Random(2024)
    reduction_ok = True
    for _ in range(5):
        coeffs = [sp.Rational(rng.randint(-20, 20), rng.randint(1, 7))
                  for _ in range(space.family_dimension)]
        A, B, D = space.member(coeffs)
        E = tuple(normalize((a + b + d) / 3) for a, b, d in zip(A, B, D))
        reduction_ok &= wc_residual(m, t, E, E, E).is_zero(m.symbols)
    sym_ok = True
    for entry in corpus():
        mm = entry.metric
        raw = cyclic_covariant_sum_raw(target(mm), mm)
        sym_ok &= all(is_zero(raw[p] - v, mm.symbols)
                      for idx, v in raw.items() for p in itertools.permutations(idx))
    record(5, reduction_ok and sym_ok, "reduction to a single 1-form; slot symmetry",
           f"5 family members reduce {reduction_ok}; permutation invariance {sym_ok}")


def test_criterion_6_not_quasi_einstein():
    rep = classify(get_entry("E2").metric, structures=("wczs", "quasi-einstein"))
    ro = rep.results["quasi-einstein"].detail["rank_one"]
    pats = ro["eigenvalue_multiplicities"]
    F = rep.results["wczs"].detail["F"]
    ok = (ro["kind"] == "none" and len(pats) >= 5 and all(p == [2, 2] for p in pats)
          and F == ["0"] * 4 and "minors" in ro["note"])
    record(6, ok, "rank-one split excluded, F = B - D vanishes",
           f"kind {ro['kind']}, patterns {pats}, F {F}")


def _structural_failures(m):
    c = curvature(m)
    n = m.dim
    R, dR = c.riemann, c.nabla_riemann
    z = lambda e: is_zero(e, m.symbols)
    bad = []
    for h, i, j, k in itertools.product(range(n), repeat=4):
        v = R[h, i, j, k]
        if not (z(v + R[i, h, j, k]) and z(v + R[h, i, k, j]) and z(v - R[j, k, h, i])):
            bad.append(("symmetry", h, i, j, k))
        if not z(v + R[h, j, k, i] + R[h, k, i, j]):
            bad.append(("bianchi-1", h, i, j, k))
        for l in range(n):
            if not z(dR[h, i, j, k, l] + dR[h, i, k, l, j] + dR[h, i, l, j, k]):
                bad.append(("bianchi-2", h, i, j, k, l))
    if not c.nabla(metric_tensor(m)).is_zero(m.symbols):
        bad.append(("nabla-g",))
    for i in range(n):
        lhs = sum(c.ginv[j, k] * c.nabla_ricci[i, j, k] for j in range(n) for k in range(n))
        if not z(lhs - c.d(c.scalar, i) / 2):
            bad.append(("contracted-bianchi", i))
    return bad


def test_criterion_7_structural_invariants():
    bad = {e.name: _structural_failures(e.metric) for e in corpus()}
    bad = {k: v for k, v in bad.items() if v}
    record(7, not bad, "Bianchi identities, Riemann symmetries, metric compatibility",
           f"{len(corpus())} metrics; failures: {bad or 'none'}")


def test_criterion_8_numeric_cross_validation():
    errs = {}
    for entry in corpus():
        errs[entry.name] = validate(entry.metric, seed=NUMERIC_SEED,
                                    points=NUMERIC_POINTS).max_rel_error
    worst = max(errs.values())
    record(8, worst <= NUMERIC_TOL, "finite-difference cross-validation",
           f"seed {NUMERIC_SEED}, {NUMERIC_POINTS} points, tol {NUMERIC_TOL:g}, "
           f"worst rel error {worst:.2e}")


def test_criterion_9_refuted_example():
    try:
        e41, e42 = get_entry("E4-phi1"), get_entry("E4-phi2")
    except KeyError:
        RESULTS[9] = "criterion 9: SKIPPED - transcription unavailable"
        print(RESULTS[9])
        pytest.skip("E4 transcription unavailable")
    m1 = e41.metric
    c1 = curvature(m1)
    dZ = c1.nabla(c1.z())
    value_ok = is_zero(dZ[0, 3, 0] - parse_expr("-8/(9*x4^(5/3))", m1.symbols), m1.symbols)
    wczs1 = solve_wc_general(m1, c1.z()).status
    m2 = e42.metric
    weak2 = solve_weak(m2, curvature(m2).z())
    ok = value_ok and wczs1 == "inconsistent" and weak2.solvable
    record(9, ok, "refuted example (flagged transcription)",
           f"Z_14,1 value {value_ok}; cyclic condition with phi1 {wczs1}; "
           f"weak condition with phi2 {weak2.status}")
