import itertools
import random

import mpmath
import pytest
import sympy as sp

from zcyclic.corpus import builtin_entries, flat_metric, goedel_unsimplified_g22
from zcyclic.numeric import NumericPipeline
from zcyclic.symexpr import evaluate, is_zero, normalize, parse_expr
from zcyclic.tensor import (
    Chart,
    DegenerateMetric,
    MetricSpec,
    christoffel,
    covariant_derivative,
    curvature,
    inverse_metric,
    metric_tensor,
    pullback_tensor,
    ricci,
    riemann,
    scalar_curvature,
    z_tensor,
)

from conftest import CORPUS_NAMES
from zcyclic.corpus import get_entry

ALL = CORPUS_NAMES + ["flat"]


def metric_of(name):
    return flat_metric() if name == "flat" else get_entry(name).metric


def ex(m, text):
    return parse_expr(text, m.symbols)


def same(m, a, b):
    return is_zero(sp.sympify(a) - sp.sympify(b), m.symbols)


# ---------------------------------------------------------------- metric

def test_chart_requires_three_dimensions():
    with pytest.raises(ValueError):
        Chart.create(["u", "v"])


def test_degenerate_metric_rejected():
    chart = Chart.create(["x1", "x2", "x3"])
    with pytest.raises(DegenerateMetric):
        MetricSpec.from_strings(chart, {(1, 1): "x1", (1, 2): "x1", (2, 2): "x1", (3, 3): "1"})


def test_inverse_metric_e2(e2):
    m = e2.metric
    gi = inverse_metric(m)
    want = ["x1^(-2)", "x1^(-2)", "x1^(-2)", "-x1^2"]
    for i in range(4):
        for j in range(4):
            assert same(m, gi[i, j], ex(m, want[i]) if i == j else 0)


def test_inverse_metric_e3_block(e3):
    m = e3.metric
    gi = inverse_metric(m)
    assert same(m, gi[0, 0], 0)
    assert same(m, gi[0, 1], 1)
    assert same(m, gi[1, 1], ex(m, "-exp(x1)*((x3)^2+x3+1)"))
    prod = (m.matrix * gi).applyfunc(normalize)
    assert prod == sp.eye(4)


def test_inverse_metric_identity(flat):
    assert inverse_metric(flat) == sp.eye(4)


# ------------------------------------------------------------ connection

@pytest.fixture(scope="module")
def polar():
    chart = Chart.create(["r", "th", "z"], assumptions={"r": ">"})
    return MetricSpec.from_strings(chart, {(1, 1): "1", (2, 2): "r^2", (3, 3): "1"})


def test_polar_christoffel_values(polar):
    gam = christoffel(polar).gamma
    r = polar.symbols.symbol("r")
    expected = {(0, 1, 1): -r, (1, 0, 1): 1 / r, (1, 1, 0): 1 / r}
    for k, i, j in itertools.product(range(3), repeat=3):
        assert same(polar, gam[k][i][j], expected.get((k, i, j), 0))


def test_polar_christoffel_against_finite_differences(polar):
    gam = christoffel(polar).gamma
    rng = random.Random(7)
    with mpmath.workdps(40):
        for _ in range(3):
            pt = {"r": rng.uniform(0.5, 3), "th": rng.uniform(-3, 3), "z": rng.uniform(-3, 3)}
            num = NumericPipeline(polar, pt).christoffel(
                [mpmath.mpf(pt[c]) for c in polar.chart.coords])
            for k, i, j in itertools.product(range(3), repeat=3):
                assert abs(evaluate(gam[k][i][j], pt) - float(num[k][i][j])) < 1e-9


def test_constant_metric_has_zero_connection(flat):
    gam = christoffel(flat).gamma
    assert all(x == 0 for plane in gam for row in plane for x in row)


@pytest.mark.parametrize("name", ALL)
def test_connection_symmetric(name):
    m = metric_of(name)
    gam = christoffel(m).gamma
    for k, i, j in itertools.product(range(m.dim), repeat=3):
        assert gam[k][i][j] == gam[k][j][i]


# -------------------------------------------------------------- curvature

def test_riemann_e1_printed_values(e1):
    m = e1.metric
    R = riemann(m)
    assert same(m, R[0, 1, 0, 1], ex(m, "-r^2/64"))
    assert same(m, R[0, 2, 0, 2], ex(m, "-1/(r^2+8)"))


def test_riemann_e2(e2):
    m = e2.metric
    R = riemann(m)
    assert same(m, R[0, 1, 0, 1], 1)
    assert same(m, R[0, 2, 0, 2], 1)
    assert same(m, R[1, 2, 1, 2], -1)
    assert same(m, R[0, 3, 0, 3], ex(m, "3/x1^4"))


def test_ricci_e3(e3):
    m = e3.metric
    S = ricci(m)
    assert set(S.nonzero()) == {(0, 0)}
    assert same(m, S[0, 0], ex(m, "exp(x1)"))


@pytest.mark.parametrize("name", ["E2", "E3"])
def test_scalar_curvature_vanishes(name):
    assert normalize(scalar_curvature(metric_of(name))) == 0


def test_flat_curvature_vanishes(flat):
    assert not riemann(flat).nonzero()
    assert not ricci(flat).nonzero()
    assert scalar_curvature(flat) == 0


def test_covariant_derivative_e1_printed(e1):
    m = e1.metric
    dS = covariant_derivative(ricci(m), m)
    assert same(m, dS[2, 2, 2], ex(m, "-32*r/(r^2+8)^3"))


def test_covariant_derivative_e2(e2):
    m = e2.metric
    dS = covariant_derivative(ricci(m), m)
    assert same(m, dS[3, 3, 0], ex(m, "4/x1^7"))


def test_z_tensor_e2(e2):
    m = e2.metric
    Z = z_tensor(m)
    assert same(m, Z[0, 0], ex(m, "a/x1^4"))
    assert same(m, Z[3, 3], ex(m, "-a/x1^8"))
    dZ = covariant_derivative(Z, m)
    assert same(m, dZ[0, 0, 0], ex(m, "-6*a/x1^5"))
    assert same(m, dZ[0, 1, 1], ex(m, "2/x1^3"))


@pytest.mark.parametrize("name", ["E1", "E2", "E3"])
def test_z_with_zero_phi_is_ricci(name):
    m = metric_of(name).with_phi(sp.S.Zero)
    assert z_tensor(m).components == ricci(m).components
    assert curvature(m.with_phi(None)).z().components == ricci(m).components


# ------------------------------------------------------------ invariants

@pytest.mark.parametrize("name", ALL)
def test_riemann_symmetries(name):
    m = metric_of(name)
    R = riemann(m)
    for h, i, j, k in itertools.product(range(m.dim), repeat=4):
        v = R[h, i, j, k]
        assert same(m, v, -R[i, h, j, k])
        assert same(m, v, -R[h, i, k, j])
        assert same(m, v, R[j, k, h, i])


def _raw_riemann(m):
    c = curvature(m)
    return {idx: c.riemann[idx] for idx in itertools.product(range(m.dim), repeat=4)}


@pytest.mark.parametrize("name", ALL)
def test_first_bianchi(name):
    m = metric_of(name)
    R = riemann(m)
    for h, i, j, k in itertools.product(range(m.dim), repeat=4):
        assert same(m, R[h, i, j, k] + R[h, j, k, i] + R[h, k, i, j], 0)


@pytest.mark.parametrize("name", ALL)
def test_second_bianchi(name):
    m = metric_of(name)
    dR = curvature(m).nabla_riemann
    for h, i, j, k, l in itertools.product(range(m.dim), repeat=5):
        if h >= i or j >= k:
            continue  # antisymmetry in (h,i) and (j,k) covers the rest
        total = dR[h, i, j, k, l] + dR[h, i, k, l, j] + dR[h, i, l, j, k]
        assert same(m, total, 0), (h, i, j, k, l)


@pytest.mark.parametrize("name", ALL)
def test_metric_compatibility(name):
    m = metric_of(name)
    dg = covariant_derivative(metric_tensor(m), m)
    assert dg.is_zero(m.symbols)


@pytest.mark.parametrize("name", ALL)
def test_contracted_bianchi(name):
    m = metric_of(name)
    c = curvature(m)
    n = m.dim
    for i in range(n):
        lhs = sum(c.ginv[j, k] * c.nabla_ricci[i, j, k] for j in range(n) for k in range(n))
        rhs = c.d(c.scalar, i) / 2
        assert same(m, lhs, rhs)


# ---------------------------------------------------- frames and storage

def test_goedel_g22_regression(e1):
    raw = goedel_unsimplified_g22()
    assert normalize(raw) == e1.metric.g[1][1]
    assert e1.metric.g[1][1] == -e1.metric.symbols.symbol("r") ** 2 / 8


def test_pullback_tensor_matches_pulled_back_metric(e1):
    m = e1.metric
    J = e1.table_frame
    direct = ricci(m.pullback_linear(J))
    pulled = pullback_tensor(ricci(m), m.chart, J)
    for idx in direct.all_indices():
        assert same(m, direct[idx], pulled[idx])


def test_pullback_identity_is_noop(e2):
    m = e2.metric
    eye = [[int(i == j) for j in range(4)] for i in range(4)]
    assert m.pullback_linear(eye).g == m.g
