import math

import numpy as np
import pytest

from tpgr.catalog import get_metric
from tpgr.dsl import parse_metric_document
from tpgr.errors import DomainError, OutsideChartError, SingularPointError
from tpgr.geometry import (bundle_discrepancy, christoffel_at, contracted_bianchi, curvature_at,
                           fd_curvature_oracle, field_residual_at, map_points, metric_at,
                           relative_error)
from tpgr.sampling import sample_points

CATALOG = ("time-periodic", "time-periodic-tilde", "minkowski", "schwarzschild")
ETA = np.diag([1.0, -1.0, -1.0, -1.0])

# Spatially flat FRW with scale factor a(t) = t. Hand value: G_tt = 3 (a'/a)^2 = 3/t^2.
FRW_DOC = """\
chart t x y z
domain t (0, inf)
g00 = 1
g11 = -t^2
g22 = -t^2
g33 = -t^2
"""


def test_minkowski_metric_value(backend):
    mv = metric_at(get_metric("minkowski"), None, (3.0, -1.0, 0.5, 2.0))
    assert np.array_equal(mv.g, ETA)
    assert mv.det == -1.0
    assert np.allclose(mv.g_inv, ETA)


def test_polar_metric_hand_values():
    # eps = 0, m = 1 at (0, 2, pi/2, 0): G = 1, M = 2, Q = 0, K = 2.
    mv = metric_at(get_metric("time-periodic", eps=0.0, m=1.0), None, (0.0, 2.0, math.pi / 2, 0.0))
    assert mv.g[0] == pytest.approx([1, 3, 0, 0], abs=1e-14)
    assert mv.g[1, 1] == pytest.approx(-7, abs=1e-13)
    assert mv.g[2, 2] == pytest.approx(-4, abs=1e-14)
    assert mv.g[3, 3] == pytest.approx(-4, abs=1e-14)
    assert mv.det == pytest.approx(-256, rel=1e-12)


def test_singular_point_at_r_equal_m():
    with pytest.raises(SingularPointError) as info:
        metric_at(get_metric("time-periodic"), None, (0.3, 1.0, 1.0, 0.0))
    assert "S_r=m" in info.value.tags


def test_outside_chart_is_reported():
    with pytest.raises(OutsideChartError):
        metric_at(get_metric("schwarzschild"), None, (0, 1.5, 1.0, 0))


def test_allow_singular_returns_no_inverse():
    spec = parse_metric_document("chart t x y z\ng00 = 1\ng11 = -1\ng22 = -1\ng33 = 0\n")
    with pytest.raises(SingularPointError):
        metric_at(spec, None, (0, 0, 0, 0))
    mv = metric_at(spec, None, (0, 0, 0, 0), allow_singular=True)
    assert mv.g_inv is None and mv.det == 0.0


def test_minkowski_connection_and_curvature_vanish(backend):
    spec = get_metric("minkowski")
    cf = christoffel_at(spec, None, (1, 2, 3, 4))
    assert not cf.gamma.any() and not cf.dgamma.any()
    b = curvature_at(spec, None, (1, 2, 3, 4))
    assert b.max_abs() <= 1e-12


def test_schwarzschild_christoffel_hand_value(backend):
    cf = christoffel_at(get_metric("schwarzschild"), None, (0.0, 4.0, math.pi / 2, 0.0))
    assert cf.gamma[1, 0, 0] == pytest.approx(0.03125, rel=1e-13)
    assert np.array_equal(cf.gamma, np.swapaxes(cf.gamma, 1, 2))


@pytest.mark.parametrize("r", [3.0, 5.0, 10.0])
def test_schwarzschild_calibration(backend, r):
    b = curvature_at(get_metric("schwarzschild"), None, (0.0, r, math.pi / 2, 0.0))
    assert np.max(np.abs(b.ricci)) <= 1e-9
    assert relative_error(b.kretschmann, 48 / r ** 6) <= 1e-8


def test_kretschmann_value_at_r3():
    b = curvature_at(get_metric("schwarzschild"), None, (0.0, 3.0, 1.0, 0.0))
    assert b.kretschmann == pytest.approx(0.0658436, abs=1e-7)


def test_frw_einstein_tensor():
    b = curvature_at(parse_metric_document(FRW_DOC), None, (1.0, 0.3, -0.2, 0.7))
    assert b.einstein[0, 0] == pytest.approx(3.0, rel=1e-12)
    # G_xx = -(2 a a'' + a'^2) = -1 at t = 1 for a = t
    assert b.einstein[1, 1] == pytest.approx(-1.0, rel=1e-12)


def test_field_residual():
    mink = get_metric("minkowski")
    assert not field_residual_at(mink, None, (0, 0, 0, 0)).any()
    assert np.array_equal(field_residual_at(mink, None, (0, 0, 0, 0), lam=1.0), ETA)
    res = field_residual_at(get_metric("schwarzschild"), None, (0.0, 5.0, 1.2, 0.0))
    assert np.max(np.abs(res)) <= 1e-9


def test_einstein_is_ricci_minus_half_trace():
    b = curvature_at(get_metric("time-periodic"), None, (1.0, 3.0, 1.0, 0.0))
    assert np.max(np.abs(b.einstein - (b.ricci - 0.5 * b.g * b.scalar))) <= 1e-12 * (1 + b.term_scale)


@pytest.mark.parametrize("name", CATALOG)
def test_symmetries_at_samples(name):
    spec = get_metric(name)
    for p in sample_points(spec, None, 25, seed=3):
        b = curvature_at(spec, None, p)
        assert max(b.symmetry_residuals().values()) <= 1e-9


def test_determinant_closed_form():
    params = {"eps": 0.05, "m": 1.0}
    spec = get_metric("time-periodic")
    from tpgr.analysis import det_closed_form

    for p in sample_points(spec, params, 100, seed=11):
        det = metric_at(spec, params, p).det
        assert relative_error(det, det_closed_form(params, p)) <= 1e-10


def test_block_determinant_formula():
    # Block shape: u w rho sigma - v^2 rho sigma - p^2 w sigma - q^2 w rho
    doc = """\
chart t x y z
g00 = 2 + x^2
g01 = 0.3*y
g02 = 0.2
g03 = 0.1*t
g11 = -3
g22 = -2 - z^2
g33 = -1.5
"""
    spec = parse_metric_document(doc)
    pt = (0.5, 0.7, -0.4, 0.9)
    g = metric_at(spec, None, pt).g
    u, v, p, q = g[0]
    w, rho, sig = g[1, 1], g[2, 2], g[3, 3]
    want = u * w * rho * sig - v * v * rho * sig - p * p * w * sig - q * q * w * rho
    assert relative_error(metric_at(spec, None, pt).det, want) <= 1e-10


# -- oracle ---------------------------------------------------------------------

def test_oracle_minkowski_is_zero():
    assert fd_curvature_oracle(get_metric("minkowski"), None, (1, 2, 3, 4)).max_abs() <= 1e-12


def test_oracle_schwarzschild_fixed_step():
    spec = get_metric("schwarzschild")
    pt = (0.0, 4.0, 1.1, 0.0)
    ora = fd_curvature_oracle(spec, None, pt, step=1e-3, order=2)
    assert relative_error(ora.kretschmann, curvature_at(spec, None, pt).kretschmann) <= 1e-6


@pytest.mark.parametrize("name", CATALOG)
def test_oracle_agreement_on_samples(name):
    spec = get_metric(name)
    for p in sample_points(spec, None, 20, seed=5):
        assert bundle_discrepancy(curvature_at(spec, None, p), fd_curvature_oracle(spec, None, p)) <= 1e-6


@pytest.mark.parametrize("name", ["time-periodic", "time-periodic-tilde", "schwarzschild"])
def test_oracle_second_order_convergence(name):
    # Plain second-order stencil, no extrapolation: halving the step quarters the error.
    spec = get_metric(name)
    pt = sample_points(spec, None, 1, seed=2)[0]
    jet = curvature_at(spec, None, pt)
    e1 = bundle_discrepancy(jet, fd_curvature_oracle(spec, None, pt, step=1e-3, richardson=False, order=2))
    e2 = bundle_discrepancy(jet, fd_curvature_oracle(spec, None, pt, step=5e-4, richardson=False, order=2))
    assert 3.5 <= e1 / e2 <= 4.5


def test_oracle_rejects_bad_order():
    with pytest.raises(ValueError):
        fd_curvature_oracle(get_metric("minkowski"), None, (0, 0, 0, 0), order=3)


def test_oracle_stencil_leaving_domain():
    with pytest.raises(DomainError):
        fd_curvature_oracle(get_metric("schwarzschild"), None, (0.0, 2.0 + 1e-5, 1.0, 0.0), step=1e-3)
    with pytest.raises(DomainError):
        fd_curvature_oracle(get_metric("schwarzschild"), None, (0.0, 2.0 + 1e-9, 1.0, 0.0))
    # Close to the edge the adaptive ladder drops the coarse rungs and still answers.
    spec = get_metric("schwarzschild")
    pt = (0.0, 2.05, 1.0, 0.0)
    assert bundle_discrepancy(curvature_at(spec, None, pt), fd_curvature_oracle(spec, None, pt)) <= 1e-6


# -- contracted Bianchi -------------------------------------------------------------

@pytest.mark.parametrize("name", ["schwarzschild", "minkowski"])
def test_contracted_bianchi(name):
    spec = get_metric(name)
    for p in sample_points(spec, None, 10, seed=9):
        assert np.max(np.abs(contracted_bianchi(spec, None, p))) <= 1e-5


def test_map_points_keeps_order():
    assert map_points(lambda x: x * x, range(10), workers=3) == [x * x for x in range(10)]
