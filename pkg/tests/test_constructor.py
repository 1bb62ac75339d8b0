import math

import numpy as np
import pytest

from tpgr.catalog import get_metric
from tpgr.constructor import (CASCADE_ORDER, CLOSED_FORM_SIGN, TypeITemplate, adaptive_simpson,
                              cascade_residual_report, g11_closed_form, parse_ansatz, solve_v,
                              template_from_ansatz, v_from_ansatz)
from tpgr.dsl import parse_expression, parse_metric_document
from tpgr.dsl.spec import Chart
from tpgr.errors import ProvisoError, QuadratureError
from tpgr.geometry import field_residual_at
from tpgr.sampling import sample_points

TXYZ = ("t", "x", "y", "z")
CHART = Chart(TXYZ)

GENERIC_TYPE_I = """\
chart t x y z
g00 = 1 + t^2 + x^2
g01 = 1 + x^2 + t*y
g02 = 0.1*x*z
g03 = 0.2*y + x
g22 = -(2 + sin(x) + y^2)
g33 = -(3 + x*z + x^2)
"""


def px(s):
    return parse_expression(s, TXYZ)


def template_of(spec, params=None):
    c = spec.component
    return TypeITemplate(chart=spec.chart, u=c(0, 0), p=c(0, 2), q=c(0, 3), rho=c(2, 2),
                         sigma=c(3, 3), v=c(0, 1),
                         parameters=tuple(sorted(spec.resolve_params(params).items())))


def exponential_ansatz_metric():
    # f = x, rho_t = sigma_t = -1, v = exp(x)
    doc = "chart t x y z\ng00 = 1\ng01 = exp(x)\ng22 = -exp(2*x)\ng33 = -exp(2*x)\n"
    return parse_metric_document(doc)


# -- v from the ansatz ------------------------------------------------------------------

@pytest.mark.parametrize("f, v0, x, want", [
    ("x", "1", 1.0, math.e),
    ("ln(x + 2)", "3", 0.0, 3.0),
    ("2*x", "1", 0.0, 2.0),
])
def test_v_from_ansatz(f, v0, x, want):
    assert v_from_ansatz(parse_ansatz(f, v0=v0), (0.0, x, 0.0, 0.0)) == pytest.approx(want, rel=1e-15)


def test_ansatz_rejects_bad_dependence():
    with pytest.raises(ValueError):
        parse_ansatz("x*y")
    with pytest.raises(ValueError):
        parse_ansatz("x", v0="x")


# -- solve_v ----------------------------------------------------------------------------

@pytest.mark.parametrize("f", ["x", "ln(x + 2)", "2*x", "x^2 + x", "ln(x + 0.5) + t"])
def test_solve_v_matches_ansatz_closed_form(f):
    ansatz = parse_ansatz(f, v0="1")
    template = template_from_ansatz(ansatz, CHART)
    other = (0.3, 0.0, 0.0)
    x0 = 0.0
    v_x0 = v_from_ansatz(ansatz, (other[0], x0, 0.0, 0.0))
    sol = solve_v(template, (0.0, 1.0), x0, v_x0, other=other, n_grid=20)
    want = np.array([v_from_ansatz(ansatz, (other[0], x, 0.0, 0.0)) for x in sol.x])
    assert len(sol.x) == 20
    assert np.max(np.abs(sol.v / want - 1)) <= 1e-6


def test_solve_v_exponential_and_constant_cases():
    exp_sol = solve_v(template_from_ansatz(parse_ansatz("x"), CHART), (0, 1), 0.0, 1.0)
    assert np.allclose(exp_sol.v, np.exp(exp_sol.x), rtol=1e-6, atol=0)
    const = solve_v(template_from_ansatz(parse_ansatz("ln(x + 2)"), CHART), (0, 1), 0.0, 5.0)
    assert np.allclose(const.v, 5.0, rtol=1e-6, atol=0)


def test_solve_v_interior_anchor():
    sol = solve_v(template_from_ansatz(parse_ansatz("x"), CHART), (0, 1), 0.5, 1.0, n_grid=11)
    assert sol.v[5] == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(sol.v, np.exp(sol.x - 0.5), rtol=1e-6)


def test_proviso_violation_names_the_point():
    t = TypeITemplate(chart=CHART, u=px("1"), p=px("0"), q=px("0"), rho=px("-1"), sigma=px("-2"))
    with pytest.raises(ProvisoError) as info:
        solve_v(t, (0.0, 1.0), 0.0, 1.0)
    assert info.value.x == 0.0


def test_non_integrable_singularity():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: 1.0 / (x - 0.3) if x != 0.3 else math.inf, 0.0, 1.0)
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: 1.0 / abs(x - 1 / 3) ** 1.5, 0.0, 1.0)


def test_simpson_accuracy():
    assert adaptive_simpson(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-12)
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-12)


# -- G_11 -------------------------------------------------------------------------------

def test_g11_vanishes_for_the_exponential_ansatz():
    spec = exponential_ansatz_metric()
    t = template_of(spec)
    for pt in [(0.0, 0.3, 0.0, 0.0), (1.0, -0.7, 2.0, 1.0)]:
        assert abs(g11_closed_form(t, pt)) <= 1e-12
        assert abs(field_residual_at(spec, None, pt)[1, 1]) <= 1e-12


def test_g11_vanishes_for_constant_blocks():
    t = TypeITemplate(chart=CHART, u=px("1"), p=px("0"), q=px("0"), rho=px("-2"),
                      sigma=px("-3"), v=px("1.5"))
    assert g11_closed_form(t, (0.1, 0.2, 0.3, 0.4)) == 0.0


@pytest.mark.parametrize("which", ["generic", "tilde"])
def test_g11_closed_form_matches_engine(which):
    if which == "generic":
        spec = parse_metric_document(GENERIC_TYPE_I)
        pts = np.random.default_rng(0).uniform(-1, 1, (20, 4))
    else:
        spec = get_metric("time-periodic-tilde")
        pts = sample_points(spec, None, 20, seed=12)
    t = template_of(spec)
    for pt in pts:
        engine = field_residual_at(spec, None, pt)[1, 1]
        closed = CLOSED_FORM_SIGN * g11_closed_form(t, pt)
        assert abs(closed - engine) <= 1e-8 * max(abs(engine), 1.0)


def test_g11_needs_known_v():
    t = template_from_ansatz(parse_ansatz("x"), CHART)
    with pytest.raises(ValueError):
        g11_closed_form(t, (0, 0, 0, 0))
    with pytest.raises(ValueError):
        t.to_metric()


# -- cascade ----------------------------------------------------------------------------

def test_cascade_labels_follow_construction_order():
    labels = [lab for lab, _ in CASCADE_ORDER]
    assert labels == ["G11", "G12", "G13", "G23", "G22+L*rho", "G33+L*sigma",
                      "G01+L*v", "G02+L*p", "G03+L*q", "G00+L*u"]


def test_cascade_minkowski_is_zero():
    rep = cascade_residual_report(get_metric("minkowski"), 0.0, [(0, 1, 2, 3), (1, 0, 0, 0)])
    assert not rep.residuals.any()
    assert rep.residuals.shape == (10, 2)


def test_cascade_schwarzschild_is_small():
    spec = get_metric("schwarzschild")
    rep = cascade_residual_report(spec, 0.0, sample_points(spec, None, 10, seed=1))
    assert max(rep.max_abs().values()) <= 1e-9


def test_cascade_lambda_shift():
    rep = cascade_residual_report(get_metric("minkowski"), 2.0, [(0, 0, 0, 0)])
    d = dict(zip(rep.labels, rep.residuals[:, 0]))
    assert d["G00+L*u"] == 2.0 and d["G22+L*rho"] == -2.0 and d["G12"] == 0.0


def test_cascade_tilde_pipelines_agree():
    spec = get_metric("time-periodic-tilde")
    pts = sample_points(spec, None, 8, seed=3)
    rep = cascade_residual_report(spec, 0.0, pts, oracle=True)
    assert rep.pipeline_discrepancy() <= 1e-6
    # The tilde metric does not satisfy the vacuum equations; the table shows it.
    assert max(rep.max_abs().values()) > 1e-3
    same = cascade_residual_report(spec, 0.0, pts, oracle=True, workers=3)
    assert np.array_equal(rep.residuals, same.residuals)
