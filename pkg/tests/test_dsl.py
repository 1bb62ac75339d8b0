import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpgr.catalog import BUILDERS, get_metric, helper_expr, shipped_document
from tpgr.catalog.metrics import POLAR
from tpgr.dsl import (eval_jet2, eval_tape, evaluate_values, jet_fd_agreement,
                      parse_expression, parse_metric_document, serialize_metric_document)
from tpgr.dsl.expr import Binary, Const, Coord, Unary, coords_used, params_used, to_source
from tpgr.dsl.jet import Jet2
from tpgr.dsl.spec import SLOTS, sym_index
from tpgr.dsl.tape import compile_tape
from tpgr.errors import DomainError, MetricSyntaxError, OutsideChartError

MINKOWSKI_DOC = """\
chart t x y z
g00 = 1
g11 = -1
g22 = -1
g33 = -1
"""


def px(text, params=("eps", "m")):
    return parse_expression(text, POLAR, params)


# -- parsing --------------------------------------------------------------------------

def test_minkowski_document_has_four_diagonal_slots():
    spec = parse_metric_document(MINKOWSKI_DOC)
    assert spec.chart.names == ("t", "x", "y", "z")
    zeros = spec.zero_slots()
    assert len(zeros) == 6
    assert all(i != j for i, j in zeros)


def test_polar_zero_pattern():
    spec = parse_metric_document(shipped_document("time-periodic"))
    assert spec.zero_slots() == {(0, 3), (1, 3), (2, 3)}
    assert spec.name == "time-periodic"


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_shipped_documents_round_trip(name):
    text = shipped_document(name)
    spec = parse_metric_document(text)
    again = parse_metric_document(serialize_metric_document(spec))
    assert again == spec
    assert serialize_metric_document(spec) == text
    assert spec == get_metric(name)


def test_unknown_function_is_reported_with_position():
    doc = "chart t x y z\ng00 = sinh(x)\n"
    with pytest.raises(MetricSyntaxError) as info:
        parse_metric_document(doc)
    assert info.value.line == 2
    assert info.value.column == 7
    assert "sinh" in str(info.value)


@pytest.mark.parametrize("doc, line, fragment", [
    ("chart t x y\ng00 = 1\n", 1, "exactly 4"),
    ("chart t x y z\ng00 = a*x\n", 2, "undeclared parameter"),
    ("chart t x y z\ng01 = x\ng10 = t\n", 3, "non-symmetric duplicate"),
    ("chart t x y z\ng01 = x\ng01 = x\n", 3, "duplicate slot"),
    ("chart t x y z\ng10 = x\n", 2, "g01"),
    ("chart t x y z\ng44 = 1\n", 2, "out of range"),
    ("g00 = 1\n", 1, "chart"),
    ("chart t x y z\n", 2, "no metric slots"),
    ("chart t x y z\ng00 = x^y\n", 2, "constant"),
    ("chart t x y z\ng00 = (1 + x\n", 2, ")"),
    ("chart t x y z\ndomain x (1, 0)\ng00 = 1\n", 2, "empty"),
    ("chart t t y z\ng00 = 1\n", 1, "distinct"),
    ("chart t x y z\nparam a = x\ng00 = 1\n", 2, "undeclared parameter"),
])
def test_syntax_errors(doc, line, fragment):
    with pytest.raises(MetricSyntaxError) as info:
        parse_metric_document(doc)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_params_domain_and_comments():
    doc = """\
# a comment
chart t r theta phi
metric demo-1
param a = 2.5   # trailing comment
domain r (a, inf)
domain theta [0.1, pi)
g00 = 1 - a/r
g11 = -1/(1 - a/r)
g22 = -r^2
g33 = -r^2*sin(theta)^2
"""
    spec = parse_metric_document(doc)
    assert spec.name == "demo-1"
    assert spec.parameters == (("a", 2.5),)
    iv = spec.chart.intervals[1]
    assert iv.bounds({"a": 2.5}) == (2.5, math.inf)
    assert not iv.contains(2.5, {"a": 2.5})
    assert spec.chart.intervals[2].contains(0.1, {})
    with pytest.raises(OutsideChartError):
        spec.chart.check((0, 2.0, 1.0, 0), {"a": 2.5})


def test_precedence_and_unary_minus():
    e = parse_expression("-x^2 + 2*3^2/4", ("t", "x", "y", "z"))
    v = evaluate_values(e, np.array([[0, 3.0, 0, 0]]), {})
    assert v[0] == pytest.approx(-9 + 4.5)


def test_to_source_reparses_identically():
    for name in ("G", "K", "M", "Q", "omega_plus", "omega_minus"):
        e = helper_expr(name)
        assert px(to_source(e)) == e


def test_walk_helpers():
    e = px("eps*sin(t - r) + m")
    assert params_used(e) == {"eps", "m"}
    assert coords_used(e) == {0, 1}


def test_slot_order_matches_hessian_order():
    assert SLOTS[0] == (0, 0) and SLOTS[4] == (1, 1) and SLOTS[-1] == (3, 3)
    assert sym_index(3, 1) == sym_index(1, 3)


# -- jets -----------------------------------------------------------------------------

def test_sin_jet_at_zero_argument():
    j = eval_jet2(px("sin(t - r)"), (1.3, 1.3, 1.0, 0.0))
    assert j.value == 0.0
    assert j.grad == (1.0, -1.0, 0.0, 0.0)
    assert all(h == 0.0 for h in j.hess)


def test_omega_plus_at_equator():
    j = eval_jet2(helper_expr("omega_plus"), (0, 2, math.pi / 2, 0), {"eps": 0.1, "m": 1})
    assert j.value == pytest.approx(2.0, abs=1e-15)
    assert j.grad[2] == pytest.approx(0.0, abs=1e-14)


def test_k_value():
    j = eval_jet2(helper_expr("K"), (2, 3, 1.0, 0), {"eps": 0.1, "m": 1.0})
    assert j.value == pytest.approx(3 + math.log(2) + 0.1 * math.sin(-1), abs=1e-14)
    assert round(j.value, 6) == 3.609000


def test_quadratic_fd_agreement_is_tight():
    assert jet_fd_agreement(px("t^2 + r"), (0.3, 1.2, 1.0, 0.0), {}) <= 1e-6


def test_g_expression_fd_agreement():
    d = jet_fd_agreement(helper_expr("G"), (1, 2, 1.0, 0), {"eps": 0.1, "m": 1.0}, step=1e-4)
    assert d <= 1e-6


def test_abs_at_zero_is_a_domain_error():
    with pytest.raises(DomainError) as info:
        eval_jet2(px("abs(r - m)"), (0, 1.0, 1.0, 0), {"eps": 0.1, "m": 1.0})
    assert "abs" in str(info.value)
    assert info.value.subexpr == "abs(r - m)"
    with pytest.raises(DomainError):
        jet_fd_agreement(px("abs(r - m)"), (0, 1.0, 1.0, 0), {"eps": 0.1, "m": 1.0})


@pytest.mark.parametrize("text, point", [
    ("ln(r)", (0, -1.0, 1, 0)),
    ("sqrt(r)", (0, 0.0, 1, 0)),
    ("asin(r)", (0, 1.0, 1, 0)),
    ("1/(r - 2)", (0, 2.0, 1, 0)),
    ("r^(1/2)", (0, -4.0, 1, 0)),
    ("r^(-1)", (0, 0.0, 1, 0)),
    ("exp(exp(r))", (0, 10.0, 1, 0)),
])
def test_domain_errors_in_both_evaluators(text, point):
    e = px(text)
    with pytest.raises(DomainError):
        eval_jet2(e, point, {"eps": 0, "m": 1})
    with pytest.raises(DomainError):
        evaluate_values(e, np.array([point]), {"eps": 0, "m": 1})


def test_unknown_parameter_value():
    with pytest.raises(KeyError):
        eval_jet2(px("m*r"), (0, 1, 1, 0), {})


def test_tape_matches_single_jets():
    exprs = [helper_expr(h) for h in ("G", "K", "M")]
    tape = compile_tape(exprs, ("eps", "m"))
    pt = (0.7, 2.5, 1.1, 0.3)
    p = {"eps": 0.1, "m": 1.0}
    rows = eval_tape(tape, pt, p)
    for row, e in zip(rows, exprs):
        assert np.allclose(row, eval_jet2(e, pt, p).to_list(), rtol=0, atol=1e-13)


def test_zero_slot_is_exactly_zero():
    spec = get_metric("time-periodic")
    from tpgr.geometry import metric_at

    g = metric_at(spec, None, (0.2, 2.0, 1.0, 0.0)).g
    assert g[0, 3] == 0.0 and g[1, 3] == 0.0 and g[2, 3] == 0.0


# -- properties -----------------------------------------------------------------------

_SUBEXPRS = ("G", "K", "M", "Q", "omega_plus", "omega_minus")


@st.composite
def polar_points(draw):
    t = draw(st.floats(0, 4 * math.pi))
    r = draw(st.floats(1.2, 10.0))
    th = draw(st.floats(0.2, math.pi - 0.2))
    return (t, r, th, 0.0)


@settings(max_examples=60, deadline=None)
@given(name=st.sampled_from(_SUBEXPRS), pt=polar_points(),
       eps=st.floats(-0.12, 0.12), m=st.floats(0.2, 1.0))
def test_jets_agree_with_finite_differences(name, pt, eps, m):
    assert jet_fd_agreement(helper_expr(name), pt, {"eps": eps, "m": m}, step=1e-4) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(a=st.sampled_from(_SUBEXPRS), b=st.sampled_from(_SUBEXPRS), pt=polar_points())
def test_product_and_chain_rules(a, b, pt):
    p = {"eps": 0.1, "m": 0.5}
    fa, fb = eval_jet2(helper_expr(a), pt, p), eval_jet2(helper_expr(b), pt, p)
    prod = eval_jet2(Binary("*", helper_expr(a), helper_expr(b)), pt, p)
    manual = fa * fb
    scale = 1 + max(abs(x) for x in manual.to_list())
    assert max(abs(x - y) for x, y in zip(prod.to_list(), manual.to_list())) <= 1e-12 * scale
    chained = eval_jet2(Unary("sin", helper_expr(a)), pt, p)
    s, c = math.sin(fa.value), math.cos(fa.value)
    g, h = np.array(fa.grad), fa.hessian()
    want_h = c * h - s * np.outer(g, g)
    assert chained.value == pytest.approx(s, abs=1e-12)
    assert np.allclose(chained.grad, c * g, atol=1e-12 * (1 + np.abs(g).max()))
    assert np.allclose(chained.hessian(), want_h, atol=1e-12 * (1 + np.abs(want_h).max()))


@settings(max_examples=80, deadline=None)
@given(x=st.floats(-3, 3), y=st.floats(0.1, 3), p=st.sampled_from([2.0, 3.0, 0.5, -1.0, 1.5]))
def test_jet_algebra_matches_closed_forms(x, y, p):
    a = Jet2.var(x, 0)
    b = Jet2.var(y, 1)
    q = (a * a + 1) / b
    assert q.value == pytest.approx((x * x + 1) / y)
    assert q.grad[0] == pytest.approx(2 * x / y)
    assert q.grad[1] == pytest.approx(-(x * x + 1) / y ** 2)
    assert q.d2(0, 1) == pytest.approx(-2 * x / y ** 2)
    assert q.d2(1, 1) == pytest.approx(2 * (x * x + 1) / y ** 3)
    w = b ** p
    assert w.d2(1, 1) == pytest.approx(p * (p - 1) * y ** (p - 2))


def test_const_leaf_helpers():
    assert to_source(Const(math.pi, "pi")) == "pi"
    assert coords_used(Coord(2, "theta")) == {2}
