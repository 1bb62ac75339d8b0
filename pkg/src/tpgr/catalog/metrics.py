"""Built-in metrics.

Every builder assembles its components from expression text, so the shipped
``.gmet`` documents are exactly ``serialize_metric_document(builder())``.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..dsl.expr import Expr
from ..dsl.parser import parse_expression, parse_metric_document, serialize_metric_document
from ..dsl.spec import Chart, Interval, MetricSpec

POLAR = ("t", "r", "theta", "phi")
TILDE = ("tau", "rt", "tht", "pht")


def _omegas(theta: str) -> tuple[str, str]:
    half = f"tan({theta}/2)"
    return f"({half}^(1/2) + {half}^(-1/2))", f"({half}^(1/2) - {half}^(-1/2))"


def _half_open_angle(coords, params) -> Interval:
    return Interval(parse_expression("0"), parse_expression("pi"), True, True)


# Helper scalars of the polar chart, as expression text.
_OP, _OM = _omegas("theta")
HELPER_TEXT = {
    "omega_plus": _OP,
    "omega_minus": _OM,
    "G": f"1 + 2*eps*{_OP}*sin(theta)*cos(t - r)",
    "K": "r + m*ln(abs(r - m)) + eps*sin(t - r)",
    "M": f"{_OP}*sin(theta)",
    "Q": f"-1/2*(1 + 2*sin(theta))*{_OM}",
}


def helper_expr(name: str) -> Expr:
    """One of G, K, M, Q, omega_plus, omega_minus as an expression on the polar chart."""
    return parse_expression(HELPER_TEXT[name], POLAR, ("eps", "m"))


def time_periodic_polar(eps: float = 0.05, m: float = 1.0) -> MetricSpec:
    """The time-periodic metric on the chart (t, r, theta, phi), theta in (0, pi)."""
    h = HELPER_TEXT
    G, K, M, Q = (f"({h[k]})" for k in "GKMQ")
    X = f"{M}*r/(r - m)"
    text = {
        (0, 0): G,
        (0, 1): f"-{G} + {X}",
        (0, 2): f"{Q}*{K}",
        (1, 1): f"{G} - 2*{X}",
        (1, 2): f"-{Q}*{K}",
        (2, 2): f"-{K}^2",
        (3, 3): f"-{K}^2*sin(theta)^2",
    }
    params = (("eps", float(eps)), ("m", float(m)))
    entries = {ij: parse_expression(src, POLAR, ("eps", "m")) for ij, src in text.items()}
    chart = Chart(POLAR, (None, None, _half_open_angle(POLAR, ()), None))
    return _canonical(MetricSpec.from_matrix(chart, entries, params, "time-periodic"))


def time_periodic_tilde(eps: float = 0.05, m: float = 1.0) -> MetricSpec:
    """The same solution family on the chart (tau, rt, tht, pht); the (1,1) slot is 0."""
    if m == 0:
        raise ValueError("the tilde chart divides by m; m = 0 is not allowed")
    op, om = _omegas("tht")
    W = "(exp((rt + tau)/m) + m)"
    L = "(rt + tau + eps*sin(tau))"
    text = {
        (0, 0): f"1 + 2*eps*{op}*sin(tht)*cos(tau) + 2*{op}*sin(tht)/m*{W}",
        (0, 1): f"{op}*sin(tht)/m*{W}",
        (0, 2): f"1/2*(1 + 2*sin(tht))*{om}*{L}",
        (2, 2): f"-{L}^2",
        (3, 3): f"-{L}^2*sin(tht)^2",
    }
    params = (("eps", float(eps)), ("m", float(m)))
    entries = {ij: parse_expression(src, TILDE, ("eps", "m")) for ij, src in text.items()}
    chart = Chart(TILDE, (None, None, _half_open_angle(TILDE, ()), None))
    return _canonical(MetricSpec.from_matrix(chart, entries, params, "time-periodic-tilde"))


def minkowski() -> MetricSpec:
    chart = Chart(("t", "x", "y", "z"))
    one = parse_expression("1")
    minus = parse_expression("-1")
    entries = {(0, 0): one, (1, 1): minus, (2, 2): minus, (3, 3): minus}
    return _canonical(MetricSpec.from_matrix(chart, entries, (), "minkowski"))


def schwarzschild(mu: float = 1.0) -> MetricSpec:
    """Exterior Schwarzschild metric of mass ``mu``; chart valid for r > 2 mu."""
    if not mu > 0:
        raise ValueError("schwarzschild needs mu > 0")
    params = (("mu", float(mu)),)
    text = {
        (0, 0): "1 - 2*mu/r",
        (1, 1): "-1/(1 - 2*mu/r)",
        (2, 2): "-r^2",
        (3, 3): "-r^2*sin(theta)^2",
    }
    entries = {ij: parse_expression(src, POLAR, ("mu",)) for ij, src in text.items()}
    r_dom = Interval(parse_expression("2*mu", (), ("mu",)), parse_expression("inf"), True, True)
    chart = Chart(POLAR, (None, r_dom, _half_open_angle(POLAR, ()), None))
    return _canonical(MetricSpec.from_matrix(chart, entries, params, "schwarzschild"))


def _canonical(spec: MetricSpec) -> MetricSpec:
    # Round-trip through the document form so in-code and shipped specs are
    # structurally identical (number formatting, folded literals).
    return parse_metric_document(serialize_metric_document(spec))


BUILDERS = {
    "time-periodic": time_periodic_polar,
    "time-periodic-tilde": time_periodic_tilde,
    "minkowski": minkowski,
    "schwarzschild": schwarzschild,
}

DATA_FILES = {
    "time-periodic": "time_periodic_polar.gmet",
    "time-periodic-tilde": "time_periodic_tilde.gmet",
    "minkowski": "minkowski.gmet",
    "schwarzschild": "schwarzschild.gmet",
}


def shipped_document(name: str) -> str:
    """Text of the ``.gmet`` file shipped for catalog entry ``name``."""
    return resources.files("tpgr.catalog").joinpath("data", DATA_FILES[name]).read_text("utf-8")


@lru_cache(maxsize=None)
def _default(name: str) -> MetricSpec:
    return BUILDERS[name]()


def get_metric(name: str, **params: float) -> MetricSpec:
    """Catalog metric by name with optional parameter overrides."""
    if name not in BUILDERS:
        raise KeyError(f"unknown catalog metric '{name}' (known: {', '.join(sorted(BUILDERS))})")
    spec = _default(name)
    if not params:
        return spec
    unknown = sorted(set(params) - set(spec.param_names))
    if unknown:
        raise KeyError(f"metric '{name}' has no parameter(s) {', '.join(unknown)}")
    # Rebuild rather than override so the builder's own validation runs.
    return BUILDERS[name](**{**spec.resolve_params(), **params})
