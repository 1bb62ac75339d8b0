"""The compiled kernels and the pure-Python fallback must agree."""

import numpy as np
import pytest

from tpgr import _backend, _fallback
from tpgr.catalog import get_metric
from tpgr.geometry import curvature_at, tape_for
from tpgr.sampling import sample_points

needs_compiled = pytest.mark.skipif(not _backend.compiled_available(),
                                    reason="compiled kernels not built")


def test_fallback_is_always_available():
    assert "python" in _backend.available()
    assert _fallback.NAME == "python"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("name", ["time-periodic", "time-periodic-tilde", "schwarzschild"])
def test_curvature_matches_across_backends(name):
    spec = get_metric(name)
    pts = sample_points(spec, None, 15, seed=7)
    prev = _backend.set_backend("cython")
    try:
        fast = [curvature_at(spec, None, p) for p in pts]
        _backend.set_backend("python")
        slow = [curvature_at(spec, None, p) for p in pts]
    finally:
        _backend.set_backend(prev)
    for a, b in zip(fast, slow):
        scale = 1 + a.max_abs() + a.term_scale
        assert np.max(np.abs(a.riemann_low - b.riemann_low)) <= 1e-12 * scale
        assert np.max(np.abs(a.einstein - b.einstein)) <= 1e-12 * scale
        assert abs(a.kretschmann - b.kretschmann) <= 1e-12 * scale ** 2


@needs_compiled
def test_tape_jets_match_across_backends():
    from tpgr import _kernels

    spec = get_metric("time-periodic")
    tape = tape_for(spec)
    pt = np.array([0.4, 2.5, 1.2, 0.1])
    args = (tape.ops, tape.args, tape.consts, tape.starts, pt,
            tape.param_vector(spec.resolve_params(None)), tape.stack_size)
    fast, fast_status, _ = _kernels.eval_tapes(*args)
    slow, slow_status, _ = _fallback.eval_tapes(*args)
    assert fast_status == slow_status == 0
    assert np.allclose(fast, slow, rtol=0, atol=1e-13)


@needs_compiled
def test_domain_status_matches_across_backends():
    from tpgr import _kernels

    spec = get_metric("time-periodic")
    tape = tape_for(spec)
    pt = np.array([0.4, 1.0, 1.2, 0.1])  # r = m
    args = (tape.ops, tape.args, tape.consts, tape.starts, pt,
            tape.param_vector(spec.resolve_params(None)), tape.stack_size)
    _, fast_status, fast_pc = _kernels.eval_tapes(*args)
    _, slow_status, slow_pc = _fallback.eval_tapes(*args)
    assert fast_status != 0
    assert (fast_status, fast_pc) == (slow_status, slow_pc)


def test_fixture_switches_backend(backend):
    assert _backend.name() == backend
    b = curvature_at(get_metric("minkowski"), None, (0, 1, 2, 3))
    assert b.max_abs() == 0.0
