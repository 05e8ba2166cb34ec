import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conecontract.normcore import NormSpec, weighted_norm
from conecontract.odesim import VectorField, flow
from conecontract.pairings import (ZeroVectorError, check_curve_norm_derivative, check_deimling,
                                   max_index_set, wp, wp_many)

INF = math.inf

vec = arrays(np.float64, 3, elements=st.floats(-10, 10, allow_nan=False, width=64))
ps = st.sampled_from([1.0, 1.5, 2.0, 3.0, INF])
weights = st.sampled_from(["identity", "diag", "general"])


def make_ns(p, kind):
    if kind == "identity":
        return NormSpec.identity(p)
    if kind == "diag":
        return NormSpec.diag(p, [0.5, 1.0, 2.0])
    return NormSpec.general(p, [[1.0, 0.3, 0.0], [0.0, 1.0, 0.5], [0.2, 0.0, 1.0]])


def test_examples():
    ns1 = NormSpec.identity(1)
    assert wp([1, -1], [1, 1], ns1) == 0.0
    assert wp([3, 5], [2, 1], NormSpec.identity(INF)) == pytest.approx(6.0)


def test_pairing_with_zero_is_zero():
    for p in (1.0, 1.5, 2.0, INF):
        assert wp([1.0, 2.0], [0.0, 0.0], NormSpec.identity(p)) == 0.0
        assert wp_many([[1.0, 2.0]], [[0.0, 0.0]], NormSpec.identity(p))[0] == 0.0


def test_max_index_set_examples():
    assert tuple(max_index_set([2, 1])) == (0,)
    assert tuple(max_index_set([1, 1])) == (0, 1)
    assert tuple(max_index_set([1, 1 - 1e-12], tau=1e-9)) == (0, 1)
    assert tuple(max_index_set([-3, 3])) == (0, 1)
    with pytest.raises(ZeroVectorError):
        max_index_set([0, 0])


@settings(max_examples=150, deadline=None)
@given(x=vec, y=vec, p=ps, kind=weights)
def test_pairing_axioms(x, y, p, kind):
    ns = make_ns(p, kind)
    nx, ny = weighted_norm(x, ns), weighted_norm(y, ns)
    scale = 1.0 + nx * ny
    # compatibility with the norm
    assert wp(x, x, ns) == pytest.approx(nx ** 2, rel=1e-9, abs=1e-9)
    # Cauchy-Schwarz
    assert abs(wp(x, y, ns)) <= nx * ny + 1e-9 * scale
    # weak homogeneity
    assert wp(-x, -y, ns) == pytest.approx(wp(x, y, ns), rel=1e-9, abs=1e-9 * scale)
    assert wp(2.5 * x, y, ns) == pytest.approx(2.5 * wp(x, y, ns), rel=1e-9, abs=1e-9 * scale)
    assert wp(x, 2.5 * y, ns) == pytest.approx(2.5 * wp(x, y, ns), rel=1e-9, abs=1e-9 * scale)


@settings(max_examples=150, deadline=None)
@given(x1=vec, x2=vec, y=vec, p=ps, kind=weights)
def test_subadditive_in_first_argument(x1, x2, y, p, kind):
    ns = make_ns(p, kind)
    scale = 1.0 + weighted_norm(y, ns) * (weighted_norm(x1, ns) + weighted_norm(x2, ns))
    assert wp(x1 + x2, y, ns) <= wp(x1, y, ns) + wp(x2, y, ns) + 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(x=vec, y=vec, p=ps, kind=weights)
def test_wp_many_matches_scalar(x, y, p, kind):
    ns = make_ns(p, kind)
    assert wp_many([x], [y], ns)[0] == pytest.approx(wp(x, y, ns), rel=1e-12, abs=1e-10)


def test_deimling_examples(rng):
    for p in (1.0, 1.5, 2.0, INF):
        ns = NormSpec.identity(p)
        y = rng.standard_normal(3)
        assert abs(check_deimling(y, y, ns).worst_margin) < 1e-7
        assert abs(check_deimling(-y, y, ns).worst_margin) < 1e-7
    ns = NormSpec.identity(2)
    for _ in range(50):
        x, y = rng.standard_normal((2, 3))
        assert check_deimling(x, y, ns).passed


def test_deimling_weighted_random(rng):
    for p in (1.0, 1.5, 3.0, INF):
        ns = NormSpec.general(p, [[1.0, 0.4], [0.1, 1.0]])
        for _ in range(30):
            x, y = rng.standard_normal((2, 2))
            assert check_deimling(x, y, ns).passed


def test_curve_norm_derivative_examples():
    decay = flow(VectorField(1, lambda t, x: -x), 0.0, [1.0], 3.0, rtol=1e-11, atol=1e-13)
    for ns in (NormSpec.identity(1), NormSpec.identity(INF), NormSpec.diag(1.5, [2.0])):
        rep = check_curve_norm_derivative(decay, ns)
        assert rep.passed and rep.extra["max_residual"] < 1e-6
    still = flow(VectorField(2, lambda t, x: np.zeros(2)), 0.0, [1.0, 2.0], 1.0)
    assert check_curve_norm_derivative(still, NormSpec.identity(2)).extra["max_residual"] == 0.0


def test_curve_norm_derivative_rotation_excludes_only_switches():
    rot = VectorField(2, lambda t, x: np.array([-x[1], x[0]]))
    tr = flow(rot, 0.0, [1.0, 0.2], 2 * math.pi, rtol=1e-11, atol=1e-13, hmax=0.05)
    rep = check_curve_norm_derivative(tr, NormSpec.identity(INF))
    assert rep.passed and rep.extra["max_residual"] < 1e-6
    # |x1| = |x2| when t + phase hits pi/4 + k pi/2
    phase = math.atan2(0.2, 1.0)
    for t in rep.extra["excluded_times"]:
        offset = (t + phase - math.pi / 4) % (math.pi / 2)
        assert min(offset, math.pi / 2 - offset) < 0.06
