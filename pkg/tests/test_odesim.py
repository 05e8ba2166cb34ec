import math

import numpy as np
import pytest

from conecontract.normcore import NormSpec
from conecontract.odesim import (IntegrationError, VectorField, check_order_preservation,
                                 check_positivity, coppel_check, flow, flow_pair)

INF = math.inf


def fixed_step(vf, x0, t1, h):
    # huge tolerances accept every step; hmax pins the step length
    return flow(vf, 0.0, x0, t1, rtol=1e10, atol=1e10, h0=h, hmax=h)


def test_flow_examples():
    decay = VectorField(1, lambda t, x: -x)
    assert flow(decay, 0.0, [1.0], 1.0).final[0] == pytest.approx(math.exp(-1), abs=1e-8)
    diag = VectorField.linear(np.diag([-1.0, -2.0]))
    np.testing.assert_allclose(flow(diag, 0.0, [1.0, 1.0], 1.0).final,
                               [math.exp(-1), math.exp(-2)], atol=1e-8)
    still = VectorField(2, lambda t, x: np.zeros(2))
    tr = flow(still, 0.0, [0.3, -0.7], 5.0)
    assert np.array_equal(tr.x, np.tile([0.3, -0.7], (len(tr), 1)))


def test_fifth_order_convergence():
    vf = VectorField(2, lambda t, x: np.array([x[1], -x[0]]))
    exact = np.array([math.cos(2.0), -math.sin(2.0)])
    hs = [0.2, 0.1, 0.05, 0.025]
    errs = [np.max(np.abs(fixed_step(vf, [1.0, 0.0], 2.0, h).final - exact)) for h in hs]
    slopes = np.diff(np.log(errs)) / np.diff(np.log(hs))
    assert np.all(slopes >= 4.0), slopes


def test_dense_output_is_accurate_between_steps():
    tr = flow(VectorField(1, lambda t, x: -x), 0.0, [1.0], 3.0, rtol=1e-10, atol=1e-12)
    for s in np.linspace(0, 3, 37):
        assert tr(s)[0] == pytest.approx(math.exp(-s), abs=1e-6)


def test_time_varying_field():
    vf = VectorField(1, lambda t, x: np.array([math.cos(t)]))
    assert flow(vf, 0.0, [0.0], 2.0, rtol=1e-10).final[0] == pytest.approx(math.sin(2.0), abs=1e-8)


def test_flow_pair_shares_grid():
    a, b = flow_pair(VectorField.linear([[-1.0, 0.5], [1.0, -1.0]]), [0, 0], [1, 1], 0.0, 2.0)
    assert np.array_equal(a.t, b.t)


def test_flow_errors():
    with pytest.raises(ValueError):
        flow(VectorField(1, lambda t, x: -x), 1.0, [1.0], 0.0)
    with pytest.raises(ValueError):
        flow(VectorField(2, lambda t, x: -x), 0.0, [1.0], 1.0)
    with pytest.raises(IntegrationError):
        flow(VectorField(1, lambda t, x: x ** 2), 0.0, [1.0], 2.0)


def test_order_preservation_examples():
    metz = VectorField.linear([[-1.0, 0.5], [1.0, -1.0]])
    assert check_order_preservation(metz, [0, 0], [1, 1], 5.0).passed
    swap = VectorField(2, lambda t, x: np.array([-x[1], -x[0]]))
    # (0,0) <= (1,1) stays ordered since the difference lies on the decaying
    # direction (1,1); (1,0) exposes the failure
    assert check_order_preservation(swap, [0, 0], [1, 1], 3.0).passed
    rep = check_order_preservation(swap, [0, 0], [1, 0], 3.0)
    assert not rep.passed and rep.worst_margin < 0
    assert check_order_preservation(metz, [0.5, 0.5], [0.5, 0.5], 3.0).worst_margin == 0.0
    with pytest.raises(ValueError):
        check_order_preservation(metz, [1, 0], [0, 1], 1.0)


def test_positivity_examples():
    from conecontract.models import HopfieldNetwork, ScalarFn
    net = HopfieldNetwork([1.0, 1.0], [[0.0, 1.0], [1.0, 0.0]], [ScalarFn.tanh_like(0.5)] * 2)
    assert check_positivity(net.vector_field()).passed
    assert not check_positivity(VectorField(1, lambda t, x: -np.ones(1)), n_sim=0).passed
    assert check_positivity(VectorField(1, lambda t, x: -x)).passed


def test_coppel_examples():
    rep = coppel_check(lambda t: np.diag([-1.0, -2.0]), [1.0, 1.0], NormSpec.identity(INF), 5.0)
    assert rep.passed and abs(rep.worst_margin) < 1e-5
    tv = lambda t: np.array([[-1.0, (1 + math.sin(t)) / 2], [1.0, -1.0]])  # noqa: E731
    for p in (1.0, INF):
        assert coppel_check(tv, [1.0, 0.5], NormSpec.identity(p), 10.0).passed
    assert coppel_check(tv, [0.0, 0.0], NormSpec.identity(1), 2.0).worst_margin >= 0


def test_trajectory_csv_roundtrip():
    tr = flow(VectorField(1, lambda t, x: -x), 0.0, [1.0], 1.0)
    rows = tr.to_csv(NormSpec.identity(2)).strip().splitlines()
    assert rows[0] == "t,x1,norm"
    t, x, nrm = map(float, rows[-1].split(","))
    assert (t, x) == (tr.t[-1], tr.x[-1, 0]) and nrm == pytest.approx(abs(x))
