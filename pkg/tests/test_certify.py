import json
import math

import numpy as np
import pytest

from conecontract.certify import (CERTIFIED, REFUTED, Box, average_jacobian, certify_jacobian_conic,
                                  check_dini_contraction, check_equilibrium_contraction,
                                  check_factored_conic, check_l1_eta, check_linf_eta,
                                  check_one_sided_lipschitz, check_trajectory_contraction,
                                  norm_equivalence_constant, ordered_pairs, recheck_witness)
from conecontract.measures import conic_measure, matrix_measure
from conecontract.models import HopfieldNetwork, ScalarFn
from conecontract.normcore import NormSpec
from conecontract.odesim import HypothesisViolation, VectorField

INF = math.inf
CROSS = np.array([[-1.0, 0.5], [1.0, -1.0]])
UNIT = Box.unit(2)


def hopfield():
    return HopfieldNetwork([1.0, 1.0], [[0.0, 1.0], [1.0, 0.0]], [ScalarFn.tanh_like(0.5)] * 2)


def decay(n=2):
    return VectorField(n, lambda t, x: -x, lambda t, x: -np.eye(n))


def test_jacobian_conic_examples():
    cert = certify_jacobian_conic(VectorField.linear(CROSS), UNIT, NormSpec.identity(1))
    assert cert.evidence["b_hat"] == pytest.approx(0.0) and cert.passed
    net = hopfield().vector_field()
    cert = certify_jacobian_conic(net, Box.unit(2, 2.0), NormSpec.identity(2), n_random=200)
    assert cert.evidence["b_hat"] == pytest.approx(-0.5, abs=1e-6)
    zero = VectorField(2, lambda t, x: np.zeros(2), lambda t, x: np.zeros((2, 2)))
    assert certify_jacobian_conic(zero, UNIT, NormSpec.identity(INF)).evidence["b_hat"] == 0.0


def test_jacobian_conic_refutes_too_small_rate_and_non_metzler():
    cert = certify_jacobian_conic(VectorField.linear(CROSS), UNIT, NormSpec.identity(1), b=-0.1)
    assert cert.verdict == REFUTED and cert.witness["mu_plus"] == pytest.approx(0.0)
    rot = VectorField.linear([[0.0, -1.0], [1.0, 0.0]])
    cert = certify_jacobian_conic(rot, UNIT, NormSpec.identity(1), b=10.0)
    assert not cert.passed and cert.witness["reason"] == "non-Metzler Jacobian"


def test_certificate_json_fields():
    cert = certify_jacobian_conic(VectorField.linear(CROSS), UNIT, NormSpec.identity(1), b=-0.1, seed=7)
    d = json.loads(cert.to_json())
    for key in ("condition_id", "b", "norm", "domain", "n_samples", "worst_margin", "tol",
                "verdict", "seed", "witness"):
        assert key in d
    assert d["seed"] == 7 and d["verdict"] == REFUTED


def test_ordered_pairs_are_ordered(rng):
    dom = Box([0.0, -1.0, 0.0], [1.0, 1.0, 2.0])
    X, Y = ordered_pairs(dom, rng, 300, NormSpec.identity(1))
    assert np.all(X >= Y - 1e-15) and np.all(X <= dom.hi + 1e-12) and np.all(Y >= dom.lo - 1e-12)


def test_one_sided_lipschitz_examples():
    for p in (1.0, 2.0, INF):
        cert = check_one_sided_lipschitz(decay(), NormSpec.identity(p), -1.0, UNIT, ordered_only=False)
        assert cert.passed and abs(cert.worst_margin) < 1e-9
    ns = NormSpec.identity(1)
    mp = conic_measure(CROSS, ns).value
    lin = VectorField.linear(CROSS)
    assert check_one_sided_lipschitz(lin, ns, mp, UNIT).passed
    bad = check_one_sided_lipschitz(lin, ns, mp - 0.15, UNIT)
    assert bad.verdict == REFUTED
    assert recheck_witness(bad, lin) < -bad.tol


def test_unordered_pairs_see_classical_measure():
    A = np.array([[-2.0, -1.0], [0.5, -2.0]])
    lin = VectorField.linear(A)
    ns = NormSpec.identity(1)
    mu = matrix_measure(A, ns).value
    assert mu > conic_measure(A, ns).value + 0.4
    assert check_one_sided_lipschitz(lin, ns, mu, UNIT, ordered_only=False).passed
    assert not check_one_sided_lipschitz(lin, ns, mu - 0.2, UNIT, ordered_only=False).passed


def test_trajectory_contraction_examples():
    ns = NormSpec.identity(2)
    pairs = [([1.0, 0.5], [0.2, 0.1]), ([0.3, 0.9], [0.0, 0.0])]
    cert = check_trajectory_contraction(decay(), ns, -1.0, pairs, 5.0)
    assert cert.passed and abs(cert.worst_margin) < 1e-5
    net = hopfield().vector_field()
    rng = np.random.default_rng(1)
    hp = [(rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)) for _ in range(4)]
    for p in (1.0, 2.0, INF):
        assert check_trajectory_contraction(net, NormSpec.identity(p), -0.5, hp, 8.0).passed
    grow = VectorField(2, lambda t, x: x)
    bad = check_trajectory_contraction(grow, ns, -1.0, pairs, 1.0)
    assert not bad.passed and bad.witness is not None


def test_trajectory_contraction_non_monotonic_norm_uses_constant():
    ns = NormSpec.general(INF, [[4.0, 3.0], [3.0, 3.0]])
    assert not ns.monotonic
    M = norm_equivalence_constant(ns, 2)
    assert M > 1.0
    assert norm_equivalence_constant(NormSpec.diag(2, [1, 3]), 2) == 1.0


def test_dini_examples():
    ns = NormSpec.identity(2)
    pairs = [([1.0, 0.5], [0.2, 0.1])]
    assert check_dini_contraction(decay(), ns, -1.0, pairs, 3.0).passed
    assert not check_dini_contraction(VectorField(2, lambda t, x: x), ns, -1.0, pairs, 1.0).passed
    still = VectorField(2, lambda t, x: np.zeros(2))
    assert check_dini_contraction(still, ns, 0.0, pairs, 1.0).passed
    assert not check_dini_contraction(still, ns, -0.1, pairs, 1.0).passed


def test_l1_eta_examples(rng):
    A = np.array([[-2.0, 1.0], [0.5, -1.5]])
    eta = np.array([1.0, 2.0])
    b = matrix_measure(A, NormSpec.diag(1, eta)).value
    lin = VectorField.linear(A)
    cert = check_l1_eta(lin, eta, b, monotone=True, domain=UNIT)
    assert cert.passed and abs(cert.worst_margin) < 1e-9
    assert not check_l1_eta(lin, eta, b - 0.1, monotone=True, domain=UNIT).passed
    eq = check_l1_eta(decay(), [0.3, 3.0], -1.0, monotone=True, domain=UNIT)
    assert eq.passed and abs(eq.worst_margin) < 1e-9


def test_linf_eta_examples():
    A = np.array([[-2.0, 1.0], [0.5, -1.5]])
    eta = np.array([1.0, 2.0])
    b = matrix_measure(A, NormSpec.diag(INF, 1 / eta)).value
    lin = VectorField.linear(A)
    assert check_linf_eta(lin, eta, b, monotone=True, domain=UNIT).passed
    dg = VectorField.linear(np.diag([-1.0, -2.0]))
    cert = check_linf_eta(dg, [1.0, 1.0], -1.0, monotone=True, domain=UNIT)
    assert cert.passed and abs(cert.worst_margin) < 1e-9
    assert not check_linf_eta(dg, [1.0, 1.0], -1.5, monotone=True, domain=UNIT).passed


def test_equilibrium_contraction_examples():
    cert = check_equilibrium_contraction(decay(), NormSpec.identity(2), -1.0, UNIT)
    assert cert.passed and abs(cert.worst_margin) < 1e-9
    quad = VectorField(2, lambda t, x: np.array([x[1] ** 2 - x[0], -x[1]]))
    small = check_equilibrium_contraction(quad, NormSpec.identity(INF), -0.4, Box.unit(2, 0.5))
    assert small.passed
    big = check_equilibrium_contraction(quad, NormSpec.identity(INF), -0.4, Box.unit(2, 3.0))
    assert not big.passed
    with pytest.raises(HypothesisViolation):
        check_equilibrium_contraction(VectorField(1, lambda t, x: 1 - x), NormSpec.identity(1), -1.0)


def test_average_jacobian_and_factored_conic():
    quad = VectorField(2, lambda t, x: -x + x[0] * x)
    x = np.array([0.4, 0.7])
    A = average_jacobian(quad, 0.0, x)
    np.testing.assert_allclose(A @ x, quad.f(0.0, x), atol=1e-12)
    taus = np.linspace(0, 1, 20001)
    dense = np.trapezoid([quad.jac(0.0, s * x) for s in taus], taus, axis=0)
    np.testing.assert_allclose(A, dense, atol=1e-6)
    lin = VectorField.linear(CROSS)
    ns = NormSpec.identity(1)
    assert check_factored_conic(lin, ns, 0.0).passed
    assert not check_factored_conic(lin, ns, -0.1).passed
    net = hopfield().vector_field()
    assert check_factored_conic(net, NormSpec.identity(2), -0.5, Box.unit(2, 2.0), n_samples=100).passed


def test_refuted_witnesses_recheck(rng):
    """Every refuted certificate's witness re-evaluates to a violation within 2x tol."""
    lin = VectorField.linear(CROSS)
    grow = VectorField(2, lambda t, x: x)
    ns1 = NormSpec.identity(1)
    certs = [
        (check_one_sided_lipschitz(lin, ns1, -0.2, UNIT), lin),
        (check_one_sided_lipschitz(lin, NormSpec.identity(INF), -0.3, UNIT, ordered_only=False), lin),
        (certify_jacobian_conic(lin, UNIT, ns1, b=-0.1), lin),
        (check_trajectory_contraction(grow, ns1, -1.0, [([1.0, 1.0], [0.0, 0.0])], 1.0), grow),
        (check_l1_eta(lin, [1.0, 2.0], -0.5, domain=UNIT), lin),
        (check_factored_conic(lin, ns1, -0.1), lin),
    ]
    for cert, vf in certs:
        assert cert.verdict == REFUTED
        assert recheck_witness(cert, vf) < -cert.tol / 2, cert.condition_id
    with pytest.raises(ValueError):
        recheck_witness(check_factored_conic(lin, ns1, 0.0), lin)
