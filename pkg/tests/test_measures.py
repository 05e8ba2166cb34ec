import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conecontract import measures
from conecontract.measures import (conic_measure, conic_measure_limit_oracle, conic_measure_wp_sup,
                                   matrix_measure, metzler_weighted_measures, mu1_plus, mu_inf_plus)
from conecontract.normcore import NormSpec
from conecontract.pairings import wp

INF = math.inf
REFERENCE = np.array([[-1.6857, 1.0143], [-0.4143, -0.3143]])
CROSS = np.array([[-1.0, 0.5], [1.0, -1.0]])

mats = arrays(np.float64, (3, 3), elements=st.floats(-5, 5, allow_nan=False, width=64))


def metzlerize(A):
    A = A.copy()
    off = ~np.eye(A.shape[0], dtype=bool)
    A[off] = np.abs(A[off])
    return A


# ---------------------------------------------------------------- classical measure

def test_matrix_measure_examples():
    assert matrix_measure(REFERENCE, NormSpec.identity(INF)).value == pytest.approx(0.1, abs=1e-4)
    for p in (1.0, 1.5, 2.0, INF):
        assert matrix_measure(-np.eye(3), NormSpec.identity(p)).value == pytest.approx(-1.0, abs=1e-6)
    assert matrix_measure([[0, 1], [1, 0]], NormSpec.identity(2)).value == pytest.approx(1.0)


def test_matrix_measure_general_weight_is_similarity():
    R = np.array([[4.0, 3.0], [3.0, 3.0]])
    B = R @ CROSS @ np.linalg.inv(R)
    ns = NormSpec.general(INF, R)
    assert matrix_measure(CROSS, ns).value == pytest.approx(
        matrix_measure(B, NormSpec.identity(INF)).value)


def test_lumer_inequality(rng):
    for p in (1.0, 1.5, 2.0, 3.0, INF):
        ns = NormSpec.diag(p, [1.0, 2.0, 0.5])
        for _ in range(10):
            A = rng.standard_normal((3, 3))
            mu = matrix_measure(A, ns).value
            for x in rng.standard_normal((30, 3)):
                n2 = wp(x, x, ns)
                assert wp(A @ x, x, ns) <= mu * n2 + 1e-7 * (1 + n2)


# ---------------------------------------------------------------- conic measure

def test_conic_measure_examples():
    assert conic_measure(REFERENCE, NormSpec.identity(INF)).value == pytest.approx(-0.3143, abs=1e-4)
    assert conic_measure(CROSS, NormSpec.identity(1)).value == pytest.approx(0.0)
    for ns in (NormSpec.identity(1), NormSpec.identity(2), NormSpec.diag(3, [1, 2, 3]),
               NormSpec.identity(INF), NormSpec.general(1.5, np.eye(3) + 0.2)):
        assert conic_measure(np.eye(3), ns).value == pytest.approx(1.0, abs=1e-6)


def test_closed_forms_by_hand():
    A = np.array([[-2.0, -3.0], [1.0, -1.0]])
    # columns: -2 + 1, -1 + 0 ; rows: -2 + 0, -1 + 1
    assert mu1_plus(A) == pytest.approx(-1.0)
    assert mu_inf_plus(A) == pytest.approx(0.0)


def test_general_weight_reports_upper_bound():
    r = conic_measure(CROSS, NormSpec.general(INF, [[4.0, 3.0], [3.0, 3.0]]))
    assert r.bound == "upper"
    assert r.value >= conic_measure_wp_sup(CROSS, NormSpec.general(INF, [[4.0, 3.0], [3.0, 3.0]])).value


@settings(max_examples=60, deadline=None)
@given(A=mats, p=st.sampled_from([1.0, 2.0, INF]), diag=st.booleans())
def test_conic_at_most_classical(A, p, diag):
    ns = NormSpec.diag(p, [1.0, 0.5, 2.0]) if diag else NormSpec.identity(p)
    assert conic_measure(A, ns).value <= matrix_measure(A, ns).value + 1e-9


@settings(max_examples=60, deadline=None)
@given(A=mats, p=st.sampled_from([1.0, 2.0, INF]))
def test_metzler_equality(A, p):
    A = metzlerize(A)
    ns = NormSpec.diag(p, [1.0, 0.5, 2.0])
    assert conic_measure(A, ns).value == pytest.approx(matrix_measure(A, ns).value, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(A=mats, E=mats, p=st.sampled_from([1.0, INF]))
def test_monotone_in_matrix(A, E, p):
    ns = NormSpec.identity(p)
    assert conic_measure(A, ns).value <= conic_measure(A + np.abs(E), ns).value + 1e-12


@settings(max_examples=40, deadline=None)
@given(A=mats, p=st.sampled_from([1.0, 2.0, INF]), s=st.floats(0.1, 10))
def test_positive_homogeneity_and_shift(A, p, s):
    ns = NormSpec.identity(p)
    base = conic_measure(A, ns).value
    assert conic_measure(s * A, ns).value == pytest.approx(s * base, rel=1e-6, abs=1e-6)
    assert conic_measure(A + 2.0 * np.eye(3), ns).value == pytest.approx(base + 2.0, rel=1e-6, abs=1e-6)


def test_metzler_closed_forms_match_oracle_at_p1(rng):
    # for Metzler matrices the closed form agrees with the definition
    for k in range(15):
        n = int(rng.integers(2, 5))
        A = metzlerize(rng.standard_normal((n, n)))
        ns = NormSpec.diag(1, rng.uniform(0.5, 2.0, n)) if k % 2 else NormSpec.identity(1)
        assert conic_measure(A, ns).value == pytest.approx(
            conic_measure_limit_oracle(A, ns, seed=k, n_samples=500).value, abs=1e-6)


def test_linf_closed_form_matches_oracle(rng):
    for k in range(15):
        n = int(rng.integers(2, 5))
        A = rng.standard_normal((n, n))
        ns = NormSpec.identity(INF)
        assert conic_measure(A, ns).value == pytest.approx(
            conic_measure_limit_oracle(A, ns, seed=k, n_samples=500).value, abs=1e-6)


# ---------------------------------------------------------------- sampled estimators

def test_wp_sup_examples(rng):
    ns = NormSpec.identity(2)
    assert conic_measure_wp_sup(np.diag([-1.0, -3.0, 0.5]), ns).value == pytest.approx(0.5, abs=1e-6)
    assert conic_measure_wp_sup(REFERENCE, NormSpec.identity(INF)).value == pytest.approx(-0.3143, abs=1e-3)
    for k in range(5):
        A = metzlerize(rng.standard_normal((3, 3)))
        assert conic_measure_wp_sup(A, NormSpec.identity(1), seed=k).value == pytest.approx(
            mu1_plus(A), abs=1e-6)


def test_wp_sup_extra_points_must_be_nonnegative():
    with pytest.raises(ValueError):
        conic_measure_wp_sup(np.eye(2), NormSpec.identity(2), extra_points=[[1.0, -1.0]])


def test_limit_oracle_examples():
    assert conic_measure_limit_oracle(np.zeros((2, 2)), NormSpec.identity(2)).value == pytest.approx(0, abs=1e-9)
    assert conic_measure_limit_oracle(CROSS, NormSpec.identity(INF)).value == pytest.approx(0.0, abs=2e-3)
    assert conic_measure_limit_oracle(np.diag([-1.0, -2.0]), NormSpec.identity(1)).value == pytest.approx(-1.0, abs=1e-3)


def test_p2_nonmetzler_is_lower_estimate(rng):
    A = rng.standard_normal((3, 3))
    A[0, 1] = -1.0
    r = conic_measure(A, NormSpec.identity(2))
    assert r.bound == "lower" and r.method == "wp_sup"


# ---------------------------------------------------------------- Metzler weighted measures

def test_metzler_weighted_examples():
    A = np.array([[-1.0, 0.5], [0.5, -1.0]])
    m = metzler_weighted_measures(A, [1.0, 1.0])
    assert m.mu1 == pytest.approx(-0.5) and m.mu_inf == pytest.approx(-0.5)
    assert m.mu2 == pytest.approx(conic_measure_limit_oracle(A, NormSpec.identity(2)).value, abs=1e-3)
    for eta in ([1.0, 1.0], [0.3, 4.0]):
        m = metzler_weighted_measures(-np.eye(2), eta)
        assert (m.mu1, m.mu_inf, m.mu2) == pytest.approx((-1.0, -1.0, -1.0))


def test_metzler_weighted_agree_with_general_dispatch(rng):
    A = metzlerize(rng.standard_normal((3, 3)))
    eta = rng.uniform(0.5, 2.0, 3)
    m = metzler_weighted_measures(A, eta)
    assert m.mu1 == pytest.approx(matrix_measure(A, NormSpec.diag(1, eta)).value)
    assert m.mu_inf == pytest.approx(matrix_measure(A, NormSpec.diag(INF, 1 / eta)).value)
    assert m.mu2 == pytest.approx(matrix_measure(A, NormSpec.diag(2, eta)).value)
    assert m.mu2_lmi == pytest.approx(2 * matrix_measure(A, NormSpec.diag(2, np.sqrt(eta))).value)


def test_metzler_weighted_rejects_non_metzler():
    with pytest.raises(ValueError):
        metzler_weighted_measures([[0, -1], [0, 0]], [1, 1])


def test_mutation_hook_shifts_closed_forms(monkeypatch):
    base = conic_measure(CROSS, NormSpec.identity(1)).value
    monkeypatch.setattr(measures, "_CLOSED_FORM_MUTATION", 0.25)
    assert conic_measure(CROSS, NormSpec.identity(1)).value == pytest.approx(base + 0.25)


@settings(max_examples=60, deadline=None)
@given(A=mats, B=mats, p=st.sampled_from([1.0, INF]), diag=st.booleans())
def test_conic_measure_subadditive(A, B, p, diag):
    ns = NormSpec.diag(p, [1.0, 0.5, 2.0]) if diag else NormSpec.identity(p)
    assert conic_measure(A + B, ns).value <= conic_measure(A, ns).value + conic_measure(B, ns).value + 1e-8
