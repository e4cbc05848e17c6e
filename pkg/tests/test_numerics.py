"""Tests for the numerics layer: complex helpers, Q-function against a
quadrature oracle, RNG streams, correlation matrices and correlated
complex-Gaussian sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from covertsim.numerics import (
    CorrelationMatrix,
    DecompositionError,
    DomainError,
    RngStream,
    cholesky,
    energy,
    from_reim,
    q_function,
    q_inverse,
    sample_awgn,
    sample_correlated_cgn,
    to_reim,
)


# ---------------------------------------------------------------------------
# complex vector helpers
# ---------------------------------------------------------------------------

def test_energy_hand_value():
    v = np.array([3.0 + 4.0j, 1.0, -2.0j])
    assert energy(v) == pytest.approx(25.0 + 1.0 + 4.0)


def test_energy_zero_vector():
    assert energy(np.zeros(5, dtype=complex)) == 0.0


def test_to_reim_layout_real_half_first():
    v = np.array([1.0 + 2.0j, 3.0 - 4.0j])
    np.testing.assert_allclose(to_reim(v), [1.0, 3.0, 2.0, -4.0])


def test_to_reim_batched():
    v = np.array([[1.0 + 1.0j], [2.0 - 2.0j]])
    np.testing.assert_allclose(to_reim(v), [[1.0, 1.0], [2.0, -2.0]])


def test_from_reim_odd_length_rejected():
    with pytest.raises(DomainError):
        from_reim(np.zeros(3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False,
                                   allow_infinity=False), min_size=1, max_size=16))
def test_reim_roundtrip(values):
    v = np.array(values, dtype=complex)
    np.testing.assert_allclose(from_reim(to_reim(v)), v)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                   allow_infinity=False), min_size=1, max_size=16))
def test_energy_matches_reim_energy(values):
    # energy is invariant under the real/imag repacking
    v = np.array(values, dtype=complex)
    assert energy(v) == pytest.approx(float(np.sum(to_reim(v) ** 2)), rel=1e-12)


# ---------------------------------------------------------------------------
# Q-function against an independent quadrature oracle
# ---------------------------------------------------------------------------

def _q_oracle(x):
    val, _ = integrate.quad(
        lambda t: np.exp(-t * t / 2.0) / np.sqrt(2.0 * np.pi), x, np.inf)
    return val


@pytest.mark.parametrize("x", [-3.0, -1.0, 0.0, 0.5, 1.0, 2.5, 4.0])
def test_q_function_matches_quadrature(x):
    assert q_function(x) == pytest.approx(_q_oracle(x), rel=1e-10)


def test_q_function_half_at_zero():
    assert q_function(0.0) == pytest.approx(0.5)


def test_q_function_rejects_non_finite():
    with pytest.raises(DomainError):
        q_function(np.inf)
    with pytest.raises(DomainError):
        q_function(np.nan)


def test_q_inverse_bisection_oracle():
    # independent oracle: bisection on the quadrature Q
    for p in (0.01, 0.1, 0.5, 0.9):
        lo, hi = -10.0, 10.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _q_oracle(mid) > p:
                lo = mid
            else:
                hi = mid
        assert q_inverse(p) == pytest.approx(0.5 * (lo + hi), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_q_roundtrip(p):
    assert q_function(q_inverse(p)) == pytest.approx(p, rel=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_q_inverse_domain(p):
    with pytest.raises(DomainError):
        q_inverse(p)


# ---------------------------------------------------------------------------
# RNG streams
# ---------------------------------------------------------------------------

def test_rng_stream_replays_identically():
    a = RngStream(42).generator().standard_normal(100)
    b = RngStream(42).generator().standard_normal(100)
    np.testing.assert_array_equal(a, b)


def test_rng_stream_ids_differ():
    a = RngStream(42, 0).generator().standard_normal(100)
    b = RngStream(42, 1).generator().standard_normal(100)
    assert not np.allclose(a, b)


def test_rng_child_is_stable_and_distinct():
    s = RngStream(7)
    assert s.child(3) == s.child(3)
    assert s.child(3) != s.child(4)
    assert s.child(3).seed == 7
    a = s.child(3).generator().standard_normal(50)
    b = s.child(4).generator().standard_normal(50)
    assert not np.allclose(a, b)


def test_rng_nested_children_distinct():
    s = RngStream(7)
    assert s.child(1).child(2) != s.child(2).child(1)


def test_rng_stream_is_frozen():
    with pytest.raises(AttributeError):
        RngStream(1).seed = 2


# ---------------------------------------------------------------------------
# correlation matrices and sampling
# ---------------------------------------------------------------------------

def test_correlation_entries_hand_value():
    mat = CorrelationMatrix(3, 0.5).entries
    np.testing.assert_allclose(mat, [[1.0, 0.5, 0.25],
                                     [0.5, 1.0, 0.5],
                                     [0.25, 0.5, 1.0]])


def test_correlation_rho_zero_is_identity():
    np.testing.assert_allclose(CorrelationMatrix(4, 0.0).entries, np.eye(4))


@pytest.mark.parametrize("dim,rho", [(0, 0.5), (2, 1.0), (2, -0.1)])
def test_correlation_domain(dim, rho):
    with pytest.raises(DomainError):
        CorrelationMatrix(dim, rho)


def test_cholesky_hand_value():
    # for [[1, .5], [.5, 1]]: L = [[1, 0], [.5, sqrt(.75)]]
    factor = cholesky(CorrelationMatrix(2, 0.5))
    np.testing.assert_allclose(factor, [[1.0, 0.0], [0.5, np.sqrt(0.75)]])


def test_cholesky_reconstructs():
    corr = CorrelationMatrix(5, 0.7)
    factor = cholesky(corr)
    np.testing.assert_allclose(factor @ factor.T, corr.entries, atol=1e-12)
    assert np.allclose(factor, np.tril(factor))


def test_cholesky_rejects_indefinite():
    with pytest.raises(DecompositionError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_correlated_cgn_covariance_monte_carlo():
    corr = CorrelationMatrix(3, 0.6)
    v = sample_correlated_cgn(corr, RngStream(0), count=200_000)
    emp = (v.conj().T @ v) / v.shape[0]
    np.testing.assert_allclose(emp.real, corr.entries, atol=0.02)
    np.testing.assert_allclose(emp.imag, 0.0, atol=0.02)
    np.testing.assert_allclose(v.mean(axis=0), 0.0, atol=0.01)


def test_correlated_cgn_circular_symmetry():
    # pseudo-covariance E[v v^T] of a circular Gaussian vanishes
    corr = CorrelationMatrix(3, 0.6)
    v = sample_correlated_cgn(corr, RngStream(1), count=200_000)
    pseudo = (v.T @ v) / v.shape[0]
    np.testing.assert_allclose(np.abs(pseudo), 0.0, atol=0.02)


def test_awgn_per_entry_variance():
    noise = sample_awgn(64, 2.5, RngStream(3), count=5000)
    assert noise.shape == (5000, 64)
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(2.5, rel=0.02)


def test_awgn_single_vector_shape():
    assert sample_awgn(16, 1.0, RngStream(3)).shape == (16,)


@pytest.mark.parametrize("variance", [0.0, -1.0])
def test_awgn_rejects_bad_variance(variance):
    with pytest.raises(DomainError):
        sample_awgn(8, variance, RngStream(0))
