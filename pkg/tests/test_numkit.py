from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dims, random_hermitian, seeds
from jmdecohere.errors import DimensionCap, NonHermitianInput, OverflowGuard, ShapeMismatch
from jmdecohere.numkit import (
    apply_superop,
    choi,
    hermitian_eig,
    is_completely_positive,
    is_hermitian,
    mat_exp,
    partial_trace,
    psd_project,
    schur_product,
    superop_from_map,
    sym_projector,
    tensor,
    trace_dual,
    unvec,
    vec,
)
from jmdecohere.observables import SIGMA_1


def test_eig_identity_and_pauli():
    assert np.allclose(hermitian_eig(np.eye(2)).eigenvalues, [1, 1])
    assert np.allclose(hermitian_eig(SIGMA_1).eigenvalues, [-1, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@given(seeds, dims)
def test_eig_reconstruction(seed, d):
    M = random_hermitian(np.random.default_rng(seed), d, scale=10.0)
    s = hermitian_eig(M)
    V = s.eigenvectors
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert np.linalg.norm(M @ V - V * s.eigenvalues) <= 1e-10 * max(1, np.linalg.norm(M))
    assert np.linalg.norm(V.conj().T @ V - np.eye(d)) <= 1e-10
    assert np.linalg.norm(s.reconstruct() - M) <= 1e-10 * max(1, np.linalg.norm(M))


def test_hermitian_tolerance_is_relative():
    M = np.diag([1e6, -1e6]).astype(complex)
    M[0, 1] = 1e-7
    assert is_hermitian(M)
    M[0, 1] = 1e-3
    assert not is_hermitian(M)


def test_psd_project_examples():
    assert np.allclose(psd_project(-np.eye(2)), 0)
    assert np.allclose(psd_project(np.diag([1.0, -2.0])), np.diag([1.0, 0.0]))
    P = np.array([[2, 1j], [-1j, 1]])
    assert np.allclose(psd_project(P), P, atol=1e-10)


@given(seeds, dims)
def test_psd_project_nearest_and_idempotent(seed, d):
    rng = np.random.default_rng(seed)
    M = random_hermitian(rng, d)
    X = psd_project(M)
    assert np.linalg.eigvalsh(X).min() >= -1e-12
    assert np.allclose(psd_project(X), X, atol=1e-12)
    # nearer than any random PSD competitor
    B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Y = B @ B.conj().T
    assert np.linalg.norm(M - X) <= np.linalg.norm(M - Y) + 1e-12


def test_mat_exp_examples():
    assert np.array_equal(mat_exp(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(mat_exp(np.diag([1.0, -2.0])), np.diag([np.e, np.exp(-2)]))
    assert np.allclose(mat_exp(np.array([[0, 1], [0, 0]])), [[1, 1], [0, 1]], atol=1e-15)


def test_mat_exp_guard():
    with pytest.raises(OverflowGuard):
        mat_exp(np.full((2, 2), 1e4))


@given(seeds, st.integers(1, 5), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_mat_exp_semigroup_and_inverse(seed, d, s, t):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    M *= 5.0 / max(np.linalg.norm(M, 2), 1e-12)
    assert np.linalg.norm(mat_exp(M) @ mat_exp(-M) - np.eye(d)) <= 1e-8
    lhs = mat_exp((s + t) * M)
    assert np.linalg.norm(lhs - mat_exp(s * M) @ mat_exp(t * M)) <= 1e-8


def test_schur_product():
    A = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(schur_product(A, np.ones((3, 3))), A)
    assert np.array_equal(schur_product(A, np.eye(3)), np.diag(np.diag(A)))
    with pytest.raises(ShapeMismatch):
        schur_product(A, np.eye(2))


def test_tensor_and_partial_trace(rng):
    A = random_hermitian(rng, 2)
    B = random_hermitian(rng, 3)
    M = tensor(A, B)
    assert np.allclose(partial_trace(M, [2, 3], 0), np.trace(B) * A)
    assert np.allclose(partial_trace(M, [2, 3], 1), np.trace(A) * B)
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))
    R = random_hermitian(rng, 6)
    assert np.isclose(np.trace(partial_trace(R, [2, 3], 0)), np.trace(R), atol=1e-12)
    with pytest.raises(ShapeMismatch):
        partial_trace(R, [2, 2], 0)


def test_vec_is_column_stacking(rng):
    A, X, B = (random_hermitian(rng, 3) for _ in range(3))
    assert np.allclose(vec(A @ X @ B), np.kron(B.T, A) @ vec(X))
    assert np.array_equal(unvec(vec(A)), A)
    assert vec(np.array([[1, 2], [3, 4]])).tolist() == [1, 3, 2, 4]


def test_choi_examples():
    d = 2
    ident = np.eye(d * d)
    J = choi(ident)
    assert np.linalg.eigvalsh(J).min() >= -1e-12
    assert np.isclose(np.trace(J).real, d)
    assert np.linalg.matrix_rank(J) == 1
    depol = superop_from_map(lambda A: np.trace(A) / d * np.eye(d), d)
    assert np.allclose(choi(depol), np.kron(np.eye(d), np.eye(d)) / d)
    transpose = superop_from_map(lambda A: A.T, d)
    assert np.isclose(np.linalg.eigvalsh(choi(transpose)).min(), -1)
    assert not is_completely_positive(transpose)


def test_trace_dual(rng):
    d = 3
    K = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    S = superop_from_map(lambda A: K.conj().T @ A @ K, d)
    T = trace_dual(S)
    A, rho = random_hermitian(rng, d), random_hermitian(rng, d)
    lhs = np.trace(rho @ apply_superop(S, A))
    assert np.isclose(lhs, np.trace(apply_superop(T, rho) @ A))


@pytest.mark.parametrize("d,n", [(2, 1), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_sym_projector(d, n):
    P = sym_projector(d, n)
    assert np.allclose(P @ P, P)
    assert np.allclose(P, P.conj().T)
    assert round(np.trace(P).real) == comb(d + n - 1, n)


def test_sym_projector_cap():
    assert np.array_equal(sym_projector(2, 1), np.eye(2))
    with pytest.raises(DimensionCap):
        sym_projector(4, 7)
