import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmdecohere.errors import OutOfRange
from jmdecohere.jmcheck import Status, jm_feasibility, tradeoff_necessary
from jmdecohere.dynamics import schur_channel
from jmdecohere.observables import Observable, validate
from jmdecohere.spinboson import (
    CSV_COLUMNS,
    SpinBosonConfig,
    alpha_boundary,
    check_point,
    f_alpha,
    full_generator,
    hellinger_bound,
    hellinger_d2,
    hellinger_necessary,
    n2_boundary,
    phase_diagram,
    q_weights,
    reduced_generator,
    reduced_matrix,
    semigroup_lambda,
    theta3,
    theta_sufficient,
    u_k,
)


def test_reduced_matrix_examples():
    assert np.array_equal(reduced_matrix(3, 0.0), np.eye(4))
    assert np.array_equal(reduced_matrix(3, 1.0), np.ones((4, 4)))
    expected = [[1, 0.5, 0.0625], [0.5, 1, 0.5], [0.0625, 0.5, 1]]
    assert np.allclose(reduced_matrix(2, 0.5), expected)
    with pytest.raises(OutOfRange):
        reduced_matrix(2, 1.5)


@given(st.integers(1, 12), st.floats(0, 1))
def test_reduced_matrix_structure(N, lam):
    C = reduced_matrix(N, lam)
    assert np.linalg.eigvalsh(C).min() >= -1e-10
    assert np.allclose(C, C.T)
    assert np.allclose(C, C[::-1, ::-1])  # counter-diagonal reflection
    assert np.allclose(np.diag(C), 1)


def test_f_alpha_examples():
    assert np.allclose(q_weights(2), [0.25, 0.5, 0.25])
    triv = f_alpha(2, 0.0)
    for k, q in enumerate(q_weights(2)):
        assert np.allclose(triv.effects[k], q * np.eye(3))
    assert np.allclose(f_alpha(2, 1.0).effects, np.array([np.diag(r) for r in np.eye(3)]))
    with pytest.raises(OutOfRange):
        f_alpha(2, -0.1)


@given(st.integers(1, 8), st.floats(0, 1))
def test_f_alpha_valid_and_covariant(N, alpha):
    F = f_alpha(N, alpha)
    assert validate(F)
    P = np.einsum("knn->nk", F.effects).real  # P[n, k]
    assert np.allclose(P, P[::-1, ::-1])


def test_u_k_examples():
    assert u_k(2, 0, 0.0) == 0.0
    assert u_k(2, 1, 1.0) == 0.0
    assert np.isclose(u_k(2, 0, 0.5), np.sqrt(5 / 64) - 1 / 8)
    assert np.isclose(hellinger_d2(2, 0, 1, 1.0), 1.0)
    with pytest.raises(OutOfRange):
        u_k(2, 3, 0.5)


def test_hellinger_d2_matches_observable():
    from jmdecohere.observables import hellinger_sq

    for a in (0.2, 0.6, 0.9):
        F = f_alpha(3, a)
        assert np.isclose(hellinger_sq(F, 0, 1), hellinger_d2(3, 0, 1, a))
        assert np.isclose(hellinger_sq(F, 1, 3), hellinger_d2(3, 1, 3, a))


def test_hellinger_necessary_examples():
    assert all(hellinger_necessary(2, lam, 0.0) for lam in np.linspace(0, 1, 11))
    assert not hellinger_necessary(2, 0.01, 1.0)
    assert hellinger_necessary(2, 0.0, 1.0)


def test_hellinger_matches_tradeoff_on_coherent_effect():
    # maximally coherent effect on blocks (0, 1): coherence equals lambda after damping
    N, alpha = 2, 0.7
    v = np.array([1, 1, 0]) / np.sqrt(2)
    A = np.outer(v, v)
    E = Observable([A, np.eye(3) - A])
    for lam in (hellinger_bound(N, alpha) - 1e-3, hellinger_bound(N, alpha) + 1e-3):
        damped = schur_channel(reduced_matrix(N, lam), E)
        assert tradeoff_necessary(damped, f_alpha(N, alpha)).passed == hellinger_necessary(N, lam, alpha)


def test_theta3_examples():
    assert theta3(0.0).value == 1.0
    assert np.isclose(theta3(0.3).value, 1 - 0.6 + 2 * 0.3**4 - 2 * 0.3**9 + 2 * 0.3**16)
    vals = [theta3(x).value for x in np.linspace(0.01, 0.99, 50)]
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(OutOfRange):
        theta3(1.0)


def test_theta_sufficient_examples():
    assert all(theta_sufficient(lam, 0.0, 2) for lam in np.linspace(0, 1, 11))
    assert not theta_sufficient(0.999, 0.9, 2)


def test_n2_boundary_examples():
    assert n2_boundary(0.0) == 1.0
    assert np.isclose(n2_boundary(1.0), 0.0)
    assert np.isclose(n2_boundary(0.5), 0.80709, atol=1e-5)


def test_schur_check_at_sample_point():
    v = check_point(2, 0.5, 0.8)
    assert v.compatible
    assert check_point(2, 0.5, 0.82).status is Status.INCOMPATIBLE


def test_alpha_boundary_n2():
    for lam in (0.2, 0.5, 0.9):
        lo, hi = alpha_boundary(2, lam, tol=1e-4)
        assert lo <= n2_boundary(lam) + 2e-4 and hi >= n2_boundary(lam) - 2e-4


def test_phase_diagram_small_grid():
    lams = np.linspace(0, 1, 6)
    alps = np.linspace(0, 1, 6)
    pd = phase_diagram(2, lams, alps)
    assert pd.verdicts.shape == (6, 6)
    assert all(v == "Compatible" for v in pd.verdicts[:, 0])
    assert pd.inclusion_violations() == []
    text = pd.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 37
    # monotone in lambda for each alpha
    comp = pd.verdicts == "Compatible"
    for j in range(6):
        col = comp[:, j]
        assert all(col[i] or not col[i + 1] for i in range(5))


def test_phase_diagram_n3_consistency():
    pd = phase_diagram(3, np.linspace(0, 1, 5), np.linspace(0, 1, 5))
    assert pd.inclusion_violations() == []


def test_reduced_generator_matches_lambda_map():
    rate, t = 0.7, 1.3
    g = reduced_generator(2, rate)
    assert np.allclose(g.multiplier(t), reduced_matrix(2, semigroup_lambda(rate, t)))
    full = full_generator(2, rate)
    C = full.multiplier(t)
    assert np.isclose(C[0, 3], semigroup_lambda(rate, t) ** 4)
    assert np.isclose(C[1, 2], 1.0)


def test_config():
    cfg = SpinBosonConfig(2, 0.5, 0.8)
    assert schur_channel(cfg.multiplier(), cfg.observable()).allclose(cfg.observable())
    with pytest.raises(OutOfRange):
        SpinBosonConfig(0, 0.5, 0.5)


def test_schur_verdict_matches_general_solver():
    # universality direction: damped coherent effect is compatible with F_alpha
    C = reduced_matrix(2, 0.4)
    F = f_alpha(2, 0.6)
    assert check_point(2, 0.4, 0.6).compatible
    v = np.ones(3) / np.sqrt(3)
    E = Observable([np.outer(v, v), np.eye(3) - np.outer(v, v)])
    assert jm_feasibility(schur_channel(C, E), F).compatible
