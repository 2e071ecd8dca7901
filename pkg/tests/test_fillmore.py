import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projsum.errors import DimensionCapExceeded, Infeasible, MajorizationFailure, NotPSD
from projsum.fillmore import (
    feasibility,
    fillmore_decompose,
    fillmore_diagonal_fast,
    schur_horn_unit_diag,
)
from projsum.numeric import sym_eigen


def _random_feasible(rng, n_max=12, m_max=20):
    """Random PSD matrix with integer trace m >= rank."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    r = int(rng.integers(1, min(n, m) + 1))
    lam = rng.random(r) + 0.05
    lam *= m / lam.sum()
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    u = q[:, :r]
    return (u * lam) @ u.T, m


def _check(rs, a, m):
    assert rs.count == m
    norms = np.linalg.norm(rs.vectors, axis=0)
    assert np.max(np.abs(norms - 1)) < 1e-9
    return np.linalg.norm(rs.reconstruction() - a)


def test_feasibility_examples():
    assert feasibility(np.eye(2)) == 2
    with pytest.raises(Infeasible) as exc:
        feasibility(np.eye(4) / 2)
    assert exc.value.reason == "RankExceedsTrace"
    with pytest.raises(Infeasible) as exc:
        feasibility(np.diag([1.5, 1.0]))
    assert exc.value.reason == "NonIntegerTrace"
    with pytest.raises(NotPSD):
        feasibility(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_schur_horn_examples():
    assert np.allclose(schur_horn_unit_diag([1, 1, 1]), np.eye(3))
    V = schur_horn_unit_diag([1.5, 0.5])
    M = V @ np.diag([1.5, 0.5]) @ V.T
    assert np.allclose(np.diag(M), 1) and math.isclose(abs(M[0, 1]), 0.5)
    V = schur_horn_unit_diag([2, 1, 0])
    M = V @ np.diag([2.0, 1.0, 0.0]) @ V.T
    assert np.allclose(np.diag(M), 1)
    assert np.allclose(sym_eigen(M).eigenvalues, [2, 1, 0], atol=1e-12)


@pytest.mark.parametrize("lam", [[0.5, 0.5], [2.5, -0.5]])
def test_schur_horn_rejects_bad_targets(lam):
    # with nonnegative entries summing to m the partial sums always dominate,
    # so only the sum and sign checks can fire
    with pytest.raises(MajorizationFailure):
        schur_horn_unit_diag(lam)


def test_decompose_examples():
    rs = fillmore_decompose(np.eye(2))
    assert _check(rs, np.eye(2), 2) < 1e-12
    rs = fillmore_decompose(np.array([[3.0]]))
    assert np.allclose(np.abs(rs.vectors), 1)
    a = np.diag([1.5, 0.5])
    rs = fillmore_decompose(a)
    assert _check(rs, a, 2) < 1e-12
    got = sorted(tuple(np.round(np.abs(v), 12)) for v in rs.vectors.T)
    assert got == [(round(math.sqrt(3) / 2, 12), 0.5)] * 2


@pytest.mark.parametrize("alpha, m", [
    ((1, 1), 2),
    ((2, 1), 3),
    ((Fraction(3, 2), Fraction(3, 2), 0), 3),
    ((Fraction(7, 5),) * 15 + (Fraction(3, 5),) * 5, 24),
    ((0.5, 1.5, 1.0), 3),
])
def test_diagonal_fast(alpha, m):
    a = np.diag([float(x) for x in alpha])
    rs = fillmore_diagonal_fast(alpha, m)
    assert _check(rs, a, m) < 1e-12
    if alpha[-1] == 0:
        assert np.allclose(rs.vectors[-1], 0)


def test_diagonal_fast_errors():
    with pytest.raises(Infeasible):
        fillmore_diagonal_fast([Fraction(1, 2)] * 4, 2)
    with pytest.raises(DimensionCapExceeded):
        fillmore_diagonal_fast([1] * 5, 5, cap=4)


def test_random_200_reconstructions():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        a, m = _random_feasible(rng)
        worst = max(worst, _check(fillmore_decompose(a), a, m))
    assert worst < 1e-8


def test_majorization_never_fails_500():
    # tr = m >= rank forces the sorted partial sums of lambda to dominate k
    rng = np.random.default_rng(5)
    for _ in range(500):
        a, m = _random_feasible(rng, n_max=8, m_max=12)
        lam = np.zeros(m)
        ev = sym_eigen(a).eigenvalues
        k = min(len(ev), m)
        lam[:k] = np.clip(ev[:k], 0, None)
        lam *= m / lam.sum()
        schur_horn_unit_diag(lam)


@given(st.lists(st.fractions(min_value=0, max_value=3, max_denominator=12), min_size=1, max_size=8))
def test_diagonal_count_exact(entries):
    total = sum(entries, Fraction(0))
    pad = math.ceil(total) - total
    alpha = entries + ([pad] if pad else [])
    m = int(sum(alpha))
    if m == 0 or sum(1 for x in alpha if x > 0) > m:
        return
    rs = fillmore_diagonal_fast(alpha, m)
    assert rs.count == m
    assert np.linalg.norm(rs.reconstruction() - np.diag([float(x) for x in alpha])) < 1e-10


@given(st.fractions(min_value=0, max_value=2, max_denominator=20))
def test_two_by_two_oracle(x):
    # parameterize unit vectors by angles: u u^T + v v^T = diag(x, 2 - x) iff
    # cos^2 s + cos^2 t = x and sin 2s + sin 2t = 0
    rs = fillmore_diagonal_fast([x, 2 - x], 2)
    assert rs.count == 2
    (s_ang, t_ang) = [math.atan2(v[1], v[0]) for v in rs.vectors.T]
    assert np.allclose(np.linalg.norm(rs.vectors, axis=0), 1, atol=1e-12)
    assert math.isclose(math.cos(s_ang) ** 2 + math.cos(t_ang) ** 2, float(x), abs_tol=1e-12)
    assert math.isclose(math.sin(2 * s_ang) + math.sin(2 * t_ang), 0, abs_tol=1e-12)
    # brute-force member of the family: t = -s, cos^2 s = x / 2
    s0 = math.acos(math.sqrt(float(x) / 2))
    oracle = np.array([[math.cos(s0), math.cos(s0)], [math.sin(s0), -math.sin(s0)]])
    assert np.linalg.norm(oracle @ oracle.T - rs.reconstruction()) < 1e-12
