"""Exact scalars and the dense symmetric matrix kernel.

Coefficients are either exact rationals (``fractions.Fraction``) or plain
floats.  Python's numeric tower already gives the tagging rule we want:
Fraction op Fraction stays a Fraction, anything touching a float becomes a
float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import DimensionCapExceeded

BigRational = Fraction
Coefficient = Union[Fraction, float]

TAU_MAT = 1e-9
TAU_COEFF = 1e-12
DEFAULT_DIM_CAP = 2000


def is_exact(c) -> bool:
    return isinstance(c, (Fraction, int))


def as_coefficient(value) -> Coefficient:
    """Strings and ints become exact rationals; floats stay approximate."""
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a coefficient")


def floor(c: Coefficient) -> int:
    return math.floor(c)


def frac_part(c: Coefficient) -> Coefficient:
    return c - math.floor(c)


def coeff_close(a: Coefficient, b: Coefficient, tol: float = TAU_COEFF) -> bool:
    """Exact equality for two rationals, relative tolerance otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(b)))


def is_zero_coeff(c: Coefficient, tol: float = TAU_COEFF) -> bool:
    if is_exact(c):
        return c == 0
    return abs(c) <= tol


def coeff_to_str(c: Coefficient) -> str | float:
    """Serialized form: ``"p/q"`` for rationals, the float itself otherwise."""
    if is_exact(c):
        c = Fraction(c)
        return f"{c.numerator}/{c.denominator}"
    return float(c)


def coeff_from_json(value) -> Coefficient:
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, bool):
        raise TypeError("boolean is not a coefficient")
    if isinstance(value, int):
        return Fraction(value)
    return float(value)


# ---------------------------------------------------------------------------
# symmetric matrices
# ---------------------------------------------------------------------------

def sym_matrix(entries) -> np.ndarray:
    """Validate and return a dense float symmetric matrix.

    Symmetry is structural: the lower triangle is rebuilt from the upper one.
    """
    a = np.array(entries, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def diag_matrix(values: Sequence[Coefficient]) -> np.ndarray:
    return np.diag(np.array([float(v) for v in values], dtype=float))


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray  # descending
    vectors: np.ndarray  # column i pairs with eigenvalue i


def _round_robin(n: int):
    """Pairings for parallel cyclic Jacobi: n-1 rounds covering every pair once."""
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = []
        for k in range(size // 2):
            p, q = players[k], players[size - 1 - k]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def sym_eigen(a, cap: int = DEFAULT_DIM_CAP, max_sweeps: int = 60) -> EigenResult:
    """Cyclic Jacobi eigensolver (round-robin ordering, disjoint rotations per round)."""
    A = np.array(a, dtype=float)
    n = A.shape[0]
    if n > cap:
        raise DimensionCapExceeded(n, cap)
    V = np.eye(n)
    if n > 1:
        rounds = None
        scale = np.linalg.norm(A)
        for _ in range(max_sweeps):
            off = np.linalg.norm(A - np.diag(np.diag(A)))
            if off <= 1e-15 * max(scale, 1e-300):
                break
            if rounds is None:
                rounds = _round_robin(n)
            for pairs in rounds:
                P = np.array([p for p, _ in pairs])
                Q = np.array([q for _, q in pairs])
                apq = A[P, Q]
                app = A[P, P]
                aqq = A[Q, Q]
                live = np.abs(apq) > 1e-300
                theta = np.where(live, (aqq - app) / (2.0 * np.where(live, apq, 1.0)), 0.0)
                t = np.where(live, np.sign(theta) / (np.abs(theta) + np.sqrt(theta**2 + 1.0)), 0.0)
                t = np.where(live & (theta == 0.0), 1.0, t)
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                # A <- J^T A J with J = [[c, s], [-s, c]] on each (p, q) plane
                colP, colQ = A[:, P].copy(), A[:, Q].copy()
                A[:, P] = c * colP - s * colQ
                A[:, Q] = s * colP + c * colQ
                rowP, rowQ = A[P, :].copy(), A[Q, :].copy()
                A[P, :] = c[:, None] * rowP - s[:, None] * rowQ
                A[Q, :] = s[:, None] * rowP + c[:, None] * rowQ
                A[P, Q] = 0.0
                A[Q, P] = 0.0
                vP, vQ = V[:, P].copy(), V[:, Q].copy()
                V[:, P] = c * vP - s * vQ
                V[:, Q] = s * vP + c * vQ
    lam = np.diag(A).copy()
    order = np.argsort(-lam, kind="stable")
    return EigenResult(lam[order], V[:, order])


def psd_profile(a, tau: float = TAU_MAT, cap: int = DEFAULT_DIM_CAP):
    """Return ``(trace, rank, is_psd)``; trace is the diagonal sum, not the eigenvalue sum."""
    A = np.asarray(a, dtype=float)
    lam = sym_eigen(A, cap=cap).eigenvalues
    top = float(np.max(np.abs(lam)))
    rank = int(np.sum(np.abs(lam) > tau * max(1.0, top)))
    is_psd = bool(lam[-1] >= -tau * max(1.0, top))
    return float(math.fsum(np.diag(A))), rank, is_psd


def operator_norm(a, cap: int = DEFAULT_DIM_CAP) -> float:
    lam = sym_eigen(a, cap=cap).eigenvalues
    return float(max(abs(lam[0]), abs(lam[-1])))


def is_projection(m, tau: float = TAU_MAT) -> bool:
    M = np.asarray(m, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if np.any(M != M.T):
        return False
    return bool(np.linalg.norm(M @ M - M) <= tau)
