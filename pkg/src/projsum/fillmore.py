"""Constructive Fillmore decomposition.

A PSD matrix with integer trace m >= rank is written as a sum of exactly m
rank-one projections v v^T.  The engine is a unit-diagonal Schur-Horn step
done with 2x2 Givens mixing, plus a spectral-tetris style fast path for
diagonal rational targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionCapExceeded, Infeasible, MajorizationFailure, NotPSD
from .numeric import (
    DEFAULT_DIM_CAP,
    TAU_COEFF,
    TAU_MAT,
    Coefficient,
    is_exact,
    psd_profile,
    sym_eigen,
)


@dataclass(frozen=True)
class RankOneSet:
    """Columns of ``vectors`` (n x m) are the unit vectors v_i."""

    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def count(self) -> int:
        return self.vectors.shape[1]

    def matrices(self):
        return [np.outer(v, v) for v in self.vectors.T]

    def reconstruction(self) -> np.ndarray:
        return self.vectors @ self.vectors.T


def feasibility(a, tau_coeff: float = TAU_COEFF, tau_mat: float = TAU_MAT,
                cap: int = DEFAULT_DIM_CAP) -> int:
    """Return the projection count m, or raise Infeasible / NotPSD."""
    trace, rank, psd = psd_profile(a, tau_mat, cap=cap)
    if not psd:
        raise NotPSD("matrix has a negative eigenvalue")
    m = round(trace)
    if abs(trace - m) > tau_coeff * max(1.0, trace):
        raise Infeasible("NonIntegerTrace", f"trace {trace!r}")
    if rank > m:
        raise Infeasible("RankExceedsTrace", f"rank {rank} > trace {m}")
    return m


def schur_horn_unit_diag(lam: Sequence[float], tau_coeff: float = TAU_COEFF) -> np.ndarray:
    """Orthogonal V with V diag(lam) V^T having unit diagonal.

    Each step takes the largest entry a >= 1 and the smallest b <= 1 of the
    still-diagonal part, rotates their plane so that one diagonal entry is
    exactly 1, and retires that index; the other becomes a + b - 1.
    """
    d = np.array([float(x) for x in lam], dtype=float)
    m = len(d)
    if np.any(d < -tau_coeff * max(1.0, m)):
        raise MajorizationFailure("negative diagonal target")
    if abs(d.sum() - m) > tau_coeff * max(1, m) * 10:
        raise MajorizationFailure(f"sum {d.sum()!r} differs from {m}")
    partial = np.cumsum(np.sort(d)[::-1])
    for k, s in enumerate(partial, start=1):
        if s < k - tau_coeff * max(1, m) * 10:
            raise MajorizationFailure(f"partial sum {s!r} < {k}")

    V = np.eye(m)
    active = list(range(m))
    tiny = 1e-15 * max(1, m)
    while len(active) > 1:
        vals = d[active]
        i = active[int(np.argmax(vals))]
        j = active[int(np.argmin(vals))]
        a, b = d[i], d[j]
        if a - 1.0 <= tiny and 1.0 - b <= tiny:
            break
        c2 = min(max((1.0 - b) / (a - b), 0.0), 1.0)
        c, s = math.sqrt(c2), math.sqrt(1.0 - c2)
        # rows i, j of V <- [[c, -s], [s, c]] applied on the left
        vi, vj = V[i].copy(), V[j].copy()
        V[i] = c * vi - s * vj
        V[j] = s * vi + c * vj
        d[j] = a + b - 1.0
        d[i] = 1.0
        active.remove(i)
    return V


def fillmore_decompose(a, m: int | None = None, tau_coeff: float = TAU_COEFF,
                       tau_mat: float = TAU_MAT, cap: int = DEFAULT_DIM_CAP) -> RankOneSet:
    A = np.asarray(a, dtype=float)
    n = A.shape[0]
    feasible_m = feasibility(A, tau_coeff, tau_mat, cap=cap)
    if m is None:
        m = feasible_m
    elif m != feasible_m:
        raise Infeasible("NonIntegerTrace", f"trace rounds to {feasible_m}, not {m}")
    if m == 0:
        return RankOneSet(np.zeros((n, 0)))
    eig = sym_eigen(A, cap=cap)
    k = min(n, m)
    lam = np.zeros(m)
    lam[:k] = np.clip(eig.eigenvalues[:k], 0.0, None)
    lam *= m / lam.sum()
    V = schur_horn_unit_diag(lam, tau_coeff)
    S = np.zeros((n, m))
    S[:, :k] = eig.vectors[:, :k] * np.sqrt(lam[:k])
    return RankOneSet(S @ V.T)


def _tetris(alpha: Sequence[Fraction], m: int):
    """Two-nonzeros-per-vector construction; returns None when the greedy gets stuck."""
    n = len(alpha)
    cols = []

    def unit(i):
        v = np.zeros(n)
        v[i] = 1.0
        cols.append(v)

    rem = {}
    for i, r in enumerate(alpha):
        whole = math.floor(r)
        if r == whole:
            for _ in range(whole):
                unit(i)
            continue
        keep = whole - 1 if whole >= 1 else 0
        for _ in range(keep):
            unit(i)
        rem[i] = r - keep  # in (0, 1) or (1, 2)

    while rem:
        if len(rem) == 1:
            (i, r), = rem.items()
            if r != 1:
                return None
            unit(i)
            break
        j = min(rem, key=lambda x: (rem[x], x))
        i = max((x for x in rem if x != j), key=lambda x: (rem[x], -x))
        x, y = rem[j], rem[i]
        if x + y < 2:
            return None
        # pair (sqrt(x/2), +-sqrt(1 - x/2)) on coordinates (j, i): gives x to j, 2 - x to i
        hi, lo = math.sqrt(float(x) / 2.0), math.sqrt(1.0 - float(x) / 2.0)
        for sign in (1.0, -1.0):
            v = np.zeros(n)
            v[j], v[i] = hi, sign * lo
            cols.append(v)
        del rem[j]
        left = y + x - 2
        if left == 0:
            del rem[i]
        elif left == 1:
            unit(i)
            del rem[i]
        else:
            rem[i] = left
    if len(cols) != m:
        return None
    return np.array(cols).T


def fillmore_diagonal_fast(alpha: Sequence[Coefficient], m: int, tau_coeff: float = TAU_COEFF,
                           tau_mat: float = TAU_MAT, cap: int = DEFAULT_DIM_CAP) -> RankOneSet:
    """Rank-one decomposition of diag(alpha); same contract as fillmore_decompose."""
    n = len(alpha)
    if n > cap:
        raise DimensionCapExceeded(n, cap)
    if all(is_exact(x) for x in alpha):
        exact = [Fraction(x) for x in alpha]
        if any(x < 0 for x in exact):
            raise NotPSD("negative diagonal entry")
        if sum(exact) != m:
            raise Infeasible("NonIntegerTrace", f"trace {sum(exact)} != {m}")
        if sum(1 for x in exact if x > 0) > m:
            raise Infeasible("RankExceedsTrace")
        B = _tetris(exact, m)
        if B is not None:
            return RankOneSet(B)
    return fillmore_decompose(np.diag([float(x) for x in alpha]), m, tau_coeff, tau_mat, cap)
