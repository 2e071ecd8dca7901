"""Certificate-emitting constructions.

Each ``strat_*`` function appends claims to a :class:`CertificateBuilder`.
The caller is responsible for the ledger precondition (which coefficient
sits at which node); the functions document what they expect.

Every piece handed to a matrix claim is a split of some node, so all the
orthogonality the claims need comes from the refinement forest.  When a
node holds two coefficients that must be refined differently, the pieces
are re-merged with a *regroup*: a registered matrix claim whose only matrix
is the identity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certificate import (
    Certificate,
    CoeffSplit,
    DenseFamily,
    Discharge,
    MatrixClaim,
    NodeSplit,
    RankOneFamily,
)
from .errors import (
    DimensionCapExceeded,
    EmptyInterval,
    NegativeCoefficient,
    NotDecomposable,
    OutOfRange,
)
from .fillmore import fillmore_diagonal_fast
from .ktheory import KClass, KGroup
from .numeric import DEFAULT_DIM_CAP, TAU_COEFF, TAU_MAT, Coefficient, as_coefficient, coeff_to_str, is_exact

NOT_DECOMPOSABLE_REASON = "norm-le-1-not-projection"


class CertificateBuilder:
    """Single-owner accumulator of claims; ``certificate()`` freezes it."""

    def __init__(self, group: KGroup, blocks, tolerance: float = TAU_MAT,
                 dim_cap: int = DEFAULT_DIM_CAP, theta_route: str = "auto"):
        if theta_route not in ("auto", "real", "rational"):
            raise ValueError(f"unknown theta route {theta_route!r}")
        self.group = group
        self.blocks = tuple((as_coefficient(a), group.check(k)) for a, k in blocks)
        self.tolerance = tolerance
        self.dim_cap = dim_cap
        self.theta_route = theta_route
        self.kclass = {i: k for i, (_, k) in enumerate(self.blocks)}
        self.claims = []
        self.count = 0
        self.trace = []
        self._next_node = len(self.blocks)
        self._next_claim = 0

    @property
    def theta(self) -> KClass:
        return self.group.zero

    def note(self, name, **params):
        self.trace.append((name, {k: coeff_to_str(v) if isinstance(v, (Fraction, float)) else v
                                  for k, v in params.items()}))

    def check_dim(self, dim: int):
        if dim > self.dim_cap:
            raise DimensionCapExceeded(dim, self.dim_cap)

    def _node(self, kclass) -> int:
        nid = self._next_node
        self._next_node += 1
        self.kclass[nid] = kclass
        return nid

    def coeff_split(self, node, coeff, parts):
        self.claims.append(CoeffSplit(node, coeff, tuple(parts)))

    def node_split(self, parent, classes) -> list:
        children = tuple((self._node(self.group.check(k)), k) for k in classes)
        self.claims.append(NodeSplit(parent, children))
        return [cid for cid, _ in children]

    def matrix_claim(self, slots, alphas, scale, family, terminal: bool, tag: str = ""):
        cid = self._next_claim
        self._next_claim += 1
        if terminal:
            outputs = None
            self.count += family.count
        else:
            slot_class = self.kclass[slots[0]]
            ranks = [1] * family.count if isinstance(family, RankOneFamily) else \
                [int(round(float(np.trace(M)))) for M in family.matrices]
            outputs = tuple(self._node(self.group.scale(r, slot_class)) for r in ranks)
        self.claims.append(MatrixClaim(cid, tuple(slots), tuple(alphas), scale, family, outputs, tag))
        return None if outputs is None else list(outputs)

    def regroup(self, nodes, coeff) -> int:
        """Merge orthogonal equal-class pieces each holding ``coeff`` into one node."""
        k = len(nodes)
        fam = DenseFamily((np.eye(k),))
        (out,) = self.matrix_claim(nodes, (Fraction(1),) * k, coeff, fam, terminal=False, tag="regroup")
        return out

    def discharge(self, node):
        self.claims.append(Discharge(node))
        self.count += 1

    def certificate(self) -> Certificate:
        return Certificate(self.group, self.blocks, tuple(self.claims), self.count, self.tolerance,
                           tuple(self.trace))


def rank_one_family(alphas: Sequence[Coefficient], cap: int = DEFAULT_DIM_CAP) -> RankOneFamily:
    total = sum(alphas, Fraction(0))
    m = int(total) if is_exact(total) else round(total)
    return RankOneFamily(fillmore_diagonal_fast(list(alphas), m, cap=cap).vectors)


# ---------------------------------------------------------------------------
# rational choice
# ---------------------------------------------------------------------------

def _simplest(lo: Fraction, hi: Fraction | None) -> Fraction:
    """Simplest rational in the open interval (lo, hi); hi=None means +infinity."""
    fl = math.floor(lo)
    if hi is None or fl + 1 < hi:
        return Fraction(fl + 1)
    a, b = lo - fl, hi - fl  # 0 <= a < b <= 1
    y = _simplest(1 / b, None if a == 0 else 1 / a)
    return fl + 1 / y


def choose_rational(lo: Coefficient, hi: Coefficient) -> Fraction:
    """Minimal-denominator rational strictly inside (lo, hi), ties to the smaller numerator.

    Accelerated Stern-Brocot descent: whole runs of left/right moves are taken
    at once through the continued-fraction expansion of the endpoints.
    """
    # float endpoints are only known to TAU_COEFF; stay clear of them
    if not is_exact(lo):
        lo = Fraction(lo) + Fraction(TAU_COEFF * max(1.0, abs(lo)))
    if not is_exact(hi):
        hi = Fraction(hi) - Fraction(TAU_COEFF * max(1.0, abs(hi)))
    lo, hi = Fraction(lo), Fraction(hi)
    if lo >= hi:
        raise EmptyInterval(f"({lo}, {hi}) is empty")
    return _simplest(lo, hi)


# ---------------------------------------------------------------------------
# dimension bookkeeping
# ---------------------------------------------------------------------------

def rational_parameters(alpha: Fraction, beta: Fraction | None):
    """(k, h, m, r, dimension, count) of the rational construction.

    With no second block the split count r is 1: the trace k already
    dominates the rank m.
    """
    alpha = Fraction(alpha)
    if beta is None:
        m, k = alpha.denominator, alpha.numerator
        return k, 0, m, 1, m, k
    beta = Fraction(beta)
    m = math.lcm(alpha.denominator, beta.denominator)
    k, h = int(alpha * m), int(beta * m)
    r = -(-m // (k - m))
    return k, h, m, r, r * m + m, r * k + h


def real_rhos(alpha: Coefficient, beta: Coefficient):
    rho1 = choose_rational(1, alpha)
    gap = alpha - rho1
    rho2 = choose_rational(gap / 3, 2 * gap / 3)
    rho3 = choose_rational(Fraction(beta) / 3, 2 * Fraction(beta) / 3)
    return rho1, rho2, rho3


def real_projected_dim(alpha: Coefficient, beta: Coefficient = 0) -> int:
    """Largest matrix dimension strat_real would build for (alpha, beta)."""
    if beta == 0:
        beta = alpha
    rho1, rho2, rho3 = real_rhos(alpha, beta)
    return max(rational_parameters(rho1, rho2)[4], rational_parameters(rho1, rho3)[4], 3)


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

def strat_big(b: CertificateBuilder, gamma: Coefficient, p: int, scale: Coefficient = Fraction(1),
              terminal: bool | None = None):
    """gamma * p as six projections equivalent to p, for gamma in [3/2, 3] and [p] = 0.

    Ledger: p holds scale * gamma.  Returns the six registered output nodes
    (each holding ``scale``), or [] when the outputs are emitted as
    projections.  By default outputs are terminal exactly when scale is 1.
    """
    if not Fraction(3, 2) <= gamma <= 3:
        raise OutOfRange(f"gamma={gamma} outside [3/2, 3]")
    b.note("strat_big", gamma=gamma, scale=scale)
    if terminal is None:
        terminal = is_exact(scale) and scale == 1
    elif terminal and scale != 1:
        raise ValueError("terminal outputs need scale 1")
    th = b.theta
    hi, lo = 2 * gamma - 3, 3 - gamma
    whole = scale * gamma
    p1, p2 = b.node_split(p, [th, th])
    b.coeff_split(p1, whole, [scale * hi, scale * lo])
    b.coeff_split(p2, whole, [scale * lo, scale * hi])
    p2a, p2b = b.node_split(p2, [th, th])
    alphas = (hi, lo, lo)
    fam = rank_one_family(alphas)
    out1 = b.matrix_claim((p1, p2a, p2b), alphas, scale, fam, terminal, tag="big")
    p1a, p1b = b.node_split(p1, [th, th])
    p2_merged = b.regroup([p2a, p2b], scale * hi)
    out2 = b.matrix_claim((p2_merged, p1a, p1b), alphas, scale, fam, terminal, tag="big")
    return [] if terminal else out1 + out2


def strat_rational(b: CertificateBuilder, alpha: Fraction, beta: Fraction, p: int, q: int | None = None):
    """alpha*p + beta*q for rationals alpha > 1, beta >= 0 and zero-class p, q.

    Ledger: p holds alpha, q holds beta.  Without q the second block is
    absent and beta must be 0.
    """
    alpha, beta = Fraction(alpha), Fraction(beta)
    if alpha <= 1 or beta < 0:
        raise OutOfRange(f"need alpha > 1, beta >= 0 (got {alpha}, {beta})")
    if q is None and beta != 0:
        raise ValueError("beta > 0 needs a second projection")
    k, h, m, r, dim, count = rational_parameters(alpha, None if q is None else beta)
    b.check_dim(dim)
    b.note("strat_rational", alpha=alpha, beta=beta, k=k, h=h, m=m, r=r, dim=dim, count=count)
    th = b.theta
    slots = b.node_split(p, [th] * (r * m))
    alphas = [alpha] * (r * m)
    if q is not None:
        slots += b.node_split(q, [th] * m)
        alphas += [beta] * m
    fam = rank_one_family(alphas, cap=b.dim_cap)
    b.matrix_claim(slots, alphas, Fraction(1), fam, terminal=True, tag="rational")
    return count


def strat_real(b: CertificateBuilder, alpha: Coefficient, beta: Coefficient, p: int, q: int | None = None):
    """alpha*p + beta*q for real alpha > 1, beta >= 0 and zero-class p, q.

    Ledger: p holds alpha, q holds beta (q may be absent when beta is 0).
    """
    if not alpha > 1 or beta < 0:
        raise OutOfRange(f"need alpha > 1, beta >= 0 (got {alpha}, {beta})")
    th = b.theta
    if q is None or beta == 0:
        p1, p2 = b.node_split(p, [th, th])
        return strat_real(b, alpha, alpha, p1, p2)

    rho1, rho2, rho3 = real_rhos(alpha, beta)
    b.check_dim(max(rational_parameters(rho1, rho2)[4], rational_parameters(rho1, rho3)[4]))
    gap = alpha - rho1
    b.note("strat_real", alpha=alpha, beta=beta, rho1=rho1, rho2=rho2, rho3=rho3)
    b.coeff_split(p, alpha, [rho1, gap])
    p_first, p_second = b.node_split(p, [th, th])
    pieces_first = b.node_split(p_first, [th] * 6)
    pieces_second = b.node_split(p_second, [th] * 12)
    merged_first = b.regroup(pieces_first, gap)
    merged_second = b.regroup(pieces_second, gap)

    gamma = gap / rho2
    qs = strat_big(b, gamma, merged_second, rho2, terminal=False)  # q_1..q_6 live inside p''
    qs += strat_big(b, gamma, merged_first, rho2, terminal=False)  # q_7..q_12 inside p'
    qs += strat_big(b, beta / rho3, q, rho3, terminal=False)  # q_13..q_18 inside q
    rhos = [rho2] * 12 + [rho3] * 6
    for pj, qj, rho in zip(pieces_first + pieces_second, qs, rhos):
        strat_rational(b, rho1, rho, pj, qj)


def _theta_multiple(b: CertificateBuilder, alpha: Coefficient, p: int):
    """alpha*p with [p] = 0 and alpha in (1, 2)."""
    route = b.theta_route
    if not is_exact(alpha):
        route = "real"
    if route == "auto":
        direct = Fraction(alpha).denominator
        via_real = real_projected_dim(alpha)
        if min(direct, via_real) > b.dim_cap:
            raise DimensionCapExceeded(min(direct, via_real), b.dim_cap)
        route = "rational" if direct <= via_real else "real"
    if route == "rational":
        strat_rational(b, alpha, Fraction(0), p)
    else:
        strat_real(b, alpha, 0, p)


def strat_alpha_p(b: CertificateBuilder, alpha: Coefficient, p: int):
    """alpha*p for alpha > 1 and any class of p (the group is torsion).

    Ledger: p holds alpha and nothing else.
    """
    if not alpha > 1:
        raise OutOfRange(f"need alpha > 1 (got {alpha})")
    b.note("strat_alpha_p", alpha=alpha, node=p)
    while alpha > 2:
        b.coeff_split(p, alpha, [Fraction(1), alpha - 1])
        b.discharge(p)
        alpha = alpha - 1
    if alpha == 2:
        b.coeff_split(p, alpha, [Fraction(1), Fraction(1)])
        b.discharge(p)
        b.discharge(p)
        return

    g = b.kclass[p]
    n = b.group.class_order(g)
    if n == 1:
        return _theta_multiple(b, alpha, p)

    excess = 1 / (alpha - 1) - Fraction(1, n)
    m = math.floor(excess)
    delta = excess - m
    size = (m + 1) * n + 1
    b.check_dim(size)
    low = (alpha - 1) * delta
    high = alpha - low
    b.note("order_split", alpha=alpha, n=n, m=m, delta=delta, size=size)
    kids = b.node_split(p, [g] * size)
    head, tail = kids[: m * n + 1], kids[m * n + 1:]
    for t in tail:
        b.coeff_split(t, alpha, [low, high])
    alphas = [alpha] * len(head) + [low] * len(tail)
    b.matrix_claim(kids, alphas, Fraction(1), rank_one_family(alphas, cap=b.dim_cap),
                   terminal=True, tag="order-b")
    merged = b.regroup(tail, high)  # class n*[p] = 0
    strat_alpha_p(b, high, merged)


def extension_parameters(alpha: Coefficient, beta: Coefficient):
    """(n, delta, eps) with n*alpha + beta + eps = n + 2."""
    ratio = (2 - beta) / (alpha - 1)
    n = math.floor(ratio)
    delta = ratio - n
    eps = delta * (alpha - 1)
    if is_exact(alpha) and is_exact(beta) and n * alpha + beta + eps != n + 2:
        raise ArithmeticError("extension identity violated")
    return n, delta, eps


def strat_extension(b: CertificateBuilder, alpha: Coefficient, beta: Coefficient, p: int, q: int):
    """alpha*p + beta*q for orthogonal p, q of any classes, alpha > 1, 0 <= beta < 1.

    Ledger: p holds alpha, q holds beta.
    """
    if not alpha > 1 or not 0 <= beta < 1:
        raise OutOfRange(f"need alpha > 1 and 0 <= beta < 1 (got {alpha}, {beta})")
    n, delta, eps = extension_parameters(alpha, beta)
    b.check_dim(n + 2)
    b.note("strat_extension", alpha=alpha, beta=beta, n=n, delta=delta, eps=eps)
    G = b.group
    gp, gq = b.kclass[p], b.kclass[q]
    remainder_class = G.sub(gp, G.scale(n + 1, gq))
    kids = b.node_split(p, [remainder_class] + [gq] * (n + 1))
    remainder, qs = kids[0], kids[1:]
    b.coeff_split(qs[0], alpha, [alpha - eps, eps])
    alphas = [eps] + [alpha] * n + [beta]
    b.matrix_claim(qs + [q], alphas, Fraction(1), rank_one_family(alphas, cap=b.dim_cap),
                   terminal=True, tag="extension-b")
    strat_alpha_p(b, alpha, remainder)
    strat_alpha_p(b, alpha - eps, qs[0])


# ---------------------------------------------------------------------------
# whole elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralElement:
    """sum_i alpha_i p_i over mutually orthogonal projections p_i of given classes."""

    group: KGroup
    blocks: tuple  # of (Coefficient, KClass)

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("a spectral element needs at least one block")
        object.__setattr__(self, "blocks", tuple((as_coefficient(a), self.group.check(k))
                                                 for a, k in self.blocks))


class Verdict(enum.Enum):
    DECOMPOSABLE = "decomposable"
    ALREADY_PROJECTION = "already-projection"
    NOT_DECOMPOSABLE = "not-decomposable"


def check_decomposable(a: SpectralElement) -> Verdict:
    coeffs = [c for c, _ in a.blocks]
    if any(c < 0 for c in coeffs):
        raise NegativeCoefficient("coefficients of a positive element must be >= 0")
    if all(c in (0, 1) for c in coeffs) and any(c == 1 for c in coeffs):
        return Verdict.ALREADY_PROJECTION
    if max(coeffs) > 1:
        return Verdict.DECOMPOSABLE
    return Verdict.NOT_DECOMPOSABLE


def strat_spectral(a: SpectralElement, tolerance: float = TAU_MAT, dim_cap: int = DEFAULT_DIM_CAP,
                   theta_route: str = "auto") -> Certificate:
    verdict = check_decomposable(a)
    if verdict is Verdict.NOT_DECOMPOSABLE:
        raise NotDecomposable(NOT_DECOMPOSABLE_REASON)
    b = CertificateBuilder(a.group, a.blocks, tolerance, dim_cap, theta_route)
    b.note("strat_spectral", verdict=verdict.value)
    if verdict is Verdict.ALREADY_PROJECTION:
        for i, (c, _) in enumerate(b.blocks):
            if c == 1:
                b.discharge(i)
        return b.certificate()

    top = max(range(len(b.blocks)), key=lambda i: b.blocks[i][0])
    top_coeff, top_class = b.blocks[top]
    small = []
    for i, (c, _) in enumerate(b.blocks):
        if i == top or c == 0:
            continue
        if c == 1:
            b.discharge(i)
        elif c > 1:
            strat_alpha_p(b, c, i)
        else:
            small.append(i)
    if not small:
        strat_alpha_p(b, top_coeff, top)
    else:
        if len(small) == 1:
            pieces = [top]
        else:
            pieces = b.node_split(top, [b.theta] * (len(small) - 1) + [top_class])
        for piece, qi in zip(pieces, small):
            strat_extension(b, top_coeff, b.blocks[qi][0], piece, qi)
    return b.certificate()
