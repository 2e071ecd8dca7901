"""Golden certificates and the four standard mutations used to probe the verifier."""
from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np

from .certificate import Certificate, DenseFamily, MatrixClaim, NodeSplit, RankOneFamily
from .ktheory import KGroup
from .strategies import CertificateBuilder, SpectralElement, strat_big, strat_spectral

# mutation kind -> error kind the verifier must report
MUTATIONS = {
    "perturb": "ResidualTooLarge",
    "class_flip": "IllegalSplit",
    "drop_claim": "LedgerNotEmpty",
    "count_tamper": "CountMismatch",
}


def golden_certificates() -> dict:
    z2 = KGroup((2,))
    b = CertificateBuilder(z2, [(Fraction(2), (0,))])
    strat_big(b, Fraction(2), 0)
    return {
        "big-gamma-2": b.certificate(),
        "alpha-p-1.3": strat_spectral(SpectralElement(z2, ((Fraction("1.3"), (1,)),))),
        "extension-1.3-0.4": strat_spectral(
            SpectralElement(z2, ((Fraction("1.3"), (1,)), (Fraction("0.4"), (0,))))),
    }


def _perturb(claim: MatrixClaim, eps: float) -> MatrixClaim:
    fam = claim.family
    if isinstance(fam, RankOneFamily):
        v = fam.vectors.copy()
        v[0, 0] += eps
        return dataclasses.replace(claim, family=RankOneFamily(v))
    mats = [m.copy() for m in fam.matrices]
    mats[0][0, 0] += eps
    return dataclasses.replace(claim, family=DenseFamily(tuple(mats)))


def mutate(cert: Certificate, kind: str, eps: float = 1e-3) -> Certificate:
    claims = list(cert.claims)
    if kind == "perturb":
        i = next(i for i, c in enumerate(claims) if isinstance(c, MatrixClaim) and c.tag != "regroup")
        claims[i] = _perturb(claims[i], eps)
    elif kind == "class_flip":
        if cert.group.order < 2:
            raise ValueError("class flip needs a nontrivial group")
        i = next(i for i, c in enumerate(claims) if isinstance(c, NodeSplit))
        (cid, k), *rest = claims[i].children
        flipped = cert.group.add(k, cert.group.element([1] + [0] * (len(k) - 1)))
        claims[i] = NodeSplit(claims[i].parent, ((cid, flipped), *rest))
    elif kind == "drop_claim":
        claims.pop()
    elif kind == "count_tamper":
        return dataclasses.replace(cert, claimed_count=cert.claimed_count + 1)
    else:
        raise ValueError(f"unknown mutation {kind!r}")
    return dataclasses.replace(cert, claims=tuple(claims))
