"""Certificate data model and its JSON form (schema ``projsum-cert/1``).

A certificate is an ordered list of rewrite claims over abstract projection
nodes.  Roots are the input blocks (node id = block index); later nodes are
introduced by node splits and by registered matrix outputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import CertificateFormatError
from .ktheory import KClass, KGroup
from .numeric import Coefficient, coeff_from_json, coeff_to_str

SCHEMA_VERSION = "projsum-cert/1"


@dataclass(frozen=True)
class RankOneFamily:
    """Projections v_j v_j^T stored by their vectors (columns of ``vectors``)."""

    vectors: np.ndarray

    @property
    def dim(self):
        return self.vectors.shape[0]

    @property
    def count(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class DenseFamily:
    matrices: tuple

    @property
    def dim(self):
        return self.matrices[0].shape[0] if self.matrices else 0

    @property
    def count(self):
        return len(self.matrices)


Family = Union[RankOneFamily, DenseFamily]


@dataclass(frozen=True)
class CoeffSplit:
    node: int
    coeff: Coefficient
    parts: tuple


@dataclass(frozen=True)
class NodeSplit:
    parent: int
    children: tuple  # of (id, KClass)


@dataclass(frozen=True)
class MatrixClaim:
    id: int
    slots: tuple
    alphas: tuple
    scale: Coefficient
    family: Family
    outputs: tuple | None  # None means terminal
    tag: str = ""

    @property
    def terminal(self) -> bool:
        return self.outputs is None


@dataclass(frozen=True)
class Discharge:
    node: int


Claim = Union[CoeffSplit, NodeSplit, MatrixClaim, Discharge]


@dataclass(frozen=True)
class Certificate:
    group: KGroup
    input: tuple  # of (Coefficient, KClass)
    claims: tuple
    claimed_count: int
    tolerance: float
    strategy_trace: tuple = field(default=(), compare=False)


def count_projections(cert: Certificate) -> int:
    total = 0
    for c in cert.claims:
        if isinstance(c, Discharge):
            total += 1
        elif isinstance(c, MatrixClaim) and c.terminal:
            total += c.family.count
    return total


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _family_to_json(fam: Family):
    if isinstance(fam, RankOneFamily):
        return {"rank_one": [[float(x) for x in v] for v in fam.vectors.T], "dim": fam.dim}
    return {"dense": [[float(x) for x in M.ravel()] for M in fam.matrices], "dim": fam.dim}


def _family_from_json(obj) -> Family:
    dim = int(obj["dim"])
    if "rank_one" in obj:
        cols = obj["rank_one"]
        vecs = np.array(cols, dtype=float).reshape(len(cols), dim).T if cols else np.zeros((dim, 0))
        return RankOneFamily(vecs)
    if "dense" in obj:
        mats = tuple(np.array(m, dtype=float).reshape(dim, dim) for m in obj["dense"])
        return DenseFamily(mats)
    raise CertificateFormatError("matrix family must be 'rank_one' or 'dense'")


def _claim_to_json(c: Claim) -> dict:
    if isinstance(c, CoeffSplit):
        return {"type": "coeff_split", "node": c.node, "coeff": coeff_to_str(c.coeff),
                "parts": [coeff_to_str(x) for x in c.parts]}
    if isinstance(c, NodeSplit):
        return {"type": "node_split", "parent": c.parent,
                "children": [{"id": i, "class": list(k)} for i, k in c.children]}
    if isinstance(c, MatrixClaim):
        return {"type": "matrix", "id": c.id, "tag": c.tag, "slots": list(c.slots),
                "alphas": [coeff_to_str(x) for x in c.alphas], "scale": coeff_to_str(c.scale),
                "matrices": _family_to_json(c.family),
                "outputs": "terminal" if c.outputs is None else list(c.outputs)}
    if isinstance(c, Discharge):
        return {"type": "discharge", "node": c.node}
    raise TypeError(c)


def _claim_from_json(d: dict) -> Claim:
    kind = d.get("type")
    if kind == "coeff_split":
        return CoeffSplit(int(d["node"]), coeff_from_json(d["coeff"]),
                          tuple(coeff_from_json(x) for x in d["parts"]))
    if kind == "node_split":
        return NodeSplit(int(d["parent"]),
                         tuple((int(ch["id"]), tuple(int(x) for x in ch["class"])) for ch in d["children"]))
    if kind == "matrix":
        outs = d["outputs"]
        return MatrixClaim(int(d["id"]), tuple(int(s) for s in d["slots"]),
                           tuple(coeff_from_json(x) for x in d["alphas"]),
                           coeff_from_json(d["scale"]), _family_from_json(d["matrices"]),
                           None if outs == "terminal" else tuple(int(x) for x in outs),
                           d.get("tag", ""))
    if kind == "discharge":
        return Discharge(int(d["node"]))
    raise CertificateFormatError(f"unknown claim type {kind!r}")


def _node_table(cert: Certificate) -> list:
    nodes = [{"id": i, "class": list(k), "origin": {"root": i}} for i, (_, k) in enumerate(cert.input)]
    for ci, c in enumerate(cert.claims):
        if isinstance(c, NodeSplit):
            nodes += [{"id": i, "class": list(k), "origin": {"split_of": c.parent, "branch": b}}
                      for b, (i, k) in enumerate(c.children)]
        elif isinstance(c, MatrixClaim) and c.outputs is not None:
            nodes += [{"id": i, "origin": {"matrix_claim": c.id, "output": j}}
                      for j, i in enumerate(c.outputs)]
    return nodes


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "k0": list(cert.group.moduli),
        "input": [{"coeff": coeff_to_str(a), "class": list(k)} for a, k in cert.input],
        "nodes": _node_table(cert),
        "claims": [_claim_to_json(c) for c in cert.claims],
        "claimed_count": cert.claimed_count,
        "tolerance": cert.tolerance,
        "strategy_trace": [list(t) for t in cert.strategy_trace],
    }


def certificate_from_json(obj: dict) -> Certificate:
    """Parse a certificate; the ``nodes`` table is informational and ignored."""
    if not isinstance(obj, dict) or obj.get("version") != SCHEMA_VERSION:
        raise CertificateFormatError(f"expected version {SCHEMA_VERSION!r}")
    try:
        group = KGroup(tuple(obj["k0"]))
        inputs = tuple((coeff_from_json(b["coeff"]), tuple(int(x) for x in b["class"]))
                       for b in obj["input"])
        claims = tuple(_claim_from_json(c) for c in obj["claims"])
        return Certificate(group, inputs, claims, int(obj["claimed_count"]), float(obj["tolerance"]),
                           tuple(tuple(t) for t in obj.get("strategy_trace", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateFormatError(f"malformed certificate: {exc}") from exc


def dumps(cert: Certificate) -> str:
    return json.dumps(certificate_to_json(cert))


def loads(text: str) -> Certificate:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(f"invalid JSON: {exc}") from exc
    return certificate_from_json(obj)
