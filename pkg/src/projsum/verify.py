"""Independent replay of a certificate against a coefficient ledger.

The verifier trusts nothing produced by the strategies: node labels, classes
of matrix outputs, projection counts and residuals are all recomputed here.

Ledger conventions: a node maps to a multiset of nonzero coefficients.  Zero
coefficients are never stored; a zero part of a coefficient split is
dropped and a matrix slot whose coefficient is zero consumes nothing.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

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
from .errors import GroupMismatch
from .numeric import coeff_close, coeff_to_str, is_zero_coeff

ERROR_KINDS = (
    "LedgerMismatch", "IllegalSplit", "NotOrthogonal", "NotAProjection", "ResidualTooLarge",
    "LedgerNotEmpty", "CountMismatch", "ClassMismatch", "Malformed", "UnknownNode",
)


@dataclass
class Report:
    valid: bool
    projections: int
    max_residual: float
    errors: list = field(default_factory=list)

    def kinds(self) -> set:
        return {e["kind"] for e in self.errors}

    def to_json(self) -> dict:
        return {"valid": self.valid, "projections": self.projections,
                "max_residual": self.max_residual, "errors": self.errors}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class _Abort(Exception):
    pass


def labels_orthogonal(x: frozenset, y: frozenset) -> bool:
    """Atoms are (root, path); same-root atoms must have incomparable paths."""
    for rx, px in x:
        for ry, py in y:
            if rx != ry:
                continue
            k = min(len(px), len(py))
            if px[:k] == py[:k]:
                return False
    return True


def overlapping_pairs(label_sets, limit: int = 5) -> list:
    """Index pairs (a, b) of label sets that fail orthogonality.

    Atoms are sorted per root; in lexicographic order every prefix of a path
    sits on the ancestor stack when the path is reached, so one sweep finds
    all prefix relations between distinct sets.
    """
    by_root = defaultdict(list)
    for idx, labels in enumerate(label_sets):
        for root, path in labels:
            by_root[root].append((path, idx))
    found = []
    for atoms in by_root.values():
        atoms.sort()
        stack = []
        for path, idx in atoms:
            while stack and stack[-1][0] != path[: len(stack[-1][0])]:
                stack.pop()
            for anc_path, anc_idx in stack:
                if anc_idx != idx:
                    found.append((min(anc_idx, idx), max(anc_idx, idx)))
                    if len(found) >= limit:
                        return found
            stack.append((path, idx))
    return found


class _Replay:
    def __init__(self, cert: Certificate):
        self.cert = cert
        self.group = cert.group
        self.tol = cert.tolerance
        self.ledger = defaultdict(list)
        self.kclass = {}
        self.labels = {}
        self.split = set()
        self.projections = 0
        self.max_residual = 0.0
        self.errors = []

    def error(self, kind, index, message):
        self.errors.append({"kind": kind, "claim": index, "message": message})

    def node(self, nid, index):
        if nid not in self.kclass:
            self.error("UnknownNode", index, f"node {nid} does not exist")
            raise _Abort
        return nid

    def new_node(self, nid, index, kclass, labels):
        if nid in self.kclass:
            self.error("Malformed", index, f"node id {nid} reused")
            raise _Abort
        self.kclass[nid] = kclass
        self.labels[nid] = labels

    def give(self, nid, c):
        if not is_zero_coeff(c, self.tol):
            self.ledger[nid].append(c)

    def take(self, nid, c) -> bool:
        if is_zero_coeff(c, self.tol):
            return True
        held = self.ledger.get(nid, [])
        for i, h in enumerate(held):
            if coeff_close(h, c, self.tol):
                del held[i]
                return True
        return False

    # -- rules -------------------------------------------------------------

    def coeff_split(self, i, c: CoeffSplit):
        self.node(c.node, i)
        if any(p < 0 for p in c.parts):
            self.error("LedgerMismatch", i, "negative part in coefficient split")
        total = sum(c.parts, Fraction(0))
        if not coeff_close(total, c.coeff, self.tol):
            self.error("LedgerMismatch", i, f"parts sum to {coeff_to_str(total)}, not {coeff_to_str(c.coeff)}")
        if not self.take(c.node, c.coeff):
            self.error("LedgerMismatch", i, f"node {c.node} does not hold {coeff_to_str(c.coeff)}")
            return
        for p in c.parts:
            self.give(c.node, p)

    def node_split(self, i, c: NodeSplit):
        parent = self.node(c.parent, i)
        if not c.children:
            self.error("Malformed", i, "split without children")
            raise _Abort
        if parent in self.split:
            self.error("IllegalSplit", i, f"node {parent} split twice")
        self.split.add(parent)
        try:
            classes = [self.group.check(k) for _, k in c.children]
            legal = self.group.split_legal(self.kclass[parent], classes)
        except GroupMismatch as exc:
            self.error("IllegalSplit", i, str(exc))
            classes, legal = [self.group.zero] * len(c.children), True
        if not legal:
            self.error("IllegalSplit", i, f"children classes do not sum to {self.kclass[parent]}")
        held = self.ledger.pop(parent, [])
        for b, ((cid, _), k) in enumerate(zip(c.children, classes)):
            labels = frozenset((r, path + (b,)) for r, path in self.labels[parent])
            self.new_node(cid, i, k, labels)
            self.ledger[cid].extend(held)

    def matrix(self, i, c: MatrixClaim):
        slots = [self.node(s, i) for s in c.slots]
        fam = c.family
        dim = len(slots)
        if len(c.alphas) != dim or fam.dim != dim or fam.count == 0:
            self.error("Malformed", i, "slot / alpha / matrix dimensions disagree")
            raise _Abort
        for a, b in overlapping_pairs([self.labels[s] for s in slots]):
            self.error("NotOrthogonal", i, f"slots {slots[a]} and {slots[b]} may overlap")
        slot_class = self.kclass[slots[0]]
        if any(self.kclass[s] != slot_class for s in slots):
            self.error("ClassMismatch", i, "slots carry different K0 classes")
        for s, alpha in zip(slots, c.alphas):
            if alpha < 0:
                self.error("LedgerMismatch", i, "negative diagonal target")
            if not self.take(s, c.scale * alpha):
                self.error("LedgerMismatch", i, f"node {s} does not hold {coeff_to_str(c.scale * alpha)}")

        target = np.diag([float(a) for a in c.alphas])
        if isinstance(fam, RankOneFamily):
            B = fam.vectors
            sq = np.sum(B * B, axis=0)
            defects = np.abs(sq - 1.0) * sq  # ||vv^T vv^T - vv^T||_F
            total = B @ B.T
            ranks = [1] * fam.count
        else:
            defects = np.array([np.linalg.norm(M @ M - M) if np.array_equal(M, M.T) else math.inf
                                for M in fam.matrices])
            total = np.sum(fam.matrices, axis=0)
            ranks = [int(round(float(np.trace(M)))) for M in fam.matrices]
        bad = [j for j, d in enumerate(defects) if not d <= self.tol]
        if bad:
            self.error("NotAProjection", i, f"matrices {bad[:5]} fail M^2 = M")
        residual = float(np.linalg.norm(total - target))
        self.max_residual = max(self.max_residual, residual)
        if not residual <= self.tol:
            self.error("ResidualTooLarge", i, f"residual {residual:.3e} > {self.tol:.1e}")

        if c.outputs is None:
            if not coeff_close(c.scale, Fraction(1), self.tol):
                self.error("LedgerMismatch", i, "terminal matrix claim must have scale 1")
            self.projections += fam.count
            return
        if len(c.outputs) != fam.count:
            self.error("Malformed", i, "output count differs from matrix count")
            raise _Abort
        union = frozenset().union(*(self.labels[s] for s in slots))
        for out, rank in zip(c.outputs, ranks):
            self.new_node(out, i, self.group.scale(rank, slot_class), union)
            self.give(out, c.scale)

    def discharge(self, i, c: Discharge):
        self.node(c.node, i)
        if not self.take(c.node, Fraction(1)):
            self.error("LedgerMismatch", i, f"node {c.node} does not hold coefficient 1")
            return
        self.projections += 1

    def run(self) -> Report:
        try:
            for idx, (coef, k) in enumerate(self.cert.input):
                try:
                    k = self.group.check(k)
                except GroupMismatch as exc:
                    self.error("Malformed", -1, str(exc))
                    raise _Abort
                if coef < 0:
                    self.error("LedgerMismatch", -1, f"negative input coefficient at root {idx}")
                self.new_node(idx, -1, k, frozenset({(idx, ())}))
                self.give(idx, coef)
            handlers = {CoeffSplit: self.coeff_split, NodeSplit: self.node_split,
                        MatrixClaim: self.matrix, Discharge: self.discharge}
            for i, claim in enumerate(self.cert.claims):
                handlers[type(claim)](i, claim)
        except _Abort:
            return Report(False, self.projections, self.max_residual, self.errors)

        leftover = {n: v for n, v in self.ledger.items() if v}
        if leftover:
            sample = {str(n): [coeff_to_str(x) for x in v] for n, v in list(leftover.items())[:5]}
            self.error("LedgerNotEmpty", None, f"{len(leftover)} nodes still hold coefficients: {sample}")
        if self.projections != self.cert.claimed_count:
            self.error("CountMismatch", None,
                       f"replay emits {self.projections}, certificate claims {self.cert.claimed_count}")
        return Report(not self.errors, self.projections, self.max_residual, self.errors)


def verify_certificate(cert: Certificate) -> Report:
    return _Replay(cert).run()


def orth(cert: Certificate, x: int, y: int) -> bool:
    """Orthogonality of two nodes of a (replayable) certificate's forest."""
    r = _Replay(cert)
    r.run()
    return labels_orthogonal(r.labels[x], r.labels[y])
