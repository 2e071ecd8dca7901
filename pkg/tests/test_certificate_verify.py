import dataclasses
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projsum import certificate as certio
from projsum.certificate import (
    Certificate,
    CoeffSplit,
    DenseFamily,
    Discharge,
    MatrixClaim,
    NodeSplit,
    RankOneFamily,
    count_projections,
)
from projsum.errors import CertificateFormatError
from projsum.goldens import MUTATIONS, golden_certificates, mutate
from projsum.ktheory import KGroup
from projsum.strategies import CertificateBuilder, strat_big, strat_rational
from projsum.verify import labels_orthogonal, orth, overlapping_pairs, verify_certificate

TRIV = KGroup(())
Z2 = KGroup((2,))


@pytest.fixture(scope="module")
def goldens():
    return golden_certificates()


def _big(gamma):
    b = CertificateBuilder(TRIV, [(Fraction(gamma), ())])
    strat_big(b, Fraction(gamma), 0)
    return b.certificate()


def test_gamma_two_is_identities():
    cert = _big(2)
    rep = verify_certificate(cert)
    assert rep.valid and rep.projections == 6
    mats = [c for c in cert.claims if isinstance(c, MatrixClaim) and c.tag == "big"]
    for c in mats:
        assert np.allclose(np.abs(c.family.vectors), np.eye(3))


def test_counts():
    assert count_projections(_big(Fraction(7, 4))) == 6
    b = CertificateBuilder(TRIV, [(Fraction(1), ())])
    b.discharge(0)
    assert count_projections(b.certificate()) == 1
    b = CertificateBuilder(TRIV, [(Fraction(7, 5), ()), (Fraction(3, 5), ())])
    strat_rational(b, Fraction(7, 5), Fraction(3, 5), 0, 1)
    assert count_projections(b.certificate()) == 24


@pytest.mark.parametrize("name", ["big-gamma-2", "alpha-p-1.3", "extension-1.3-0.4"])
@pytest.mark.parametrize("kind", sorted(MUTATIONS))
def test_mutations(goldens, name, kind):
    cert = goldens[name]
    assert verify_certificate(cert).valid
    rep = verify_certificate(mutate(cert, kind))
    assert not rep.valid
    assert MUTATIONS[kind] in rep.kinds()


def test_tiny_perturbation_tolerated(goldens):
    rep = verify_certificate(mutate(goldens["big-gamma-2"], "perturb", eps=1e-13))
    assert rep.valid


def test_replay_deterministic(goldens):
    for cert in goldens.values():
        assert verify_certificate(cert).dumps() == verify_certificate(cert).dumps()


def test_json_roundtrip(goldens):
    for cert in goldens.values():
        text = certio.dumps(cert)
        back = certio.loads(text)
        assert certio.dumps(back) == text
        assert verify_certificate(back).to_json() == verify_certificate(cert).to_json()


def test_json_schema_fields(goldens):
    obj = certio.certificate_to_json(goldens["alpha-p-1.3"])
    assert obj["version"] == "projsum-cert/1"
    assert obj["k0"] == [2]
    assert obj["input"] == [{"coeff": "13/10", "class": [1]}]
    assert {"nodes", "claims", "claimed_count", "tolerance"} <= obj.keys()


@pytest.mark.parametrize("text", ["", "{", '{"version": "other"}', '{"version": "projsum-cert/1"}',
                                  '{"version": "projsum-cert/1", "k0": [], "input": [], '
                                  '"claims": [{"type": "bogus"}], "claimed_count": 0, "tolerance": 1e-9}'])
def test_malformed_json(text):
    with pytest.raises(CertificateFormatError):
        certio.loads(text)


def test_trace_conservation(goldens):
    for cert in goldens.values():
        for c in cert.claims:
            if isinstance(c, MatrixClaim):
                if isinstance(c.family, RankOneFamily):
                    tr = float(np.sum(c.family.vectors ** 2))
                else:
                    tr = sum(float(np.trace(m)) for m in c.family.matrices)
                assert abs(tr - float(sum(c.alphas))) <= cert.tolerance * len(c.slots)


# -- orthogonality ------------------------------------------------------------

def test_orth_examples():
    cert = Certificate(Z2, ((Fraction(2), (0,)), (Fraction(1), (0,))),
                       (NodeSplit(0, ((2, (1,)), (3, (1,)))),
                        MatrixClaim(0, (2, 3), (Fraction(1), Fraction(1)), Fraction(1),
                                    DenseFamily((np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))), (4, 5))),
                       0, 1e-9)
    assert orth(cert, 2, 3)  # split siblings
    assert not orth(cert, 4, 5)  # outputs of one claim
    assert orth(cert, 2, 1) and orth(cert, 4, 1)  # distinct roots
    assert not orth(cert, 0, 2)  # ancestor


def test_matrix_output_class_is_rank_times_slot_class():
    # a rank-2 output of two class-1 slots has class 0 in Z/2
    cert = Certificate(Z2, ((Fraction(1), (1,)), (Fraction(1), (1,))),
                       (MatrixClaim(0, (0, 1), (Fraction(1), Fraction(1)), Fraction(1),
                                    DenseFamily((np.eye(2),)), (2,)),
                        NodeSplit(2, ((3, (0,)), (4, (0,)))),
                        Discharge(3), Discharge(4)),
                       2, 1e-9)
    assert verify_certificate(cert).valid


def test_non_orthogonal_slots_rejected():
    cert = Certificate(TRIV, ((Fraction(2), ()),),
                       (NodeSplit(0, ((1, ()), (2, ()))),
                        MatrixClaim(0, (0, 1), (Fraction(1), Fraction(1)), Fraction(1),
                                    RankOneFamily(np.eye(2)), None)),
                       2, 1e-9)
    assert "NotOrthogonal" in verify_certificate(cert).kinds()


def test_double_split_and_unknown_node():
    cert = Certificate(TRIV, ((Fraction(1), ()),),
                       (NodeSplit(0, ((1, ()),)), NodeSplit(0, ((2, ()),)), Discharge(1), Discharge(2)),
                       2, 1e-9)
    assert "IllegalSplit" in verify_certificate(cert).kinds()
    cert = Certificate(TRIV, ((Fraction(1), ()),), (Discharge(7),), 1, 1e-9)
    assert verify_certificate(cert).kinds() == {"UnknownNode"}


def test_coeff_split_must_sum():
    cert = Certificate(TRIV, ((Fraction(2), ()),),
                       (CoeffSplit(0, Fraction(2), (Fraction(1), Fraction(1, 2))), Discharge(0)),
                       1, 1e-9)
    assert "LedgerMismatch" in verify_certificate(cert).kinds()


def test_not_a_projection():
    cert = Certificate(TRIV, ((Fraction(1), ()),),
                       (MatrixClaim(0, (0,), (Fraction(1),), Fraction(1),
                                    DenseFamily((np.array([[0.5]]), np.array([[0.5]]))), None),),
                       2, 1e-9)
    assert "NotAProjection" in verify_certificate(cert).kinds()


def _random_forest(rng, roots=2, splits=12):
    """Split-only forest as a certificate, with explicit leaf sets per node."""
    claims = []
    leaves = {}
    children = {}
    frontier = list(range(roots))
    nid = roots
    for _ in range(splits):
        parent = rng.choice(frontier)
        frontier.remove(parent)
        k = rng.randint(1, 3)
        kids = list(range(nid, nid + k))
        nid += k
        children[parent] = kids
        frontier += kids
        claims.append(NodeSplit(parent, tuple((c, ()) for c in kids)))
    for leaf_id, node in enumerate(frontier):
        leaves[node] = {leaf_id}

    def leafset(n):
        if n not in leaves:
            leaves[n] = set().union(*(leafset(c) for c in children[n]))
        return leaves[n]

    cert = Certificate(TRIV, tuple((Fraction(1), ()) for _ in range(roots)), tuple(claims), 0, 1e-9)
    return cert, {n: leafset(n) for n in range(nid)}


@given(st.integers(0, 10**6))
def test_orth_matches_leaf_disjointness(seed):
    rng = random.Random(seed)
    cert, sets = _random_forest(rng)
    nodes = sorted(sets)
    for _ in range(30):
        x, y = rng.choice(nodes), rng.choice(nodes)
        if x == y:
            continue
        assert orth(cert, x, y) == sets[x].isdisjoint(sets[y])


@given(st.lists(st.frozensets(st.tuples(st.integers(0, 2), st.lists(st.integers(0, 2), max_size=3).map(tuple)),
                              min_size=1, max_size=3), min_size=2, max_size=6))
def test_overlapping_pairs_matches_pairwise(label_sets):
    expected = {(i, j) for i in range(len(label_sets)) for j in range(i + 1, len(label_sets))
                if not labels_orthogonal(label_sets[i], label_sets[j])}
    assert set(overlapping_pairs(label_sets, limit=10**6)) == expected
