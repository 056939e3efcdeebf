import itertools

import pytest
from hypothesis import given, settings, strategies as st

from repeater_lnc.gf2 import (
    DimensionError, Gf2Subspace, KnowledgeSpace, SparseKnowledge, bits, rank_of, unit, vec, weight,
)

DIM = 8
vectors = st.lists(st.integers(0, (1 << DIM) - 1), max_size=10)


def brute_span(vs):
    out = {0}
    for v in vs:
        out |= {x ^ v for x in out}
    return out


def test_vec_cancels_repeats():
    assert vec([1, 3, 3]) == unit(1)
    assert list(bits(vec([0, 5, 2]))) == [5, 2, 0]
    assert weight(vec([0, 5, 2])) == 3


def test_dimension_checked():
    with pytest.raises(DimensionError):
        Gf2Subspace.span(3, [unit(3)])
    with pytest.raises(DimensionError):
        Gf2Subspace.zero(2) + Gf2Subspace.zero(3)


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_span_matches_brute_force(vs):
    sp = Gf2Subspace.span(DIM, vs)
    members = brute_span(vs)
    assert set(sp.elements()) == members
    assert sp.rank == len(members).bit_length() - 1 == rank_of(vs)
    for x in range(1 << DIM):
        assert (x in sp) == (x in members)


@settings(max_examples=60, deadline=None)
@given(vectors, vectors)
def test_sum_space(a, b):
    s = Gf2Subspace.span(DIM, a) + Gf2Subspace.span(DIM, b)
    assert set(s.elements()) == brute_span(a + b)


@settings(max_examples=60, deadline=None)
@given(vectors, st.integers(0, (1 << DIM) - 1))
def test_insert_reports_growth(vs, v):
    sp = Gf2Subspace.span(DIM, vs)
    new, grew = sp.insert(v)
    assert grew == (v not in sp)
    assert v in new


@settings(max_examples=80, deadline=None)
@given(vectors)
def test_knowledge_space_flags_and_span(vs):
    ks = KnowledgeSpace()
    for v in vs:
        ks.receive(v)
    flagged = 0
    for v in vs:
        flagged |= v
    for c in range(DIM):
        assert ks.is_flagged(c) == bool(flagged >> c & 1)
    members = brute_span(vs)
    assert all(ks.knows(x) == (x in members) for x in range(1 << DIM))


@settings(max_examples=80, deadline=None)
@given(vectors)
def test_sparse_knowledge_agrees_with_bitsets(vs):
    sk = SparseKnowledge()
    ks = KnowledgeSpace()
    for v in vs:
        assert sk.add(frozenset(bits(v))) == ks.receive(v)
    assert sk.rank == ks.rank
    for x in range(1 << DIM):
        assert sk.knows(frozenset(bits(x))) == ks.knows(x)


def test_sparse_rows_stay_fully_reduced():
    sk = SparseKnowledge()
    for a, b in itertools.combinations(range(6), 2):
        sk.add(frozenset((a, b)))
    for p, row in sk.rows.items():
        assert max(row) == p
        assert not (row - {p}) & set(sk.rows)
