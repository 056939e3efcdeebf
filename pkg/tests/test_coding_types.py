import pytest
from hypothesis import given, strategies as st

from repeater_lnc.coding_types import (
    GENERATORS, LAMBDA_R_REFERENCE, LAMBDA_REFERENCE, CodingType, SubspaceContext, TypeEncodingError,
    classify_vector, derive_feasible, discrepancy, feasibility_witness_oracle, feasible_types, is_upward_closed,
)
from repeater_lnc.gf2 import Gf2Subspace, unit


def test_reference_list_sizes():
    assert len(LAMBDA_REFERENCE) == len(set(LAMBDA_REFERENCE)) == 154
    assert len(LAMBDA_R_REFERENCE) == 18


def test_upward_closure_reproduces_reference():
    assert discrepancy() == (set(), set())
    assert [t.encode() for t in derive_feasible()] == sorted(LAMBDA_REFERENCE)


def test_relay_types_are_those_inside_relay_space():
    lam, lam_r = feasible_types()
    assert [t.encode() for t in lam_r] == list(LAMBDA_R_REFERENCE)
    assert all(t.bit(15) for t in lam_r)
    # relay space sits inside subspaces 8..14, so those bits are forced
    assert all(all(t.bit(l) for l in range(8, 16)) for t in lam_r)


def test_encoding_extremes():
    assert CodingType(0).encode() == "00000"
    assert CodingType((1 << 15) - 1).encode() == "F7F71"
    assert CodingType(1 << 14).encode() == "00001"


@given(st.integers(0, (1 << 15) - 1))
def test_encode_decode_round_trip(mask):
    t = CodingType(mask)
    assert CodingType.decode(t.encode()) == t
    assert CodingType.from_bits(t.bits) == t


@pytest.mark.parametrize("text", ["0000", "G0000", "08000", "0000A"])
def test_bad_encodings(text):
    with pytest.raises(TypeEncodingError):
        CodingType.decode(text)


def test_subspace_generators():
    assert GENERATORS[15] == {"Sr"}
    assert GENERATORS[14] == {"S1", "S2", "M2", "Sr"}
    assert len(GENERATORS) == 15


def test_classify_hand_example():
    # n1 = n2 = 1: d1 knows x1, d2 and r know nothing
    dim = 2
    ctx = SubspaceContext(Gf2Subspace.span(dim, [unit(0)]), Gf2Subspace.zero(dim), Gf2Subspace.zero(dim), 1, 1)
    t = classify_vector(ctx, unit(1))
    # x2 is reached only through M2
    assert {l for l in range(1, 16) if t.bit(l)} == {4, 7, 11, 14}
    assert is_upward_closed(t)
    assert t.encode() in LAMBDA_REFERENCE


def test_witness_oracle_small_run_stays_inside_lambda():
    seen = feasibility_witness_oracle(3000, seed=5)
    lam = set(feasible_types()[0])
    assert seen <= lam
    assert len(seen) >= 140


def test_witness_oracle_rejects_large_dims():
    with pytest.raises(ValueError):
        feasibility_witness_oracle(1, dims=(7, 7))
