import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repeater_lnc.channel import EXAMPLE_CHANNEL, ZERO_CHANNEL, is_strong_relaying, sample_channel
from repeater_lnc.evaluation import BOUNDS, build_bound_lp
from repeater_lnc.inner import (
    GENERAL_VARS, STRONG_VARS, build_baseline_lp, build_inner_strong_lp, fix_zero, inner_max,
)
from repeater_lnc.lp import maximize_weighted, weight_grid
from repeater_lnc.outer import RANK_ROWS, build_outer_lp, outer_max
from repeater_lnc.reference import reference_solve

# max sum rates on the two-hop example channel, frozen from the reference solver
EXAMPLE_RSUM = {
    "outer": 0.534542767107131,
    "inner-strong": 0.529956766586734,
    "inner-general": 0.5300288229710305,
    "scheme1": 0.25,
    "scheme2": 0.270216306156406,
    "scheme3": 0.41212121212121205,
    "scheme4": 0.41969404807815913,
    "scheme5": 0.49827586206896557,
    "scheme6": 0.5189708636300145,
}


@pytest.mark.parametrize("bound", BOUNDS)
def test_example_max_sum_rate_frozen(bound):
    lp = build_bound_lp(bound, EXAMPLE_CHANNEL)
    assert maximize_weighted(lp, 1, 1).rsum == pytest.approx(EXAMPLE_RSUM[bound], abs=1e-9)
    assert maximize_weighted(lp, 1, 1, reference_solve).rsum == pytest.approx(EXAMPLE_RSUM[bound], abs=1e-9)


def test_single_hop_baselines_closed_form():
    # time sharing between the two unicast rates
    assert EXAMPLE_RSUM["scheme1"] == max(0.15, 0.25)
    # all of flow 2 via the relay: two links in series
    assert EXAMPLE_RSUM["scheme3"] == pytest.approx(1 / (1 / 0.85 + 1 / 0.8), abs=1e-15)


def test_outer_lp_shape():
    lp = build_outer_lp(EXAMPLE_CHANNEL)
    assert len(lp.variables) == 154 + 18 + 14 + 2
    assert len(RANK_ROWS) == 14
    assert {r.l for r in RANK_ROWS if r.r_terms is None} == set(range(8, 15))


def test_alternative_decodability_pairing_breaks_dominance():
    # tying y8 to y11 leaves the outer bound below an achievable point
    literal = outer_max(EXAMPLE_CHANNEL, literal_pairing=True).rsum
    assert literal < EXAMPLE_RSUM["inner-strong"] - 1e-4


def test_alternative_decoded_row_index_is_harmless_here():
    lp = build_inner_strong_lp(EXAMPLE_CHANNEL, literal_d=True)
    assert maximize_weighted(lp, 1, 1).rsum == pytest.approx(EXAMPLE_RSUM["inner-strong"], abs=1e-9)


def test_variable_sets():
    assert len(STRONG_VARS) == 2 + 20 + 9
    assert set(STRONG_VARS) - {v for v in STRONG_VARS if v.startswith("r_")} <= set(GENERAL_VARS)
    assert len(GENERAL_VARS) == len(STRONG_VARS) + 6 + 9


def test_zero_channel_has_zero_regions():
    for bound in BOUNDS:
        pts = [maximize_weighted(build_bound_lp(bound, ZERO_CHANNEL), *w) for w in weight_grid(3)]
        assert all(p.R1 == 0 and p.R2 == 0 for p in pts)


def test_fix_zero_only_shrinks():
    base = build_inner_strong_lp(EXAMPLE_CHANNEL)
    pinned = fix_zero(base, ["s_pm1", "s_pm2"])
    assert len(pinned.constraints) == len(base.constraints) + 2
    assert maximize_weighted(pinned, 1, 1).rsum <= EXAMPLE_RSUM["inner-strong"] + 1e-12


def test_strict_butterfly_variant_never_larger():
    strict = build_baseline_lp("scheme6", EXAMPLE_CHANNEL, butterfly_strict=True)
    assert maximize_weighted(strict, 1, 1).rsum <= EXAMPLE_RSUM["scheme6"] + 1e-9


def test_unknown_baseline():
    with pytest.raises(ValueError):
        build_baseline_lp("scheme7", EXAMPLE_CHANNEL)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["uniform-independent", "dirichlet-joint"]))
def test_bounds_nest_on_random_channels(seed, mode):
    ch = sample_channel(np.random.default_rng(seed), mode)
    outer = outer_max(ch).rsum
    strong = inner_max(ch).rsum
    general = inner_max(ch, general=True).rsum
    assert general >= strong - 1e-9
    assert outer >= general - 1e-9
    assert outer == pytest.approx(outer_max(ch, solver=reference_solve).rsum, abs=1e-7)


def test_weighted_dominance_on_strong_relaying_channel():
    ch = sample_channel(11, constraint="strong-relaying")
    assert is_strong_relaying(ch)
    for w in weight_grid(8):
        assert outer_max(ch, w).objective >= inner_max(ch, weights=w).objective - 1e-9
