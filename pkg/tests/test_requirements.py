import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from repeater_alloc.errors import RequirementError
from repeater_alloc.requirements import (
    Bounds,
    ChainRequirements,
    HardwareConstants,
    PairRequirement,
    chain_fidelity,
    chain_rate,
    derive_bounds,
    derive_pair_bounds,
    load_requirements,
    max_link_length,
    max_repeaters,
    requirements_from_dict,
)

HW = HardwareConstants()

# reference values evaluated with mpmath at 50 digits
FIDELITY_REF = {5: 0.94196479810791769547, 6: 0.9327386007998121262, 7: 0.92363541945581463118}
RATE6_REF = {1: 3125.0, 100: 30.197170958534867862, 136: 1.0598973190696545255, 137: 0.87522515879647348597}
L_CONT_REF = 136.3065664123306859


@pytest.mark.parametrize("n,ref", sorted(FIDELITY_REF.items()))
def test_chain_fidelity_reference(n, ref):
    assert chain_fidelity(n, 0.99) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("length,ref", sorted(RATE6_REF.items()))
def test_chain_rate_reference(length, ref):
    assert chain_rate(6, length, HW) == pytest.approx(ref, rel=1e-12)


def test_single_link_fidelity_is_link_fidelity():
    assert chain_fidelity(0, 0.97) == pytest.approx(0.97, abs=1e-15)


@given(st.floats(0.26, 1.0), st.integers(0, 30))
def test_fidelity_matches_repeated_swapping(f, n):
    # swapping Werner states multiplies their p parameters
    p = (4 * f - 1) / 3
    acc = p
    for _ in range(n):
        acc *= p
    assert chain_fidelity(n, f) == pytest.approx((1 + 3 * acc) / 4, rel=1e-12)


@given(st.floats(0.3, 0.999), st.integers(0, 20))
def test_fidelity_nonincreasing_in_repeaters(f, n):
    assert chain_fidelity(n + 1, f) <= chain_fidelity(n, f)


@given(st.integers(0, 8), st.floats(1.0, 300.0), st.floats(1.0, 300.0))
def test_rate_decreasing_in_length(n, a, b):
    lo, hi = sorted((a, b))
    assert chain_rate(n, hi, HW) <= chain_rate(n, lo, HW)


def test_toy_model_bounds():
    b = derive_bounds(ChainRequirements(r_min_hz=1.0, f_min=0.93))
    assert (b.n_max, b.l_max) == (6, 136.0)
    assert b.l_max_continuous == pytest.approx(L_CONT_REF, abs=1e-5)


def test_max_repeaters_strict_comparison():
    # exactly hitting F_min does not count
    f6 = chain_fidelity(6, 0.99)
    assert max_repeaters(f6, 0.99) == 5
    assert max_repeaters(f6 - 1e-12, 0.99) == 6


def test_max_repeaters_ceiling():
    assert max_repeaters(0.3, 1.0, ceiling=64) == 64


def test_fidelity_target_unreachable():
    with pytest.raises(RequirementError):
        max_repeaters(0.995, 0.99)


def test_rate_target_unreachable():
    with pytest.raises(RequirementError):
        max_link_length(6, 1e9, HW)


@given(st.integers(0, 8), st.floats(0.01, 1000.0))
def test_max_link_length_is_tight(n, r_min):
    try:
        L = max_link_length(n, r_min, HW, integer_km=False)
    except RequirementError:
        assert not chain_rate(n, 0.1, HW) > r_min
        return
    assert chain_rate(n, L, HW) > r_min
    assert not chain_rate(n, L + 1e-5, HW) > r_min


@given(st.integers(0, 8), st.floats(0.01, 100.0))
def test_integer_link_length(n, r_min):
    try:
        L = max_link_length(n, r_min, HW)
    except RequirementError:
        return
    assert L == math.floor(L)
    assert chain_rate(n, L, HW) > r_min
    assert not chain_rate(n, L + 1, HW) > r_min


def test_invalid_inputs():
    with pytest.raises(RequirementError):
        ChainRequirements(f_min=1.2)
    with pytest.raises(RequirementError):
        ChainRequirements(k=0)
    with pytest.raises(RequirementError):
        HardwareConstants(m=0)
    with pytest.raises(RequirementError):
        Bounds(-1, 10)
    with pytest.raises(RequirementError):
        chain_rate(2, 0.0, HW)


def test_per_pair_override():
    req = ChainRequirements(per_pair={("a", "b"): PairRequirement(n_max=2, l_max=50.0)})
    pb = derive_pair_bounds(req, [("b", "a"), ("a", "c")])
    assert pb[("b", "a")] == Bounds(2, 50.0)
    assert (pb[("a", "c")].n_max, pb[("a", "c")].l_max) == (6, 136.0)


def test_per_pair_fidelity_override_rederives():
    req = ChainRequirements(per_pair={("a", "b"): PairRequirement(f_min=0.94)})
    pb = derive_pair_bounds(req, [("a", "b")])
    assert pb[("a", "b")].n_max == 5


def test_load_from_json(data_dir):
    req = load_requirements(data_dir / "toy_requirements.json")
    assert req.hardware == HardwareConstants(0.99, 1000, 200000, 22)
    assert (req.k, req.d) == (1, 1)


def test_json_schema_violation():
    with pytest.raises(RequirementError):
        requirements_from_dict({"k": "two"})
    with pytest.raises(RequirementError):
        requirements_from_dict({"hardware": {"f_lnk": 0.9}})
    with pytest.raises(RequirementError):
        load_requirements("{not json")


def test_json_per_pair_and_node():
    req = requirements_from_dict({
        "k": 2, "d": 3,
        "per_pair": [{"s": "b", "t": "a", "k": 1, "l_max_km": 80}],
        "per_node": {"r1": 5},
    })
    assert req.k_for(("a", "b")) == 1
    assert req.k_for(("a", "c")) == 2
    assert req.d_for("r1") == 5 and req.d_for("r2") == 3
    assert req.heterogeneous
