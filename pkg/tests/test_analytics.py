"""Oracle and property tests for the failure-probability analytics.

The numeric oracles here were computed independently (hand enumeration or a
separate exact script) before the implementation was written, then frozen.
"""

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from juryshard import (
    AdversaryAllocation,
    AllocationOverflowError,
    GuardError,
    LogProb,
    ParameterError,
    SystemParams,
    any_jury_tail_prob,
    hypergeom_tail,
    jury_tail_prob,
    liveness_threshold,
    manipulation_prob,
    max_manipulation_prob,
    max_shards_for_target,
    optimal_allocation,
    throughput,
    time_to_fail,
)

# ---------------------------------------------------------------------------
# hypergeometric tail
# ---------------------------------------------------------------------------


def test_hypergeom_tail_hand_enumerable():
    # C(5,4)*C(5,0)/C(10,4) = 5/210
    assert hypergeom_tail(10, 5, 4, 4).exact == Fraction(1, 42)


def test_hypergeom_tail_half_population_is_exactly_half():
    # odd committee from a half-adversarial population: majority tail is 1/2
    # by the X <-> m - X symmetry
    assert hypergeom_tail(2000, 1000, 285, 143).exact == Fraction(1, 2)


def test_hypergeom_tail_trivial_bounds():
    assert hypergeom_tail(50, 10, 7, 0).exact == 1
    assert hypergeom_tail(50, 10, 7, 7).exact == Fraction(
        math.comb(10, 7), math.comb(50, 7)
    )
    # cannot seat more adversaries than exist
    assert hypergeom_tail(50, 3, 7, 4).exact == 0


def test_hypergeom_tail_validates_arguments():
    with pytest.raises(ParameterError):
        hypergeom_tail(10, 11, 4, 2)
    with pytest.raises(ParameterError):
        hypergeom_tail(10, 5, 0, 0)
    with pytest.raises(ParameterError):
        hypergeom_tail(10, 5, 4, 5)


@settings(max_examples=150)
@given(
    population=st.integers(min_value=1, max_value=60),
    data=st.data(),
)
def test_hypergeom_tail_complement_identity(population, data):
    adversaries = data.draw(st.integers(min_value=0, max_value=population))
    committee = data.draw(st.integers(min_value=1, max_value=population))
    at_least = data.draw(st.integers(min_value=0, max_value=committee))
    tail = hypergeom_tail(population, adversaries, committee, at_least).exact
    # Pr[X <= at_least - 1] equals the honest-count tail at committee-at_least+1
    complement = hypergeom_tail(
        population, population - adversaries, committee, committee - at_least + 1
    ).exact if at_least >= 1 else Fraction(0)
    assert tail + complement == 1 if at_least >= 1 else tail == 1


@settings(max_examples=100)
@given(
    population=st.integers(min_value=2, max_value=40),
    data=st.data(),
)
def test_hypergeom_tail_monotone_in_threshold(population, data):
    adversaries = data.draw(st.integers(min_value=0, max_value=population))
    committee = data.draw(st.integers(min_value=1, max_value=population))
    probs = [
        hypergeom_tail(population, adversaries, committee, x).exact
        for x in range(committee + 1)
    ]
    assert all(a >= b for a, b in zip(probs, probs[1:]))


# ---------------------------------------------------------------------------
# adversary allocation
# ---------------------------------------------------------------------------


def test_optimal_allocation_reference_case():
    alloc = optimal_allocation(10, 4, 5, 10)
    assert alloc.counts == (3, 3, 2, 2, 0)


def test_optimal_allocation_even_split_and_empty():
    assert optimal_allocation(12, 4, 6, 10).counts == (3, 3, 3, 3, 0, 0)
    assert optimal_allocation(0, 4, 5, 10).counts == (0, 0, 0, 0, 0)


def test_optimal_allocation_overflow_raises_with_spill():
    with pytest.raises(AllocationOverflowError) as err:
        optimal_allocation(25, 2, 5, 10)
    assert err.value.spill == 5


def test_optimal_allocation_clamped_overflow():
    alloc = optimal_allocation(25, 2, 5, 10, clamp=True)
    assert alloc.counts == (10, 10, 5, 0, 0)
    assert alloc.total == 25
    alloc.check_feasible(10)


def test_optimal_allocation_validates():
    with pytest.raises(ParameterError):
        optimal_allocation(5, 0, 5, 10)
    with pytest.raises(ParameterError):
        optimal_allocation(51, 5, 5, 10)  # more than jury_size * shards


@settings(max_examples=200)
@given(
    shards=st.integers(min_value=1, max_value=12),
    jury_size=st.integers(min_value=1, max_value=10),
    data=st.data(),
)
def test_optimal_allocation_shape_invariants(shards, jury_size, data):
    threshold = data.draw(st.integers(min_value=1, max_value=jury_size))
    adversaries = data.draw(st.integers(min_value=0, max_value=threshold * shards))
    alloc = optimal_allocation(adversaries, threshold, jury_size, shards)
    assert alloc.total == adversaries
    assert all(c == 0 for c in alloc.counts[threshold:])
    front = alloc.counts[:threshold]
    assert max(front) - min(front) <= 1
    assert sorted(front, reverse=True) == list(front)
    alloc.check_feasible(shards)


def _brute_best_product(adversaries, threshold, shards):
    """Exhaustive maximum of prod(c_i/s) over placements into `threshold` slots."""
    best = Fraction(0)
    for cut in itertools.combinations(
        range(adversaries + threshold - 1), threshold - 1
    ):
        counts, prev = [], -1
        for c in cut:
            counts.append(c - prev - 1)
            prev = c
        counts.append(adversaries + threshold - 2 - prev)
        if any(c > shards for c in counts):
            continue
        prod = Fraction(1)
        for c in counts:
            prod *= Fraction(c, shards)
        best = max(best, prod)
    return best


@settings(max_examples=60, deadline=None)
@given(
    shards=st.integers(min_value=1, max_value=5),
    threshold=st.integers(min_value=1, max_value=4),
    data=st.data(),
)
def test_optimal_allocation_beats_every_composition(shards, threshold, data):
    adversaries = data.draw(st.integers(min_value=0, max_value=threshold * shards))
    alloc = optimal_allocation(adversaries, threshold, 6, shards)
    got = manipulation_prob(alloc, shards, threshold).exact
    assert got == _brute_best_product(adversaries, threshold, shards)


# ---------------------------------------------------------------------------
# manipulation probability
# ---------------------------------------------------------------------------


def test_manipulation_prob_reference_case():
    alloc = AdversaryAllocation((3, 3, 2, 2, 0))
    assert manipulation_prob(alloc, 10, 4).exact == Fraction(9, 2500)


def test_manipulation_prob_zero_slot_in_window():
    alloc = AdversaryAllocation((3, 0, 2, 2, 0))
    assert manipulation_prob(alloc, 10, 4).is_zero


def test_manipulation_prob_rejects_infeasible_counts():
    with pytest.raises(ParameterError):
        manipulation_prob(AdversaryAllocation((11, 2)), 10, 2)


def test_max_manipulation_headline_configuration():
    # 2000 nodes, 10 juries of 200, threshold 140, half the network adversarial
    params = SystemParams.from_population(
        2000, shards=10, threshold=140, adversaries=1000
    )
    bound = max_manipulation_prob(params)
    assert bound.allocation.counts[:140] == (8,) * 20 + (7,) * 120
    assert bound.exact.exact == Fraction(8, 10) ** 20 * Fraction(7, 10) ** 120
    assert bound.exact.log10 == pytest.approx(-20.526435458450294, rel=1e-12)
    assert bound.exact.exact < Fraction(1, 10**20)
    assert not bound.overflowed


def test_max_manipulation_all_occupations_special_case():
    # threshold = jury size and adversaries = half the seats: exactly (1/2)^m
    for m in (5, 10, 20):
        params = SystemParams(
            shards=10, jury_size=m, threshold=m, adversaries=10 * m // 2
        )
        bound = max_manipulation_prob(params)
        assert bound.exact.exact == Fraction(1, 2**m)


def test_max_manipulation_approximation_never_below_exact():
    params = SystemParams(shards=10, jury_size=5, threshold=4, adversaries=10)
    bound = max_manipulation_prob(params)
    assert bound.approximation == Fraction(10, 40) ** 4
    assert bound.approximation >= bound.exact.exact


def test_max_manipulation_clamped_overflow_saturates():
    params = SystemParams(shards=3, jury_size=5, threshold=3, adversaries=12)
    with pytest.raises(AllocationOverflowError):
        max_manipulation_prob(params)
    bound = max_manipulation_prob(params, clamp=True)
    assert bound.overflowed
    assert bound.exact.exact == 1
    assert bound.approximation > 1  # smooth bound exceeds 1 out here


@settings(max_examples=150)
@given(
    shards=st.integers(min_value=1, max_value=15),
    jury_size=st.integers(min_value=1, max_value=12),
    data=st.data(),
)
def test_max_manipulation_approx_bound_property(shards, jury_size, data):
    threshold = data.draw(
        st.integers(min_value=(jury_size + 1) // 2, max_value=jury_size)
    )
    adversaries = data.draw(st.integers(min_value=0, max_value=threshold * shards))
    params = SystemParams(
        shards=shards, jury_size=jury_size, threshold=threshold,
        adversaries=adversaries,
    )
    bound = max_manipulation_prob(params)
    assert bound.exact.exact <= bound.approximation
    assert 0 <= bound.exact.exact <= 1


# ---------------------------------------------------------------------------
# designated-jury and any-jury tails
# ---------------------------------------------------------------------------


def _subset_tail(counts, shards, at_least):
    """Independent route: explicit sum over hit-subsets of the occupations."""
    probs = [Fraction(c, shards) for c in counts]
    total = Fraction(0)
    for hits in itertools.product((0, 1), repeat=len(probs)):
        if sum(hits) < at_least:
            continue
        term = Fraction(1)
        for hit, p in zip(hits, probs):
            term *= p if hit else 1 - p
        total += term
    return total


def test_jury_tail_reference_case():
    alloc = AdversaryAllocation((3, 3, 2, 2, 0))
    assert jury_tail_prob(alloc, 10, 4).exact == Fraction(9, 2500)
    assert jury_tail_prob(alloc, 10, 0).exact == 1
    assert jury_tail_prob(alloc, 10, 6).is_zero


def test_jury_tail_single_occupation():
    assert jury_tail_prob(AdversaryAllocation((1, 1)), 2, 1).exact == Fraction(3, 4)


@settings(max_examples=100, deadline=None)
@given(
    shards=st.integers(min_value=1, max_value=6),
    data=st.data(),
)
def test_jury_tail_matches_subset_enumeration(shards, data):
    occupations = data.draw(st.integers(min_value=1, max_value=6))
    counts = data.draw(
        st.lists(
            st.integers(min_value=0, max_value=shards),
            min_size=occupations, max_size=occupations,
        )
    )
    at_least = data.draw(st.integers(min_value=0, max_value=occupations + 1))
    alloc = AdversaryAllocation(counts)
    got = jury_tail_prob(alloc, shards, at_least)
    assert got.exact == _subset_tail(counts, shards, at_least)


def _brute_any_jury(counts, shards, at_least):
    """Enumerate every equally likely combination-placement of all adversaries."""
    choice_sets = [
        list(itertools.combinations(range(shards), c)) for c in counts
    ]
    hits = 0
    total = 0
    for combo in itertools.product(*choice_sets):
        total += 1
        per_jury = [0] * shards
        for juries in combo:
            for j in juries:
                per_jury[j] += 1
        if max(per_jury) >= at_least:
            hits += 1
    return Fraction(hits, total)


def test_any_jury_tail_reference_cases():
    assert any_jury_tail_prob(AdversaryAllocation((1, 1)), 2, 2).exact == Fraction(1, 2)
    assert any_jury_tail_prob(AdversaryAllocation((1, 1, 0)), 3, 2).exact == Fraction(1, 3)
    assert any_jury_tail_prob(
        AdversaryAllocation((3, 3, 2, 2, 0)), 10, 4
    ).exact == Fraction(727, 20250)


@settings(max_examples=40, deadline=None)
@given(
    shards=st.integers(min_value=1, max_value=4),
    data=st.data(),
)
def test_any_jury_tail_matches_brute_force(shards, data):
    occupations = data.draw(st.integers(min_value=1, max_value=3))
    counts = data.draw(
        st.lists(
            st.integers(min_value=0, max_value=min(shards, 2)),
            min_size=occupations, max_size=occupations,
        )
    )
    at_least = data.draw(st.integers(min_value=1, max_value=occupations))
    alloc = AdversaryAllocation(counts)
    got = any_jury_tail_prob(alloc, shards, at_least)
    assert got.exact == _brute_any_jury(counts, shards, at_least)


@settings(max_examples=50, deadline=None)
@given(
    shards=st.integers(min_value=1, max_value=5),
    data=st.data(),
)
def test_any_jury_bracketed_by_designated_and_union_bound(shards, data):
    occupations = data.draw(st.integers(min_value=1, max_value=4))
    counts = data.draw(
        st.lists(
            st.integers(min_value=0, max_value=shards),
            min_size=occupations, max_size=occupations,
        )
    )
    at_least = data.draw(st.integers(min_value=1, max_value=occupations))
    alloc = AdversaryAllocation(counts)
    single = jury_tail_prob(alloc, shards, at_least).exact
    any_jury = any_jury_tail_prob(alloc, shards, at_least).exact
    assert single <= any_jury <= min(1, shards * single)


def test_any_jury_tail_guard_trips():
    with pytest.raises(GuardError):
        any_jury_tail_prob(AdversaryAllocation((50,) * 100), 100, 70)


# ---------------------------------------------------------------------------
# liveness, time, throughput
# ---------------------------------------------------------------------------


def test_liveness_threshold():
    params = SystemParams(shards=10, jury_size=5, threshold=4, adversaries=0)
    assert liveness_threshold(params) == 2
    full = SystemParams(shards=10, jury_size=7, threshold=7, adversaries=0)
    assert liveness_threshold(full) == 1


def test_time_to_fail_reference_values():
    years = time_to_fail(1e-6, 1800.0)
    assert 57 < years < 58
    assert years == pytest.approx(1800 / (1e-6 * 8760 * 3600), rel=1e-12)


def test_time_to_fail_headline_exceeds_1e15_years():
    headline = LogProb.from_exact(Fraction(8, 10) ** 20 * Fraction(7, 10) ** 120)
    assert time_to_fail(headline, 1800.0) > 1e15


def test_time_to_fail_zero_probability_is_infinite():
    assert time_to_fail(0.0, 1800.0) == math.inf
    assert time_to_fail(LogProb.zero(), 1800.0) == math.inf


def test_time_to_fail_accepts_logprob_and_float_consistently():
    p = 3.5e-9
    assert time_to_fail(LogProb.from_float(p), 600.0) == pytest.approx(
        time_to_fail(p, 600.0), rel=1e-9
    )


def test_time_to_fail_validates():
    with pytest.raises(ParameterError):
        time_to_fail(0.5, 0.0)
    with pytest.raises(ParameterError):
        time_to_fail(1.5, 60.0)


def test_throughput_reference_values():
    assert throughput(20, 1000, 3600.0) == 20000.0
    assert throughput(3, 2000, 3600.0) == 6000.0
    assert throughput(0, 1000, 3600.0) == 0.0
    with pytest.raises(ParameterError):
        throughput(3, 1000, 0.0)


# ---------------------------------------------------------------------------
# largest safe shard count
# ---------------------------------------------------------------------------


def test_max_shards_class_model_reference():
    result = max_shards_for_target(2000, 1000, 1e-6, model="class")
    assert result.shards == 32
    assert result.achievable and not result.unbounded
    assert result.prob.exact <= Fraction(1, 10**6) < result.next_prob.exact
    assert result.prob.to_float() == pytest.approx(2.869220177814031e-07, rel=1e-9)


def test_max_shards_traditional_model_reference():
    result = max_shards_for_target(2000, 666, 1e-6, model="traditional")
    assert result.shards == 11
    assert result.prob.exact <= Fraction(1, 10**6) < result.next_prob.exact
    assert result.prob.to_float() == pytest.approx(5.502602171369709e-07, rel=1e-9)


def test_max_shards_no_adversaries_is_unbounded():
    result = max_shards_for_target(100, 0, 1e-6, model="class")
    assert result.unbounded and result.shards == 100
    assert result.prob.is_zero and result.next_prob is None


def test_max_shards_unreachable_target():
    result = max_shards_for_target(10, 5, Fraction(1, 10**30), model="traditional")
    assert not result.achievable
    assert result.shards is None and result.prob is None


def test_max_shards_target_parsing_is_decimal_exact():
    # a float literal like 1e-6 must be treated as exactly 10**-6
    a = max_shards_for_target(200, 66, 1e-6, model="traditional")
    b = max_shards_for_target(200, 66, Fraction(1, 10**6), model="traditional")
    assert a == b


def test_max_shards_validates():
    with pytest.raises(ParameterError):
        max_shards_for_target(100, 101, 1e-6)
    with pytest.raises(ParameterError):
        max_shards_for_target(100, 10, 0.0)
    with pytest.raises(ParameterError):
        max_shards_for_target(100, 10, 1e-6, model="quantum")
