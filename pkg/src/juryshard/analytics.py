"""Exact-arithmetic failure probabilities for sharded committee consensus.

Everything here is a pure function computing with big-integer rationals; the
results are wrapped in :class:`~juryshard.logprob.LogProb` so callers get both
the log-domain value and the reduced fraction.  Two committee models are
covered:

* traditional sampling, where a committee of ``m`` is drawn without
  replacement from the whole population (cumulative hypergeometric tail), and
* the class-based jury model, where each jury seats one member per occupation
  and the adversary's best move is to pile its members into the fewest
  occupations that reach the vote threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .logprob import LogProb, log_of_fraction
from .params import (
    AdversaryAllocation,
    AllocationOverflowError,
    ParameterError,
    SystemParams,
)

__all__ = [
    "GuardError",
    "SECONDS_PER_YEAR",
    "hypergeom_tail",
    "optimal_allocation",
    "manipulation_prob",
    "ManipulationBound",
    "max_manipulation_prob",
    "jury_tail_prob",
    "any_jury_tail_prob",
    "liveness_threshold",
    "time_to_fail",
    "throughput",
    "ShardLimit",
    "max_shards_for_target",
]


class GuardError(RuntimeError):
    """Instance exceeds a tractability guard; the message carries the bound."""


# 1 year = 8760 hours
SECONDS_PER_YEAR = 8760 * 3600

_LN10 = math.log(10.0)


def hypergeom_tail(population: int, adversaries: int, committee: int, at_least: int) -> LogProb:
    """Pr[X >= at_least] adversaries in a committee drawn without replacement.

    Exact big-integer evaluation of
    ``sum_{X=at_least}^{committee} C(adversaries, X) * C(population - adversaries,
    committee - X) / C(population, committee)``;
    terms where X is infeasible contribute nothing.
    """
    if not 0 <= adversaries <= population:
        raise ParameterError(
            f"adversaries must be in [0, population={population}], got {adversaries}"
        )
    if not 0 < committee <= population:
        raise ParameterError(
            f"committee size must be in [1, population={population}], got {committee}"
        )
    if not 0 <= at_least <= committee:
        raise ParameterError(
            f"at_least must be in [0, committee={committee}], got {at_least}"
        )
    honest = population - adversaries
    numerator = 0
    for x in range(max(at_least, committee - honest), min(committee, adversaries) + 1):
        numerator += math.comb(adversaries, x) * math.comb(honest, committee - x)
    return LogProb.from_exact(Fraction(numerator, math.comb(population, committee)))


def optimal_allocation(
    adversaries: int,
    threshold: int,
    jury_size: int,
    shards: int,
    clamp: bool = False,
) -> AdversaryAllocation:
    """Adversary placement maximizing the chance of packing one jury.

    The total is split as evenly as possible over the first ``threshold``
    occupations (ceil for the first ``adversaries mod threshold`` slots, floor
    for the rest), which maximizes the product of those counts.  If the total
    exceeds ``threshold * shards`` the front occupations cannot hold it; by
    default that raises :class:`AllocationOverflowError` carrying the spill,
    with ``clamp=True`` the spill is parked in later occupations instead.
    """
    if not 1 <= threshold <= jury_size:
        raise ParameterError(
            f"threshold must be in [1, jury_size={jury_size}], got {threshold}"
        )
    if not 0 <= adversaries <= jury_size * shards:
        raise ParameterError(
            f"adversaries must be in [0, {jury_size * shards}], got {adversaries}"
        )
    if adversaries > threshold * shards:
        spill = adversaries - threshold * shards
        if not clamp:
            raise AllocationOverflowError(
                f"{adversaries} adversaries exceed the {threshold * shards} seats "
                f"of the front {threshold} occupations (spill {spill})",
                spill=spill,
            )
        cap = min(-(-adversaries // threshold), shards)
        counts = [shards] * threshold + [0] * (jury_size - threshold)
        i, left = threshold, spill
        while left > 0:
            counts[i] = min(cap, left)
            left -= counts[i]
            i += 1
        return AdversaryAllocation(counts)
    quot, rem = divmod(adversaries, threshold)
    counts = [quot + 1] * rem + [quot] * (threshold - rem) + [0] * (jury_size - threshold)
    return AdversaryAllocation(counts)


def manipulation_prob(
    alloc: AdversaryAllocation, shards: int, threshold: int
) -> LogProb:
    """Chance a designated jury gets an adversary in each of the front
    ``threshold`` occupations: the product of ``counts[i] / shards``."""
    if shards < 1:
        raise ParameterError(f"shards must be >= 1, got {shards}")
    if not 0 <= threshold <= len(alloc):
        raise ParameterError(
            f"threshold must be in [0, {len(alloc)}], got {threshold}"
        )
    alloc.check_feasible(shards)
    prob = Fraction(1)
    for count in alloc.counts[:threshold]:
        prob *= Fraction(count, shards)
    return LogProb.from_exact(prob)


@dataclass(frozen=True)
class ManipulationBound:
    """Worst-case manipulation probability plus its smooth upper bound.

    ``exact`` is the product over the integer-optimal allocation;
    ``approximation`` is the uniform-split bound ``(AD / (T*s))**T``, which the
    integer split can never exceed (and which passes 1 in the clamped
    overflow regime).
    """

    exact: LogProb
    approximation: Fraction
    allocation: AdversaryAllocation
    overflowed: bool = False

    @property
    def approximation_log10(self) -> float:
        return log_of_fraction(self.approximation) / _LN10


def max_manipulation_prob(params: SystemParams, clamp: bool = False) -> ManipulationBound:
    """Manipulation probability under the optimal allocation for ``params``.

    Overflow of the front occupations propagates unless ``clamp`` is set, in
    which case the clamped allocation saturates them and ``exact`` is 1.
    """
    alloc = optimal_allocation(
        params.adversaries, params.threshold, params.jury_size, params.shards,
        clamp=clamp,
    )
    overflowed = params.adversaries > params.threshold * params.shards
    exact = manipulation_prob(alloc, params.shards, params.threshold)
    if params.adversaries == 0:
        approx = Fraction(0)
    else:
        approx = Fraction(params.adversaries, params.threshold * params.shards) ** params.threshold
    return ManipulationBound(
        exact=exact, approximation=approx, allocation=alloc, overflowed=overflowed
    )


def jury_tail_prob(alloc: AdversaryAllocation, shards: int, at_least: int) -> LogProb:
    """Pr[a designated jury seats >= at_least adversaries], exactly.

    Each occupation lands an adversary in the designated jury independently
    with chance ``counts[i] / shards``; the count is Poisson-binomial and the
    tail comes from the standard dynamic program run on rationals.
    """
    if shards < 1:
        raise ParameterError(f"shards must be >= 1, got {shards}")
    if at_least < 0:
        raise ParameterError(f"at_least must be >= 0, got {at_least}")
    alloc.check_feasible(shards)
    if at_least == 0:
        return LogProb.one()
    if at_least > len(alloc):
        return LogProb.zero()
    dp = [Fraction(1)] + [Fraction(0)] * len(alloc)
    for count in alloc.counts:
        p = Fraction(count, shards)
        q = 1 - p
        for k in range(len(dp) - 1, 0, -1):
            dp[k] = dp[k] * q + dp[k - 1] * p
        dp[0] *= q
    return LogProb.from_exact(sum(dp[at_least:], Fraction(0)))


# State space cap for the any-jury dynamic program.
_ANY_JURY_STATE_GUARD = 500_000


def any_jury_tail_prob(alloc: AdversaryAllocation, shards: int, at_least: int) -> LogProb:
    """Pr[some jury seats >= at_least adversaries], exactly.

    Juries are exchangeable, so the joint count vector is tracked as a sorted
    multiset with entries capped at ``at_least`` (reaching the cap is
    absorbing).  Feasible for small instances only; the state-space guard
    rejects anything past roughly ``C(shards + at_least, at_least)`` states.
    """
    if shards < 1:
        raise ParameterError(f"shards must be >= 1, got {shards}")
    if at_least < 0:
        raise ParameterError(f"at_least must be >= 0, got {at_least}")
    alloc.check_feasible(shards)
    if at_least == 0:
        return LogProb.one()
    if at_least > len(alloc):
        return LogProb.zero()
    bound = math.comb(shards + at_least, at_least)
    if bound > _ANY_JURY_STATE_GUARD:
        raise GuardError(
            f"state space of ~{bound} sorted count multisets exceeds the "
            f"{_ANY_JURY_STATE_GUARD} guard"
        )
    cap = at_least
    states = {(0,) * shards: Fraction(1)}
    for count in alloc.counts:
        if count == 0:
            continue
        denom = math.comb(shards, count)
        nxt: dict = {}
        for state, prob in states.items():
            # group juries by current (capped) count
            classes: dict = {}
            for v in state:
                classes[v] = classes.get(v, 0) + 1
            values = sorted(classes)
            picks: dict = {}

            def place(idx: int, left: int, ways: int) -> None:
                if idx == len(values):
                    if left:
                        return
                    grown = []
                    for v in values:
                        hit = picks.get(v, 0)
                        grown += [min(v + 1, cap)] * hit + [v] * (classes[v] - hit)
                    key = tuple(sorted(grown))
                    nxt[key] = nxt.get(key, Fraction(0)) + prob * Fraction(ways, denom)
                    return
                v = values[idx]
                for take in range(min(classes[v], left) + 1):
                    picks[v] = take
                    place(idx + 1, left - take, ways * math.comb(classes[v], take))
                picks[v] = 0

            place(0, count, 1)
        states = nxt
    hit_mass = sum(
        (p for state, p in states.items() if state[-1] >= cap), Fraction(0)
    )
    return LogProb.from_exact(hit_mass)


def liveness_threshold(params: SystemParams) -> int:
    """Seats the adversary needs in one jury to halt every sentence."""
    return params.jury_size - params.threshold + 1


def time_to_fail(per_epoch: Union[LogProb, float, Fraction], epoch_seconds: float) -> float:
    """Expected years until the first failing epoch, at one trial per epoch.

    Returns ``math.inf`` when the per-epoch probability is zero (the system
    never fails) instead of dividing by zero.
    """
    if epoch_seconds <= 0:
        raise ParameterError(f"epoch_seconds must be > 0, got {epoch_seconds}")
    if isinstance(per_epoch, LogProb):
        log_p = per_epoch.log_value
    else:
        p = Fraction(per_epoch) if not isinstance(per_epoch, Fraction) else per_epoch
        if not 0 <= p <= 1:
            raise ParameterError(f"per-epoch probability out of [0, 1]: {per_epoch}")
        log_p = log_of_fraction(p)
    if math.isinf(log_p):
        return math.inf
    try:
        return math.exp(math.log(epoch_seconds) - math.log(SECONDS_PER_YEAR) - log_p)
    except OverflowError:
        return math.inf


def throughput(shards: int, block_txs: int, interval_seconds: float) -> float:
    """Transactions per hour with one block per jury per interval."""
    if interval_seconds <= 0:
        raise ParameterError(f"interval must be > 0, got {interval_seconds}")
    if shards < 0 or block_txs < 0:
        raise ParameterError("shards and block_txs must be >= 0")
    return shards * block_txs * 3600.0 / interval_seconds


@dataclass(frozen=True)
class ShardLimit:
    """Result of the largest-safe-shard-count search.

    ``shards`` is the largest count meeting the target (None when none does);
    ``prob`` / ``next_prob`` are the failure probabilities at that count and
    one past it.  ``unbounded`` flags searches where safety never binds (for
    instance with zero adversaries), in which case ``shards`` is just the
    largest count that still fills every jury.
    """

    shards: Optional[int]
    prob: Optional[LogProb]
    next_prob: Optional[LogProb]
    achievable: bool
    unbounded: bool


def _exact_target(target) -> Fraction:
    # floats are read back through their shortest decimal repr so that a
    # literal like 1e-6 means exactly 10**-6
    if isinstance(target, float):
        return Fraction(str(target))
    return Fraction(target)


def _majority_at_least(jury_size: int, rounding: str) -> int:
    if rounding == "ceil":
        return (jury_size + 1) // 2
    if rounding == "floor":
        return jury_size // 2
    raise ParameterError(f"majority rounding must be 'ceil' or 'floor', got {rounding!r}")


def max_shards_for_target(
    total_nodes: int,
    adversaries: int,
    target,
    model: str = "class",
    threshold_fraction: float = 0.7,
    majority_rounding: str = "ceil",
) -> ShardLimit:
    """Largest shard count keeping per-jury failure within ``target``.

    The committee size at ``s`` shards is ``total_nodes // s`` (remainder
    nodes dropped).  ``model="traditional"`` scores a shard count by the
    hypergeometric majority tail; ``model="class"`` by the exact worst-case
    manipulation probability with vote threshold ``ceil(threshold_fraction *
    jury_size)``.  Every feasible count is scanned, so floor-induced
    non-monotonicity cannot produce a wrong answer.
    """
    if total_nodes < 1:
        raise ParameterError(f"total_nodes must be >= 1, got {total_nodes}")
    if not 0 <= adversaries <= total_nodes:
        raise ParameterError(
            f"adversaries must be in [0, {total_nodes}], got {adversaries}"
        )
    if model not in ("traditional", "class"):
        raise ParameterError(f"model must be 'traditional' or 'class', got {model!r}")
    goal = _exact_target(target)
    if not 0 < goal < 1:
        raise ParameterError(f"target must be in (0, 1), got {target}")

    by_jury_size: dict = {}

    def failure_at(s: int) -> LogProb:
        jury_size = total_nodes // s
        if model == "traditional":
            # depends on the committee size only; memoize across s
            cached = by_jury_size.get(jury_size)
            if cached is None:
                at_least = max(_majority_at_least(jury_size, majority_rounding), 0)
                cached = hypergeom_tail(total_nodes, adversaries, jury_size, at_least)
                by_jury_size[jury_size] = cached
            return cached
        threshold = int(math.ceil(threshold_fraction * jury_size))
        threshold = min(max(threshold, 1), jury_size)
        params = SystemParams(
            shards=s,
            jury_size=jury_size,
            threshold=threshold,
            adversaries=min(adversaries, jury_size * s),
        )
        return max_manipulation_prob(params, clamp=True).exact

    best = None
    probs: dict = {}
    for s in range(1, total_nodes + 1):
        p = failure_at(s)
        probs[s] = p
        if p.exact is not None and p.exact <= goal:
            best = s
    if best is None:
        return ShardLimit(
            shards=None, prob=None, next_prob=None, achievable=False, unbounded=False,
        )
    unbounded = all(p.exact <= goal for p in probs.values())
    next_prob = probs.get(best + 1)
    return ShardLimit(
        shards=best,
        prob=probs[best],
        next_prob=next_prob,
        achievable=True,
        unbounded=unbounded,
    )
