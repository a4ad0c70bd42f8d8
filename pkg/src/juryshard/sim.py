"""Seeded Monte-Carlo epoch simulator and exhaustive small-instance oracle.

An epoch assigns, for every occupation independently, its ``shards`` members
(some adversarial) to the ``shards`` juries by a uniform seeded permutation.
A jury with at least ``threshold`` adversaries suffers a safety failure (the
adversary can forge a sentence); one with at least ``jury_size - threshold +
1`` suffers a liveness failure (the adversary can block any sentence until
the next reshuffle).

Reproducibility contract:

* trial ``t`` of a Monte-Carlo run uses the 64-bit seed
  ``trial_seed(base_seed, t)``, a fixed hash-split via numpy's
  ``SeedSequence((base_seed, t))`` — parallel and serial execution therefore
  aggregate identical outcomes;
* ``long_run`` draws epochs in fixed-size chunks of ``LONG_RUN_CHUNK``; chunk
  ``c`` is generated by PCG64 seeded with ``SeedSequence((base_seed, c))``, so
  runs with the same base seed share a common prefix regardless of length.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from .analytics import GuardError, jury_tail_prob, optimal_allocation
from .params import AdversaryAllocation, ParameterError, SystemParams

__all__ = [
    "FrontLoaded",
    "UniformSpread",
    "CustomAllocation",
    "strategy_from_config",
    "EpochOutcome",
    "TrialReport",
    "ExhaustiveResult",
    "LongRunStats",
    "LONG_RUN_CHUNK",
    "EXHAUSTIVE_GUARD",
    "trial_seed",
    "assign_epoch",
    "outcome_from_assignment",
    "monte_carlo",
    "exhaustive",
    "long_run",
]


# ---------------------------------------------------------------------------
# adversary strategies
# ---------------------------------------------------------------------------


class FrontLoaded:
    """Packs the adversary budget into the fewest occupations that can carry
    a vote: the integer-optimal split over the front ``threshold`` slots."""

    def allocation(self, params: SystemParams) -> AdversaryAllocation:
        return optimal_allocation(
            params.adversaries, params.threshold, params.jury_size, params.shards
        )

    def __repr__(self):
        return "FrontLoaded()"


class UniformSpread:
    """Spreads the adversary budget as evenly as possible over all
    occupations; the natural "no strategy" baseline."""

    def allocation(self, params: SystemParams) -> AdversaryAllocation:
        quot, rem = divmod(params.adversaries, params.jury_size)
        counts = [quot + 1] * rem + [quot] * (params.jury_size - rem)
        return AdversaryAllocation(counts)

    def __repr__(self):
        return "UniformSpread()"


class CustomAllocation:
    """Plays a caller-supplied allocation verbatim."""

    def __init__(self, allocation: AdversaryAllocation):
        self.fixed = (
            allocation
            if isinstance(allocation, AdversaryAllocation)
            else AdversaryAllocation(allocation)
        )

    def allocation(self, params: SystemParams) -> AdversaryAllocation:
        if len(self.fixed) != params.jury_size:
            raise ParameterError(
                f"allocation covers {len(self.fixed)} occupations, "
                f"parameters have {params.jury_size}"
            )
        if self.fixed.total != params.adversaries:
            raise ParameterError(
                f"allocation places {self.fixed.total} adversaries, "
                f"parameters declare {params.adversaries}"
            )
        return self.fixed

    def __repr__(self):
        return f"CustomAllocation({list(self.fixed.counts)})"


def strategy_from_config(kind: str, counts: Optional[Sequence[int]] = None):
    """Build a strategy from its config spelling (used by run configs)."""
    if kind == "front_loaded":
        return FrontLoaded()
    if kind == "uniform":
        return UniformSpread()
    if kind == "custom":
        if counts is None:
            raise ParameterError("custom strategy requires explicit counts")
        return CustomAllocation(AdversaryAllocation(counts))
    raise ParameterError(
        f"unknown strategy kind {kind!r}; expected front_loaded, uniform, or custom"
    )


# ---------------------------------------------------------------------------
# epoch outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EpochOutcome:
    """One epoch's jury assignment, reduced to per-jury adversary counts."""

    epoch: int
    per_jury_adversaries: Tuple[int, ...]
    safety_failures: Tuple[int, ...]
    liveness_failures: Tuple[int, ...]
    seed: int

    def to_line(self) -> str:
        record = {
            "epoch": self.epoch,
            "seed": self.seed,
            "per_jury_adversaries": list(self.per_jury_adversaries),
            "safety_failures": list(self.safety_failures),
            "liveness_failures": list(self.liveness_failures),
        }
        return json.dumps(record, separators=(",", ":"))


def outcome_from_assignment(
    assignment: np.ndarray, params: SystemParams, epoch: int = 0, seed: int = 0
) -> EpochOutcome:
    """Tally a fixed occupation-by-jury 0/1 assignment into an outcome."""
    matrix = np.asarray(assignment)
    if matrix.shape != (params.jury_size, params.shards):
        raise ParameterError(
            f"assignment shape {matrix.shape} does not match "
            f"(jury_size={params.jury_size}, shards={params.shards})"
        )
    counts = matrix.sum(axis=0)
    safety = tuple(int(j) for j in np.flatnonzero(counts >= params.threshold))
    liveness = tuple(int(j) for j in np.flatnonzero(counts >= params.halt_threshold))
    return EpochOutcome(
        epoch=epoch,
        per_jury_adversaries=tuple(int(c) for c in counts),
        safety_failures=safety,
        liveness_failures=liveness,
        seed=seed,
    )


def trial_seed(base_seed: int, trial: int) -> int:
    """The fixed per-trial splitting rule: a 64-bit word hashed from
    (base_seed, trial) by numpy's SeedSequence entropy mixer."""
    ss = np.random.SeedSequence((base_seed, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _allocation_pattern(alloc: AdversaryAllocation, shards: int) -> np.ndarray:
    base = np.zeros((len(alloc), shards), dtype=np.int8)
    for row, count in enumerate(alloc.counts):
        base[row, :count] = 1
    return base


def assign_epoch(params: SystemParams, strategy, seed: int, epoch: int = 0) -> EpochOutcome:
    """Run one epoch: permute each occupation's members over the juries."""
    alloc = strategy.allocation(params)
    alloc.check_feasible(params.shards)
    if len(alloc) != params.jury_size:
        raise ParameterError(
            f"strategy produced {len(alloc)} occupations for jury size {params.jury_size}"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    assignment = rng.permuted(_allocation_pattern(alloc, params.shards), axis=1)
    return outcome_from_assignment(assignment, params, epoch=epoch, seed=seed)


# ---------------------------------------------------------------------------
# Monte-Carlo trials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialReport:
    """Aggregated failure rates with Wilson 95% intervals.

    "perjury" rates concern the designated jury (index 0, representative by
    exchangeability); "system" rates count epochs where any jury failed.
    ``analytic_perjury_log10`` is the exact designated-jury safety tail from
    ``analytics`` for comparison (-inf when the probability is zero).
    """

    trials: int
    perjury_rate: float
    perjury_lo: float
    perjury_hi: float
    system_rate: float
    system_lo: float
    system_hi: float
    liveness_perjury_rate: float
    liveness_perjury_lo: float
    liveness_perjury_hi: float
    liveness_system_rate: float
    liveness_system_lo: float
    liveness_system_hi: float
    analytic_perjury_log10: float

    CSV_COLUMNS = (
        "trials",
        "perjury_rate",
        "perjury_lo",
        "perjury_hi",
        "system_rate",
        "system_lo",
        "system_hi",
        "analytic_perjury_log10",
    )

    def to_dict(self) -> dict:
        def jsonable(x):
            return None if isinstance(x, float) and math.isinf(x) else x

        record = {"trials": self.trials}
        for name in (
            "perjury_rate", "perjury_lo", "perjury_hi",
            "system_rate", "system_lo", "system_hi",
            "liveness_perjury_rate", "liveness_perjury_lo", "liveness_perjury_hi",
            "liveness_system_rate", "liveness_system_lo", "liveness_system_hi",
            "analytic_perjury_log10",
        ):
            record[name] = jsonable(getattr(self, name))
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        values = [str(self.trials)] + [
            format_float(getattr(self, name)) for name in self.CSV_COLUMNS[1:]
        ]
        return ",".join(self.CSV_COLUMNS) + "\n" + ",".join(values) + "\n"


def format_float(value: float) -> str:
    """Stable scientific formatting, 12 significant digits; infinities kept
    as bare ``inf`` / ``-inf`` tokens."""
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return f"{value:.11e}"


def _wilson(successes: int, trials: int) -> Tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(
        confidence_level=0.95, method="wilson"
    )
    return float(ci.low), float(ci.high)


def _count_events(params, strategy, base_seed, start, stop) -> np.ndarray:
    counts = np.zeros(4, dtype=np.int64)
    for t in range(start, stop):
        outcome = assign_epoch(params, strategy, trial_seed(base_seed, t), epoch=t)
        counts += (
            0 in outcome.safety_failures,
            len(outcome.safety_failures) > 0,
            0 in outcome.liveness_failures,
            len(outcome.liveness_failures) > 0,
        )
    return counts


def monte_carlo(
    params: SystemParams,
    strategy,
    trials: int,
    base_seed: int,
    workers: int = 1,
    outcome_log=None,
) -> TrialReport:
    """Estimate failure rates over independent seeded epochs.

    ``workers`` > 1 splits the trial range over threads; the result is
    identical to a serial run because every trial owns a derived seed and the
    event counts commute.  ``outcome_log`` (a writable text stream) records
    every epoch outcome as one JSON line; it requires a serial run so lines
    appear in trial order.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    alloc = strategy.allocation(params)
    analytic = jury_tail_prob(alloc, params.shards, params.threshold)

    if outcome_log is not None:
        if workers > 1:
            raise ParameterError("outcome_log streaming requires workers=1")
        counts = np.zeros(4, dtype=np.int64)
        for t in range(trials):
            outcome = assign_epoch(params, strategy, trial_seed(base_seed, t), epoch=t)
            outcome_log.write(outcome.to_line() + "\n")
            counts += (
                0 in outcome.safety_failures,
                len(outcome.safety_failures) > 0,
                0 in outcome.liveness_failures,
                len(outcome.liveness_failures) > 0,
            )
    elif workers == 1:
        counts = _count_events(params, strategy, base_seed, 0, trials)
    else:
        workers = min(workers, trials)
        step = -(-trials // workers)
        ranges = [(w * step, min((w + 1) * step, trials)) for w in range(workers)]
        ranges = [(a, b) for a, b in ranges if a < b]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda r: _count_events(params, strategy, base_seed, r[0], r[1]), ranges
            )
            counts = sum(parts, np.zeros(4, dtype=np.int64))

    pj_s, sys_s, pj_l, sys_l = (int(c) for c in counts)
    pj_ci, sys_ci = _wilson(pj_s, trials), _wilson(sys_s, trials)
    pjl_ci, sysl_ci = _wilson(pj_l, trials), _wilson(sys_l, trials)
    return TrialReport(
        trials=trials,
        perjury_rate=pj_s / trials,
        perjury_lo=pj_ci[0],
        perjury_hi=pj_ci[1],
        system_rate=sys_s / trials,
        system_lo=sys_ci[0],
        system_hi=sys_ci[1],
        liveness_perjury_rate=pj_l / trials,
        liveness_perjury_lo=pjl_ci[0],
        liveness_perjury_hi=pjl_ci[1],
        liveness_system_rate=sys_l / trials,
        liveness_system_lo=sysl_ci[0],
        liveness_system_hi=sysl_ci[1],
        analytic_perjury_log10=analytic.log10,
    )


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------

EXHAUSTIVE_GUARD = 10**7


@dataclass(frozen=True)
class ExhaustiveResult:
    """Exact event probabilities from full enumeration of placements."""

    designated_safety: Fraction
    any_safety: Fraction
    designated_liveness: Fraction
    any_liveness: Fraction


def exhaustive(params: SystemParams, allocation: AdversaryAllocation) -> ExhaustiveResult:
    """Enumerate every equally likely placement of the allocation.

    Guarded by ``(shards!)^jury_size <= 10**7`` — the size of the full
    per-occupation permutation space — although the walk itself visits the
    smaller equivalent space of per-occupation jury subsets.
    """
    allocation.check_feasible(params.shards)
    if len(allocation) != params.jury_size:
        raise ParameterError(
            f"allocation covers {len(allocation)} occupations, "
            f"parameters have {params.jury_size}"
        )
    bound = math.factorial(params.shards) ** params.jury_size
    if bound > EXHAUSTIVE_GUARD:
        raise GuardError(
            f"permutation space (shards!)^jury_size = {bound} exceeds the "
            f"{EXHAUSTIVE_GUARD} guard"
        )
    shards = params.shards
    choice_sets = [
        list(itertools.combinations(range(shards), count))
        for count in allocation.counts
    ]
    total = 0
    hits = [0, 0, 0, 0]  # designated/any safety, designated/any liveness
    halt_at = params.halt_threshold
    for combo in itertools.product(*choice_sets):
        total += 1
        per_jury = [0] * shards
        for juries in combo:
            for j in juries:
                per_jury[j] += 1
        top = max(per_jury)
        hits[0] += per_jury[0] >= params.threshold
        hits[1] += top >= params.threshold
        hits[2] += per_jury[0] >= halt_at
        hits[3] += top >= halt_at
    return ExhaustiveResult(
        designated_safety=Fraction(hits[0], total),
        any_safety=Fraction(hits[1], total),
        designated_liveness=Fraction(hits[2], total),
        any_liveness=Fraction(hits[3], total),
    )


# ---------------------------------------------------------------------------
# long-run first-failure statistics
# ---------------------------------------------------------------------------

LONG_RUN_CHUNK = 4096


@dataclass(frozen=True)
class LongRunStats:
    """First safety-failure epochs over consecutive restarting runs.

    ``mean_first_failure`` is None when no failure occurred at all;
    ``censored_tail`` counts the trailing epochs of the unfinished run.
    """

    epochs: int
    failures: int
    mean_first_failure: Optional[float]
    censored_tail: int


def long_run(params: SystemParams, strategy, epochs: int, base_seed: int) -> LongRunStats:
    """Simulate consecutive epochs, restarting after each system failure."""
    if epochs < 1:
        raise ParameterError(f"epochs must be >= 1, got {epochs}")
    alloc = strategy.allocation(params)
    alloc.check_feasible(params.shards)
    pattern = _allocation_pattern(alloc, params.shards)

    failure_epochs = []
    done = 0
    chunk_index = 0
    while done < epochs:
        size = min(LONG_RUN_CHUNK, epochs - done)
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((base_seed, chunk_index)))
        )
        block = rng.permuted(
            np.repeat(pattern[np.newaxis, :, :], size, axis=0), axis=2
        )
        counts = block.sum(axis=1)
        flags = (counts >= params.threshold).any(axis=1)
        for offset in np.flatnonzero(flags):
            failure_epochs.append(done + int(offset))
        done += size
        chunk_index += 1

    if not failure_epochs:
        return LongRunStats(
            epochs=epochs, failures=0, mean_first_failure=None, censored_tail=epochs
        )
    idx = np.asarray(failure_epochs)
    run_lengths = np.diff(np.concatenate(([-1], idx)))  # 1-based first-failure epochs
    return LongRunStats(
        epochs=epochs,
        failures=len(idx),
        mean_first_failure=float(run_lengths.mean()),
        censored_tail=epochs - (int(idx[-1]) + 1),
    )
