"""The ten primary acceptance checks.

One test per criterion, in order.  Each prints a single ``criterion N:
PASS/FAIL`` line (visible with ``-s``; the ``-v`` test line mirrors it) and
enforces the stated runtime budget alongside the numeric tolerance.  All
stochastic checks run from frozen seeds, so the suite is deterministic.
"""

import itertools
import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

from juryshard.analytics import (
    hypergeom_tail,
    manipulation_prob,
    max_manipulation_prob,
    max_shards_for_target,
    optimal_allocation,
    throughput,
    time_to_fail,
)
from juryshard.cli import main as cli_main
from juryshard.membership import CourtState, Genesis, iter_log, replay_path
from juryshard.params import SystemParams
from juryshard.sim import EXHAUSTIVE_GUARD, FrontLoaded, exhaustive, monte_carlo

FIXTURE = Path(__file__).resolve().parent.parent / "src" / "juryshard" / "fixtures"
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def verdict(number: int, ok: bool, budget: float, clock: Stopwatch, detail: str):
    ok = ok and clock.elapsed < budget
    line = (
        f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} — {detail} "
        f"[{clock.elapsed:.3f}s < {budget:g}s]"
    )
    print(line)
    assert ok, line


def test_criterion_01_unanimity_with_half_the_seats_gives_half_to_the_m():
    """Half the seats spread over a unanimous threshold: exactly (1/2)^m."""
    with Stopwatch() as clock:
        ok = True
        for m in (5, 10, 20):
            params = SystemParams(
                shards=10, jury_size=m, threshold=m, adversaries=5 * m
            )
            bound = max_manipulation_prob(params)
            ok = ok and bound.exact.exact == Fraction(1, 2) ** m
    verdict(1, ok, 1.0, clock, "worst-case manipulation is exactly (1/2)^m for m=5,10,20")


def test_criterion_02_headline_manipulation_probability_below_1e20():
    with Stopwatch() as clock:
        params = SystemParams(shards=10, jury_size=200, threshold=140, adversaries=1000)
        exact = max_manipulation_prob(params).exact.exact
        ok = exact < Fraction(1, 10**20)
    verdict(2, ok, 1.0, clock, f"exact probability 10^{float(math.log10(exact)):.2f} < 1e-20")


def test_criterion_03_class_shard_limit_near_33():
    with Stopwatch() as clock:
        result = max_shards_for_target(2000, 1000, Fraction(1, 10**6), model="class")
        ok = result.shards is not None and 31 <= result.shards <= 35
    verdict(3, ok, 5.0, clock, f"class model supports {result.shards} shards at 1e-6")


def test_criterion_04_traditional_shard_limit_near_10():
    with Stopwatch() as clock:
        result = max_shards_for_target(2000, 666, Fraction(1, 10**6), model="traditional")
        ok = result.shards is not None and 8 <= result.shards <= 12
    verdict(4, ok, 30.0, clock, f"sampling model supports {result.shards} shards at 1e-6")


def test_criterion_05_time_and_throughput_arithmetic():
    with Stopwatch() as clock:
        years_1e6 = time_to_fail(Fraction(1, 10**6), 1800.0)
        years_1e20 = time_to_fail(Fraction(1, 10**20), 1800.0)
        ok = (
            57 < years_1e6 < 58
            and years_1e20 > 1e15
            and throughput(10, 1000, 1800.0) == 20000.0
            and throughput(1, 1000, 600.0) == 6000.0
        )
    verdict(
        5, ok, 1.0, clock,
        f"{years_1e6:.2f} years at 1e-6; {years_1e20:.2e} years at 1e-20; "
        "20000 and 6000 tx/h",
    )


def _bounded_compositions(total, parts, cap):
    if parts == 1:
        if 0 <= total <= cap:
            yield (total,)
        return
    for head in range(min(total, cap), -1, -1):
        for rest in _bounded_compositions(total - head, parts - 1, cap):
            yield (head,) + rest


def test_criterion_06_no_allocation_beats_the_optimal_split():
    """Exhaustively search every feasible placement of up to 12 adversaries
    and confirm the even front split always attains the best product."""
    with Stopwatch() as clock:
        checks = 0
        ok = True
        for shards, jury_size in itertools.product(range(1, 7), range(1, 7)):
            max_threshold = min(5, jury_size)
            for total in range(min(12, jury_size * shards) + 1):
                best = [0] * (max_threshold + 1)
                for counts in _bounded_compositions(total, jury_size, shards):
                    ordered = sorted(counts, reverse=True)
                    product = 1
                    for t in range(1, max_threshold + 1):
                        product *= ordered[t - 1]
                        if product > best[t]:
                            best[t] = product
                for threshold in range(1, max_threshold + 1):
                    alloc = optimal_allocation(
                        total, threshold, jury_size, shards, clamp=True
                    )
                    optimal = manipulation_prob(alloc, shards, threshold).exact
                    checks += 1
                    if optimal != Fraction(best[threshold], shards**threshold):
                        ok = False
        ok = ok and checks > 1000
    verdict(6, ok, 10.0, clock, f"optimal split attains the brute-force best in {checks} cells")


def _guarded_instances(count: int, rng: random.Random):
    """Random small systems under the exhaustive guard, with the adversary
    budget confined to the front threshold occupations."""
    instances = []
    while len(instances) < count:
        shards = rng.choice((2, 2, 3, 3, 4, 5))
        cap = 2
        while math.factorial(shards) ** (cap + 1) <= EXHAUSTIVE_GUARD and cap < 6:
            cap += 1
        jury_size = rng.randint(2, cap)
        threshold = rng.randint((jury_size + 1) // 2, jury_size)
        adversaries = rng.randint(0, threshold * shards)
        instances.append(
            SystemParams(
                shards=shards,
                jury_size=jury_size,
                threshold=threshold,
                adversaries=adversaries,
            )
        )
    return instances


def test_criterion_07_monte_carlo_exhaustive_and_product_oracles_agree():
    """Chained oracles on 20 random guarded instances: sampling within 4
    standard errors of enumeration, and enumeration equal to the closed-form
    product for front-confined placements."""
    trials = 100_000
    rng = random.Random(0x5EED)
    with Stopwatch() as clock:
        ok = True
        for index, params in enumerate(_guarded_instances(20, rng)):
            strategy = FrontLoaded()
            alloc = strategy.allocation(params)
            exact = exhaustive(params, alloc)
            report = monte_carlo(params, strategy, trials, base_seed=1000 + index)
            pairs = (
                (report.perjury_rate, exact.designated_safety),
                (report.system_rate, exact.any_safety),
                (report.liveness_perjury_rate, exact.designated_liveness),
                (report.liveness_system_rate, exact.any_liveness),
            )
            for rate, truth in pairs:
                p = float(truth)
                tolerance = 4 * math.sqrt(p * (1 - p) / trials)
                if abs(rate - p) > tolerance:
                    ok = False
            if manipulation_prob(alloc, params.shards, params.threshold).exact != (
                exact.designated_safety
            ):
                ok = False
    verdict(7, ok, 120.0, clock, "20 instances: sampling ≤ 4 SE of enumeration == product")


def _contains_in_order(snapshots, stages):
    position = 0
    for snap in snapshots:
        if position < len(stages) and snap == stages[position]:
            position += 1
    return position == len(stages)


def test_criterion_08_golden_membership_replay():
    log_path = FIXTURE / "court_walkthrough.log"
    with Stopwatch() as clock:
        snapshots = []
        state = None
        with open(log_path, "r", encoding="utf-8") as fh:
            for _, event in iter_log(fh):
                if isinstance(event, Genesis):
                    state = CourtState(event)
                else:
                    state.apply(event)
                    state._record(event)
                snapshots.append(tuple(state.queue_lengths))
        final = replay_path(log_path)
        seated = {node for row in final.grid for node in row}
        expected = set("ABCDEFGHIJKLMNOPQRST") | {"!", "@", "#", "$", "*"}
        ok = (
            _contains_in_order(snapshots, [(4, 2, 1, 1, 1), (4, 4, 5, 4, 5)])
            and tuple(final.queue_lengths) == (0, 0, 1, 0, 1)
            and final.queue_nodes(2) == ["U"]
            and final.queue_nodes(4) == ["V"]
            and final.jury_count == 5
            and len(seated) == 25
            and seated == expected
            and all(None not in row for row in final.grid)
        )
    verdict(
        8, ok, 1.0, clock,
        "queues [4,2,1,1,1] → [4,4,5,4,5] → [0,0,1,0,1]; U, V pending; 25-node grid",
    )


def _float_hypergeom_tail(population, adversaries, committee, at_least):
    """Independent cross-check: straight log-gamma summation in floats."""
    def log_choose(n, k):
        return (
            math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        )

    log_denom = log_choose(population, committee)
    honest_pool = population - adversaries
    total = 0.0
    for hits in range(at_least, min(adversaries, committee) + 1):
        misses = committee - hits
        if misses > honest_pool:
            continue
        total += math.exp(
            log_choose(adversaries, hits) + log_choose(honest_pool, misses) - log_denom
        )
    return total


def test_criterion_09_seven_shard_regime_fails_hard():
    with Stopwatch() as clock:
        committee = 2000 // 7
        majority = (committee + 1) // 2
        exact = hypergeom_tail(2000, 1000, committee, majority)
        independent = _float_hypergeom_tail(2000, 1000, committee, majority)
        value = exact.to_float()
        ok = value > 0.3 and abs(independent - value) <= 1e-9 * value
    verdict(
        9, ok, 5.0, clock,
        f"majority lost with probability {value} (float cross-check {independent:.12f})",
    )


def test_criterion_10_simulation_reports_are_deterministic(tmp_path):
    with Stopwatch() as clock:
        base = json.loads((CONFIGS / "simulate_small.json").read_text())
        base.pop("out")
        serial_cfg = tmp_path / "serial.json"
        serial_cfg.write_text(json.dumps(base))
        parallel_cfg = tmp_path / "parallel.json"
        parallel_cfg.write_text(json.dumps({**base, "workers": 4}))

        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        parallel = tmp_path / "parallel_report.json"
        codes = [
            cli_main(["simulate", str(serial_cfg), "--out", str(first)]),
            cli_main(["simulate", str(serial_cfg), "--out", str(second)]),
            cli_main(["simulate", str(parallel_cfg), "--out", str(parallel)]),
        ]
        identical = first.read_bytes() == second.read_bytes()
        agree = (
            json.loads(first.read_text())["report"]
            == json.loads(parallel.read_text())["report"]
        )
        ok = codes == [0, 0, 0] and identical and agree
    verdict(10, ok, 60.0, clock, "byte-identical reruns; parallel == serial")
