"""A guided tour of the failure-probability analytics.

Run it top to bottom:

    python3 demos/failure_probability_tour.py

The story: a population of 2000 nodes, half of them adversarial, wants to
split into shards.  Random committee sampling collapses after a handful of
shards; pinning one member per occupation class and demanding a 70% vote
threshold lets the same population run ~33 shards at the same risk budget.
"""

from fractions import Fraction

from juryshard import (
    SystemParams,
    hypergeom_tail,
    max_manipulation_prob,
    max_shards_for_target,
    throughput,
    time_to_fail,
)

POPULATION = 2000
ADVERSARIES = POPULATION // 2


def section(title: str) -> None:
    print(f"\n=== {title} ===")


section("1. Random sampling loses a majority quickly")
# Sample a committee of n/s nodes uniformly; it fails when half or more of
# its seats land on adversaries.  With 1000 adversaries in the pool this
# stops being rare almost immediately.
for shards in (2, 4, 7, 10, 16):
    committee = POPULATION // shards
    majority = (committee + 1) // 2
    tail = hypergeom_tail(POPULATION, ADVERSARIES, committee, majority)
    print(
        f"  {shards:>2} shards -> committee of {committee:>4}: "
        f"log10 failure = {tail.log10:+.3f}"
    )
print("  At 7 shards the committee majority is lost with probability "
      f"{hypergeom_tail(POPULATION, ADVERSARIES, 2000 // 7, 143).to_float():.3f} -- useless.")

section("2. One-per-occupation juries with a 70% threshold")
# Same population, but nodes are split into 200 occupation classes and every
# jury seats exactly one node per class.  Forging a sentence needs 140
# matching votes, so the adversary must land in 140 specific rows at once.
headline = SystemParams(shards=10, jury_size=200, threshold=140, adversaries=ADVERSARIES)
bound = max_manipulation_prob(headline)
print(f"  10 shards, jury of 200, threshold 140, {ADVERSARIES} adversaries")
print(f"  best adversary placement: {bound.allocation.counts[:6]}... "
      f"(front rows get ceil/floor of AD/T)")
print(f"  exact worst-case manipulation: log10 = {bound.exact.log10:.4f}")
print(f"  smooth upper bound (AD/(T*s))^T: log10 = {bound.approximation_log10:.4f}")

section("3. Probability to waiting time")
# A per-epoch failure probability p means a mean of 1/p epochs to the first
# failure.  At 30-minute epochs, even one-in-a-million per epoch is decades.
print(f"  p=1e-6 at 30-minute epochs -> {time_to_fail(Fraction(1, 10**6), 1800.0):.1f} years")
print(f"  headline bound at 30-minute epochs -> {time_to_fail(bound.exact, 1800.0):.3e} years")
print(f"  headline bound at 10-minute epochs -> {time_to_fail(bound.exact, 600.0):.3e} years")

section("4. How many shards can each design afford?")
target = Fraction(1, 10**6)
sampled = max_shards_for_target(POPULATION, POPULATION // 3, target, model="traditional")
classed = max_shards_for_target(POPULATION, ADVERSARIES, target, model="class")
print(f"  sampling, 1/3 adversaries, target 1e-6: {sampled.shards} shards "
      f"(next one would hit log10 {sampled.next_prob.log10:.2f})")
print(f"  class-based, 1/2 adversaries, target 1e-6: {classed.shards} shards "
      f"(next one would hit log10 {classed.next_prob.log10:.2f})")

section("5. What that buys in throughput")
for shards, interval in ((1, 600.0), (10, 1800.0), (classed.shards, 1800.0)):
    rate = throughput(shards, 1000, interval)
    print(f"  {shards:>2} shard(s), {interval / 60:.0f}-minute blocks of 1000 tx "
          f"-> {rate:,.0f} tx/hour")
