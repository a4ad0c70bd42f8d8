"""The court's membership protocol, event by event.

Run it top to bottom:

    python3 demos/membership_walkthrough.py

A court of five occupation classes starts from five founders, admits two
waves of recruits, loses a silent node to pruning, and reshuffles.  Every
operation appends to an event log; at the end we replay that log from
scratch and confirm it rebuilds the identical state.
"""

from juryshard import CourtState
from juryshard.membership import Genesis, replay

OCCUPATIONS = ["miner", "auditor", "archivist", "notary", "courier"]


def show(state: CourtState, label: str) -> None:
    print(f"\n-- {label}")
    print(f"   juries: {state.jury_count}, window: {state.window}, epoch: {state.epoch}")
    for occupation, name in enumerate(OCCUPATIONS):
        seated = [row for row in [state.grid[occupation]]][0]
        print(f"   {name:>9}: seated {seated} queue {state.queue_nodes(occupation)}")


court = CourtState(Genesis(m=5, batch_k=2, missed_limit=1, heartbeat_window=600.0))

# Five founders report, one per occupation, and the first admission seats
# them as jury #0.  batch_k=2 is the *standing* batch size; the bootstrap
# admission overrides it to take exactly one column.
for node, occupation in zip("FGHIJ", range(5)):
    position = court.report(node, occupation)
    print(f"founder {node} queued for {OCCUPATIONS[occupation]} at position {position}")
ready, batch = court.admission_check()
print(f"admission ready: {ready} (standing batch {batch})")
court.admit_and_reshuffle(seed=7, batch=1)
show(court, "after the founding admission")

# A recruiting wave.  'x' initially picks the wrong occupation and corrects
# it; the correction sends them to the tail of the new queue.
wave = [("a", 0), ("b", 0), ("c", 1), ("d", 1), ("e", 2), ("f", 2),
        ("g", 3), ("h", 3), ("i", 4), ("x", 0)]
for node, occupation in wave:
    court.report(node, occupation)
court.change_occupation("x", 4)
show(court, "after the wave (x moved from miner to courier)")

# Every queue now holds >= 2 pending nodes, so the standing batch of 2 can
# be admitted: two new jury columns, then a seeded reshuffle of every row.
ready, batch = court.admission_check()
print(f"\nadmission ready: {ready}, batch: {batch}")
report = court.admit_and_reshuffle(seed=2026)
admitted = sorted(node for column in report.admitted for node in column)
print(f"admitted {admitted}")
print(f"queues before/after: {report.queue_lengths_before} -> {report.queue_lengths_after}")
show(court, "after admitting two columns and reshuffling")

# Liveness: nodes heartbeat each logical tick.  'y' reports late and waits
# in the courier queue; 'i' goes silent, so after missed_limit=1 windows it
# is pruned and 'y' is promoted into the vacant seat at the following tick.
court.report("y", 4)
live = {node for row in court.grid for node in row} | {"x", "y"}
live.discard("i")
for _ in range(3):
    for node in sorted(live):
        court.heartbeat(node)
    pruned = court.tick()
    if pruned:
        print(f"\npruned after silence: {pruned}")
show(court, "after pruning 'i' (the courier queue head 'y' took its seat)")

# The log is the state: replaying it reproduces everything bit for bit.
rebuilt = replay(court.log_lines())
assert rebuilt.to_dict() == court.to_dict()
print(f"\nreplayed {len(court.log)} events -> identical state: True")
