"""Event-sourced membership for the court office.

The court office tracks candidate nodes in one FIFO seniority queue per
occupation and seats members in a grid with one row per occupation and one
column per jury.  All mutations are expressed as events so that replaying a
log reproduces the state exactly:

* ``Report`` — a node picks an occupation and joins that queue at the tail.
* ``ChangeOccupation`` — a pending node moves to the tail of another queue,
  giving up its seniority.
* ``Heartbeat`` — liveness proof for the current window.
* ``Tick`` — advances the heartbeat window, refills jury vacancies from queue
  heads, then prunes nodes that have been silent too long.
* ``AdmissionTriggered`` — the front ``batch`` of every queue is seated as
  ``batch`` new jury columns, in queue order.
* ``Reshuffle`` — every occupation row is independently permuted by a seeded
  PRNG, randomizing jury composition.

Logs are line-delimited JSON, one event per line, each carrying a schema
version field ``"v"``.  Field order is fixed so replay fixtures are
byte-stable.  The reshuffle PRNG is pinned: row ``r`` of a reshuffle with seed
``q`` is permuted by ``numpy`` PCG64 seeded with ``SeedSequence((q, r))``.

Liveness accounting: ``Report``, ``ChangeOccupation`` and ``Heartbeat`` all
refresh a node's last-seen window.  A node (queued or seated) is pruned when
``window - last_seen > missed_limit``.  Pruned nodes may not return under the
same id.  A seated node's vacancy is refilled from the head of the matching
occupation queue at the *next* tick, so a jury is flagged under-strength for
at least one window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "SCHEMA_VERSION",
    "MembershipError",
    "LogError",
    "Genesis",
    "Report",
    "ChangeOccupation",
    "Heartbeat",
    "Tick",
    "AdmissionTriggered",
    "Reshuffle",
    "MembershipEvent",
    "PendingEntry",
    "AdmissionReport",
    "CourtState",
    "event_to_line",
    "parse_event",
    "replay",
    "replay_path",
]

SCHEMA_VERSION = 1

NodeId = str


class MembershipError(ValueError):
    """An operation violated the court-office rules (duplicate node, bad
    occupation index, admission before the queues are ready, ...)."""


class LogError(ValueError):
    """A log line failed to parse or to apply; carries the 1-based line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Genesis:
    """Configuration record; always the first line of a log."""

    m: int
    batch_k: int = 1
    missed_limit: int = 1
    heartbeat_window: float = 600.0

    def __post_init__(self):
        if self.m < 1:
            raise MembershipError(f"occupation count must be >= 1, got {self.m}")
        if self.batch_k < 1:
            raise MembershipError(f"batch_k must be >= 1, got {self.batch_k}")
        if self.missed_limit < 0:
            raise MembershipError(f"missed_limit must be >= 0, got {self.missed_limit}")
        if self.heartbeat_window <= 0:
            raise MembershipError("heartbeat_window must be positive")


@dataclass(frozen=True)
class Report:
    node: NodeId
    occupation: int

    def __post_init__(self):
        _check_node_id(self.node)


@dataclass(frozen=True)
class ChangeOccupation:
    node: NodeId
    new_occupation: int

    def __post_init__(self):
        _check_node_id(self.node)


@dataclass(frozen=True)
class Heartbeat:
    node: NodeId

    def __post_init__(self):
        _check_node_id(self.node)


@dataclass(frozen=True)
class Tick:
    advance: int = 1

    def __post_init__(self):
        if self.advance < 1:
            raise MembershipError(f"tick advance must be >= 1, got {self.advance}")


@dataclass(frozen=True)
class AdmissionTriggered:
    batch: int

    def __post_init__(self):
        if self.batch < 1:
            raise MembershipError(f"admission batch must be >= 1, got {self.batch}")


@dataclass(frozen=True)
class Reshuffle:
    seed: int

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise MembershipError(f"seed must be an unsigned 64-bit int, got {self.seed}")


MembershipEvent = Union[
    Genesis, Report, ChangeOccupation, Heartbeat, Tick, AdmissionTriggered, Reshuffle
]


def _check_node_id(node) -> None:
    if not isinstance(node, str) or not node:
        raise MembershipError(f"node id must be a non-empty string, got {node!r}")


# ---------------------------------------------------------------------------
# serialization: line-delimited JSON with fixed field order
# ---------------------------------------------------------------------------

# (tag, event class, ordered field names)
_EVENT_CODECS = [
    ("genesis", Genesis, ("m", "batch_k", "missed_limit", "heartbeat_window")),
    ("report", Report, ("node", "occupation")),
    ("change_occupation", ChangeOccupation, ("node", "new_occupation")),
    ("heartbeat", Heartbeat, ("node",)),
    ("tick", Tick, ("advance",)),
    ("admission", AdmissionTriggered, ("batch",)),
    ("reshuffle", Reshuffle, ("seed",)),
]
_TAG_BY_TYPE = {cls: (tag, fields) for tag, cls, fields in _EVENT_CODECS}
_CODEC_BY_TAG = {tag: (cls, fields) for tag, cls, fields in _EVENT_CODECS}


def event_to_line(event: MembershipEvent) -> str:
    """Serialize one event to its canonical log line (no trailing newline)."""
    tag, fields = _TAG_BY_TYPE[type(event)]
    record = {"v": SCHEMA_VERSION, "type": tag}
    for name in fields:
        record[name] = getattr(event, name)
    return json.dumps(record, separators=(",", ":"))


def parse_event(line: str, lineno: int = 0) -> MembershipEvent:
    """Parse one log line; raises LogError with the offending line number."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as err:
        raise LogError(lineno, f"invalid JSON ({err.msg})") from err
    if not isinstance(record, dict):
        raise LogError(lineno, "event must be a JSON object")
    if record.get("v") != SCHEMA_VERSION:
        raise LogError(lineno, f"unsupported schema version {record.get('v')!r}")
    tag = record.get("type")
    if tag not in _CODEC_BY_TAG:
        raise LogError(lineno, f"unknown event type {tag!r}")
    cls, fields = _CODEC_BY_TAG[tag]
    missing = [name for name in fields if name not in record]
    if missing:
        raise LogError(lineno, f"{tag} event missing field(s) {missing}")
    extra = set(record) - {"v", "type", *fields}
    if extra:
        raise LogError(lineno, f"{tag} event has unknown field(s) {sorted(extra)}")
    try:
        return cls(**{name: record[name] for name in fields})
    except (MembershipError, TypeError) as err:
        raise LogError(lineno, f"bad {tag} event: {err}") from err


# ---------------------------------------------------------------------------
# state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PendingEntry:
    """One queued candidate; report_time is the event sequence number."""

    node: NodeId
    occupation: int
    report_time: int


@dataclass(frozen=True)
class AdmissionReport:
    """What an admission did: who was seated, per occupation in queue order."""

    admitted: Tuple[Tuple[NodeId, ...], ...]
    juries_before: int
    juries_after: int
    queue_lengths_before: Tuple[int, ...]
    queue_lengths_after: Tuple[int, ...]


class CourtState:
    """Single-writer court-office state machine.

    Mutate through the operation methods (or :meth:`apply` during replay);
    every accepted mutation is recorded in ``self.log`` so the state can be
    serialized and replayed exactly.  ``to_dict`` produces a plain snapshot
    that is safe to hand to other threads.
    """

    def __init__(self, genesis: Genesis):
        self.m = genesis.m
        self.batch_k = genesis.batch_k
        self.missed_limit = genesis.missed_limit
        self.heartbeat_window = genesis.heartbeat_window
        self.queues: List[List[PendingEntry]] = [[] for _ in range(self.m)]
        # one row per occupation; rows always share the same length (= juries)
        self.grid: List[List[Optional[NodeId]]] = [[] for _ in range(self.m)]
        self.epoch = 0
        self.window = 0
        self.seq = 0
        self.last_seen: dict = {}
        self.pruned: set = set()
        self.log: List[MembershipEvent] = [genesis]

    @classmethod
    def genesis(
        cls,
        m: int,
        batch_k: int = 1,
        missed_limit: int = 1,
        heartbeat_window: float = 600.0,
    ) -> "CourtState":
        return cls(Genesis(m, batch_k, missed_limit, heartbeat_window))

    # -- inspection helpers ------------------------------------------------

    @property
    def jury_count(self) -> int:
        return len(self.grid[0])

    @property
    def queue_lengths(self) -> List[int]:
        return [len(q) for q in self.queues]

    def queue_nodes(self, occupation: int) -> List[NodeId]:
        return [entry.node for entry in self.queues[occupation]]

    def jury_members(self, jury: int) -> List[Optional[NodeId]]:
        return [self.grid[row][jury] for row in range(self.m)]

    def under_strength(self) -> List[int]:
        """Jury columns currently missing at least one member."""
        return [
            j for j in range(self.jury_count)
            if any(self.grid[row][j] is None for row in range(self.m))
        ]

    def _find_queued(self, node: NodeId) -> Optional[Tuple[int, int]]:
        for occ, queue in enumerate(self.queues):
            for idx, entry in enumerate(queue):
                if entry.node == node:
                    return occ, idx
        return None

    def _find_seated(self, node: NodeId) -> Optional[Tuple[int, int]]:
        for row in range(self.m):
            for col, cell in enumerate(self.grid[row]):
                if cell == node:
                    return row, col
        return None

    def _known(self, node: NodeId) -> bool:
        return (
            node in self.pruned
            or self._find_queued(node) is not None
            or self._find_seated(node) is not None
        )

    def _check_occupation(self, occupation: int) -> None:
        if not isinstance(occupation, int) or not 0 <= occupation < self.m:
            raise MembershipError(
                f"occupation must be an index in [0, {self.m}), got {occupation!r}"
            )

    # -- event application --------------------------------------------------

    def apply(self, event: MembershipEvent):
        """Validate and apply one event; returns the operation's result.

        Used directly by replay.  The operation methods below are thin
        wrappers that build the event, apply it, and record it in the log.
        """
        if isinstance(event, Genesis):
            raise MembershipError("genesis is only valid as the first log record")
        if isinstance(event, Report):
            return self._apply_report(event)
        if isinstance(event, ChangeOccupation):
            return self._apply_change(event)
        if isinstance(event, Heartbeat):
            return self._apply_heartbeat(event)
        if isinstance(event, Tick):
            return self._apply_tick(event)
        if isinstance(event, AdmissionTriggered):
            return self._apply_admission(event)
        if isinstance(event, Reshuffle):
            return self._apply_reshuffle(event)
        raise MembershipError(f"unknown event {event!r}")

    def _record(self, event: MembershipEvent) -> None:
        self.log.append(event)

    def _apply_report(self, event: Report) -> int:
        self._check_occupation(event.occupation)
        if self._known(event.node):
            raise MembershipError(f"node {event.node!r} already present (or pruned)")
        self.seq += 1
        queue = self.queues[event.occupation]
        queue.append(PendingEntry(event.node, event.occupation, self.seq))
        self.last_seen[event.node] = self.window
        return len(queue) - 1

    def _apply_change(self, event: ChangeOccupation) -> None:
        self._check_occupation(event.new_occupation)
        if self._find_seated(event.node) is not None:
            raise MembershipError(
                f"node {event.node!r} is seated in a jury and cannot change occupation"
            )
        pos = self._find_queued(event.node)
        if pos is None:
            raise MembershipError(f"node {event.node!r} is not pending")
        occ, idx = pos
        self.seq += 1
        self.queues[occ].pop(idx)
        self.queues[event.new_occupation].append(
            PendingEntry(event.node, event.new_occupation, self.seq)
        )
        self.last_seen[event.node] = self.window

    def _apply_heartbeat(self, event: Heartbeat) -> None:
        if self._find_queued(event.node) is None and self._find_seated(event.node) is None:
            raise MembershipError(f"heartbeat from unknown node {event.node!r}")
        self.seq += 1
        self.last_seen[event.node] = self.window

    def _apply_tick(self, event: Tick) -> List[NodeId]:
        self.seq += 1
        pruned: List[NodeId] = []
        for _ in range(event.advance):
            self.window += 1
            self._refill_vacancies()
            pruned.extend(self._prune_silent())
        return pruned

    def _refill_vacancies(self) -> None:
        # vacancies left by earlier pruning are filled from the matching
        # occupation's queue head, leftmost column first
        for row in range(self.m):
            for col in range(self.jury_count):
                if self.grid[row][col] is None and self.queues[row]:
                    entry = self.queues[row].pop(0)
                    self.grid[row][col] = entry.node

    def _prune_silent(self) -> List[NodeId]:
        silent = [
            node
            for node, seen in self.last_seen.items()
            if self.window - seen > self.missed_limit
        ]
        for node in silent:
            pos = self._find_queued(node)
            if pos is not None:
                occ, idx = pos
                self.queues[occ].pop(idx)
            else:
                seat = self._find_seated(node)
                if seat is not None:
                    row, col = seat
                    self.grid[row][col] = None
            del self.last_seen[node]
            self.pruned.add(node)
        return silent

    def _apply_admission(self, event: AdmissionTriggered) -> AdmissionReport:
        lengths_before = tuple(self.queue_lengths)
        if min(lengths_before) < event.batch:
            raise MembershipError(
                f"admission of {event.batch} per occupation needs every queue "
                f"that long; lengths are {list(lengths_before)}"
            )
        self.seq += 1
        juries_before = self.jury_count
        admitted = tuple(
            tuple(self.queues[row].pop(0).node for _ in range(event.batch))
            for row in range(self.m)
        )
        for j in range(event.batch):
            for row in range(self.m):
                self.grid[row].append(admitted[row][j])
        return AdmissionReport(
            admitted=admitted,
            juries_before=juries_before,
            juries_after=self.jury_count,
            queue_lengths_before=lengths_before,
            queue_lengths_after=tuple(self.queue_lengths),
        )

    def _apply_reshuffle(self, event: Reshuffle) -> None:
        self.seq += 1
        for row in range(self.m):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence((event.seed, row)))
            )
            order = rng.permutation(self.jury_count)
            self.grid[row] = [self.grid[row][int(i)] for i in order]
        self.epoch += 1

    # -- operations ----------------------------------------------------------

    def report(self, node: NodeId, occupation: int) -> int:
        """Join the tail of an occupation queue; returns 0-based position."""
        event = Report(node, occupation)
        position = self.apply(event)
        self._record(event)
        return position

    def change_occupation(self, node: NodeId, new_occupation: int) -> None:
        """Move a pending node to the tail of another queue (seniority lost)."""
        event = ChangeOccupation(node, new_occupation)
        self.apply(event)
        self._record(event)

    def heartbeat(self, node: NodeId) -> None:
        event = Heartbeat(node)
        self.apply(event)
        self._record(event)

    def tick(self, advance: int = 1) -> List[NodeId]:
        """Advance the window(s); returns the nodes pruned along the way."""
        event = Tick(advance)
        pruned = self.apply(event)
        self._record(event)
        return pruned

    def admission_check(self) -> Tuple[bool, int]:
        """Whether every queue can supply the configured batch."""
        return min(self.queue_lengths) >= self.batch_k, self.batch_k

    def admit_and_reshuffle(self, seed: int, batch: Optional[int] = None) -> AdmissionReport:
        """Seat the front of every queue as new juries, then reshuffle.

        ``batch`` defaults to the configured ``batch_k``; passing it overrides
        the batch for this admission only (the event records the value used).
        """
        admission = AdmissionTriggered(self.batch_k if batch is None else batch)
        reshuffle = Reshuffle(seed)
        report = self.apply(admission)
        self._record(admission)
        self.apply(reshuffle)
        self._record(reshuffle)
        return report

    def reshuffle(self, seed: int) -> None:
        """Re-randomize jury composition without admitting anyone."""
        event = Reshuffle(seed)
        self.apply(event)
        self._record(event)

    # -- snapshots and logs ----------------------------------------------------

    def to_dict(self) -> dict:
        """Plain, deep snapshot of the state (safe to share across threads)."""
        return {
            "m": self.m,
            "batch_k": self.batch_k,
            "missed_limit": self.missed_limit,
            "heartbeat_window": self.heartbeat_window,
            "epoch": self.epoch,
            "window": self.window,
            "queues": [
                [
                    {"node": e.node, "occupation": e.occupation, "report_time": e.report_time}
                    for e in queue
                ]
                for queue in self.queues
            ],
            "grid": [list(row) for row in self.grid],
            "pruned": sorted(self.pruned),
            "under_strength": self.under_strength(),
        }

    def log_lines(self) -> List[str]:
        return [event_to_line(event) for event in self.log]

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.log_lines():
                fh.write(line + "\n")

    def validate(self) -> None:
        """Assert the structural invariants; used heavily by the test suite."""
        assert len(self.queues) == self.m and len(self.grid) == self.m
        widths = {len(row) for row in self.grid}
        assert len(widths) == 1, f"ragged grid rows: {widths}"
        for queue in self.queues:
            times = [entry.report_time for entry in queue]
            assert times == sorted(times) and len(set(times)) == len(times)
        queued = [entry.node for queue in self.queues for entry in queue]
        seated = [cell for row in self.grid for cell in row if cell is not None]
        assert len(set(queued)) == len(queued), "duplicate node in queues"
        assert len(set(seated)) == len(seated), "duplicate node in grid"
        assert not set(queued) & set(seated), "node both queued and seated"
        assert not set(queued) & self.pruned, "pruned node still queued"
        assert not set(seated) & self.pruned, "pruned node still seated"
        assert set(self.last_seen) == set(queued) | set(seated)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def iter_log(lines: Iterable[str]):
    """Yield (lineno, event) pairs, enforcing the genesis-first rule."""
    seen_genesis = False
    lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped:
            raise LogError(lineno, "blank line in event log")
        event = parse_event(stripped, lineno)
        if isinstance(event, Genesis):
            if seen_genesis:
                raise LogError(lineno, "duplicate genesis record")
            seen_genesis = True
        elif not seen_genesis:
            raise LogError(lineno, "first record must be genesis")
        yield lineno, event
    if not seen_genesis:
        raise LogError(lineno, "empty log: missing genesis record")


def replay(lines: Iterable[str]) -> CourtState:
    """Rebuild a CourtState from serialized log lines.

    Deterministic: two replays of the same lines agree exactly (reshuffles
    carry their seeds).  A log holding only its genesis record yields a fresh
    state.  Errors carry the 1-based line number of the offending record.
    """
    state: Optional[CourtState] = None
    for lineno, event in iter_log(lines):
        if isinstance(event, Genesis):
            state = CourtState(event)
            continue
        try:
            state.apply(event)
        except MembershipError as err:
            raise LogError(lineno, str(err)) from err
        state._record(event)
    assert state is not None  # iter_log guarantees a genesis record
    return state


def replay_path(path) -> CourtState:
    with open(path, "r", encoding="utf-8") as fh:
        return replay(fh)
