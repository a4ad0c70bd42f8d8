"""System-level model parameters and adversary allocations.

The class-based model runs ``shards`` juries in parallel, each seating exactly
one member from every one of ``jury_size`` occupations, so the population is
``shards * jury_size``.  A sentence needs at least ``threshold`` matching
votes, and the adversary controls ``adversaries`` members overall.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "ParameterError",
    "AllocationOverflowError",
    "SystemParams",
    "AdversaryAllocation",
]


class ParameterError(ValueError):
    """A model parameter violated its domain; the message names the bound."""


class AllocationOverflowError(ParameterError):
    """Adversary count exceeds what the front-threshold occupations can hold.

    ``spill`` is the number of members that do not fit.
    """

    def __init__(self, message: str, spill: int):
        super().__init__(message)
        self.spill = spill


@dataclass(frozen=True)
class SystemParams:
    """Global parameters of the class-based jury model.

    ``total_nodes`` must equal ``shards * jury_size``.  Use
    :meth:`from_population` to derive a jury size from a raw population
    (remainder nodes are dropped, the conservative reading).
    """

    shards: int
    jury_size: int
    threshold: int
    adversaries: int
    epoch_seconds: float = 1800.0
    block_txs: int = 1000

    def __post_init__(self) -> None:
        if self.shards < 1:
            raise ParameterError(f"shards must be >= 1, got {self.shards}")
        if self.jury_size < 1:
            raise ParameterError(f"jury_size must be >= 1, got {self.jury_size}")
        lo = (self.jury_size + 1) // 2
        if not lo <= self.threshold <= self.jury_size:
            raise ParameterError(
                f"threshold must satisfy ceil(jury_size/2) <= threshold <= jury_size "
                f"({lo} <= T <= {self.jury_size}), got {self.threshold}"
            )
        if not 0 <= self.adversaries <= self.total_nodes:
            raise ParameterError(
                f"adversaries must be in [0, {self.total_nodes}], got {self.adversaries}"
            )
        if self.epoch_seconds <= 0:
            raise ParameterError(f"epoch_seconds must be > 0, got {self.epoch_seconds}")
        if self.block_txs < 0:
            raise ParameterError(f"block_txs must be >= 0, got {self.block_txs}")

    @property
    def total_nodes(self) -> int:
        return self.shards * self.jury_size

    @property
    def halt_threshold(self) -> int:
        """Adversary seats needed in one jury to block any sentence."""
        return self.jury_size - self.threshold + 1

    @classmethod
    def from_population(
        cls,
        total_nodes: int,
        shards: int,
        threshold: int,
        adversaries: int,
        **kwargs,
    ) -> "SystemParams":
        """Derive jury_size = total_nodes // shards, ignoring the remainder."""
        if shards < 1:
            raise ParameterError(f"shards must be >= 1, got {shards}")
        jury_size = total_nodes // shards
        if jury_size < 1:
            raise ParameterError(
                f"population {total_nodes} cannot fill {shards} juries"
            )
        adversaries = min(adversaries, shards * jury_size)
        return cls(
            shards=shards,
            jury_size=jury_size,
            threshold=threshold,
            adversaries=adversaries,
            **kwargs,
        )


@dataclass(frozen=True)
class AdversaryAllocation:
    """Per-occupation adversary head counts.

    ``counts[i]`` is how many of occupation ``i``'s members the adversary
    controls.  Feasibility against a shard count (each occupation has exactly
    ``shards`` members) is checked where the shard count is known.
    """

    counts: tuple

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if not counts:
            raise ParameterError("allocation needs at least one occupation")
        for i, c in enumerate(counts):
            if c < 0:
                raise ParameterError(f"counts[{i}] must be >= 0, got {c}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def occupations(self) -> int:
        return len(self.counts)

    def check_feasible(self, shards: int) -> None:
        """Every occupation has only ``shards`` members to corrupt."""
        for i, c in enumerate(self.counts):
            if c > shards:
                raise ParameterError(
                    f"counts[{i}]={c} exceeds the {shards} members of occupation {i}"
                )

    def __iter__(self):
        return iter(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, i):
        return self.counts[i]
