"""Log-domain probabilities with an optional exact rational form.

Shard-failure figures span hundreds of orders of magnitude, far below what a
float can hold, so probabilities are carried as natural logs.  Values produced
by exact big-integer arithmetic additionally keep their ``Fraction`` form, which
serializes as a ``numerator/denominator`` decimal string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

__all__ = ["LogProb", "log_of_fraction"]

# Exact forms must reproduce their log to this relative precision.
_LOG_AGREEMENT_RTOL = 1e-12

_LN10 = math.log(10.0)


def log_of_fraction(value: Fraction) -> float:
    """Natural log of a non-negative rational, accurate even for huge terms.

    ``math.log`` takes arbitrary-size ints exactly, so splitting into
    log(num) - log(den) is safe except near 1, where the subtraction cancels;
    that band goes through ``log1p`` on the exact difference instead.
    """
    if value < 0:
        raise ValueError(f"probability cannot be negative: {value}")
    if value == 0:
        return float("-inf")
    num, den = value.numerator, value.denominator
    if Fraction(1, 2) <= value <= 2:
        return math.log1p(float(Fraction(num - den, den)))
    return math.log(num) - math.log(den)


@dataclass(frozen=True)
class LogProb:
    """A probability in [0, 1] stored as its natural log.

    ``log_value`` is -inf for probability zero.  When the value came out of
    exact arithmetic, ``exact`` holds the reduced rational and is the
    authoritative form; ``log_value`` is derived from it.
    """

    log_value: float
    exact: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if math.isnan(self.log_value):
            raise ValueError("log probability cannot be NaN")
        if self.log_value > 0.0:
            raise ValueError(f"log probability must be <= 0, got {self.log_value}")
        if self.exact is not None:
            if not 0 <= self.exact <= 1:
                raise ValueError(f"exact probability out of [0, 1]: {self.exact}")
            expected = log_of_fraction(self.exact)
            scale = max(1.0, abs(expected)) if math.isfinite(expected) else None
            if scale is None:
                if not math.isinf(self.log_value):
                    raise ValueError("exact form is 0 but log_value is finite")
            elif abs(self.log_value - expected) > _LOG_AGREEMENT_RTOL * scale:
                raise ValueError(
                    f"log_value {self.log_value} disagrees with exact form "
                    f"{self.exact} (log {expected})"
                )

    @classmethod
    def from_exact(cls, value: Union[Fraction, int]) -> "LogProb":
        frac = Fraction(value)
        return cls(log_value=log_of_fraction(frac), exact=frac)

    @classmethod
    def from_float(cls, p: float) -> "LogProb":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of [0, 1]: {p}")
        return cls(log_value=math.log(p) if p > 0.0 else float("-inf"))

    @classmethod
    def from_log(cls, log_value: float) -> "LogProb":
        return cls(log_value=log_value)

    @classmethod
    def zero(cls) -> "LogProb":
        return cls.from_exact(0)

    @classmethod
    def one(cls) -> "LogProb":
        return cls.from_exact(1)

    @property
    def is_zero(self) -> bool:
        return self.exact == 0 if self.exact is not None else math.isinf(self.log_value)

    @property
    def log10(self) -> float:
        return self.log_value / _LN10

    def to_float(self) -> float:
        """Best-effort float value; underflows to 0.0 below float range."""
        if self.exact is not None:
            # big-int true division rounds correctly and underflows gracefully
            return self.exact.numerator / self.exact.denominator
        return math.exp(self.log_value)

    def exact_str(self) -> Optional[str]:
        """Serialized rational, e.g. ``"9/2500"``, or None when inexact."""
        return None if self.exact is None else str(self.exact)

    def mul(self, other: "LogProb") -> "LogProb":
        if self.exact is not None and other.exact is not None:
            return LogProb.from_exact(self.exact * other.exact)
        return LogProb(log_value=self.log_value + other.log_value)

    def __le__(self, other: "LogProb") -> bool:
        if self.exact is not None and other.exact is not None:
            return self.exact <= other.exact
        return self.log_value <= other.log_value

    def __lt__(self, other: "LogProb") -> bool:
        if self.exact is not None and other.exact is not None:
            return self.exact < other.exact
        return self.log_value < other.log_value
