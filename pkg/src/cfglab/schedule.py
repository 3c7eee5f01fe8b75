"""Guidance schedules: the time profile w(t) applied to the guided drift."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError

__all__ = ["Constant", "Linear", "GuidanceSchedule", "guidance_level"]


@dataclass(frozen=True)
class Constant:
    """Fixed guidance level.  w > -1/2 so the horizon -> inf variance converges."""

    w: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.w) or self.w <= -0.5:
            raise DomainError(f"constant schedule requires w > -1/2, got {self.w}")


@dataclass(frozen=True)
class Linear:
    """Ramped guidance w(t) = w0 + omega * t.

    omega > 0 with w0 < 0 opens a negative-guidance window on [0, -w0/omega).
    """

    w0: float
    omega: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.w0) or self.w0 < -1.0:
            raise DomainError(f"linear schedule requires w0 >= -1, got {self.w0}")
        if not math.isfinite(self.omega) or self.omega < 0.0:
            raise DomainError(f"linear schedule requires omega >= 0, got {self.omega}")


GuidanceSchedule = Union[Constant, Linear]


def guidance_level(schedule: GuidanceSchedule, t: float) -> float:
    """Evaluate w(t)."""
    if isinstance(schedule, Constant):
        return schedule.w
    return schedule.w0 + schedule.omega * t
