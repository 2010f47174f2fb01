"""Flat 1+1-dimensional spacetime: events, intervals, causal structure, boosts.

Everything here works in units with c = 1.  An event is a point (t, x); the
squared invariant interval between two events is dt^2 - dx^2, positive for
timelike separation and negative for spacelike separation.  Causal
classification carries a small tolerance on the squared interval so that
numerically lightlike pairs are not misclassified by rounding; the default is
calibrated for desk-scale geometry (coordinates up to ~1e3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

DEFAULT_INTERVAL_TOL = 1e-9


class CausalRelation(Enum):
    """How a second event sits relative to a first one."""

    COINCIDENT = "coincident"
    FUTURE_TIMELIKE = "future-timelike"
    PAST_TIMELIKE = "past-timelike"
    FUTURE_LIGHTLIKE = "future-lightlike"
    PAST_LIGHTLIKE = "past-lightlike"
    SPACELIKE = "spacelike"


@dataclass(frozen=True)
class Event:
    """A point of 1+1 Minkowski spacetime, coordinates (t, x)."""

    t: float
    x: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise ValueError(f"event coordinates must be finite, got t={self.t!r} x={self.x!r}")


class InvalidBoostError(ValueError):
    pass


@dataclass(frozen=True)
class Boost:
    """A boost along x with velocity v, |v| < 1 strictly."""

    v: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and abs(self.v) < 1.0):
            raise InvalidBoostError(f"boost velocity must satisfy |v| < 1, got {self.v!r}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)


def interval2(e1: Event, e2: Event) -> float:
    """Squared invariant interval dt^2 - dx^2 between two events."""
    dt = e2.t - e1.t
    dx = e2.x - e1.x
    return dt * dt - dx * dx


def causal_relation(e1: Event, e2: Event, tol: float = DEFAULT_INTERVAL_TOL) -> CausalRelation:
    """Classify e2 relative to e1.

    |interval2| <= tol counts as lightlike when the events are not coincident;
    the sign of dt then splits future from past.
    """
    dt = e2.t - e1.t
    dx = e2.x - e1.x
    s2 = dt * dt - dx * dx
    if abs(s2) <= tol:
        if dt > 0.0:
            return CausalRelation.FUTURE_LIGHTLIKE
        if dt < 0.0:
            return CausalRelation.PAST_LIGHTLIKE
        # dt == 0 with |s2| <= tol forces dx^2 <= tol: same event to tolerance.
        return CausalRelation.COINCIDENT
    if s2 > 0.0:
        return CausalRelation.FUTURE_TIMELIKE if dt > 0.0 else CausalRelation.PAST_TIMELIKE
    return CausalRelation.SPACELIKE


_OUTSIDE_FUTURE = frozenset(
    {CausalRelation.SPACELIKE, CausalRelation.PAST_TIMELIKE, CausalRelation.PAST_LIGHTLIKE}
)


def strictly_outside_future_cone(
    apex: Event, probe: Event, tol: float = DEFAULT_INTERVAL_TOL
) -> bool:
    """True iff probe lies strictly outside the closed future light cone of apex.

    Spacelike separation and the causal past (including its lightlike boundary)
    both count as outside; the apex itself and the future lightlike boundary do
    not.  This is the membership test for conditioning regions: data on the
    cone itself carries no usable record and is excluded.
    """
    return causal_relation(apex, probe, tol) in _OUTSIDE_FUTURE


def boost_event(e: Event, b: Boost) -> Event:
    """Image of an event under a boost of velocity v along x (c = 1)."""
    g = b.gamma
    return Event(t=g * (e.t - b.v * e.x), x=g * (e.x - b.v * e.t))
