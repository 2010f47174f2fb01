import math
import random

import pytest

from beablekit.spacetime import (
    Boost,
    CausalRelation,
    Event,
    InvalidBoostError,
    boost_event,
    causal_relation,
    interval2,
    strictly_outside_future_cone,
)


def test_interval2_basic_values():
    assert interval2(Event(0, 0), Event(5, 3)) == 25 - 9
    assert interval2(Event(0, 0), Event(1, 2)) == 1 - 4
    assert interval2(Event(2, 7), Event(2, 7)) == 0.0


def test_interval2_is_symmetric():
    e1, e2 = Event(1.5, -3.0), Event(4.0, 2.5)
    assert interval2(e1, e2) == interval2(e2, e1)


def test_causal_relation_classification():
    o = Event(0, 0)
    assert causal_relation(o, o) is CausalRelation.COINCIDENT
    assert causal_relation(o, Event(2, 0.5)) is CausalRelation.FUTURE_TIMELIKE
    assert causal_relation(o, Event(-2, 0.5)) is CausalRelation.PAST_TIMELIKE
    assert causal_relation(o, Event(1, 1)) is CausalRelation.FUTURE_LIGHTLIKE
    assert causal_relation(o, Event(-1, 1)) is CausalRelation.PAST_LIGHTLIKE
    assert causal_relation(o, Event(0.3, 2)) is CausalRelation.SPACELIKE
    assert causal_relation(o, Event(0, 2)) is CausalRelation.SPACELIKE


def test_causal_relation_tolerance_near_cone():
    # Slightly inside/outside the cone but within the interval tolerance: lightlike.
    o = Event(0, 0)
    assert causal_relation(o, Event(1.0, 1.0 + 1e-12)) is CausalRelation.FUTURE_LIGHTLIKE
    assert causal_relation(o, Event(1.0, 1.0 - 1e-12)) is CausalRelation.FUTURE_LIGHTLIKE
    # Well outside tolerance: classified by the interval sign.
    assert causal_relation(o, Event(1.0, 1.0 + 1e-3)) is CausalRelation.SPACELIKE
    assert causal_relation(o, Event(1.0, 1.0 - 1e-3)) is CausalRelation.FUTURE_TIMELIKE


_REVERSE = {
    CausalRelation.COINCIDENT: CausalRelation.COINCIDENT,
    CausalRelation.FUTURE_TIMELIKE: CausalRelation.PAST_TIMELIKE,
    CausalRelation.PAST_TIMELIKE: CausalRelation.FUTURE_TIMELIKE,
    CausalRelation.FUTURE_LIGHTLIKE: CausalRelation.PAST_LIGHTLIKE,
    CausalRelation.PAST_LIGHTLIKE: CausalRelation.FUTURE_LIGHTLIKE,
    CausalRelation.SPACELIKE: CausalRelation.SPACELIKE,
}


def test_causal_relation_time_reversal_symmetry():
    rng = random.Random(20)
    for _ in range(500):
        e1 = Event(rng.uniform(-50, 50), rng.uniform(-50, 50))
        e2 = Event(rng.uniform(-50, 50), rng.uniform(-50, 50))
        assert causal_relation(e2, e1) is _REVERSE[causal_relation(e1, e2)]


def test_strictly_outside_future_cone():
    apex = Event(0, 0)
    assert not strictly_outside_future_cone(apex, Event(1, 1))  # on the cone: excluded
    assert not strictly_outside_future_cone(apex, Event(2, 1))  # inside
    assert not strictly_outside_future_cone(apex, apex)  # the apex itself
    assert strictly_outside_future_cone(apex, Event(0, 1))  # spacelike
    assert strictly_outside_future_cone(apex, Event(-1, 0))  # causal past counts as outside
    assert strictly_outside_future_cone(apex, Event(-1, 1))  # past lightlike too


def test_strictly_outside_registration_geometry():
    # A photon registered at (T, x1 + t1 - T) after reflecting at (t1, x1) is
    # outside the future cone of (t, x2) exactly when t > 2 t1 - t2, and outside
    # the cone of (t, x1) exactly when t > t1 (here x1=0, x2=4, t1=5, t2=9, T=100).
    x1, x2, t1, big_t = 0.0, 4.0, 5.0, 100.0
    t2 = t1 + (x2 - x1)
    reg = Event(big_t, x1 + t1 - big_t)
    for t in (0.2, 0.999, 1.001, 4.0, 5.5, 60.0):
        assert strictly_outside_future_cone(Event(t, x2), reg) is (t > 2 * t1 - t2)
        assert strictly_outside_future_cone(Event(t, x1), reg) is (t > t1)


def test_boost_event_known_value():
    # v = 0.6 gives gamma = 1.25; (1, 1) maps to (0.5, 0.5).
    out = boost_event(Event(1.0, 1.0), Boost(0.6))
    assert math.isclose(out.t, 0.5, abs_tol=1e-12)
    assert math.isclose(out.x, 0.5, abs_tol=1e-12)


def test_boost_identity_and_inverse():
    e = Event(3.7, -1.2)
    assert boost_event(e, Boost(0.0)) == e
    back = boost_event(boost_event(e, Boost(0.8)), Boost(-0.8))
    assert math.isclose(back.t, e.t, abs_tol=1e-12)
    assert math.isclose(back.x, e.x, abs_tol=1e-12)


def test_boost_validation():
    with pytest.raises(InvalidBoostError):
        Boost(1.0)
    with pytest.raises(InvalidBoostError):
        Boost(-1.2)
    with pytest.raises(ValueError):
        Event(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Event(0.0, float("inf"))


def test_interval2_boost_invariant():
    rng = random.Random(7)
    for _ in range(500):
        e1 = Event(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3))
        e2 = Event(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3))
        b = Boost(rng.uniform(-0.99, 0.99))
        s2 = interval2(e1, e2)
        s2b = interval2(boost_event(e1, b), boost_event(e2, b))
        # Relative to the natural floating-point scale of the squared coordinates.
        scale = max(
            1.0,
            abs(s2),
            (e2.t - e1.t) ** 2 + (e2.x - e1.x) ** 2,
        ) * b.gamma**2
        assert abs(s2b - s2) <= 1e-9 * scale


def test_causal_relation_boost_invariant_away_from_cone():
    rng = random.Random(11)
    n = 0
    while n < 500:
        e1 = Event(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3))
        e2 = Event(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3))
        s2 = interval2(e1, e2)
        scale = max(1.0, (e2.t - e1.t) ** 2 + (e2.x - e1.x) ** 2)
        if abs(s2) < 1e-6 * scale:
            continue  # classification near the cone is tolerance-bound by design
        b = Boost(rng.uniform(-0.99, 0.99))
        assert causal_relation(boost_event(e1, b), boost_event(e2, b)) is causal_relation(e1, e2)
        n += 1


def test_lightlike_classification_boost_invariant_at_desk_scale():
    rng = random.Random(13)
    for _ in range(500):
        t0, x0 = rng.uniform(-10, 10), rng.uniform(-10, 10)
        d = rng.uniform(0.1, 10) * rng.choice([-1, 1])
        e1 = Event(t0, x0)
        e2 = Event(t0 + abs(d), x0 + d)  # exactly on the future cone of e1
        b = Boost(rng.uniform(-0.9, 0.9))
        rel = causal_relation(boost_event(e1, b), boost_event(e2, b))
        assert rel is CausalRelation.FUTURE_LIGHTLIKE


def test_strictly_outside_boost_invariant():
    rng = random.Random(17)
    n = 0
    while n < 500:
        apex = Event(rng.uniform(-100, 100), rng.uniform(-100, 100))
        probe = Event(rng.uniform(-100, 100), rng.uniform(-100, 100))
        s2 = interval2(apex, probe)
        scale = max(1.0, (probe.t - apex.t) ** 2 + (probe.x - apex.x) ** 2)
        if abs(s2) < 1e-6 * scale:
            continue
        b = Boost(rng.uniform(-0.9, 0.9))
        assert strictly_outside_future_cone(
            boost_event(apex, b), boost_event(probe, b)
        ) is strictly_outside_future_cone(apex, probe)
        n += 1
