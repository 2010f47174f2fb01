import math

import pytest

from beablekit.toyqm import (
    Branch,
    Lump,
    ScenarioError,
    ToyConfig,
    build_bell,
    build_single_system,
    enumerate_worlds,
    sample_world,
    state_at,
)


def single_config(a=0.6, b=0.8, x1=0.0, x2=4.0, t1=5.0, T=100.0, mass=1.0):
    return ToyConfig(a=a, b=b, x1=x1, x2=x2, t1=t1, T=T, mass=mass)


def bell_config(a=1 / math.sqrt(2), b=1 / math.sqrt(2), T=300.0):
    return ToyConfig(a=a, b=b, x1=0.0, x2=4.0, x3=100.0, x4=104.0, t1=5.0, T=T)


def test_single_system_worldlines():
    bs = build_single_system(single_config())
    first, second = bs.branches
    # Reflection events: photon launched at (0, -5) moving right.
    assert len(first.photons[0].reflections) == 1
    assert first.photons[0].pieces[1][0].t == 5.0
    assert first.photons[0].pieces[1][0].x == 0.0
    assert second.photons[0].pieces[1][0].t == 9.0
    assert second.photons[0].pieces[1][0].x == 4.0
    # Registration positions on t = T: x1 + t1 - T and x2 + t2 - T.
    assert first.photons[0].registration.x == -95.0
    assert second.photons[0].registration.x == -87.0
    assert first.photons[0].registration.t == 100.0


def test_worldline_continuity_and_unit_slope():
    bs = build_single_system(single_config())
    ph = bs.branches[0].photons[0]
    eps = 1e-9
    for t_refl in (5.0,):
        before = ph.position_at(t_refl - eps)
        at = ph.position_at(t_refl)
        after = ph.position_at(t_refl + eps)
        assert abs(at - before) <= 2 * eps
        assert abs(after - at) <= 2 * eps
    # Unit speed on each side of the reflection.
    assert ph.position_at(3.0) - ph.position_at(2.0) == pytest.approx(1.0, abs=1e-12)
    assert ph.position_at(8.0) - ph.position_at(7.0) == pytest.approx(-1.0, abs=1e-12)


def test_branches_share_photon_position_before_reflection():
    bs = build_single_system(single_config())
    for t in (0.0, 1.5, 4.999):
        state = state_at(bs, t)
        (_, ph_first, _), (_, ph_second, _) = state
        assert ph_first == ph_second  # identical incoming trajectory until x1


def test_state_at_reports_amplitudes_and_lumps():
    bs = build_single_system(single_config())
    state = state_at(bs, 2.0)
    assert state[0][0] == 0.6 and state[1][0] == 0.8
    assert state[0][2] == (0.0,) and state[1][2] == (4.0,)
    total = sum(abs(amp) ** 2 for amp, _, _ in state)
    assert abs(total - 1.0) <= 1e-12


def test_state_at_range_errors():
    bs = build_single_system(single_config())
    with pytest.raises(ValueError):
        state_at(bs, -0.1)
    with pytest.raises(ValueError):
        state_at(bs, 100.1)


def test_enumerate_worlds_single():
    bs = build_single_system(single_config())
    worlds = enumerate_worlds(bs)
    assert [w.branch_index for w in worlds] == [0, 1]
    assert worlds[0].probability == pytest.approx(0.36, abs=1e-12)
    assert worlds[1].probability == pytest.approx(0.64, abs=1e-12)
    assert sum(w.probability for w in worlds) == pytest.approx(1.0, abs=1e-12)
    # Each world records its photon and its lump.
    kinds0 = {(r.kind, r.position) for r in worlds[0].registrations}
    assert kinds0 == {("photon", -95.0), ("lump", 0.0)}
    kinds1 = {(r.kind, r.position) for r in worlds[1].registrations}
    assert kinds1 == {("photon", -87.0), ("lump", 4.0)}
    mags = {r.kind: r.magnitude for r in worlds[0].registrations}
    assert mags == {"photon": 1.0, "lump": 1.0}


def test_degenerate_amplitude_keeps_single_branch():
    bs = build_single_system(single_config(a=1.0, b=0.0))
    assert len(bs.branches) == 1
    worlds = enumerate_worlds(bs)
    assert len(worlds) == 1
    assert worlds[0].probability == pytest.approx(1.0, abs=1e-15)


def test_config_validation_errors():
    with pytest.raises(ValueError, match="not normalized"):
        single_config(a=0.8, b=0.8)
    with pytest.raises(ValueError, match="x1 < x2"):
        single_config(x1=4.0, x2=0.0)
    with pytest.raises(ValueError, match="t1 must be positive"):
        single_config(t1=0.0)
    with pytest.raises(ValueError, match="after the last reflection"):
        single_config(T=9.0)  # t2 = 9 exactly: surface not strictly later
    with pytest.raises(ValueError, match="x2 < x3 < x4"):
        ToyConfig(a=0.6, b=0.8, x1=0.0, x2=4.0, x3=3.0, x4=104.0, t1=5.0, T=300.0)
    with pytest.raises(ValueError, match="both x3 and x4"):
        ToyConfig(a=0.6, b=0.8, x1=0.0, x2=4.0, x3=100.0, t1=5.0, T=300.0)
    with pytest.raises(ScenarioError):
        build_bell(single_config())
    with pytest.raises(ScenarioError):
        build_single_system(bell_config())


def test_branch_rejects_zero_amplitude():
    with pytest.raises(ValueError):
        Branch(amplitude=0.0, lumps=(Lump("s", 0.0, 1.0),), photons=())


def test_config_json_round_trip():
    cfg = bell_config()
    back = ToyConfig.from_json(__import__("json").dumps(cfg.to_dict()))
    assert back == cfg
    with pytest.raises(ValueError, match="unknown config fields"):
        ToyConfig.from_dict({"a": 1.0, "b": 0.0, "x1": 0, "x2": 4, "t1": 5, "T": 100, "zz": 1})


def test_complex_amplitudes_accepted():
    a = complex(0.6, 0.0)
    b = complex(0.0, 0.8)
    bs = build_single_system(single_config(a=a, b=b))
    worlds = enumerate_worlds(bs)
    assert worlds[0].probability == pytest.approx(0.36, abs=1e-12)
    assert worlds[1].probability == pytest.approx(0.64, abs=1e-12)


def test_bell_worldlines_and_worlds():
    bs = build_bell(bell_config())
    outer, inner = bs.branches
    t1, t_r = 5.0, 5.0
    T = 300.0
    # Outer branch: reflections at (t1, x1) and (t_r, x4).
    assert outer.photons[0].pieces[1][0] .t == t1
    assert outer.photons[0].pieces[1][0].x == 0.0
    assert outer.photons[1].pieces[1][0].t == t_r
    assert outer.photons[1].pieces[1][0].x == 104.0
    # Inner branch: left photon passes x1 (no lump there) and reflects at x2.
    assert inner.photons[0].pieces[1][0].t == 9.0
    assert inner.photons[0].pieces[1][0].x == 4.0
    t3 = t_r + (104.0 - 100.0)
    assert inner.photons[1].pieces[1][0].t == t3
    assert inner.photons[1].pieces[1][0].x == 100.0
    # Registrations: outgoing photons on both wings plus the two lumps.
    worlds = enumerate_worlds(bs)
    outer_regs = {(r.kind, r.position) for r in worlds[0].registrations}
    assert outer_regs == {
        ("photon", 0.0 + t1 - T),
        ("photon", 104.0 + (T - t_r)),
        ("lump", 0.0),
        ("lump", 104.0),
    }
    inner_regs = {(r.kind, r.position) for r in worlds[1].registrations}
    assert inner_regs == {
        ("photon", 4.0 + 9.0 - T),
        ("photon", 100.0 + (T - t3)),
        ("lump", 4.0),
        ("lump", 100.0),
    }
    assert worlds[0].probability == pytest.approx(0.5, abs=1e-12)
    assert worlds[1].probability == pytest.approx(0.5, abs=1e-12)


def test_normalization_constant_in_time():
    bs = build_bell(bell_config())
    for t in (0.0, 2.5, 7.0, 150.0, 299.0):
        total = sum(abs(amp) ** 2 for amp, _, _ in state_at(bs, t))
        assert abs(total - 1.0) <= 1e-12


def test_sample_world_deterministic_and_born_distributed():
    bs = build_single_system(single_config())
    w1 = sample_world(bs, seed=123)
    w2 = sample_world(bs, seed=123)
    assert w1 == w2
    n = 100_000
    hits = sum(sample_world(bs, seed=s).branch_index == 0 for s in range(n))
    freq = hits / n
    sigma = math.sqrt(0.36 * 0.64 / n)
    assert abs(freq - 0.36) <= 3 * sigma
