"""Two-branch photon/lump toy scenarios with a late registration surface.

A scenario is a superposition of two rigid configurations ("branches") of
point lumps on a line, probed by photons moving at c = 1.  Each branch carries
its own copy of every photon; a photon reflects elastically off the first lump
it meets in its branch (direction reverses, no recoil, energy unchanged).
Branch bookkeeping starts at t = 0.  At the late time T each branch registers
its photons and its lumps on the surface t = T as labelled points
(position, kind, magnitude); a photon registers a fixed nominal energy 1, a
lump registers its mass.  One branch is then selected with Born probability
|amplitude|^2 as the realized final condition.

Two scenario builders are provided: a single system in a superposition of two
locations (lump at x1 or at x2, one photon incoming from the left), and a
two-wing arrangement (lumps at x1 & x4, or at x2 & x3, with photons incoming
from both sides) whose anticorrelated outcomes feed the locality audits.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .spacetime import Event

AMP_NORM_TOL = 1e-12
PHOTON_ENERGY = 1.0  # nominal energy registered by a photon on the late surface

KIND_PHOTON = "photon"
KIND_LUMP = "lump"


class ScenarioError(ValueError):
    """A scenario of the wrong shape was passed (e.g. two-wing where single expected)."""


@dataclass(frozen=True)
class ToyConfig:
    """Parameters of a toy scenario.

    a, b are the branch amplitudes (|a|^2 + |b|^2 = 1).  x1 < x2 are the two
    candidate lump sites; a two-wing scenario additionally sets x3 < x4 to the
    right of x2.  The left photon is launched at (t=0, x1 - t1) moving right,
    so t1 > 0 is the time of its first possible reflection at x1.  In the
    two-wing case a second photon is launched at (t=0, x4 + t_right) moving
    left (t_right defaults to t1).  T is the registration-surface time and
    must lie strictly after every reflection.
    """

    a: complex
    b: complex
    x1: float
    x2: float
    t1: float
    T: float
    mass: float = 1.0
    x3: float | None = None
    x4: float | None = None
    t_right: float | None = None

    def __post_init__(self) -> None:
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > AMP_NORM_TOL:
            raise ValueError(
                "amplitudes are not normalized: |a|^2 + |b|^2 = "
                f"{abs(self.a) ** 2 + abs(self.b) ** 2!r}"
            )
        if not self.x2 > self.x1:
            raise ValueError(f"lump sites must satisfy x1 < x2, got {self.x1!r}, {self.x2!r}")
        if not self.t1 > 0.0:
            raise ValueError(f"t1 must be positive (photon starts left of x1 at t=0), got {self.t1!r}")
        if not self.mass > 0.0:
            raise ValueError(f"mass must be positive, got {self.mass!r}")
        if (self.x3 is None) != (self.x4 is None):
            raise ValueError("a two-wing scenario needs both x3 and x4")
        if self.is_bell:
            if not (self.x2 < self.x3 < self.x4):
                raise ValueError(
                    f"two-wing sites must satisfy x2 < x3 < x4, got {self.x2!r}, {self.x3!r}, {self.x4!r}"
                )
            if not self.right_reach_time > 0.0:
                raise ValueError(f"t_right must be positive, got {self.t_right!r}")
        last = self.last_reflection_time
        if not self.T > last:
            raise ValueError(
                f"surface time T={self.T!r} must lie strictly after the last reflection at t={last!r}"
            )

    @property
    def is_bell(self) -> bool:
        return self.x3 is not None

    @property
    def t2(self) -> float:
        """Time the left photon reaches x2 if it was not stopped at x1."""
        return self.t1 + (self.x2 - self.x1)

    @property
    def right_reach_time(self) -> float:
        """Time the right photon reaches x4 (two-wing scenarios)."""
        return self.t1 if self.t_right is None else self.t_right

    @property
    def last_reflection_time(self) -> float:
        if self.is_bell:
            assert self.x3 is not None and self.x4 is not None
            return max(self.t2, self.right_reach_time + (self.x4 - self.x3))
        return self.t2

    def to_dict(self) -> dict:
        def enc(z: complex):
            return z.real if z.imag == 0.0 else [z.real, z.imag]

        out = {
            "a": enc(complex(self.a)),
            "b": enc(complex(self.b)),
            "x1": self.x1,
            "x2": self.x2,
            "t1": self.t1,
            "T": self.T,
            "mass": self.mass,
        }
        if self.is_bell:
            out.update({"x3": self.x3, "x4": self.x4})
            if self.t_right is not None:
                out["t_right"] = self.t_right
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ToyConfig":
        def dec(v) -> complex:
            if isinstance(v, (int, float)):
                return complex(v)
            if isinstance(v, str):
                return complex(v)
            if isinstance(v, (list, tuple)) and len(v) == 2:
                return complex(v[0], v[1])
            raise ValueError(f"cannot read amplitude from {v!r}")

        known = {"a", "b", "x1", "x2", "t1", "T", "mass", "x3", "x4", "t_right"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(doc)
        kwargs["a"] = dec(kwargs["a"])
        kwargs["b"] = dec(kwargs["b"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ToyConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Lump:
    """A point lump: a system that can reflect photons, pinned at one position."""

    system_id: str
    position: float
    mass: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.position) and self.mass > 0.0):
            raise ValueError(f"bad lump: position={self.position!r} mass={self.mass!r}")


@dataclass(frozen=True)
class PhotonWorldline:
    """A piecewise-lightlike worldline: straight pieces with direction +/-1.

    Each piece starts at an event and runs at dx/dt = direction until the next
    piece begins; the final piece runs to the registration surface t = T,
    where the photon registers at ``registration``.
    """

    pieces: tuple[tuple[Event, int], ...]
    registration: Event

    def position_at(self, t: float) -> float:
        """Position at lab time t (valid from launch up to the surface)."""
        start, direction = self.pieces[0]
        for piece_start, piece_dir in self.pieces[1:]:
            if t < piece_start.t:
                break
            start, direction = piece_start, piece_dir
        return start.x + direction * (t - start.t)

    @property
    def reflections(self) -> tuple[Event, ...]:
        return tuple(start for start, _ in self.pieces[1:])


def _trace_photon(launch_x: float, direction: int, lump_positions: Sequence[float], T: float) -> PhotonWorldline:
    """Propagate a photon from (t=0, launch_x), reflecting off each lump it meets."""
    pieces = [(Event(0.0, launch_x), direction)]
    t, x, d = 0.0, launch_x, direction
    while True:
        ahead = [p for p in lump_positions if (p - x) * d > 0.0]
        if not ahead:
            break
        nearest = min(ahead, key=lambda p: (p - x) * d)
        t_hit = t + (nearest - x) * d
        if t_hit >= T:
            break
        d = -d
        t, x = t_hit, nearest
        pieces.append((Event(t, x), d))
    return PhotonWorldline(
        pieces=tuple(pieces),
        registration=Event(T, x + d * (T - t)),
    )


@dataclass(frozen=True)
class Branch:
    """One superposition component: an amplitude, its lumps, its photon copies."""

    amplitude: complex
    lumps: tuple[Lump, ...]
    photons: tuple[PhotonWorldline, ...]

    def __post_init__(self) -> None:
        if abs(self.amplitude) == 0.0:
            raise ValueError("branch amplitude must be nonzero")

    @property
    def weight(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class Registration:
    """A labelled point on the registration surface."""

    position: float
    kind: str  # "photon" or "lump"
    magnitude: float


@dataclass(frozen=True)
class FinalCondition:
    """One Born-selected world: the registrations of a single branch."""

    registrations: tuple[Registration, ...]
    branch_index: int
    probability: float


@dataclass(frozen=True)
class BranchSet:
    """All branches of a scenario, with the registration surface at t = T."""

    branches: tuple[Branch, ...]
    surface_time: float
    config: ToyConfig
    kind: str  # "single" or "bell"

    def __post_init__(self) -> None:
        total = sum(br.weight for br in self.branches)
        if abs(total - 1.0) > AMP_NORM_TOL:
            raise ValueError(f"branch weights must sum to 1, got {total!r}")
        for br in self.branches:
            for ph in br.photons:
                if ph.registration.t != self.surface_time:
                    raise ValueError("photon registration must lie on the surface t = T")
                for refl in ph.reflections:
                    if not refl.t < self.surface_time:
                        raise ValueError("every reflection must precede the surface time")

    def branch_registrations(self, index: int) -> tuple[Registration, ...]:
        """Registrations of one branch, sorted by position (photons then lumps on ties)."""
        br = self.branches[index]
        regs = [
            Registration(ph.registration.x, KIND_PHOTON, PHOTON_ENERGY) for ph in br.photons
        ] + [Registration(lp.position, KIND_LUMP, lp.mass) for lp in br.lumps]
        regs.sort(key=lambda r: (r.position, r.kind))
        return tuple(regs)


def _distinct_registrations(bs: BranchSet, min_gap: float = 1e-6) -> None:
    # Conditioning compares registration patterns between branches; the builders
    # guarantee that registrations of different branches never nearly coincide,
    # which keeps those comparisons unambiguous at any sane match tolerance.
    positions: list[tuple[float, int]] = []
    for i in range(len(bs.branches)):
        positions.extend((r.position, i) for r in bs.branch_registrations(i))
    positions.sort()
    for (p1, i1), (p2, i2) in zip(positions, positions[1:]):
        if i1 != i2 and abs(p2 - p1) < min_gap:
            raise ValueError(
                f"registrations of different branches nearly coincide at x={p1!r}; "
                "choose better-separated sites or launch times"
            )


def build_single_system(config: ToyConfig) -> BranchSet:
    """Superposition of one lump at x1 (amplitude a) or at x2 (amplitude b)."""
    if config.is_bell:
        raise ScenarioError("config has two-wing sites; use build_bell")
    launch = config.x1 - config.t1
    branches = []
    for amp, site in ((config.a, config.x1), (config.b, config.x2)):
        if abs(amp) == 0.0:
            continue  # zero-weight branch: drop it entirely
        lump = Lump("s", site, config.mass)
        photon = _trace_photon(launch, +1, (site,), config.T)
        branches.append(Branch(amplitude=amp, lumps=(lump,), photons=(photon,)))
    bs = BranchSet(tuple(branches), config.T, config, kind="single")
    _distinct_registrations(bs)
    return bs


def build_bell(config: ToyConfig) -> BranchSet:
    """Two-wing superposition: lumps at (x1, x4) with amplitude a, or (x2, x3) with b.

    The left photon comes in from the left and meets the left-wing lump; the
    right photon comes in from the right and meets the right-wing lump.  The
    outer pair (x1, x4) reflects both photons earlier on its wing than the
    inner pair (x2, x3) does, so the four registrations separate the branches.
    """
    if not config.is_bell:
        raise ScenarioError("config has no two-wing sites; use build_single_system")
    assert config.x3 is not None and config.x4 is not None
    launch_left = config.x1 - config.t1
    launch_right = config.x4 + config.right_reach_time
    pairs = (
        (config.a, (config.x1, config.x4)),
        (config.b, (config.x2, config.x3)),
    )
    branches = []
    for amp, (left_site, right_site) in pairs:
        if abs(amp) == 0.0:
            continue
        lumps = (Lump("L", left_site, config.mass), Lump("R", right_site, config.mass))
        sites = (left_site, right_site)
        photons = (
            _trace_photon(launch_left, +1, sites, config.T),
            _trace_photon(launch_right, -1, sites, config.T),
        )
        branches.append(Branch(amplitude=amp, lumps=lumps, photons=photons))
    bs = BranchSet(tuple(branches), config.T, config, kind="bell")
    _distinct_registrations(bs)
    return bs


def state_at(bs: BranchSet, t: float) -> tuple[tuple[complex, tuple[float, ...], tuple[float, ...]], ...]:
    """Per-branch (amplitude, photon positions, lump positions) at lab time t."""
    if not 0.0 <= t <= bs.surface_time:
        raise ValueError(f"t={t!r} outside the scenario's time range [0, {bs.surface_time!r}]")
    return tuple(
        (
            br.amplitude,
            tuple(ph.position_at(t) for ph in br.photons),
            tuple(lp.position for lp in br.lumps),
        )
        for br in bs.branches
    )


def enumerate_worlds(bs: BranchSet) -> tuple[FinalCondition, ...]:
    """All candidate final conditions with their Born probabilities (sum to 1)."""
    return tuple(
        FinalCondition(
            registrations=bs.branch_registrations(i),
            branch_index=i,
            probability=bs.branches[i].weight,
        )
        for i in range(len(bs.branches))
    )


def sample_world(bs: BranchSet, seed: int) -> FinalCondition:
    """Born-select one world, deterministically in the seed."""
    worlds = enumerate_worlds(bs)
    r = random.Random(seed).random()
    acc = 0.0
    for w in worlds:
        acc += w.probability
        if r < acc:
            return w
    return worlds[-1]
