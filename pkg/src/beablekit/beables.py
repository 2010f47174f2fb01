"""Conditional expected energy density ("beable" field) for toy scenarios.

The value assigned to an event y is a conditional expectation over branches:
condition the Born-selected final condition on the registrations that lie
strictly outside the future light cone of y, keep every branch whose own
registrations restricted to that region look the same (same positions within a
match tolerance, same kinds and magnitudes — absence of a registration is
itself information), renormalize the Born weights over the surviving branches,
and average the branch energy present at y (lump mass within the match
tolerance of y.x, plus the nominal energy of any photon worldline passing
through y).

Because the conditioning region is defined through the causal structure, the
whole construction is boost covariant: evaluating at boosted events against
the boosted scenario reproduces the original values.  ``beable_field_boosted``
exposes that evaluation directly for invariance checks.

The regime table summarizes the field at the lump sites of a single-system
scenario: the time axis splits into finitely many intervals (boundaries occur
where a registration crosses the edge of the apex's conditioning region) with
one constant value per site per interval.  Boundary instants are not assigned
to either neighbouring regime; they are reported as separate rows and, with
the strict cone exclusion used here, evaluate like the earlier regime.
"""

from __future__ import annotations

from dataclasses import dataclass

from .spacetime import Boost, Event, boost_event
from .toyqm import (
    PHOTON_ENERGY,
    BranchSet,
    FinalCondition,
    Registration,
    ScenarioError,
    ToyConfig,
    build_single_system,
    enumerate_worlds,
)

DEFAULT_MATCH_TOL = 1e-9  # spatial tolerance for matching registrations / locating energy
_MAGNITUDE_TOL = 1e-12


class ApexBeyondSurfaceError(ValueError):
    """The queried event does not precede the registration surface."""


# ---------------------------------------------------------------------------
# Internal geometry view.
#
# All evaluation runs against plain float tuples so that a boosted scenario is
# just the same data with every event mapped through the boost.  Per branch:
#   weight, regs:    ((t, x, kind, magnitude), ...) sorted by x
#   lumps:           ((t0, x0, t1, x1, mass), ...) straight track segments
#   photon segments: (((t0, x0, t1, x1), ...), ...) one tuple per photon
# ---------------------------------------------------------------------------


def _branch_views(bs: BranchSet, boost: Boost | None):
    T = bs.surface_time

    def ev(t: float, x: float) -> tuple[float, float]:
        if boost is None:
            return (t, x)
        e = boost_event(Event(t, x), boost)
        return (e.t, e.x)

    views = []
    for i, br in enumerate(bs.branches):
        regs = []
        for r in bs.branch_registrations(i):
            t, x = ev(T, r.position)
            regs.append((t, x, r.kind, r.magnitude))
        regs.sort(key=lambda r: r[1])
        lumps = []
        for lp in br.lumps:
            t0, x0 = ev(0.0, lp.position)
            t1, x1 = ev(T, lp.position)
            lumps.append((t0, x0, t1, x1, lp.mass))
        photons = []
        for ph in br.photons:
            endpoints = [start for start, _ in ph.pieces] + [ph.registration]
            segs = []
            for e0, e1 in zip(endpoints, endpoints[1:]):
                p0, p1 = ev(e0.t, e0.x), ev(e1.t, e1.x)
                segs.append((p0[0], p0[1], p1[0], p1[1]))
            photons.append(tuple(segs))
        views.append((br.weight, tuple(regs), tuple(lumps), tuple(photons)))
    return views


def _outside_future_cone(apex_t, apex_x, t, x, tol):
    dt = t - apex_t
    dx = x - apex_x
    s2 = dt * dt - dx * dx
    if abs(s2) <= tol:
        return dt < 0.0  # past lightlike counts as outside, future/coincident do not
    return s2 < 0.0 or dt < 0.0


def _restriction(view, apex_t, apex_x, tol):
    """Registrations of one branch that lie strictly outside the apex's future cone."""
    return tuple(
        r for r in view[1] if _outside_future_cone(apex_t, apex_x, r[0], r[1], tol)
    )


def _patterns_match(r1, r2, dx):
    if len(r1) != len(r2):
        return False
    for a, b in zip(r1, r2):  # both sorted by x
        if abs(a[1] - b[1]) > dx or a[2] != b[2] or abs(a[3] - b[3]) > _MAGNITUDE_TOL:
            return False
    return True


def _track_position(t0, x0, t1, x1, t):
    if not (t0 <= t <= t1):
        return None
    if t1 == t0:
        return x0
    return x0 + (x1 - x0) * ((t - t0) / (t1 - t0))


def _branch_energy(view, apex_t, apex_x, dx):
    total = 0.0
    for (t0, x0, t1, x1, mass) in view[2]:
        pos = _track_position(t0, x0, t1, x1, apex_t)
        if pos is not None and abs(pos - apex_x) <= dx:
            total += mass
    for segs in view[3]:
        for (t0, x0, t1, x1) in segs:
            pos = _track_position(t0, x0, t1, x1, apex_t)
            if pos is not None and abs(pos - apex_x) <= dx:
                total += PHOTON_ENERGY
                break  # a photon occupies one position at a time
    return total


def _consistent(views, selected: int, apex_t, apex_x, dx, tol):
    """Indices and renormalized Born weights of branches matching the selected one."""
    sel = _restriction(views[selected], apex_t, apex_x, tol)
    keep = []
    for i, view in enumerate(views):
        if i == selected or _patterns_match(_restriction(view, apex_t, apex_x, tol), sel, dx):
            keep.append(i)
    norm = sum(views[i][0] for i in keep)
    return [(i, views[i][0] / norm) for i in keep]


def _check_apex(bs: BranchSet, y: Event) -> None:
    if y.t >= bs.surface_time:
        raise ApexBeyondSurfaceError(
            f"apex t={y.t!r} lies on or beyond the registration surface t={bs.surface_time!r}"
        )


# ---------------------------------------------------------------------------
# Public operations.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditioningSet:
    """Per-branch registrations strictly outside the apex's future light cone.

    The region itself depends only on the apex and the surface; what differs
    between branches is which of their registrations fall inside it.
    """

    apex: Event
    used_registrations: tuple[tuple[Registration, ...], ...]


def conditioning_set(
    fc: FinalCondition,
    bs: BranchSet,
    y: Event,
    dx: float = DEFAULT_MATCH_TOL,
    tol: float = DEFAULT_MATCH_TOL,
) -> ConditioningSet:
    """Restrict every branch's registrations to the region outside y's future cone."""
    if not 0 <= fc.branch_index < len(bs.branches):
        raise ValueError("final condition does not belong to this branch set")
    _check_apex(bs, y)
    views = _branch_views(bs, None)
    per_branch = []
    for view in views:
        per_branch.append(
            tuple(Registration(x, kind, mag) for (_, x, kind, mag) in _restriction(view, y.t, y.x, tol))
        )
    return ConditioningSet(apex=y, used_registrations=tuple(per_branch))


def consistent_branches(
    bs: BranchSet,
    fc: FinalCondition,
    y: Event,
    dx: float = DEFAULT_MATCH_TOL,
    tol: float = DEFAULT_MATCH_TOL,
) -> tuple[tuple[int, float], ...]:
    """Branches indistinguishable from the selected world outside y's future cone.

    Returns (branch index, renormalized Born weight) pairs; the selected branch
    is always included and the weights sum to 1.
    """
    _check_apex(bs, y)
    views = _branch_views(bs, None)
    return tuple(_consistent(views, fc.branch_index, y.t, y.x, dx, tol))


def total_scenario_energy(bs: BranchSet) -> float:
    """Largest energy any single branch can concentrate at a point (mass + photons)."""
    return max(
        sum(lp.mass for lp in br.lumps) + len(br.photons) * PHOTON_ENERGY
        for br in bs.branches
    )


def beable_energy_density(
    bs: BranchSet,
    fc: FinalCondition,
    y: Event,
    dx: float = DEFAULT_MATCH_TOL,
    tol: float = DEFAULT_MATCH_TOL,
) -> float:
    """Conditional expected energy density at y given the selected world."""
    _check_apex(bs, y)
    views = _branch_views(bs, None)
    return sum(w * _branch_energy(views[i], y.t, y.x, dx) for i, w in
               _consistent(views, fc.branch_index, y.t, y.x, dx, tol))


@dataclass(frozen=True)
class GridSpec:
    """A rectangular sampling grid strictly inside the scenario's time range."""

    t_min: float
    t_max: float
    nt: int
    x_min: float
    x_max: float
    nx: int

    def __post_init__(self) -> None:
        if not (self.nt >= 1 and self.nx >= 1):
            raise ValueError("grid needs nt >= 1 and nx >= 1")
        if not (self.t_min <= self.t_max and self.x_min <= self.x_max):
            raise ValueError("grid bounds must be ordered")

    def times(self) -> tuple[float, ...]:
        return _linspace(self.t_min, self.t_max, self.nt)

    def positions(self) -> tuple[float, ...]:
        return _linspace(self.x_min, self.x_max, self.nx)


def _linspace(lo: float, hi: float, n: int) -> tuple[float, ...]:
    lo, hi = float(lo), float(hi)
    if n == 1:
        return (lo,)
    step = (hi - lo) / (n - 1)
    pts = [lo + i * step for i in range(n)]
    pts[-1] = hi
    return tuple(pts)


@dataclass(frozen=True)
class BeableField:
    """Sampled beable values: values[i][j] at time times[i], position positions[j]."""

    times: tuple[float, ...]
    positions: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]
    match_tol: float

    def to_csv(self) -> str:
        lines = ["t,x,value"]
        for t, row in zip(self.times, self.values):
            for x, v in zip(self.positions, row):
                lines.append(f"{t!r},{x!r},{v!r}")
        return "\n".join(lines) + "\n"


def _field_on_grid(bs, fc, grid, dx, tol, boost):
    if not (0.0 < grid.t_min and grid.t_max < bs.surface_time):
        raise ValueError(
            f"grid times must lie strictly inside (0, {bs.surface_time!r}), "
            f"got [{grid.t_min!r}, {grid.t_max!r}]"
        )
    views = _branch_views(bs, boost)
    selected = fc.branch_index
    bound = total_scenario_energy(bs)
    rows = []
    for t in grid.times():
        row = []
        for x in grid.positions():
            if boost is None:
                at, ax = t, x
            else:
                e = boost_event(Event(t, x), boost)
                at, ax = e.t, e.x
            v = sum(w * _branch_energy(views[i], at, ax, dx) for i, w in
                    _consistent(views, selected, at, ax, dx, tol))
            # Conditional expectations of branch energies can never exceed the
            # largest single-branch concentration.
            assert -1e-12 <= v <= bound + 1e-12
            row.append(v)
        rows.append(tuple(row))
    return BeableField(times=grid.times(), positions=grid.positions(),
                       values=tuple(rows), match_tol=dx)


def beable_field(
    bs: BranchSet,
    fc: FinalCondition,
    grid: GridSpec,
    dx: float = DEFAULT_MATCH_TOL,
    tol: float = DEFAULT_MATCH_TOL,
) -> BeableField:
    """Sample the beable field on a grid (lab frame)."""
    return _field_on_grid(bs, fc, grid, dx, tol, boost=None)


def beable_field_boosted(
    bs: BranchSet,
    fc: FinalCondition,
    grid: GridSpec,
    boost: Boost,
    dx: float = DEFAULT_MATCH_TOL,
    tol: float = DEFAULT_MATCH_TOL,
) -> BeableField:
    """Sample the field by boosting both the scenario and the grid events.

    The returned field is indexed by the lab-frame grid labels; each value is
    computed entirely in the boosted frame.  Agreement with ``beable_field``
    expresses the boost invariance of the construction.
    """
    return _field_on_grid(bs, fc, grid, dx, tol, boost=boost)


@dataclass(frozen=True)
class RegimeRow:
    t_lo: float
    t_hi: float
    x: float
    value: float


@dataclass(frozen=True)
class BoundaryRow:
    t: float
    x: float
    value: float


@dataclass(frozen=True)
class RegimeTable:
    """Piecewise-constant beable values at the lump sites of a single-system scenario."""

    selected_branch: int
    probability: float
    sites: tuple[float, ...]
    boundaries: tuple[float, ...]
    rows: tuple[RegimeRow, ...]
    boundary_rows: tuple[BoundaryRow, ...]

    def value_at(self, t: float, x: float) -> float:
        for row in self.rows:
            if row.x == x and row.t_lo < t < row.t_hi:
                return row.value
        for row in self.boundary_rows:
            if row.x == x and row.t == t:
                return row.value
        raise KeyError(f"no regime covers t={t!r}, x={x!r}")

    def to_dict(self) -> dict:
        return {
            "selected_branch": self.selected_branch,
            "probability": self.probability,
            "sites": list(self.sites),
            "boundaries": list(self.boundaries),
            "rows": [
                {"t_lo": r.t_lo, "t_hi": r.t_hi, "x": r.x, "value": r.value} for r in self.rows
            ],
            "boundary_rows": [
                {"t": r.t, "x": r.x, "value": r.value} for r in self.boundary_rows
            ],
        }


def regime_table(
    config: ToyConfig,
    selected_branch: int,
    dx: float = DEFAULT_MATCH_TOL,
    tol: float = DEFAULT_MATCH_TOL,
) -> RegimeTable:
    """Exact piecewise-constant account of the field at the two candidate sites.

    Candidate regime boundaries are the times at which some registration
    crosses the edge of a site's conditioning region (threshold T - |p - x|
    for a registration at p and a site at x); adjacent intervals with equal
    values at both sites are merged, so only value-changing boundaries remain.
    """
    if config.is_bell:
        raise ScenarioError("regime tables are defined for single-system scenarios")
    bs = build_single_system(config)
    worlds = enumerate_worlds(bs)
    if not 0 <= selected_branch < len(worlds):
        raise ValueError(
            f"selected branch {selected_branch} out of range (scenario has {len(worlds)} worlds)"
        )
    fc = worlds[selected_branch]
    T = bs.surface_time
    sites = (config.x1, config.x2)
    views = _branch_views(bs, None)

    thresholds: list[float] = []
    for site in sites:
        for view in views:
            for (_, p, _, _) in view[1]:
                thr = T - abs(p - site)
                if 0.0 < thr < T:
                    thresholds.append(thr)
    thresholds.sort()
    merged: list[float] = []
    for thr in thresholds:
        if not merged or thr - merged[-1] > 1e-12:
            merged.append(thr)

    def site_values(t: float) -> tuple[float, ...]:
        return tuple(
            sum(w * _branch_energy(views[i], t, site, dx) for i, w in
                _consistent(views, selected_branch, t, site, dx, tol))
            for site in sites
        )

    edges = [0.0] + merged + [T]
    intervals = [
        (lo, hi, site_values(0.5 * (lo + hi))) for lo, hi in zip(edges, edges[1:])
    ]
    # Merge neighbours whose values agree at every site: those boundaries are inert.
    squeezed = [intervals[0]]
    for lo, hi, vals in intervals[1:]:
        plo, phi, pvals = squeezed[-1]
        if vals == pvals:
            squeezed[-1] = (plo, hi, pvals)
        else:
            squeezed.append((lo, hi, vals))

    boundaries = tuple(lo for lo, _, _ in squeezed[1:])
    rows = tuple(
        RegimeRow(t_lo=lo, t_hi=hi, x=site, value=v)
        for lo, hi, vals in squeezed
        for site, v in zip(sites, vals)
    )
    boundary_rows = tuple(
        BoundaryRow(t=b, x=site, value=v)
        for b in boundaries
        for site, v in zip(sites, site_values(b))
    )
    return RegimeTable(
        selected_branch=selected_branch,
        probability=fc.probability,
        sites=sites,
        boundaries=boundaries,
        rows=rows,
        boundary_rows=boundary_rows,
    )
