"""Reference physical models for the locality audits.

Three families:

* a two-qubit Born engine (``Ket4``, ``joint_prob``) with the singlet state,
  wrapped into a single-λ hidden-variable model by ``singlet_hv_model``;
* a deterministic local model on a discretized hidden angle, the classic
  Bell-bound baseline (``local_deterministic_model``);
* a two-particle guidance-equation toy of the paired Stern-Gerlach
  measurement (``pw_evolve``, ``pw_equilibrium_stats``), where each wing's
  wave packet splits impulsively into two drifting half-packets and the
  configuration is carried along by the gradient of the total phase.

The guidance toy is the interesting one: per initial configuration the
outcomes are deterministic and the left outcome can depend on the right-hand
setting (parameter dependence), yet averaging over Born-distributed initial
configurations reproduces the quantum statistics.

Angles may be passed as plain radians or wrapped in ``SpinSetting``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .locality import FiniteHVModel

DENSITY_FLOOR = 1e-300  # below this |psi|^2 the guidance field is undefined
UNRESOLVED_BAND = 1e-6  # |y| below this at readout does not count as an outcome
NORM_TOL = 1e-12


class DegenerateNodeError(RuntimeError):
    """A trajectory ran into a node (vanishing density) of the wave function."""


class UnresolvedOutcomeError(RuntimeError):
    """A coordinate stayed inside the unresolved band even after horizon extensions."""


@dataclass(frozen=True)
class SpinSetting:
    """A measurement direction, as an angle in a fixed plane."""

    angle: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.angle):
            raise ValueError("setting angle must be finite")


def _angle(setting) -> float:
    if isinstance(setting, SpinSetting):
        return setting.angle
    value = float(setting)
    if not math.isfinite(value):
        raise ValueError("setting angle must be finite")
    return value


# ---------------------------------------------------------------------------
# Two-qubit Born engine.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ket4:
    """A two-qubit state: amplitudes in the (++, +-, -+, --) reference basis."""

    amplitudes: tuple[complex, complex, complex, complex]

    def __post_init__(self) -> None:
        amps = tuple(complex(a) for a in self.amplitudes)
        if len(amps) != 4:
            raise ValueError("Ket4 needs exactly 4 amplitudes")
        if not all(math.isfinite(a.real) and math.isfinite(a.imag) for a in amps):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes))

    def as_matrix(self) -> np.ndarray:
        """2x2 complex matrix indexed [left spin, right spin], + first."""
        return np.array(self.amplitudes, dtype=complex).reshape(2, 2)

    def swapped(self) -> "Ket4":
        """The same state with the two qubits exchanged."""
        m = self.as_matrix().T
        return Ket4(tuple(m.reshape(4)))


def singlet() -> Ket4:
    """The spin singlet, (|+-> - |-+>)/sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    return Ket4((0.0, s, -s, 0.0))


def random_ket(seed: int) -> Ket4:
    """A Haar-ish random normalized two-qubit pure state."""
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=4) + 1j * rng.normal(size=4)
    raw /= np.linalg.norm(raw)
    return Ket4(tuple(raw))


def chi_plus(angle) -> np.ndarray:
    """Spin-up spinor along the direction at the given angle."""
    theta = _angle(angle)
    return np.array([math.cos(theta / 2.0), math.sin(theta / 2.0)])


def chi_minus(angle) -> np.ndarray:
    """Spin-down spinor along the direction at the given angle."""
    theta = _angle(angle)
    return np.array([-math.sin(theta / 2.0), math.cos(theta / 2.0)])


def _check_normalized(psi: Ket4) -> None:
    if abs(psi.norm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm is {psi.norm!r}, expected 1")


def outcome_amplitude(psi: Ket4, a_left, b_right, A: int, B: int) -> complex:
    """<chi_A(a) (x) chi_B(b) | psi>."""
    if A not in (1, -1) or B not in (1, -1):
        raise ValueError("outcomes must be +1 or -1")
    left = chi_plus(a_left) if A == 1 else chi_minus(a_left)
    right = chi_plus(b_right) if B == 1 else chi_minus(b_right)
    return complex(left.conj() @ psi.as_matrix() @ right.conj())


def joint_prob(psi: Ket4, a_left, b_right, A: int, B: int) -> float:
    """Born probability of the outcome pair (A, B) at settings (a, b)."""
    _check_normalized(psi)
    return abs(outcome_amplitude(psi, a_left, b_right, A, B)) ** 2


def born_correlator(psi: Ket4, a_left, b_right) -> float:
    """E(a, b) = sum over outcomes of A*B*P(A, B)."""
    return sum(
        A * B * joint_prob(psi, a_left, b_right, A, B)
        for A in (1, -1)
        for B in (1, -1)
    )


def no_signalling_check(psi: Ket4, tol: float = 1e-12) -> bool:
    """Are each wing's marginals independent of the distant setting?

    Checks 100 random setting triples per wing.  The triples come from a
    fixed internal seed so the check is deterministic.
    """
    _check_normalized(psi)
    rng = np.random.default_rng(90210)
    for _ in range(100):
        a, b1, b2 = rng.uniform(0.0, 2.0 * math.pi, size=3)
        for A in (1, -1):
            m1 = sum(joint_prob(psi, a, b1, A, B) for B in (1, -1))
            m2 = sum(joint_prob(psi, a, b2, A, B) for B in (1, -1))
            if abs(m1 - m2) > tol:
                return False
        b, a1, a2 = rng.uniform(0.0, 2.0 * math.pi, size=3)
        for B in (1, -1):
            m1 = sum(joint_prob(psi, a1, b, A, B) for A in (1, -1))
            m2 = sum(joint_prob(psi, a2, b, A, B) for A in (1, -1))
            if abs(m1 - m2) > tol:
                return False
    return True


def singlet_hv_model(a1, a2, b1, b2) -> FiniteHVModel:
    """The orthodox 'model': a single λ carrying the singlet's Born tables."""
    psi = singlet()
    angles_left = (_angle(a1), _angle(a2))
    angles_right = (_angle(b1), _angle(b2))
    cond = np.empty((1, 2, 2, 2, 2))
    for i, a in enumerate(angles_left):
        for j, b in enumerate(angles_right):
            for ai, A in enumerate((1, -1)):
                for bi, B in enumerate((1, -1)):
                    cond[0, i, j, ai, bi] = joint_prob(psi, a, b, A, B)
    return FiniteHVModel(
        lambdas=("psi-singlet",), measures=np.ones((2, 2, 1)), cond=cond
    )


def local_deterministic_model(
    n_lambda: int = 360,
    a1=0.0,
    a2=math.pi / 2.0,
    b1=math.pi / 4.0,
    b2=3.0 * math.pi / 4.0,
) -> FiniteHVModel:
    """Deterministic local hidden angles: A = sign cos(λ − a), B = −sign cos(λ − b).

    λ runs over an offset uniform grid on [0, 2π) (offset by half a cell so the
    canonical π/4-multiple settings never land on a sign boundary).  Satisfies
    outcome independence, parameter independence, and no-conspiracy exactly,
    and therefore stays inside the Bell bound.
    """
    if n_lambda < 4:
        raise ValueError("n_lambda must be at least 4")
    lam = 2.0 * math.pi * (np.arange(n_lambda) + 0.5) / n_lambda
    angles_left = np.array([_angle(a1), _angle(a2)])
    angles_right = np.array([_angle(b1), _angle(b2)])
    a_out = np.where(np.cos(lam[:, None] - angles_left[None, :]) >= 0.0, 1, -1)
    b_out = -np.where(np.cos(lam[:, None] - angles_right[None, :]) >= 0.0, 1, -1)
    cond = np.zeros((n_lambda, 2, 2, 2, 2))
    for k in range(n_lambda):
        for i in range(2):
            for j in range(2):
                ai = 0 if a_out[k, i] == 1 else 1
                bi = 0 if b_out[k, j] == 1 else 1
                cond[k, i, j, ai, bi] = 1.0
    measures = np.full((2, 2, n_lambda), 1.0 / n_lambda)
    return FiniteHVModel(
        lambdas=tuple(f"angle-{k}" for k in range(n_lambda)),
        measures=measures,
        cond=cond,
    )


# ---------------------------------------------------------------------------
# Guidance-equation (pilot-wave) toy.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PWConfig:
    """Packet and integration parameters for the two-wing guidance toy.

    Each wing's packet splits at its impulse time into half-packets drifting
    apart at ±separation_speed, carrying phases e^(±i k y).  Particles ride
    their half-packet only when wavenumber equals separation_speed, which the
    defaults respect.
    """

    packet_width: float = 1.0
    separation_speed: float = 1.0
    wavenumber: float = 1.0
    dt: float = 1e-3
    t_max: float = 10.0
    t_impulse_left: float = 0.0
    t_impulse_right: float = 0.0

    def __post_init__(self) -> None:
        for name in ("packet_width", "separation_speed", "dt", "t_max"):
            if not (math.isfinite(getattr(self, name)) and getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be positive and finite")
        if not math.isfinite(self.wavenumber):
            raise ValueError("wavenumber must be finite")
        for name in ("t_impulse_left", "t_impulse_right"):
            value = getattr(self, name)
            if not (0.0 <= value < self.t_max):
                raise ValueError(f"{name} must lie in [0, t_max)")
        drift = self.t_max - max(self.t_impulse_left, self.t_impulse_right)
        if self.separation_speed * drift < 5.0 * self.packet_width:
            raise ValueError(
                "t_max too small: half-packets must separate by at least "
                "5 packet widths before readout"
            )

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))


@dataclass(frozen=True)
class PWState:
    """The guided configuration at one instant."""

    y_left: float
    y_right: float
    t: float

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.y_left, self.y_right, self.t))):
            raise ValueError("PWState fields must be finite")


def packet_amplitudes(a_left, b_right) -> np.ndarray:
    """Real 2x2 matrix amp[A, B] = <chi_A(a) (x) chi_B(b) | singlet>.

    Index 0 is the +1 branch.  The singlet makes these real with
    amp[0,0] = amp[1,1] and amp[0,1] = -amp[1,0].
    """
    psi = singlet()
    amp = np.empty((2, 2))
    for ai, A in enumerate((1, -1)):
        for bi, B in enumerate((1, -1)):
            value = outcome_amplitude(psi, a_left, b_right, A, B)
            assert abs(value.imag) < 1e-14
            amp[ai, bi] = value.real
    return amp


_BRANCH_SIGNS = np.array([1.0, -1.0])


def _wing_factors(y, center_offsets, k, sigma):
    """Per-branch packet factors and their log-derivatives for one wing.

    y: (N,) coordinates; center_offsets: (2,) packet centers for the +1/-1
    branches.  Returns F (2, N) complex and dF (2, N) complex with
    dF = (d/dy) F.
    """
    u = y[None, :] - center_offsets[:, None]  # (2, N)
    phase = 1j * (k * _BRANCH_SIGNS)[:, None] * y[None, :]
    F = np.exp(-(u**2) / (2.0 * sigma**2) + phase)
    dlog = -u / sigma**2 + 1j * (k * _BRANCH_SIGNS)[:, None]
    return F, dlog * F


def _velocity_batch(cfg: PWConfig, amp: np.ndarray, t: float, y: np.ndarray):
    """Guidance velocities for a batch of configurations.

    y: (N, 2) array of (y_left, y_right).  Returns (v, ok) with v: (N, 2) and
    ok: (N,) boolean marking lanes whose density stayed above the floor.
    Velocities of failed lanes are zero.
    """
    sigma, v, k = cfg.packet_width, cfg.separation_speed, cfg.wavenumber
    tau_l = max(t - cfg.t_impulse_left, 0.0)
    tau_r = max(t - cfg.t_impulse_right, 0.0)
    fl, dfl = _wing_factors(y[:, 0], _BRANCH_SIGNS * v * tau_l, k, sigma)
    fr, dfr = _wing_factors(y[:, 1], _BRANCH_SIGNS * v * tau_r, k, sigma)
    # psi = sum_AB amp[A,B] fl[A] fr[B]; group the distant wing per branch.
    right_group = amp @ fr  # (2, N): sum_B amp[A,B] fr[B]
    left_group = amp.T @ fl  # (2, N): sum_A amp[A,B] fl[A]
    psi = (fl * right_group).sum(axis=0)
    dpsi_l = (dfl * right_group).sum(axis=0)
    dpsi_r = (left_group * dfr).sum(axis=0)
    rho = np.abs(psi) ** 2
    ok = rho >= DENSITY_FLOOR
    safe_rho = np.where(ok, rho, 1.0)
    conj = np.conj(psi)
    vel = np.empty_like(y)
    vel[:, 0] = np.where(ok, (conj * dpsi_l).imag / safe_rho, 0.0)
    vel[:, 1] = np.where(ok, (conj * dpsi_r).imag / safe_rho, 0.0)
    return vel, ok


def _rk4_span(cfg, amp, y, t0, n_steps, failed, record=None):
    """Integrate n_steps fixed RK4 steps in place; returns the end time."""
    dt = cfg.dt
    t = t0
    for step in range(n_steps):
        k1, ok1 = _velocity_batch(cfg, amp, t, y)
        k2, ok2 = _velocity_batch(cfg, amp, t + 0.5 * dt, y + 0.5 * dt * k1)
        k3, ok3 = _velocity_batch(cfg, amp, t + 0.5 * dt, y + 0.5 * dt * k2)
        k4, ok4 = _velocity_batch(cfg, amp, t + dt, y + dt * k3)
        failed |= ~(ok1 & ok2 & ok3 & ok4)
        step_v = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        step_v[failed] = 0.0
        y += dt * step_v
        t = t0 + (step + 1) * dt
        if record is not None:
            record.append(PWState(float(y[0, 0]), float(y[0, 1]), t))
    return t


def _evolve_batch(cfg: PWConfig, y0: np.ndarray, amp: np.ndarray, record=None):
    """Evolve configurations to readout, extending the horizon if unresolved.

    y0: (N, 2).  Returns (y, t_end, failed) with failed a boolean (N,) mask of
    lanes whose density underflowed.
    """
    y = np.array(y0, dtype=float)
    failed = np.zeros(len(y), dtype=bool)
    t = _rk4_span(cfg, amp, y, 0.0, cfg.n_steps, failed, record)
    extension = max(1, cfg.n_steps // 4)
    for _ in range(3):
        live = ~failed
        if not np.any(np.abs(y[live]) < UNRESOLVED_BAND):
            break
        t = _rk4_span(cfg, amp, y, t, extension, failed, record)
    return y, t, failed


def pw_evolve(cfg: PWConfig, initial: PWState, a_left, b_right):
    """Integrate one configuration; returns (trajectory, (A, B)).

    The trajectory starts at the initial state and contains one entry per
    integration step.  Outcomes are the signs of the coordinates at readout;
    if a coordinate is still within the unresolved band after three horizon
    extensions, an UnresolvedOutcomeError is raised.  A vanishing density
    along the way raises DegenerateNodeError.
    """
    if initial.t != 0.0:
        raise ValueError("trajectories start at t = 0")
    amp = packet_amplitudes(a_left, b_right)
    trajectory = [initial]
    y0 = np.array([[initial.y_left, initial.y_right]])
    y, _, failed = _evolve_batch(cfg, y0, amp, record=trajectory)
    if failed[0]:
        raise DegenerateNodeError(
            "trajectory hit a node of the wave function; no guidance defined"
        )
    if np.any(np.abs(y[0]) < UNRESOLVED_BAND):
        raise UnresolvedOutcomeError(
            f"coordinates {tuple(y[0])} still unresolved at extended horizon"
        )
    outcome = (1 if y[0, 0] > 0.0 else -1, 1 if y[0, 1] > 0.0 else -1)
    return trajectory, outcome


def sample_initial_configurations(
    cfg: PWConfig, a_left, b_right, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw (y_left, y_right) from the exact |psi(., ., 0)|^2 by rejection.

    At t = 0 all four half-packets still coincide, so the density is the
    Gaussian envelope times an interference factor bounded by twice the total
    branch weight; the envelope is the proposal and the factor the acceptance
    ratio.  Plain product-of-Gaussians sampling (the envelope alone) is NOT
    equivalent: the interference factor correlates the two coordinates.
    """
    amp = packet_amplitudes(a_left, b_right)
    assert abs(amp[0, 0] - amp[1, 1]) < 1e-14 and abs(amp[0, 1] + amp[1, 0]) < 1e-14
    k = cfg.wavenumber
    bound = 4.0 * (amp[0, 0] ** 2 + amp[0, 1] ** 2)
    std = cfg.packet_width / math.sqrt(2.0)
    out = np.empty((n, 2))
    filled = 0
    chunk = max(2048, 2 * n)
    while filled < n:
        y = rng.normal(0.0, std, size=(chunk, 2))
        surface = (
            4.0 * amp[0, 0] ** 2 * np.cos(k * (y[:, 0] + y[:, 1])) ** 2
            + 4.0 * amp[0, 1] ** 2 * np.sin(k * (y[:, 0] - y[:, 1])) ** 2
        )
        keep = y[rng.random(chunk) * bound < surface]
        take = min(n - filled, len(keep))
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


@dataclass(frozen=True)
class PWStats:
    """Equilibrium-ensemble statistics of the guidance toy at one setting pair."""

    settings: tuple[float, float]
    n_samples: int
    correlator: float
    stderr_estimate: float
    n_failed_nodes: int
    joint_counts: dict

    def to_dict(self) -> dict:
        return {
            "settings": list(self.settings),
            "n_samples": self.n_samples,
            "E": self.correlator,
            "stderr_estimate": self.stderr_estimate,
            "n_failed_nodes": self.n_failed_nodes,
            "joint_counts": dict(self.joint_counts),
        }


def pw_equilibrium_stats(
    cfg: PWConfig, a_left, b_right, n_samples: int, seed: int
) -> PWStats:
    """Born-sample initial configurations, evolve them, and tally outcomes.

    Outcome products are ±1 integers, so the correlator is an exact ratio of
    integer counts — no floating-point reduction-order concerns.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    a, b = _angle(a_left), _angle(b_right)
    rng = np.random.default_rng(seed)
    y0 = sample_initial_configurations(cfg, a, b, n_samples, rng)
    amp = packet_amplitudes(a, b)
    y, _, failed = _evolve_batch(cfg, y0, amp)
    live = ~failed
    left = np.where(y[live, 0] > 0.0, 1, -1)
    right = np.where(y[live, 1] > 0.0, 1, -1)
    n_live = int(live.sum())
    counts = {
        "++": int(np.sum((left == 1) & (right == 1))),
        "+-": int(np.sum((left == 1) & (right == -1))),
        "-+": int(np.sum((left == -1) & (right == 1))),
        "--": int(np.sum((left == -1) & (right == -1))),
    }
    products = left * right
    correlator = float(products.sum()) / n_live if n_live else math.nan
    if n_live > 1:
        stderr = float(np.std(products.astype(float), ddof=1) / math.sqrt(n_live))
    else:
        stderr = math.nan
    return PWStats(
        settings=(a, b),
        n_samples=n_samples,
        correlator=correlator,
        stderr_estimate=stderr,
        n_failed_nodes=int(failed.sum()),
        joint_counts=counts,
    )


def pilot_wave_hv_model(
    cfg: PWConfig, a1, a2, b1, b2, grid_n: int = 12, grid_half_width: float = 2.0
) -> FiniteHVModel:
    """λ = initial configuration on a square grid; tables from evolved outcomes.

    Every table entry is 0 or 1 (the dynamics is deterministic per λ), the
    measure is uniform and shared, and — because the left outcome can depend
    on the right setting — the model generically violates parameter
    independence maximally at some λ.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    axis = np.linspace(-grid_half_width, grid_half_width, grid_n)
    yl, yr = np.meshgrid(axis, axis, indexing="ij")
    y0 = np.column_stack([yl.ravel(), yr.ravel()])
    n = len(y0)
    cond = np.zeros((n, 2, 2, 2, 2))
    for i, a in enumerate((_angle(a1), _angle(a2))):
        for j, b in enumerate((_angle(b1), _angle(b2))):
            amp = packet_amplitudes(a, b)
            y, _, failed = _evolve_batch(cfg, y0, amp)
            if np.any(failed):
                raise DegenerateNodeError(
                    f"{int(failed.sum())} grid configurations hit nodes; "
                    "shrink the grid or move it off the axes"
                )
            ai = np.where(y[:, 0] > 0.0, 0, 1)
            bi = np.where(y[:, 1] > 0.0, 0, 1)
            cond[np.arange(n), i, j, ai, bi] = 1.0
    measures = np.full((2, 2, n), 1.0 / n)
    names = tuple(
        f"y({y0[m, 0]:+.3f},{y0[m, 1]:+.3f})" for m in range(n)
    )
    return FiniteHVModel(lambdas=names, measures=measures, cond=cond)
