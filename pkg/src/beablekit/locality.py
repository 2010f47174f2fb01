"""Finite hidden-variable models and locality audits.

A model assigns to every hidden state λ and setting pair (a_i, b_j) a joint
distribution over the two ±1 outcomes, plus a probability measure over λ for
each setting pair (kept per pair so that a failure of the "no conspiracy"
assumption is representable rather than impossible).  The audits quantify:

* outcome independence (OI): each λ's joint factorizes into its own marginals;
* parameter independence (PI): each wing's marginal ignores the distant setting;
* factorizability: the joint equals the product of single-wing probabilities,
  where the single-wing probability is defined as the marginal under a fixed
  reference distant setting (b_1 for the left wing, a_1 for the right);
* no conspiracy: the λ-measure is the same for all four setting pairs
  (residual = largest total-variation distance between the measures).

Exactly (at zero residual) factorizability is equivalent to OI ∧ PI; the
audits report residuals so callers can pick tolerances suited to how the
tables were produced (exact rationals vs Monte Carlo estimates).

Outcome index convention throughout: index 0 ↔ outcome +1, index 1 ↔ −1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .toyqm import BranchSet, ScenarioError, enumerate_worlds

DEFAULT_AUDIT_TOL = 1e-9
SETTING_KEYS = ("a1b1", "a1b2", "a2b1", "a2b2")  # row-major in (i, j)
OUTCOME_KEYS = ("++", "+-", "-+", "--")  # row-major in (A, B), + first
OUTCOME_VALUES = (1, -1)


class ModelError(ValueError):
    """A hidden-variable model is structurally malformed."""


@dataclass(frozen=True, eq=False)
class FiniteHVModel:
    """Finite-Λ stochastic model of the two-wing, two-setting experiment.

    measures[i, j] is the distribution over λ used with setting pair
    (a_{i+1}, b_{j+1}); cond[k, i, j] is the 2x2 joint outcome table of
    lambda k under that setting pair.
    """

    lambdas: tuple[str, ...]
    measures: np.ndarray  # shape (2, 2, n)
    cond: np.ndarray  # shape (n, 2, 2, 2, 2)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambdas", tuple(str(name) for name in self.lambdas))
        object.__setattr__(self, "measures", np.asarray(self.measures, dtype=float))
        object.__setattr__(self, "cond", np.asarray(self.cond, dtype=float))
        n = len(self.lambdas)
        if n == 0:
            raise ModelError("model needs at least one lambda")
        if len(set(self.lambdas)) != n:
            raise ModelError("lambda identifiers must be unique")
        if self.measures.shape != (2, 2, n):
            raise ModelError(
                f"measures must have shape (2, 2, {n}), got {self.measures.shape}"
            )
        if self.cond.shape != (n, 2, 2, 2, 2):
            raise ModelError(
                f"cond must have shape ({n}, 2, 2, 2, 2), got {self.cond.shape}"
            )

    @property
    def n_lambda(self) -> int:
        return len(self.lambdas)

    def validate(self, tol: float = 1e-12) -> None:
        """Raise ModelError unless all probabilities are sane within tol."""
        if np.min(self.measures) < -tol or np.min(self.cond) < -tol:
            raise ModelError("negative probabilities")
        measure_sums = self.measures.sum(axis=-1)
        if np.max(np.abs(measure_sums - 1.0)) > tol:
            raise ModelError("a lambda measure does not sum to 1")
        cell_sums = self.cond.sum(axis=(-2, -1))
        if np.max(np.abs(cell_sums - 1.0)) > tol:
            raise ModelError("an outcome table does not sum to 1")

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        measures = {
            key: [float(v) for v in self.measures[i, j]]
            for (i, j), key in zip(((0, 0), (0, 1), (1, 0), (1, 1)), SETTING_KEYS)
        }
        cond = {}
        for k, name in enumerate(self.lambdas):
            per_setting = {}
            for (i, j), key in zip(((0, 0), (0, 1), (1, 0), (1, 1)), SETTING_KEYS):
                table = self.cond[k, i, j]
                per_setting[key] = {
                    "++": float(table[0, 0]),
                    "+-": float(table[0, 1]),
                    "-+": float(table[1, 0]),
                    "--": float(table[1, 1]),
                }
            cond[name] = per_setting
        return {"lambdas": list(self.lambdas), "measures": measures, "cond": cond}

    @classmethod
    def from_dict(cls, payload: dict) -> "FiniteHVModel":
        try:
            lambdas = tuple(str(name) for name in payload["lambdas"])
            n = len(lambdas)
            measures = np.empty((2, 2, n))
            for (i, j), key in zip(((0, 0), (0, 1), (1, 0), (1, 1)), SETTING_KEYS):
                vec = payload["measures"][key]
                if len(vec) != n:
                    raise ModelError(f"measure {key} has wrong length")
                measures[i, j] = vec
            cond = np.empty((n, 2, 2, 2, 2))
            for k, name in enumerate(lambdas):
                tables = payload["cond"][name]
                for (i, j), key in zip(((0, 0), (0, 1), (1, 0), (1, 1)), SETTING_KEYS):
                    cell = tables[key]
                    cond[k, i, j, 0, 0] = cell["++"]
                    cond[k, i, j, 0, 1] = cell["+-"]
                    cond[k, i, j, 1, 0] = cell["-+"]
                    cond[k, i, j, 1, 1] = cell["--"]
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model document: {exc!r}") from exc
        return cls(lambdas=lambdas, measures=measures, cond=cond)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FiniteHVModel":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Audits.
# ---------------------------------------------------------------------------


def _left_marginals(cond: np.ndarray) -> np.ndarray:
    """P(A | λ, a_i, b_j): sum out the right outcome -> shape (n, 2, 2, 2)."""
    return cond.sum(axis=-1)


def _right_marginals(cond: np.ndarray) -> np.ndarray:
    """P(B | λ, a_i, b_j): sum out the left outcome -> shape (n, 2, 2, 2)."""
    return cond.sum(axis=-2)


def check_oi(m: FiniteHVModel, tol: float = DEFAULT_AUDIT_TOL) -> tuple[bool, float]:
    """Does every λ's joint factorize into its own two marginals?"""
    pa = _left_marginals(m.cond)
    pb = _right_marginals(m.cond)
    product = pa[..., :, None] * pb[..., None, :]
    residual = float(np.max(np.abs(m.cond - product)))
    return residual <= tol, residual


def check_pi(m: FiniteHVModel, tol: float = DEFAULT_AUDIT_TOL) -> tuple[bool, float]:
    """Is each wing's marginal unchanged when the distant setting flips?"""
    pa = _left_marginals(m.cond)  # (n, i, j, A)
    pb = _right_marginals(m.cond)  # (n, i, j, B)
    left = np.max(np.abs(pa[:, :, 0, :] - pa[:, :, 1, :]))
    right = np.max(np.abs(pb[:, 0, :, :] - pb[:, 1, :, :]))
    residual = float(max(left, right))
    return residual <= tol, residual


def check_factorizability(
    m: FiniteHVModel, tol: float = DEFAULT_AUDIT_TOL
) -> tuple[bool, float]:
    """Does the joint equal the product of reference single-wing probabilities?

    Single-wing probabilities are the marginals under a designated reference
    distant setting: b_1 for the left wing and a_1 for the right wing.
    """
    pa_ref = _left_marginals(m.cond)[:, :, 0, :]  # (n, i, A) under b1
    pb_ref = _right_marginals(m.cond)[:, 0, :, :]  # (n, j, B) under a1
    product = pa_ref[:, :, None, :, None] * pb_ref[:, None, :, None, :]
    residual = float(np.max(np.abs(m.cond - product)))
    return residual <= tol, residual


def check_no_conspiracy(
    m: FiniteHVModel, tol: float = DEFAULT_AUDIT_TOL
) -> tuple[bool, float]:
    """Largest total-variation distance between the four setting-pair measures."""
    flat = m.measures.reshape(4, m.n_lambda)
    residual = 0.0
    for p in range(4):
        for q in range(p + 1, 4):
            residual = max(residual, 0.5 * float(np.abs(flat[p] - flat[q]).sum()))
    return residual <= tol, residual


@dataclass(frozen=True)
class AuditReport:
    """All locality residuals of one model at one tolerance."""

    normalization_ok: bool
    oi_residual: float
    pi_residual: float
    fact_residual: float
    no_conspiracy_residual: float
    tolerance: float

    @property
    def oi_ok(self) -> bool:
        return self.normalization_ok and self.oi_residual <= self.tolerance

    @property
    def pi_ok(self) -> bool:
        return self.normalization_ok and self.pi_residual <= self.tolerance

    @property
    def fact_ok(self) -> bool:
        return self.normalization_ok and self.fact_residual <= self.tolerance

    @property
    def no_conspiracy_ok(self) -> bool:
        return self.normalization_ok and self.no_conspiracy_residual <= self.tolerance

    @property
    def all_ok(self) -> bool:
        return self.oi_ok and self.pi_ok and self.fact_ok and self.no_conspiracy_ok

    def to_dict(self) -> dict:
        return {
            "normalization_ok": self.normalization_ok,
            "oi_residual": self.oi_residual,
            "pi_residual": self.pi_residual,
            "fact_residual": self.fact_residual,
            "no_conspiracy_residual": self.no_conspiracy_residual,
            "tolerance": self.tolerance,
            "passes": {
                "oi": self.oi_ok,
                "pi": self.pi_ok,
                "factorizability": self.fact_ok,
                "no_conspiracy": self.no_conspiracy_ok,
            },
        }


def audit_model(m: FiniteHVModel, tol: float = DEFAULT_AUDIT_TOL) -> AuditReport:
    """Run every audit once and collect the residuals."""
    try:
        m.validate(tol=tol)
        normalization_ok = True
    except ModelError:
        normalization_ok = False
    return AuditReport(
        normalization_ok=normalization_ok,
        oi_residual=check_oi(m, tol)[1],
        pi_residual=check_pi(m, tol)[1],
        fact_residual=check_factorizability(m, tol)[1],
        no_conspiracy_residual=check_no_conspiracy(m, tol)[1],
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# Observable (λ-averaged) statistics.
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ObservableStats:
    """λ-averaged joint distributions, correlators, and the CHSH combination."""

    joint: np.ndarray  # (2, 2, 2, 2): settings i, j then outcomes A, B
    correlators: np.ndarray  # (2, 2)
    chsh: float

    def to_dict(self) -> dict:
        joint = {}
        for (i, j), key in zip(((0, 0), (0, 1), (1, 0), (1, 1)), SETTING_KEYS):
            joint[key] = {
                "++": float(self.joint[i, j, 0, 0]),
                "+-": float(self.joint[i, j, 0, 1]),
                "-+": float(self.joint[i, j, 1, 0]),
                "--": float(self.joint[i, j, 1, 1]),
            }
        correlators = {
            key: float(self.correlators[i, j])
            for (i, j), key in zip(((0, 0), (0, 1), (1, 0), (1, 1)), SETTING_KEYS)
        }
        return {"joint": joint, "correlators": correlators, "chsh": self.chsh}


def chsh_value(correlators: np.ndarray) -> float:
    """Largest |±E11 ± E12 ± E21 ± E22| over the four one-minus sign patterns."""
    e = np.asarray(correlators, dtype=float)
    best = 0.0
    for minus in ((0, 0), (0, 1), (1, 0), (1, 1)):
        signs = np.ones((2, 2))
        signs[minus] = -1.0
        best = max(best, abs(float(np.sum(signs * e))))
    return best


def observable_stats(m: FiniteHVModel) -> ObservableStats:
    """Average the per-λ tables over the setting pair's own measure."""
    joint = np.einsum("ijn,nijab->ijab", m.measures, m.cond)
    sign = np.array(OUTCOME_VALUES, dtype=float)
    correlators = np.einsum("ijab,a,b->ij", joint, sign, sign)
    return ObservableStats(
        joint=joint, correlators=correlators, chsh=chsh_value(correlators)
    )


def averaged_model(m: FiniteHVModel) -> FiniteHVModel:
    """Collapse λ out: the single-hidden-state model an observer would infer."""
    joint = np.einsum("ijn,nijab->ijab", m.measures, m.cond)
    return FiniteHVModel(
        lambdas=("averaged",),
        measures=np.ones((2, 2, 1)),
        cond=joint[None, ...],
    )


# ---------------------------------------------------------------------------
# Constructors.
# ---------------------------------------------------------------------------


def random_compliant_model(seed: int, n_lambda: int = 8) -> FiniteHVModel:
    """A model satisfying OI, PI, and no-conspiracy exactly, by construction.

    One shared measure; each λ's table is the product of wing-local outcome
    distributions that depend only on the local setting.
    """
    if n_lambda < 1:
        raise ModelError("n_lambda must be >= 1")
    rng = np.random.default_rng(seed)
    weights = rng.random(n_lambda) + 1e-3
    weights /= weights.sum()
    measures = np.broadcast_to(weights, (2, 2, n_lambda)).copy()
    p_left = rng.random((n_lambda, 2))  # P(A=+1 | λ, a_i)
    p_right = rng.random((n_lambda, 2))  # P(B=+1 | λ, b_j)
    left = np.stack([p_left, 1.0 - p_left], axis=-1)  # (n, i, A)
    right = np.stack([p_right, 1.0 - p_right], axis=-1)  # (n, j, B)
    cond = left[:, :, None, :, None] * right[:, None, :, None, :]
    return FiniteHVModel(
        lambdas=tuple(f"lambda-{k}" for k in range(n_lambda)),
        measures=measures,
        cond=cond,
    )


def kentian_micro_model(bs: BranchSet) -> FiniteHVModel:
    """λ = selected world of a two-wing scenario; outcome tables are 0/1.

    The world whose lumps sit at the outer sites encodes the outcome pair
    (+1, +1); the inner world encodes (−1, −1).  The scenario has no setting
    dependence, so each world's table is replicated across all four setting
    slots and the measure (the Born weights) is shared by all setting pairs.
    """
    if not bs.config.is_bell:
        raise ScenarioError("micro model requires a two-wing scenario")
    worlds = enumerate_worlds(bs)
    n = len(worlds)
    weights = np.array([fc.probability for fc in worlds])
    measures = np.broadcast_to(weights, (2, 2, n)).copy()
    cond = np.zeros((n, 2, 2, 2, 2))
    names = []
    for k, fc in enumerate(worlds):
        lump_positions = {lp.position for lp in bs.branches[fc.branch_index].lumps}
        outer = bs.config.x1 in lump_positions
        names.append("world-outer" if outer else "world-inner")
        idx = 0 if outer else 1  # outcome index: 0 ↔ +1 on both wings
        cond[k, :, :, idx, idx] = 1.0
    return FiniteHVModel(lambdas=tuple(names), measures=measures, cond=cond)


def kentian_observable_oi_residual(bs: BranchSet) -> float:
    """OI residual after averaging the micro model's worlds out.

    For the perfectly anti-correlated two-world scenario this equals
    w(1 − w) with w the outer world's Born weight.
    """
    return check_oi(averaged_model(kentian_micro_model(bs)))[1]
