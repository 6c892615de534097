"""Trajectory-level oracle for the closed-form results.

Everything here works on explicit deviation trajectories: sampling them
(with or without the activation-budget cap), integrating the state of
charge step by step, building the two extreme signals, and checking the
closed-form feasibility reductions pathwise.  The step integration is
exact because signals are piecewise constant, so any disagreement with
the closed forms is a real defect, not discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .distributions import DeviationDistribution
from .feasible import BatterySpec, RegulationContract
from .purchase import expected_charge_rate

__all__ = [
    "Trajectory",
    "sample_trajectory",
    "integrate_soc",
    "worst_case_signals",
    "mc_expected_terminal_soc",
    "rearrange_nonincreasing",
    "ConstraintCheck",
    "FeasibilityReport",
    "check_robust_feasibility",
    "read_trajectory_csv",
    "write_trajectory_csv",
]

# Two-sided 99% normal quantile, for Monte-Carlo confidence intervals.
Z99 = 2.5758293035489004

# Paths per sampling chunk.  Chunk seeds derive from (seed, chunk index),
# so results for a given (seed, n_paths) are bit-identical no matter how
# chunks are scheduled, as long as partial sums are combined in index order.
CHUNK = 8192


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A normalized deviation signal, piecewise constant on a uniform grid."""

    values: np.ndarray
    dt_h: float

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("trajectory needs a nonempty 1-d value array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("trajectory values must be finite")
        if float(np.max(np.abs(arr))) > 1.0 + 1e-9:
            raise ValueError("trajectory values must lie in [-1, 1]")
        if not self.dt_h > 0.0:
            raise ValueError("dt_h must be positive")
        object.__setattr__(self, "values", arr)

    @property
    def n_steps(self) -> int:
        return self.values.size

    @property
    def horizon_h(self) -> float:
        return self.n_steps * self.dt_h

    @property
    def budget_h(self) -> float:
        """Total absolute activation time, sum of |value| * dt."""
        return float(np.sum(np.abs(self.values)) * self.dt_h)

    def within_budget(self, budget_h: float, tol: float = 1e-9) -> bool:
        return self.budget_h <= budget_h + tol


def _cap_to_budget(values: np.ndarray, dt_h: float, budget_h: float) -> np.ndarray:
    """Zero the signal once its cumulative |value|*dt reaches the budget.

    The crossing step is scaled so the budget binds exactly; earlier steps
    are untouched.
    """
    cum = np.cumsum(np.abs(values)) * dt_h
    over = cum > budget_h
    if not over.any():
        return values
    k = int(np.argmax(over))
    spent = cum[k - 1] if k > 0 else 0.0
    out = values.copy()
    room = (budget_h - spent) / dt_h
    out[k] = math.copysign(room, values[k]) if room > 0.0 else 0.0
    out[k + 1:] = 0.0
    return out


def sample_trajectory(dist: DeviationDistribution, con: RegulationContract,
                      n_steps: int, seed: int,
                      cap_budget: bool = True) -> Trajectory:
    """Draw one iid trajectory; by default, cap it at the activation budget.

    With the cap on, the result is always a member of the contract's
    uncertainty set.  The uncapped mode matches the marginal-law setting
    under which the expected-charge-rate formula is derived.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    dt = con.horizon_h / n_steps
    rng = np.random.default_rng(seed)
    values = dist.sample_with(rng, n_steps)
    if cap_budget:
        values = _cap_to_budget(values, dt, con.budget_h)
    return Trajectory(values, dt)


def integrate_soc(xb: float, xr: float, traj: Trajectory,
                  bat: BatterySpec) -> np.ndarray:
    """State of charge on the trajectory's grid, length n_steps + 1.

    Charging applies the charge efficiency, discharging the reciprocal of
    the discharge efficiency.  No clipping at the capacity bounds: bound
    violations are exactly what the feasibility checks look for.
    """
    power = xb + traj.values * xr
    rate = (
        bat.eff.eta_plus * np.maximum(power, 0.0)
        - np.maximum(-power, 0.0) / bat.eff.eta_minus
    )
    soc = np.empty(traj.n_steps + 1)
    soc[0] = 0.0
    np.cumsum(rate * traj.dt_h, out=soc[1:])
    soc += bat.soc0_kwh
    return soc


def _aligned_steps(con: RegulationContract, target: int) -> int:
    """Smallest step count >= target at which the budget is a whole number
    of steps."""
    ratio = Fraction(con.budget_h / con.horizon_h).limit_denominator(4096)
    q = ratio.denominator
    return ((target + q - 1) // q) * q


def worst_case_signals(con: RegulationContract,
                       n_steps: int) -> tuple[Trajectory, Trajectory]:
    """The two extreme members of the uncertainty set: full positive
    deviation for exactly the budget, then zero; and its negation.

    The grid must resolve the budget exactly (a whole number of steps).
    """
    dt = con.horizon_h / n_steps
    k_float = con.budget_h / dt
    k = round(k_float)
    if abs(k_float - k) > 1e-6:
        raise ValueError(
            "budget is not a whole number of steps at this resolution; "
            "pick n_steps as a multiple of horizon_h/budget_h"
        )
    up = np.zeros(n_steps)
    up[:k] = 1.0
    return Trajectory(up, dt), Trajectory(-up, dt)


def mc_expected_terminal_soc(xb: float, xr: float, bat: BatterySpec,
                             con: RegulationContract,
                             dist: DeviationDistribution, n_steps: int,
                             n_paths: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo mean terminal state of charge and its 99% half-width.

    Paths draw iid deviations per step without budget capping, matching
    the marginal-law derivation of the closed-form expectation.  Sampling
    is chunked; chunk seeds derive from (seed, chunk index) and partial
    results are aggregated in chunk order, so the output depends only on
    (seed, n_paths).
    """
    if n_paths < 100:
        raise ValueError("n_paths must be at least 100")
    dt = con.horizon_h / n_steps
    if xr == 0.0:
        # Deterministic: every path charges at the same constant rate.
        rate = (
            bat.eff.eta_plus * max(xb, 0.0)
            - max(-xb, 0.0) / bat.eff.eta_minus
        )
        return bat.soc0_kwh + con.horizon_h * rate, 0.0
    eta_p = bat.eff.eta_plus
    inv_eta_m = 1.0 / bat.eff.eta_minus
    chunks = []
    done = 0
    chunk_idx = 0
    while done < n_paths:
        size = min(CHUNK, n_paths - done)
        rng = np.random.default_rng([seed, chunk_idx])
        draws = dist.sample_with(rng, (size, n_steps))
        power = xb + draws * xr
        rate = eta_p * np.maximum(power, 0.0) - inv_eta_m * np.maximum(-power, 0.0)
        chunks.append(bat.soc0_kwh + dt * rate.sum(axis=1))
        done += size
        chunk_idx += 1
    terminal = np.concatenate(chunks)
    mean = float(np.mean(terminal))
    half_width = Z99 * float(np.std(terminal, ddof=1)) / math.sqrt(n_paths)
    return mean, half_width


def rearrange_nonincreasing(traj: Trajectory) -> Trajectory:
    """Sort a nonnegative trajectory in nonincreasing order.

    The rearranged signal front-loads the deviations; it dominates the
    original pathwise in state of charge and preserves the budget exactly.
    """
    if float(np.min(traj.values)) < 0.0:
        raise ValueError(
            "rearrangement needs a nonnegative signal; apply to absolute "
            "values first"
        )
    ordered = np.sort(traj.values)[::-1].copy()
    return Trajectory(ordered, traj.dt_h)


@dataclass(frozen=True)
class ConstraintCheck:
    """One closed-form constraint: satisfied iff lhs <= rhs."""

    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


@dataclass(frozen=True)
class FeasibilityReport:
    """Closed-form constraint margins against pathwise evidence.

    ``attained`` maps each worst-case quantity to its closed-form value and
    the value reached by the matching extreme signal; the two agree up to
    roundoff when the reduction is tight.  ``sampled_max_violation`` is the
    largest pathwise bound violation over all checked signals (the two
    extreme ones plus the random members).
    """

    checks: tuple[ConstraintCheck, ...]
    feasible: bool
    attained: dict = field(repr=False)
    sampled_max_violation: float = 0.0
    n_signals: int = 0

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "constraints": [
                {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "margin": c.margin}
                for c in self.checks
            ],
            "attained": {
                k: {"closed_form": v[0], "pathwise": v[1]}
                for k, v in self.attained.items()
            },
            "sampled_max_violation": self.sampled_max_violation,
            "n_signals": self.n_signals,
        }


def _signal_violation(power: np.ndarray, soc: np.ndarray,
                      bat: BatterySpec) -> float:
    return max(
        float(np.max(power)) - bat.charge_cap_kw,
        float(np.max(-power)) - bat.discharge_cap_kw,
        float(np.max(soc)) - bat.cap_kwh,
        -float(np.min(soc)),
        0.0,
    )


def _random_member(rng: np.random.Generator, n_steps: int, dt: float,
                   budget_h: float) -> np.ndarray:
    """A random member of the uncertainty set: uniform magnitudes with
    random signs, scaled down if the budget would be exceeded."""
    magnitudes = rng.uniform(0.0, 1.0, n_steps)
    signs = rng.integers(0, 2, n_steps) * 2 - 1
    values = magnitudes * signs
    total = float(np.sum(np.abs(values)) * dt)
    if total > budget_h:
        values *= budget_h / total
    return values


def check_robust_feasibility(xb: float, xr: float, bat: BatterySpec,
                             con: RegulationContract, n_random: int = 1000,
                             seed: int = 0,
                             n_steps: int | None = None) -> FeasibilityReport:
    """Compare the closed-form feasibility reduction against trajectories.

    Reports the four closed-form constraints, the worst-case power and
    state-of-charge levels attained by the two extreme signals, and the
    largest pathwise violation over the extreme signals plus ``n_random``
    random members of the uncertainty set.
    """
    if xr < 0.0:
        raise ValueError("regulation power must be nonnegative")
    gamma = con.budget_h
    horizon = con.horizon_h
    eta_p, eta_m = bat.eff.eta_plus, bat.eff.eta_minus
    y0 = bat.soc0_kwh
    checks = (
        ConstraintCheck("charge_power", xr + xb, bat.charge_cap_kw),
        ConstraintCheck("discharge_power", xr - xb, bat.discharge_cap_kw),
        ConstraintCheck(
            "soc_ceiling",
            xr + max(horizon / gamma * xb, xb),
            (bat.cap_kwh - y0) / (eta_p * gamma),
        ),
        ConstraintCheck(
            "soc_floor",
            xr - min(horizon / gamma * xb, xb),
            eta_m * y0 / gamma,
        ),
    )
    feasible = all(c.ok for c in checks)

    if n_steps is None:
        n_steps = _aligned_steps(con, 512)
    up, down = worst_case_signals(con, n_steps)
    soc_up = integrate_soc(xb, xr, up, bat)
    soc_down = integrate_soc(xb, xr, down, bat)
    attained = {
        "charge_power": (xr + xb, float(np.max(xb + up.values * xr))),
        "discharge_power": (xr - xb, float(np.max(-(xb + down.values * xr)))),
        "soc_max": (
            y0 + eta_p * max(0.0, gamma * (xb + xr), gamma * xr + horizon * xb),
            float(np.max(soc_up)),
        ),
        "soc_min": (
            y0 - max(0.0, gamma * (xr - xb), gamma * xr - horizon * xb) / eta_m,
            float(np.min(soc_down)),
        ),
    }

    worst = 0.0
    signals = 0
    for traj in (up, down):
        power = xb + traj.values * xr
        worst = max(worst, _signal_violation(power, integrate_soc(xb, xr, traj, bat), bat))
        signals += 1
    rng = np.random.default_rng(seed)
    dt = horizon / n_steps
    for _ in range(n_random):
        values = _random_member(rng, n_steps, dt, gamma)
        traj = Trajectory(values, dt)
        power = xb + values * xr
        worst = max(worst, _signal_violation(power, integrate_soc(xb, xr, traj, bat), bat))
        signals += 1
    return FeasibilityReport(checks, feasible, attained, worst, signals)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One value per line after a `# dt=<hours> T=<hours>` header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dt={traj.dt_h!r} T={traj.horizon_h!r}\n")
        for v in traj.values:
            fh.write(f"{float(v)!r}\n")


def read_trajectory_csv(path) -> Trajectory:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("missing trajectory header line")
        fields = dict(
            token.split("=", 1) for token in header.lstrip("# ").split()
            if "=" in token
        )
        try:
            dt = float(fields["dt"])
            horizon = float(fields["T"])
        except (KeyError, ValueError) as exc:
            raise ValueError("header must carry dt=<hours> T=<hours>") from exc
        values = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: not a number: {line!r}") from exc
    traj = Trajectory(np.array(values), dt)
    if abs(traj.horizon_h - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError(
            f"header horizon {horizon} h does not match "
            f"{traj.n_steps} steps of {dt} h"
        )
    return traj
