"""The implicit purchase function behind a regulation bid.

A storage device that sells regulation power must also buy a baseline of
energy so that the expected drift of its state of charge stays on target.
This module evaluates that coupling:

* :func:`expected_charge_rate` -- mean drift of the state of charge for a
  given purchase and bid;
* :func:`purchase_power` -- the purchase required to hold the drift target,
  found by inverting the rate in its (strictly increasing) purchase
  argument;
* :func:`purchase_slopes` -- one-sided derivatives of the purchase with
  respect to the bid;
* :func:`asymptotic_slope` / :func:`slope_bounds` -- the marginal purchase
  per unit of bid in the large-bid limit, and closed-form brackets for it;
* :func:`purchase_bounds` -- closed-form envelopes of the whole purchase
  curve, valid for every distribution with the same mean absolute
  deviation.

Powers are in kW, energies in kWh; deviations are normalised to [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DeviationDistribution
from .errors import AssumptionError
from .rootfind import BISECT_MAX_ITER, bisect_root

__all__ = [
    "EfficiencyPair",
    "PurchaseContext",
    "expected_charge_rate",
    "asymptotic_slope",
    "slope_bounds",
    "purchase_power",
    "purchase_power_many",
    "purchase_slopes",
    "purchase_bounds",
]

# Beyond this bid the purchase is reported via its asymptote slope * bid;
# the dropped offset is below 1e-12 relative at the threshold.
XR_ASYMPTOTE = 1e12


@dataclass(frozen=True)
class EfficiencyPair:
    """Charging and discharging efficiencies, both in (0, 1]."""

    eta_plus: float
    eta_minus: float

    def __post_init__(self):
        for name in ("eta_plus", "eta_minus"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    @property
    def roundtrip(self) -> float:
        return self.eta_plus * self.eta_minus

    @property
    def drain(self) -> float:
        """Energy lost per unit of balanced charge/discharge activity."""
        return 1.0 / self.eta_minus - self.eta_plus


def expected_charge_rate(xb, xr, eff: EfficiencyPair, dist: DeviationDistribution):
    """Expected drift of the state of charge, in kW.

    Parameters
    ----------
    xb : float or array
        Baseline purchase power (may be negative: net selling).
    xr : float or array
        Regulation bid, nonnegative.
    eff, dist
        Efficiencies and deviation law of the regulation signal.

    Returns
    -------
    float or array
        eta_plus * xb - drain * xr * scdf(-xb / xr); at ``xr = 0`` the
        continuous limit eta_plus * [xb]+ - [xb]- / eta_minus.

    Notes
    -----
    Strictly increasing in ``xb`` and nonincreasing in ``xr``.
    """
    if np.ndim(xb) == 0 and np.ndim(xr) == 0:
        xb, xr = float(xb), float(xr)
        if xr < 0.0:
            raise ValueError("bid must be nonnegative")
        if xr == 0.0:
            return eff.eta_plus * xb - eff.drain * max(-xb, 0.0)
        return eff.eta_plus * xb - eff.drain * xr * dist.scdf(-xb / xr)
    xb = np.asarray(xb, dtype=float)
    xr = np.asarray(xr, dtype=float)
    if np.any(xr < 0.0):
        raise ValueError("bid must be nonnegative")
    active = xr > 0.0
    safe_xr = np.where(active, xr, 1.0)
    with_reg = eff.eta_plus * xb - eff.drain * xr * dist.scdf(-xb / safe_xr)
    no_reg = eff.eta_plus * xb - eff.drain * np.maximum(-xb, 0.0)
    return np.where(active, with_reg, no_reg)


def asymptotic_slope(eff: EfficiencyPair, dist: DeviationDistribution) -> float:
    """Marginal purchase per unit of bid in the large-bid limit.

    The unique fixed point in [0, 1) of  s = (1 - roundtrip) * scdf(s),
    found by bisection.  Residual is below 1e-12 by construction.
    """
    a = eff.roundtrip
    if a >= 1.0:
        return 0.0
    loss = 1.0 - a
    if 1.0 - loss * dist.scdf(1.0) <= 0.0:
        raise AssumptionError(
            "deviation law too heavy for the efficiency: no slope below one"
        )
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid - loss * dist.scdf(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def slope_bounds(eff: EfficiencyPair, mad: float) -> tuple[float, float]:
    """Closed-form bracket of the asymptotic slope over all laws with this mad.

    The bounds are the exact slopes under the two-point and three-point
    extremal distributions.
    """
    a = eff.roundtrip
    lower = mad * (1.0 - a) / (1.0 + a)
    upper = 1.0 - 1.0 / (1.0 + (1.0 / a - 1.0) * mad / 2.0)
    return lower, upper


@dataclass(frozen=True, eq=False)
class PurchaseContext:
    """One problem's efficiencies, deviation law and drift target.

    ``drift_target`` is the required mean rate of change of the state of
    charge in kW, i.e. (target - initial) / horizon.  The asymptotic slope
    is computed once at construction.
    """

    eff: EfficiencyPair
    dist: DeviationDistribution
    drift_target: float
    slope: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "slope", asymptotic_slope(self.eff, self.dist))

    @property
    def base_purchase(self) -> float:
        """Purchase power at zero bid (deterministic charging or discharging)."""
        d = self.drift_target
        return d / self.eff.eta_plus if d >= 0.0 else self.eff.eta_minus * d


def purchase_power(xr: float, ctx: PurchaseContext) -> float:
    """Baseline purchase holding the drift target at bid ``xr``.

    Nondecreasing and convex in ``xr``.  For a balanced target the curve is
    exactly ``slope * xr``; otherwise the rate equation is inverted by
    bisection on the bracket [base, base + slope * xr], whose residual signs
    are guaranteed by monotonicity and convexity (the bracket is widened
    once by 1e-9 * (1 + |base|) if rounding breaks the sign check).
    """
    xr = float(xr)
    if xr < 0.0:
        raise ValueError("bid must be nonnegative")
    base = ctx.base_purchase
    if xr == 0.0:
        return base
    if ctx.drift_target == 0.0:
        return ctx.slope * xr
    if xr > XR_ASYMPTOTE:
        return ctx.slope * xr
    eff, dist, target = ctx.eff, ctx.dist, ctx.drift_target

    def residual(xb: float) -> float:
        return expected_charge_rate(xb, xr, eff, dist) - target

    lo, hi = base, base + ctx.slope * xr
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        pad = 1e-9 * (1.0 + abs(base))
        lo, hi = lo - pad, hi + pad
        f_lo, f_hi = residual(lo), residual(hi)
    return bisect_root(residual, lo, hi, f_lo, f_hi)


def purchase_power_many(xr, ctx: PurchaseContext) -> np.ndarray:
    """Vectorised :func:`purchase_power` over a grid of bids."""
    xr = np.asarray(xr, dtype=float)
    if np.any(xr < 0.0):
        raise ValueError("bids must be nonnegative")
    base = ctx.base_purchase
    if ctx.drift_target == 0.0:
        return ctx.slope * xr
    out = np.full(xr.shape, base)
    big = xr > XR_ASYMPTOTE
    out[big] = ctx.slope * xr[big]
    todo = (xr > 0.0) & ~big
    if not np.any(todo):
        return out
    x = xr[todo]
    lo = np.full(x.shape, base)
    hi = base + ctx.slope * x
    target = ctx.drift_target
    r_lo = expected_charge_rate(lo, x, ctx.eff, ctx.dist) - target
    r_hi = expected_charge_rate(hi, x, ctx.eff, ctx.dist) - target
    pad = 1e-9 * (1.0 + abs(base))
    lo = np.where(r_lo > 0.0, lo - pad, lo)
    hi = np.where(r_hi < 0.0, hi + pad, hi)
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        done = (mid == lo) | (mid == hi)
        if np.all(done):
            break
        r = expected_charge_rate(mid, x, ctx.eff, ctx.dist) - target
        go_left = r >= 0.0
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
    out[todo] = 0.5 * (lo + hi)
    return out


def purchase_slopes(xr: float, ctx: PurchaseContext) -> tuple[float, float]:
    """One-sided derivatives (left, right) of the purchase at bid ``xr``.

    Both lie in [0, slope] and the pair is nondecreasing: the purchase curve
    is convex.  At a kink (discrete deviation law) the two differ; they are
    computed from the one-sided CDF limits at the active deviation ratio.
    At ``xr = 0`` both sides report the right derivative: the asymptotic
    slope for a balanced target, zero otherwise.
    """
    xr = float(xr)
    if xr < 0.0:
        raise ValueError("bid must be nonnegative")
    if xr == 0.0:
        s = ctx.slope if ctx.drift_target == 0.0 else 0.0
        return s, s
    xb = purchase_power(xr, ctx)
    z = -xb / xr
    f_left, f_right = ctx.dist.cdf_pair(z)
    phi = ctx.dist.scdf(z)
    eta_p, drain = ctx.eff.eta_plus, ctx.eff.drain

    def slope_at(f: float) -> float:
        return drain * (phi - z * f) / (eta_p + drain * f)

    s1, s2 = slope_at(f_left), slope_at(f_right)
    return (s1, s2) if s1 <= s2 else (s2, s1)


def purchase_bounds(xr, ctx: PurchaseContext):
    """Closed-form envelopes of the purchase curve at bid ``xr``.

    Returns ``(lower, upper)``.  The envelopes are the exact purchase curves
    under the two-point and three-point extremal laws with the context's
    mean absolute deviation, so they sandwich the purchase for every
    deviation law with that mad.  Accepts floats or arrays.
    """
    scalar = np.ndim(xr) == 0
    x = np.asarray(xr, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("bids must be nonnegative")
    a = ctx.eff.roundtrip
    s_low, s_up = slope_bounds(ctx.eff, ctx.dist.mad)
    base = ctx.base_purchase
    base_pos, base_neg = max(base, 0.0), max(-base, 0.0)
    phi0 = ctx.dist.scdf(0.0)
    lower = np.maximum(base, s_low * x + base - (1.0 - a) / (1.0 + a) * abs(base))
    mid_piece = ((1.0 - a) * phi0 * x - base_neg) / (a + (1.0 - a) * (1.0 - phi0))
    top_piece = s_up * x + (a * base_pos - base_neg) / (a + (1.0 - a) * phi0)
    upper = np.maximum(base, np.maximum(mid_piece, top_piece))
    if scalar:
        return float(lower), float(upper)
    return lower, upper
