"""Optimal regulation bids.

The net cost of a bid over the horizon is

    horizon * (buy_price(purchase) * purchase - bid_price(bid) * bid)

with the purchase tied to the bid through the drift target.  The cost is
convex in the bid, so the optimum is one of three candidates: zero, the
largest deliverable bid, or the smallest stationary point where the price
ratio enters the purchase curve's subdifferential.  Ties break toward the
smaller bid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .distributions import DeviationDistribution
from .errors import AssumptionError, TargetMismatchError
from .feasible import BatterySpec, RegulationContract, context_for, max_feasible_bid
from .purchase import PurchaseContext, purchase_power, purchase_slopes
from .rootfind import bisect_threshold

__all__ = [
    "MarketPrices",
    "BidSolution",
    "SizingRule",
    "solve_inelastic",
    "solve_elastic",
    "analytic_bid",
    "energy_constrained_optimum",
]


@dataclass(frozen=True)
class MarketPrices:
    """Market prices, all in cents.

    Inelastic mode: ``cb`` (per kWh bought) and ``cr`` (per kW of regulation
    per hour).  Elastic mode: affine price curves cb0 + cbd * purchase for
    energy and ca0 - cad * bid for regulation, with nonnegative elasticities.
    """

    mode: str = "inelastic"
    cb: float | None = None
    cr: float | None = None
    cb0: float | None = None
    cbd: float | None = None
    ca0: float | None = None
    cad: float | None = None

    def __post_init__(self):
        if self.mode == "inelastic":
            if self.cb is None or self.cb <= 0.0:
                raise ValueError("inelastic prices need cb > 0")
            if self.cr is None or self.cr <= 0.0:
                raise ValueError("inelastic prices need cr > 0")
        elif self.mode == "elastic":
            for name in ("cb0", "ca0"):
                v = getattr(self, name)
                if v is None or v <= 0.0:
                    raise ValueError(f"elastic prices need {name} > 0")
            for name in ("cbd", "cad"):
                v = getattr(self, name)
                if v is None or v < 0.0:
                    raise ValueError(f"elastic prices need {name} >= 0")
        else:
            raise ValueError(f"unknown price mode {self.mode!r}")


@dataclass(frozen=True)
class BidSolution:
    """Solver output: the bid, its purchase, and how it was selected."""

    xr_kw: float
    xb_kw: float
    objective_cts: float
    candidate: str  # "zero" | "boundary" | "stationary"
    xr_max_kw: float
    slope: float
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "xr_kw": self.xr_kw,
            "xb_kw": self.xb_kw,
            "objective_cts": self.objective_cts,
            "candidate": self.candidate,
            "xr_max_kw": self.xr_max_kw,
            "slope": self.slope,
            "diagnostics": dict(self.diagnostics),
        }


def _solve_with_ratio(bat: BatterySpec, con: RegulationContract,
                      ctx: PurchaseContext, ratio_at) -> tuple[float, str, float]:
    """Shared three-candidate selection.

    ``ratio_at(xr)`` returns the marginal bid revenue over the marginal
    purchase price at ``xr``; for inelastic prices it is constant.  The
    optimum is the smallest bid whose right slope reaches the ratio, or a
    boundary candidate.
    """
    xr_max = max_feasible_bid(bat, con, ctx)
    if xr_max <= 0.0:
        return 0.0, "zero", xr_max
    if purchase_slopes(0.0, ctx)[1] >= ratio_at(0.0):
        return 0.0, "zero", xr_max
    if purchase_slopes(xr_max, ctx)[0] < ratio_at(xr_max):
        return xr_max, "boundary", xr_max
    xr = bisect_threshold(
        lambda x: purchase_slopes(x, ctx)[1] >= ratio_at(x), 0.0, xr_max
    )
    return xr, "stationary", xr_max


def solve_inelastic(bat: BatterySpec, con: RegulationContract,
                    prices: MarketPrices, dist: DeviationDistribution) -> BidSolution:
    """Minimise the net cost under fixed prices."""
    if prices.mode != "inelastic":
        raise ValueError("solve_inelastic needs inelastic prices")
    ctx = context_for(bat, con, dist)
    ratio = prices.cr / prices.cb
    xr, candidate, xr_max = _solve_with_ratio(bat, con, ctx, lambda _x: ratio)
    xb = purchase_power(xr, ctx)
    objective = con.horizon_h * (prices.cb * xb - prices.cr * xr)
    return BidSolution(
        xr, xb, objective, candidate, xr_max, ctx.slope,
        {
            "price_ratio": ratio,
            "base_purchase_kw": ctx.base_purchase,
            "right_slope_at_zero": purchase_slopes(0.0, ctx)[1],
        },
    )


def solve_elastic(bat: BatterySpec, con: RegulationContract,
                  prices: MarketPrices, dist: DeviationDistribution) -> BidSolution:
    """Minimise the net cost under affine price elasticities.

    With zero elasticities this reproduces :func:`solve_inelastic` exactly
    (same candidate tests, same bisection path).  Convexity of the net cost
    requires the energy price to stay nonnegative over the purchase range,
    i.e. base purchase >= -cb0 / (2 cbd); violated input raises.
    """
    if prices.mode != "elastic":
        raise ValueError("solve_elastic needs elastic prices")
    ctx = context_for(bat, con, dist)
    if prices.cbd > 0.0 and ctx.base_purchase < -prices.cb0 / (2.0 * prices.cbd):
        raise AssumptionError(
            "energy price elasticity turns the net cost non-convex at the "
            "base purchase"
        )

    def ratio_at(xr: float) -> float:
        margin = prices.ca0 - 2.0 * prices.cad * xr
        level = prices.cb0 + 2.0 * prices.cbd * purchase_power(xr, ctx)
        if level <= 0.0:
            return float("inf") if margin > 0.0 else float("-inf")
        return margin / level

    xr, candidate, xr_max = _solve_with_ratio(bat, con, ctx, ratio_at)
    xb = purchase_power(xr, ctx)
    objective = con.horizon_h * (
        prices.cb0 * xb + prices.cbd * xb * xb
        - prices.ca0 * xr + prices.cad * xr * xr
    )
    return BidSolution(
        xr, xb, objective, candidate, xr_max, ctx.slope,
        {
            "price_ratio_at_solution": ratio_at(xr),
            "base_purchase_kw": ctx.base_purchase,
            "right_slope_at_zero": purchase_slopes(0.0, ctx)[1],
        },
    )


def analytic_bid(bat: BatterySpec, con: RegulationContract, slope: float) -> float:
    """Closed-form largest deliverable bid for a balanced drift target.

    Requires the state-of-charge target to equal the initial state (the
    purchase curve is then exactly slope * bid).
    """
    if bat.soc_target_kwh != bat.soc0_kwh:
        raise TargetMismatchError(
            "closed form needs soc_target_kwh == soc0_kwh"
        )
    eta_p, eta_m = bat.eff.eta_plus, bat.eff.eta_minus
    return min(
        bat.discharge_cap_kw / (1.0 - slope),
        bat.charge_cap_kw / (1.0 + slope),
        eta_m * bat.soc0_kwh / (con.budget_h * (1.0 - slope)),
        bat.headroom_kwh / (eta_p * (con.budget_h + slope * con.horizon_h)),
    )


class SizingRule(NamedTuple):
    """Energy-optimal operating point for a balanced storage device."""

    xr_kw: float
    soc0_kwh: float
    c_rate_per_h: float
    binding: str


def energy_constrained_optimum(bat: BatterySpec, con: RegulationContract,
                               slope: float) -> SizingRule:
    """Best bid over the initial state of charge, and the sizing it implies.

    Maximising the closed-form bid over the initial state equalises the
    ceiling and floor energy terms.  Returns the maximal bid, the optimal
    initial state, the minimum charger size per kWh of storage that keeps
    the energy term binding, and which term limits the bid.
    """
    a = bat.eff.roundtrip
    eta_m = bat.eff.eta_minus
    q = con.activation
    horizon = con.horizon_h
    denom = q * (1.0 + a - slope) + a * slope
    terms = {
        "discharge_cap": bat.discharge_cap_kw / (1.0 - slope),
        "charge_cap": bat.charge_cap_kw / (1.0 + slope),
        "energy": eta_m / denom * bat.cap_kwh / horizon,
    }
    binding = min(terms, key=terms.get)
    soc0 = (1.0 - slope) * bat.cap_kwh / (
        1.0 + a + (a * horizon / con.budget_h - 1.0) * slope
    )
    c_rate = (1.0 + slope) * eta_m / denom / horizon
    return SizingRule(terms[binding], soc0, c_rate, binding)
