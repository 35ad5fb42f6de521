"""
Closed-form kin-selection analysis of a symmetric 2x2 game.

Two settings are covered:

- single locus: both players consult the same locus, a partner shares the focal
  allele with probability r and is otherwise drawn from the population;
- role-separated loci: the interaction history makes one player the potential
  altruist and the other the potential beneficiary, and each consults a
  different locus. Fitnesses are inclusive (own payoff + r x partner payoff).

Thresholds and equilibria that hit a vanishing denominator are returned as
reports with explicit flags instead of infinities.
"""
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import InvalidInputError
from games.game_core import Additivity, PayoffMatrix, decompose, synergy_class


class Mode(str, Enum):
    SINGLE = "single"
    ROLES = "roles"


class KinContext(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    r: float = Field(ge=0, le=1)
    f_c: float = Field(ge=0, le=1)


class Threshold(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: Optional[float]
    defined: bool
    out_of_range: bool


class ThresholdBounds(BaseModel):
    """
    Endpoints of the interval a relatedness threshold sweeps as f_c goes 0 -> 1.

    `at_zero` is the threshold when f_c = 0 and `at_one` when f_c = 1; lo/hi are the
    same two values in order.
    """

    model_config = ConfigDict(frozen=True)

    at_zero: Optional[float]
    at_one: Optional[float]

    @property
    def defined(self) -> bool:
        return self.at_zero is not None and self.at_one is not None

    @property
    def lo(self) -> Optional[float]:
        return min(self.at_zero, self.at_one) if self.defined else None

    @property
    def hi(self) -> Optional[float]:
        return max(self.at_zero, self.at_one) if self.defined else None


class ThresholdCurve(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Mode
    points: List[Tuple[float, Optional[float]]]
    lo: Optional[float]
    hi: Optional[float]


class EquilibriumReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Mode
    r: float
    f_star: Optional[float]
    stable: bool
    interval_lo: Optional[float]
    interval_hi: Optional[float]
    outcome: str
    reason: str

    @property
    def existence_interval(self) -> Tuple[Optional[float], Optional[float]]:
        return (self.interval_lo, self.interval_hi)


class HamiltonComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    c_over_b: Optional[float]
    direction: str


def _unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def _threshold(num: float, den: float) -> Threshold:
    if den == 0:
        return Threshold(value=None, defined=False, out_of_range=False)
    value = num / den
    return Threshold(value=value, defined=True, out_of_range=not 0.0 <= value <= 1.0)


def _ratio(num: float, den: float) -> Optional[float]:
    return None if den == 0 else num / den


# ---------------------------------------------------------------------------
# single locus


def fitness_single(m: PayoffMatrix, ctx: KinContext) -> Tuple[float, float]:
    r, f = ctx.r, ctx.f_c
    w_c = r * m.r + (1 - r) * (f * m.r + (1 - f) * m.s)
    w_d = r * m.p + (1 - r) * (f * m.t + (1 - f) * m.p)
    return w_c, w_d


def threshold_single(m: PayoffMatrix, f_c: float) -> Threshold:
    """Relatedness above which cooperation alleles win, given f_c (sign flips there)."""
    f = _unit("f_c", f_c)
    d = decompose(m).d
    return _threshold(f * d + m.s - m.p, f * d + m.s - m.r)


def threshold_bounds_single(m: PayoffMatrix) -> ThresholdBounds:
    return ThresholdBounds(
        at_zero=_ratio(m.s - m.p, m.s - m.r),
        at_one=_ratio(m.r - m.t, m.p - m.t),
    )


def _single_difference(m: PayoffMatrix, r: float, f: float) -> float:
    w_c, w_d = fitness_single(m, KinContext(r=r, f_c=f))
    return w_c - w_d


def _boundary_outcome(diff: float) -> str:
    if diff > 0:
        return "cooperation_fixes"
    if diff < 0:
        return "defection_fixes"
    return "neutral"


def equilibrium_single(m: PayoffMatrix, r: float) -> EquilibriumReport:
    r = _unit("r", r)
    d = decompose(m).d
    bounds = threshold_bounds_single(m)
    common = dict(mode=Mode.SINGLE, r=r, interval_lo=bounds.lo, interval_hi=bounds.hi)

    if synergy_class(m).kind is Additivity.ADDITIVE:
        outcome = _boundary_outcome(_single_difference(m, r, 0.5))
        return EquilibriumReport(
            **common, f_star=None, stable=False, outcome=outcome,
            reason="additive payoffs: no mixed equilibrium, Hamilton's rule decides fixation",
        )
    if r == 1.0:
        return EquilibriumReport(
            **common, f_star=None, stable=False, outcome="undefined",
            reason="r = 1 makes the (1 - r) denominator of the mixed equilibrium vanish",
        )

    f_star = (m.p - m.s - r * (m.r - m.s)) / ((1 - r) * d)
    # the threshold curve can have a pole inside [0, 1], so judge f_star itself
    inside = 0.0 < f_star < 1.0
    if inside:
        stable = d < 0
        return EquilibriumReport(
            **common, f_star=f_star, stable=stable, outcome="mixed",
            reason="stable mixed equilibrium (d < 0)" if stable else "unstable mixed equilibrium (d > 0)",
        )
    outcome = _boundary_outcome(_single_difference(m, r, 0.5))
    return EquilibriumReport(
        **common, f_star=None, stable=False, outcome=outcome,
        reason="no equilibrium frequency strictly between 0 and 1 at this r",
    )


# ---------------------------------------------------------------------------
# role-separated loci


def inclusive_fitness_roles(m: PayoffMatrix, r: float, f_c_other: float) -> Tuple[float, float]:
    r = _unit("r", r)
    f = _unit("f_c_other", f_c_other)
    i_c = m.r * f + m.s * (1 - f) + r * (m.r * f + m.t * (1 - f))
    i_d = m.t * f + m.p * (1 - f) + r * (m.s * f + m.p * (1 - f))
    return i_c, i_d


def threshold_roles(m: PayoffMatrix, f_c_other: float) -> Threshold:
    f = _unit("f_c_other", f_c_other)
    d = decompose(m).d
    return _threshold(-(f * d + m.s - m.p), f * d + m.t - m.p)


def threshold_bounds_roles(m: PayoffMatrix) -> ThresholdBounds:
    return ThresholdBounds(
        at_zero=_ratio(m.p - m.s, m.t - m.p),
        at_one=_ratio(m.t - m.r, m.r - m.s),
    )


def _roles_difference(m: PayoffMatrix, r: float, f: float) -> float:
    i_c, i_d = inclusive_fitness_roles(m, r, f)
    return i_c - i_d


def equilibrium_roles(m: PayoffMatrix, r: float) -> EquilibriumReport:
    """
    Frequency of cooperation among potential recipients at which i_c = i_d.

    Solving i_c = i_d gives (P - S - r(T - P)) / ((1 + r) d). The symmetric
    interior point is a saddle of the coupled two-locus flow, so `stable` is False.
    """
    r = _unit("r", r)
    d = decompose(m).d
    bounds = threshold_bounds_roles(m)
    common = dict(mode=Mode.ROLES, r=r, interval_lo=bounds.lo, interval_hi=bounds.hi)

    if synergy_class(m).kind is Additivity.ADDITIVE:
        outcome = _boundary_outcome(_roles_difference(m, r, 0.5))
        return EquilibriumReport(
            **common, f_star=None, stable=False, outcome=outcome,
            reason="additive payoffs: recipient frequency drops out, no interior equilibrium",
        )

    f_star = (m.p - m.s - r * (m.t - m.p)) / ((1 + r) * d)
    # the threshold curve can have a pole inside [0, 1], so judge f_star itself
    inside = 0.0 < f_star < 1.0
    if inside:
        return EquilibriumReport(
            **common, f_star=f_star, stable=False, outcome="mixed",
            reason="interior equilibrium; saddle of the coupled two-locus dynamics",
        )
    outcome = _boundary_outcome(_roles_difference(m, r, 0.5))
    return EquilibriumReport(
        **common, f_star=None, stable=False, outcome=outcome,
        reason="no equilibrium frequency strictly between 0 and 1 at this r",
    )


def appendix_a_fitness(b: float, c: float, d: float, q: float, r: float) -> Tuple[float, float]:
    """Role-separated inclusive fitnesses written with cost, benefit and synergy."""
    q = _unit("q", q)
    r = _unit("r", r)
    i_c = r * (b + q * d) - c + q * (b + d)
    i_d = q * b
    return i_c, i_d


# ---------------------------------------------------------------------------
# Hamilton's rule and curves


def hamiltons_rule(b: float, c: float, r: float) -> bool:
    if b <= 0:
        raise InvalidInputError(f"benefit b must be > 0 for strong altruism, got {b}")
    r = _unit("r", r)
    return c / b < r


def hamilton_comparison(m: PayoffMatrix) -> HamiltonComparison:
    """Whether synergy makes single-locus altruism harder or easier than c/b predicts."""
    dec = decompose(m)
    c_over_b = dec.c / dec.b if dec.b > 0 else None
    kind = synergy_class(m).kind
    direction = {
        Additivity.ADDITIVE: "exact",
        Additivity.NEGATIVE: "harder",
        Additivity.POSITIVE: "easier",
    }[kind]
    return HamiltonComparison(c_over_b=c_over_b, direction=direction)


def threshold_curve(m: PayoffMatrix, mode: Mode = Mode.SINGLE, samples: int = 101) -> ThresholdCurve:
    if samples < 2:
        raise InvalidInputError(f"samples must be >= 2, got {samples}")
    mode = Mode(mode)
    threshold = threshold_single if mode is Mode.SINGLE else threshold_roles
    bounds = threshold_bounds_single(m) if mode is Mode.SINGLE else threshold_bounds_roles(m)
    points = []
    for f in np.linspace(0.0, 1.0, samples):
        f = float(f)
        points.append((f, threshold(m, f).value))
    return ThresholdCurve(mode=mode, points=points, lo=bounds.lo, hi=bounds.hi)
