"""Weight parameters and the parameter-space classifier.

The quadruple (N, k, l, alpha) fixes the perimeter density |x|^k x_N^alpha
and the measure density |x|^l x_N^alpha on the open half-space.  This
module validates admissibility, evaluates every inequality the theory
attaches to a parameter point (each with both numeric sides recorded), and
classifies points into regions: half-balls stable yet no minimizer exists /
centered half-balls minimize / nonexistence certified by a translated-ball
family / undetermined.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import product
from typing import Optional


class AdmissibilityError(ValueError):
    """Raised when (N, k, l, alpha) violates an integrability condition."""

    def __init__(self, condition, message):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class WeightParams:
    """Dimension N >= 2 and real exponents k (perimeter), l (measure), alpha.

    Admissible iff alpha > -1, l+N+alpha > 0 and k+N+alpha > 0 (these make
    the weighted measure and relative perimeter of bounded sets finite).
    """

    N: int
    k: float
    l: float
    alpha: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")


def validate(params: WeightParams) -> None:
    """Raise AdmissibilityError naming the violated inequality, if any."""
    if not params.alpha > -1.0:
        raise AdmissibilityError("alpha", f"alpha > -1 required, got alpha={params.alpha}")
    if not params.l + params.N + params.alpha > 0.0:
        raise AdmissibilityError(
            "l+N+alpha",
            f"l+N+alpha > 0 required, got {params.l + params.N + params.alpha}",
        )
    if not params.k + params.N + params.alpha > 0.0:
        raise AdmissibilityError(
            "k+N+alpha",
            f"k+N+alpha > 0 required, got {params.k + params.N + params.alpha}",
        )


def is_valid(params: WeightParams) -> bool:
    try:
        validate(params)
    except AdmissibilityError:
        return False
    return True


@dataclass(frozen=True)
class Comparison:
    """One inequality with both sides kept for reporting."""

    lhs: float
    rhs: float
    relation: str  # "<" or "<=" or ">="

    @property
    def holds(self) -> bool:
        if self.relation == "<":
            return self.lhs < self.rhs
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == ">=":
            return self.lhs >= self.rhs
        raise ValueError(f"unknown relation {self.relation!r}")


@dataclass(frozen=True)
class ConditionReport:
    """Every classification inequality evaluated at one parameter point.

    cond_1_1 : k+N+alpha-1 < sqrt((N-1)(N+alpha-1))
    cond_1_2 : N(k+N+alpha-1) < (l+N+alpha)(N-1)
    cond_1_3 : l+1 <= k + (N+alpha-1)/(k+N+alpha-1)   (non-strict)
    nec1     : kN >= l(N-1) - alpha          (up-axis family necessary cond.)
    nec2     : k(N+alpha) >= l(N+alpha-1)    (on-wall family necessary cond.)
    """

    cond_1_1: Comparison
    cond_1_2: Comparison
    cond_1_3: Comparison
    nec1: Comparison
    nec2: Comparison
    k_ge_l_plus_1: bool


class RegionTag(enum.Enum):
    INVALID = "Invalid"
    NO_SOLUTION_STABLE_HALF_BALLS = "NoSolutionStableHalfBalls"
    RADIAL_MINIMIZER = "RadialMinimizer"
    NONEXISTENCE_UP_AXIS = "NonexistenceByUpAxisFamily"
    NONEXISTENCE_ON_WALL = "NonexistenceByOnWallFamily"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class RegionClass:
    tag: RegionTag
    witness: Optional[ConditionReport]  # None only for Invalid


def evaluate_conditions(params: WeightParams) -> ConditionReport:
    """Evaluate all inequalities exactly as stated, recording both sides.

    Comparisons are exact on the computed doubles (no epsilon); equality
    cases of the non-strict conditions are honored, e.g. cond_1_3 holds
    with equality whenever k = 0 because (N+alpha-1)/(k+N+alpha-1) is then
    an exact 1.0.
    """
    validate(params)
    N, k, l, a = params.N, params.k, params.l, params.alpha
    knam1 = k + N + a - 1.0
    cond_1_1 = Comparison(knam1, math.sqrt((N - 1.0) * (N + a - 1.0)), "<")
    cond_1_2 = Comparison(N * knam1, (l + N + a) * (N - 1.0), "<")
    if knam1 != 0.0:
        rhs13 = k + (N + a - 1.0) / knam1
    else:
        rhs13 = math.inf if N + a - 1.0 >= 0.0 else -math.inf
    cond_1_3 = Comparison(l + 1.0, rhs13, "<=")
    nec1 = Comparison(k * N, l * (N - 1.0) - a, ">=")
    nec2 = Comparison(k * (N + a), l * (N + a - 1.0), ">=")
    return ConditionReport(cond_1_1, cond_1_2, cond_1_3, nec1, nec2, k >= l + 1.0)


def classify(params: WeightParams) -> RegionClass:
    """Classify one parameter point.

    Precedence: Invalid, then the stable-but-no-solution region (which
    additionally needs alpha in (-1,0), the standing assumption of that
    statement), then the radial-minimizer region k >= l+1, then the two
    nonexistence certificates, then Undetermined.  Inadmissible points are
    a classification, never an error (grid sweeps must not abort).
    """
    if not is_valid(params):
        return RegionClass(RegionTag.INVALID, None)
    report = evaluate_conditions(params)
    in_alpha_window = -1.0 < params.alpha < 0.0
    if (
        in_alpha_window
        and report.cond_1_1.holds
        and report.cond_1_2.holds
        and report.cond_1_3.holds
    ):
        return RegionClass(RegionTag.NO_SOLUTION_STABLE_HALF_BALLS, report)
    if report.k_ge_l_plus_1:
        return RegionClass(RegionTag.RADIAL_MINIMIZER, report)
    if not report.nec1.holds:
        return RegionClass(RegionTag.NONEXISTENCE_UP_AXIS, report)
    if not report.nec2.holds:
        return RegionClass(RegionTag.NONEXISTENCE_ON_WALL, report)
    return RegionClass(RegionTag.UNDETERMINED, report)


def sweep_grid(N_values, k_values, l_values, alpha_values):
    """Classify every grid point, in lexicographic order of grid indices.

    Returns a list of (WeightParams, RegionClass).  Inadmissible points
    come back tagged Invalid; they never abort the sweep.
    """
    rows = []
    for N, k, l, a in product(N_values, k_values, l_values, alpha_values):
        p = WeightParams(N=N, k=float(k), l=float(l), alpha=float(a))
        rows.append((p, classify(p)))
    return rows
