"""Trial-family experiments.

Half-space side: the isoperimetric ratio along translated unit balls
B_1(t e_N) (up-axis) and B_1(t e_1) (on-wall) decays like a power of t
whenever the corresponding necessary condition fails; sweeps fit the
log-log slope over a tail window and compare with the predicted exponent.

Whole-space side (radial weights f = g = h(|x|) on R^N): a log-convex
weight that decreases on an interval admits, for every small enough
prescribed measure, an off-center ball with strictly smaller weighted
perimeter than the centered one; and for power-law decaying weights a
family of far-away balls of fixed measure has perimeter tending to zero.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import UpAxisBall, OnWallBall, sphere_area, weighted_geometry
from .params import WeightParams, validate
from .quadrature import IntegralEstimate, gauss_jacobi, mc_integrate


class Family(enum.Enum):
    UP_AXIS = "up_axis"
    ON_WALL = "on_wall"


def predicted_exponent(params: WeightParams, family: Family) -> float:
    """Leading-order decay exponent of the ratio along a trial family.

    Up-axis: on B_1(t e_N) both densities see |x| ~ x_N ~ t, so measure ~
    t^(alpha+l), perimeter ~ t^(alpha+k), giving
    alpha+k - (k+N+alpha-1)(alpha+l)/(l+N+alpha).  On-wall: the x_N^alpha
    factor integrates to a t-independent constant over the wall-centered
    half-ball, leaving k - l(k+N+alpha-1)/(l+N+alpha).
    """
    validate(params)
    N, k, l, a = params.N, params.k, params.l, params.alpha
    e = (k + N + a - 1.0) / (l + N + a)
    if family is Family.UP_AXIS:
        return a + k - e * (a + l)
    if family is Family.ON_WALL:
        return k - e * l
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class SweepRow:
    t: float
    ratio: float
    measure: float
    perimeter: float
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    fitted_slope: float
    slope_stderr: float
    predicted_slope: float
    tail_start: float


def _ols_loglog(ts, ys):
    x = np.log(np.asarray(ts))
    y = np.log(np.asarray(ys))
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    resid = y - (ym + slope * (x - xm))
    dof = max(x.size - 2, 1)
    stderr = math.sqrt(float((resid ** 2).sum()) / dof / sxx)
    return slope, stderr


def run_sweep(
    params: WeightParams,
    family: Family,
    t_grid,
    tail_fraction: float = 0.4,
    jobs: int = 1,
) -> SweepResult:
    """Ratio along the family over t_grid, with a tail log-log slope fit.

    Rows that fail in quadrature are recorded with their error and skipped
    by the fit; the fit needs at least 4 valid tail rows.  Rows are
    independent, so jobs > 1 just maps them over a thread pool; output
    order is the grid order either way.
    """
    validate(params)
    t_grid = [float(t) for t in t_grid]
    if any(t <= 2.0 for t in t_grid):
        raise ValueError("t grid must stay above 2")
    if sorted(t_grid) != t_grid:
        raise ValueError("t grid must be increasing")
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")

    def one(t):
        domain = UpAxisBall(t) if family is Family.UP_AXIS else OnWallBall(t)
        try:
            geom = weighted_geometry(params, domain)
        except Exception as exc:  # per-row failures must not abort the sweep
            return SweepRow(t, math.nan, math.nan, math.nan, error=str(exc))
        return SweepRow(t, geom.ratio, geom.measure.value, geom.perimeter.value)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, t_grid))
    else:
        rows = [one(t) for t in t_grid]

    n_tail = max(4, math.ceil(tail_fraction * len(rows)))
    tail = [r for r in rows[-n_tail:] if r.error is None]
    if len(tail) < 4:
        raise RuntimeError("fit requires at least 4 valid tail rows")
    slope, stderr = _ols_loglog([r.t for r in tail], [r.ratio for r in tail])
    return SweepResult(
        rows=tuple(rows),
        fitted_slope=slope,
        slope_stderr=stderr,
        predicted_slope=predicted_exponent(params, family),
        tail_start=tail[0].t,
    )


# --- radial weights on R^N ---------------------------------------------------


@dataclass(frozen=True)
class RadialWeight:
    """h(r) = r^p ("power") or exp(q(r)) with q a polynomial ("exp_poly").

    ``coeffs`` are ascending polynomial coefficients for exp_poly; for the
    power kind the single entry is the exponent p.
    """

    kind: str
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("power", "exp_poly"):
            raise ValueError("kind must be 'power' or 'exp_poly'")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.kind == "power" and len(self.coeffs) != 1:
            raise ValueError("power weight takes exactly one coefficient (the exponent)")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return r ** self.coeffs[0]
        return np.exp(np.polynomial.polynomial.polyval(r, np.array(self.coeffs)))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            p = self.coeffs[0]
            return p * r ** (p - 1.0)
        q = np.array(self.coeffs)
        dq = np.polynomial.polynomial.polyder(q)
        return np.polynomial.polynomial.polyval(r, dq) * self(r)

    @property
    def power_exponent(self) -> Optional[float]:
        return self.coeffs[0] if self.kind == "power" else None


def power_weight(p: float) -> RadialWeight:
    return RadialWeight("power", (p,))


def exp_poly_weight(*coeffs: float) -> RadialWeight:
    return RadialWeight("exp_poly", coeffs)


def check_counterexample_weight(h: RadialWeight, r_max: float, grid: int = 512) -> None:
    """Gridded check that log h is convex and h strictly decreases on (0, r_max)."""
    if h.kind == "power":
        # log h = p log r is convex iff p <= 0, decreasing iff p < 0
        if h.coeffs[0] >= 0:
            raise ValueError("power weight must have negative exponent to decrease")
        return
    q = np.array(h.coeffs)
    d2 = np.polynomial.polynomial.polyder(q, 2)
    r = np.linspace(0.0, r_max, grid + 2)[1:-1]  # open interval
    if np.any(np.polynomial.polynomial.polyval(r, d2) < -1e-12):
        raise ValueError("log h must be convex on the working interval")
    if np.any(h.derivative(r) >= 0):
        raise ValueError("h must be strictly decreasing on (0, r_max)")


_REL_TOL = 1e-10
_N_MAX = 1024


def _refine_scalar(evaluate, start=16):
    n = start
    prev = evaluate(n)
    while True:
        n *= 2
        cur = evaluate(n)
        if abs(cur - prev) <= _REL_TOL * max(abs(cur), 1e-300):
            return cur
        if n >= _N_MAX:
            raise RuntimeError(f"radial-weight quadrature stalled at {n} nodes")
        prev = cur


def centered_ball_measure(h: RadialWeight, N: int, R: float) -> float:
    """Weighted measure of B_R(0): |S^{N-1}| int_0^R h(r) r^{N-1} dr."""
    area = sphere_area(N - 1)
    if h.kind == "power":
        p = h.coeffs[0]
        if p + N <= 0:
            raise ValueError("power exponent too negative for a finite centered measure")
        # r^{N-1+p} is the Jacobi weight itself
        return area * R ** (N + p) / (N + p)

    def evaluate(n):
        rule = gauss_jacobi(n, p=0.0, q=float(N - 1), interval=(0.0, R))
        return area * rule.integrate(h)

    return _refine_scalar(evaluate)


def centered_ball_perimeter(h: RadialWeight, N: int, R: float) -> float:
    return sphere_area(N - 1) * float(h(R)) * R ** (N - 1)


def offcenter_ball_measure(h: RadialWeight, N: int, center: float, rho: float) -> float:
    """Weighted measure of B_rho(c e_1), reduced to a 2D profile integral.

    Polar coordinates about the ball's own center; the weight only sees
    |x| = sqrt(c^2 + r^2 + 2 c r z).  The ball must not reach the origin
    unless the weight is finite there.
    """
    if rho >= center and h.kind == "power" and h.coeffs[0] < 0:
        raise ValueError("ball touches the origin where the power weight is singular")
    g = 0.5 * (N - 3)
    area = sphere_area(N - 2)

    def evaluate(n):
        rad = gauss_jacobi(n, p=0.0, q=float(N - 1), interval=(0.0, rho))
        ang = gauss_jacobi(n, p=g, q=g)
        r = rad.nodes[:, None]
        z = ang.nodes[None, :]
        dist = np.sqrt(center * center + r * r + 2.0 * center * r * z)
        vals = h(dist)
        return area * float(rad.weights @ (vals @ ang.weights))

    return _refine_scalar(evaluate)


def mc_offcenter_ball_measure(
    h: RadialWeight, N: int, center: float, rho: float, samples: int, seed: int
) -> IntegralEstimate:
    """Monte Carlo oracle for offcenter_ball_measure (independent route)."""
    c = np.zeros(N)
    c[0] = center
    box = [(center - rho, center + rho)] + [(-rho, rho)] * (N - 1)

    def indicator(pts):
        return ((pts - c) ** 2).sum(axis=1) < rho * rho

    def weight(pts):
        return h(np.sqrt((pts ** 2).sum(axis=1)))

    return mc_integrate(indicator, weight, box, samples, seed)


def offcenter_ball_perimeter(h: RadialWeight, N: int, center: float, rho: float) -> float:
    g = 0.5 * (N - 3)
    pref = sphere_area(N - 2) * rho ** (N - 1)

    def evaluate(n):
        ang = gauss_jacobi(n, p=g, q=g)
        z = ang.nodes
        dist = np.sqrt(center * center + rho * rho + 2.0 * center * rho * z)
        return pref * float(ang.weights @ h(dist))

    return _refine_scalar(evaluate)


def _solve_radius(measure_fn, target, seed, cap, tol=1e-12, iters=200):
    """Radius with measure_fn(radius) = target, for increasing measure_fn.

    Expands a bracket geometrically from ``seed`` so degenerate
    configurations near ``cap`` are only ever probed when the target
    actually lives there; then bisects.
    """
    lo = 0.0
    hi = min(seed, cap)
    while measure_fn(hi) < target:
        lo = hi
        if hi >= cap:
            raise ValueError(f"measure {target} not reachable below radius {cap}")
        hi = min(2.0 * hi, cap)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if measure_fn(mid) <= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BallComparison:
    """Equal-measure centered vs. sphere-hugging ball, with the proof chain.

    chain = (A, B, C, D): off-center perimeter, its decreasing-weight
    majorant, the same majorant after the radius comparison, and the
    centered perimeter.  The end-to-end comparison A < D is the
    counterexample.  ``radius_comparison_margin`` is the slack in the
    bound rho < (h(R)/h(r0))^(1/N) R exactly as the source chain displays
    it; that bound inverts the monotonicity of h (a decreasing weight is
    largest at the center of the centered ball, not at its rim) and is
    genuinely violated for weights like exp((r-1)^2) at every admissible
    measure, so it can come out negative.  ``corrected_radius_margin``
    uses sup h = h(0+) instead and is the bound the argument supports.
    """

    d: float
    R_centered: float
    rho: float
    center: float
    perimeter_centered: float
    perimeter_offcenter: float
    chain: tuple[float, float, float, float]
    radius_comparison_margin: float
    corrected_radius_margin: float

    @property
    def margins(self) -> tuple[float, float, float]:
        a, b, c, d = self.chain
        return (b - a, c - b, d - c)


def compare_equal_measure_balls(h: RadialWeight, N: int, r0: float, d: float) -> BallComparison:
    """Solve for the centered and off-center balls of weighted measure d.

    The off-center ball hugs the sphere of radius r0 from inside (center
    at distance r0 - rho on the first axis).  Radii come from bisection on
    the monotone measure functions.
    """
    check_counterexample_weight(h, r0)
    if not d > 0:
        raise ValueError("measure must be positive")
    R = _solve_radius(lambda r: centered_ball_measure(h, N, r), d, 0.1 * r0, r0 * (1.0 - 1e-9))
    if R >= r0 * (1.0 - 1e-6):
        raise ValueError("d too large: centered ball reaches the decreasing interval's edge")

    def off_measure(rho):
        return offcenter_ball_measure(h, N, r0 - rho, rho)

    # rho < r0/2 keeps the ball away from the origin; beyond that the
    # smallness condition R <= r0 - 2 rho is unsatisfiable anyway
    rho = _solve_radius(off_measure, d, 0.05 * r0, 0.49 * r0)
    center = r0 - rho
    p_cent = centered_ball_perimeter(h, N, R)
    p_off = offcenter_ball_perimeter(h, N, center, rho)
    area = sphere_area(N - 1)
    h_inner = float(h(r0 - 2.0 * rho))
    hR = float(h(R))
    h0 = float(h(r0))
    h_origin = math.inf if h.kind == "power" else float(h(0.0))
    bound1 = area * h_inner * rho ** (N - 1)
    bound2 = area * h_inner * (hR / h0) ** ((N - 1.0) / N) * R ** (N - 1)
    return BallComparison(
        d=d,
        R_centered=R,
        rho=rho,
        center=center,
        perimeter_centered=p_cent,
        perimeter_offcenter=p_off,
        chain=(p_off, bound1, bound2, p_cent),
        radius_comparison_margin=(hR / h0) ** (1.0 / N) * R - rho,
        corrected_radius_margin=(h_origin / h0) ** (1.0 / N) * R - rho,
    )


def _threshold_conditions(h: RadialWeight, N: int, r0: float, d: float) -> bool:
    try:
        cmp = compare_equal_measure_balls(h, N, r0, d)
    except ValueError:
        return False
    small_enough = cmp.R_centered <= r0 - 2.0 * cmp.rho
    lhs = float(h(r0 - 2.0 * d)) ** N if r0 - 2.0 * d > 0 else math.inf
    crucial = lhs < float(h(cmp.R_centered)) * float(h(r0)) ** (N - 1)
    return small_enough and crucial


def certified_measure_threshold(h: RadialWeight, N: int, r0: float) -> float:
    """Largest measure d (on a bisected grid) with both smallness conditions.

    Conditions: R(d) <= r0 - 2 rho(d), and h(r0-2d)^N < h(R(d)) h(r0)^(N-1).
    The returned value is re-verified, and certified by failure at 2 d0.
    """
    check_counterexample_weight(h, r0)
    d = r0 ** N / 1000.0
    if not _threshold_conditions(h, N, r0, d):
        for _ in range(40):
            d /= 4.0
            if _threshold_conditions(h, N, r0, d):
                break
        else:
            raise ValueError("smallness conditions fail for every probed measure")
    lo = d
    hi = None
    for _ in range(40):
        if _threshold_conditions(h, N, r0, 2.0 * lo):
            lo *= 2.0
        else:
            hi = 2.0 * lo
            break
    if hi is None:
        raise RuntimeError("could not bracket the failure point of the smallness conditions")
    while hi / lo > 1.5:
        mid = math.sqrt(lo * hi)
        if _threshold_conditions(h, N, r0, mid):
            lo = mid
        else:
            hi = mid
    if not _threshold_conditions(h, N, r0, lo):
        raise RuntimeError("threshold re-verification failed")
    return lo


@dataclass(frozen=True)
class VanishingRow:
    t: float
    R: float
    perimeter: float


def vanishing_perimeter_family(
    alpha_prime: float,
    beta: float,
    c1: float,
    c2: float,
    N: int,
    d: float,
    t_grid,
) -> list[VanishingRow]:
    """Far-away balls of fixed g-measure and their f-perimeters.

    f = c1 |x|^(-alpha_prime), g = c2 |x|^(-beta), centered at t e_1 with
    radius R(t) solving |B_R(t e_1)|_g = d.  Requires the decay window
    beta <= N and alpha_prime > (N-1) beta / N (both exponents positive);
    under it the perimeter tends to zero and t - R(t) grows without bound.
    """
    if not (alpha_prime > 0 and beta > 0):
        raise ValueError("both decay exponents must be positive")
    if beta > N:
        raise ValueError("need beta <= N for locally finite measure far out")
    if not alpha_prime > (N - 1.0) * beta / N:
        raise ValueError("need alpha_prime > (N-1) beta / N")
    if not d > 0:
        raise ValueError("measure must be positive")
    g = power_weight(-beta)
    f = power_weight(-alpha_prime)
    rows = []
    for t in sorted(float(t) for t in t_grid):
        target = d / c2

        def measure(R, t=t):
            return offcenter_ball_measure(g, N, t, R)

        try:
            R = _solve_radius(measure, target, 0.05 * t, t * (1.0 - 1e-3))
        except (ValueError, RuntimeError) as exc:
            raise ValueError(f"d too large at t={t}: ball would reach the origin") from exc
        perim = c1 * offcenter_ball_perimeter(f, N, t, R)
        rows.append(VanishingRow(t, R, perim))
    return rows
