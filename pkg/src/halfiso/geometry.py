"""Weighted measures, relative perimeters and isoperimetric ratios.

Measure density |x|^l x_N^alpha and perimeter density |x|^k x_N^alpha on
the open half-space {x_N > 0}.  Centered half-ball quantities use Beta
closed forms (no quadrature error); translated balls are reduced by axial
symmetry to one- or two-dimensional integrals whose singular x_N^alpha
factor sits inside a Gauss-Jacobi weight, so no sample ever evaluates the
density on the wall.  Boundary portions lying in the hyperplane {x_N = 0}
never contribute: the perimeter here is relative by definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import WeightParams, validate
from .quadrature import BudgetExceeded, IntegralEstimate, gauss_jacobi, log_gamma, mc_integrate


# --- trial domains ---------------------------------------------------------


@dataclass(frozen=True)
class HalfBall:
    """B_R intersected with the half-space, centered at the origin."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class UpAxisBall:
    """Ball of given radius centered at height t on the x_N axis (t > radius)."""

    t: float
    radius: float = 1.0

    def __post_init__(self):
        if not self.t - self.radius > 0:
            raise ValueError("ball must lie strictly inside the half-space (t > radius)")


@dataclass(frozen=True)
class OnWallBall:
    """Ball centered at distance t from the origin *on* the wall {x_N = 0}.

    Only the half inside {x_N > 0} carries measure; the equatorial disk in
    the wall carries no relative perimeter.
    """

    t: float
    radius: float = 1.0

    def __post_init__(self):
        if not self.t > 1.0:
            raise ValueError("need t > 1")
        if not 0 < self.radius < self.t:
            raise ValueError("radius must be in (0, t) so the ball misses the origin")


@dataclass(frozen=True)
class DoubledHalfBall:
    """Full ball, symmetric about the wall; used by divergence_check."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class DoubledHalfEllipsoid:
    """Centered coordinate-axis ellipsoid, symmetric about the wall.

    N = 2 allows arbitrary semiaxes (a, b); N >= 3 requires rotational
    symmetry about the x_N axis, i.e. semiaxes (a, ..., a, b).
    """

    semiaxes: tuple[float, ...]

    def __post_init__(self):
        axes = tuple(float(a) for a in self.semiaxes)
        object.__setattr__(self, "semiaxes", axes)
        if len(axes) < 2 or any(a <= 0 for a in axes):
            raise ValueError("need at least two positive semiaxes")
        if len(axes) > 2 and len(set(axes[:-1])) != 1:
            raise ValueError("for N >= 3 the first N-1 semiaxes must coincide")


TrialDomain = HalfBall | UpAxisBall | OnWallBall | DoubledHalfBall | DoubledHalfEllipsoid


@dataclass(frozen=True)
class WeightedGeometryResult:
    measure: IntegralEstimate
    perimeter: IntegralEstimate
    ratio: float


@dataclass(frozen=True)
class DivergenceIdentity:
    """Volume-side, flux-side and majorant-side of the divergence identity."""

    lhs: float
    mid: float
    rhs: float
    error_estimate: float


# --- closed forms ----------------------------------------------------------


def sphere_area(d: int) -> float:
    """Surface measure of the unit d-sphere (|S^0| = 2)."""
    if d < 0:
        raise ValueError("dimension must be >= 0")
    return 2.0 * math.exp(0.5 * (d + 1) * math.log(math.pi) - log_gamma(0.5 * (d + 1)))


def unit_ball_volume(N: int) -> float:
    return math.exp(0.5 * N * math.log(math.pi) - log_gamma(0.5 * N + 1.0))


def hemisphere_area_closed_form(N: int, alpha: float) -> float:
    """Weighted area of the upper half-sphere, int zeta_N^alpha over S^{N-1}_+.

    Equals |S^{N-2}| * (1/2) B((N-1)/2, (alpha+1)/2).
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if not alpha > -1.0:
        raise ValueError("need alpha > -1")
    return sphere_area(N - 2) * 0.5 * math.exp(
        log_gamma(0.5 * (N - 1)) + log_gamma(0.5 * (alpha + 1)) - log_gamma(0.5 * (N + alpha))
    )


def hemisphere_area(N: int, alpha: float, n: int = 80) -> float:
    """Same quantity by Gauss-Jacobi quadrature of the polar-angle integral.

    With u = cos(theta) the integrand is u^alpha (1-u^2)^((N-3)/2); the
    endpoint exponents go into the Jacobi weight and only the analytic
    factor (1+u)^((N-3)/2) is sampled.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if not alpha > -1.0:
        raise ValueError("need alpha > -1")
    g = 0.5 * (N - 3)
    rule = gauss_jacobi(n, p=g, q=alpha, interval=(0.0, 1.0))
    return sphere_area(N - 2) * rule.integrate(lambda u: (1.0 + u) ** g)


def measure_half_ball(params: WeightParams, R: float) -> float:
    """Weighted measure of B_R^+: R^(l+N+alpha) sigma / (l+N+alpha), exactly."""
    validate(params)
    if not R > 0:
        raise ValueError("R must be positive")
    d = params.l + params.N + params.alpha
    return R ** d * hemisphere_area_closed_form(params.N, params.alpha) / d


def perimeter_half_ball(params: WeightParams, R: float) -> float:
    """Relative perimeter of B_R^+: the spherical cap only, R^(k+N+alpha-1) sigma."""
    validate(params)
    if not R > 0:
        raise ValueError("R must be positive")
    return R ** (params.k + params.N + params.alpha - 1.0) * hemisphere_area_closed_form(
        params.N, params.alpha
    )


def radius_for_measure(params: WeightParams, m: float) -> float:
    """The unique R with measure_half_ball(params, R) = m (closed inversion)."""
    validate(params)
    if not m > 0:
        raise ValueError("measure must be positive")
    d = params.l + params.N + params.alpha
    return (m * d / hemisphere_area_closed_form(params.N, params.alpha)) ** (1.0 / d)


def radial_constant(params: WeightParams) -> float:
    """Isoperimetric ratio of the unit half-ball (upper bound for the infimum).

    sigma^(1-e) (l+N+alpha)^e with e = (k+N+alpha-1)/(l+N+alpha); at
    k = l+1 the exponent degenerates to 1 and the value is l+N+alpha.
    """
    validate(params)
    sigma = hemisphere_area_closed_form(params.N, params.alpha)
    e = (params.k + params.N + params.alpha - 1.0) / (params.l + params.N + params.alpha)
    return sigma ** (1.0 - e) * (params.l + params.N + params.alpha) ** e


# --- translated balls by axisymmetric quadrature ---------------------------

_N_START = 24
_N_MAX = 768
_REL_TOL = 1e-9


def _refine(evaluate):
    """Double the rule size until the relative change drops below tolerance."""
    n = _N_START
    prev, evals = evaluate(n)
    while True:
        n *= 2
        cur, ev = evaluate(n)
        evals += ev
        err = abs(cur - prev)
        if err <= _REL_TOL * max(abs(cur), 1e-300):
            return IntegralEstimate(cur, err, evals)
        if n >= _N_MAX:
            raise BudgetExceeded(
                f"quadrature stalled at {n} nodes (error {err:.3e})",
                IntegralEstimate(cur, err, evals),
            )
        prev = cur


def _upaxis_measure(params, dom):
    N, l, a = params.N, params.l, params.alpha
    t, r0 = dom.t, dom.radius
    g = 0.5 * (N - 3)
    area = sphere_area(N - 2)

    def evaluate(n):
        rad = gauss_jacobi(n, p=0.0, q=float(N - 1), interval=(0.0, r0))
        ang = gauss_jacobi(n, p=g, q=g)
        r = rad.nodes[:, None]
        c = ang.nodes[None, :]
        f = (t * t + r * r + 2.0 * t * r * c) ** (0.5 * l) * (t + r * c) ** a
        val = area * float(rad.weights @ (f @ ang.weights))
        return val, n * n

    return _refine(evaluate)


def _upaxis_perimeter(params, dom):
    N, k, a = params.N, params.k, params.alpha
    t, r0 = dom.t, dom.radius
    g = 0.5 * (N - 3)
    pref = sphere_area(N - 2) * r0 ** (N - 1)

    def evaluate(n):
        ang = gauss_jacobi(n, p=g, q=g)
        c = ang.nodes
        f = (t * t + r0 * r0 + 2.0 * t * r0 * c) ** (0.5 * k) * (t + r0 * c) ** a
        return pref * float(ang.weights @ f), n

    return _refine(evaluate)


def _wall_cap_area(N, alpha):
    # sigma_alpha of the half-sphere one dimension down; the on-wall ball's
    # cross-sections perpendicular to its axis integrate to this factor
    return 1.0 if N == 2 else hemisphere_area_closed_form(N - 1, alpha)


def _onwall_measure(params, dom):
    N, l, a = params.N, params.l, params.alpha
    t, r0 = dom.t, dom.radius
    pref = _wall_cap_area(N, a) * r0 ** (N + a)
    s = 0.5 * (N - 1 + a)

    def evaluate(n):
        outer = gauss_jacobi(n, p=s, q=s)
        inner = gauss_jacobi(n, p=0.0, q=float(N - 2 + a), interval=(0.0, 1.0))
        v = outer.nodes[:, None]
        xi = inner.nodes[None, :]
        f = ((t + r0 * v) ** 2 + r0 * r0 * (1.0 - v * v) * xi * xi) ** (0.5 * l)
        val = pref * float(outer.weights @ (f @ inner.weights))
        return val, n * n

    return _refine(evaluate)


def _onwall_perimeter(params, dom):
    N, k, a = params.N, params.k, params.alpha
    t, r0 = dom.t, dom.radius
    pref = _wall_cap_area(N, a) * r0 ** (N - 1 + a)
    s = 0.5 * (N - 3 + a)

    def evaluate(n):
        ang = gauss_jacobi(n, p=s, q=s)
        c = ang.nodes
        f = (t * t + r0 * r0 + 2.0 * t * r0 * c) ** (0.5 * k)
        return pref * float(ang.weights @ f), n

    return _refine(evaluate)


def measure_ball(params: WeightParams, domain) -> IntegralEstimate:
    """Weighted measure of a translated ball (intersected with {x_N > 0})."""
    validate(params)
    if isinstance(domain, UpAxisBall):
        return _upaxis_measure(params, domain)
    if isinstance(domain, OnWallBall):
        return _onwall_measure(params, domain)
    raise TypeError(f"unsupported domain {domain!r}")


def perimeter_ball(params: WeightParams, domain) -> IntegralEstimate:
    """Relative weighted perimeter of a translated ball."""
    validate(params)
    if isinstance(domain, UpAxisBall):
        return _upaxis_perimeter(params, domain)
    if isinstance(domain, OnWallBall):
        return _onwall_perimeter(params, domain)
    raise TypeError(f"unsupported domain {domain!r}")


def ratio_exponent(params: WeightParams) -> float:
    return (params.k + params.N + params.alpha - 1.0) / (params.l + params.N + params.alpha)


def weighted_geometry(params: WeightParams, domain) -> WeightedGeometryResult:
    """Measure, relative perimeter and scale-invariant ratio of a trial domain."""
    validate(params)
    if isinstance(domain, HalfBall):
        m = IntegralEstimate(measure_half_ball(params, domain.radius), 0.0, 0)
        p = IntegralEstimate(perimeter_half_ball(params, domain.radius), 0.0, 0)
    else:
        m = measure_ball(params, domain)
        p = perimeter_ball(params, domain)
    if not m.value > 0:
        raise ValueError("domain has zero weighted measure")
    return WeightedGeometryResult(m, p, p.value / m.value ** ratio_exponent(params))


def isoperimetric_ratio(params: WeightParams, domain) -> float:
    return weighted_geometry(params, domain).ratio


def mc_measure_ball(params: WeightParams, domain, samples: int, seed: int) -> IntegralEstimate:
    """Brute-force Monte Carlo oracle for measure_ball.

    Uniform sampling of the bounding box of the ball (clipped to the open
    half-space for on-wall balls) with the weighted indicator estimator.
    Entirely independent of the deterministic quadrature path.
    """
    validate(params)
    N, l, a = params.N, params.l, params.alpha
    if isinstance(domain, UpAxisBall):
        center = np.zeros(N)
        center[-1] = domain.t
        box = [(-domain.radius, domain.radius)] * (N - 1) + [
            (domain.t - domain.radius, domain.t + domain.radius)
        ]
    elif isinstance(domain, OnWallBall):
        center = np.zeros(N)
        center[0] = domain.t
        box = (
            [(domain.t - domain.radius, domain.t + domain.radius)]
            + [(-domain.radius, domain.radius)] * (N - 2)
            + [(0.0, domain.radius)]
        )
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    r2 = domain.radius ** 2

    def indicator(pts):
        inside = ((pts - center) ** 2).sum(axis=1) < r2
        return inside & (pts[:, -1] > 0.0)

    def weight(pts):
        return (pts ** 2).sum(axis=1) ** (0.5 * l) * pts[:, -1] ** a

    return mc_integrate(indicator, weight, box, samples, seed)


# --- divergence identity ----------------------------------------------------


def _ellipsoid_axes(params, domain):
    if isinstance(domain, DoubledHalfBall):
        return domain.radius, domain.radius
    if isinstance(domain, DoubledHalfEllipsoid):
        if len(domain.semiaxes) != params.N:
            raise ValueError("semiaxes length must equal the dimension N")
        return domain.semiaxes[0], domain.semiaxes[-1]
    raise TypeError(f"divergence_check expects a doubled symmetric domain, got {domain!r}")


def divergence_check(params: WeightParams, domain) -> DivergenceIdentity:
    """Test (l+N+alpha) Int_E w dx = Int_dE w (x.nu) dH <= Int_dE |x| w dH.

    Requires k = l+1 exactly, so that perimeter and majorant carry the same
    density.  The three quantities are computed by genuinely different
    numerical routes (volume quadrature vs. two surface parametrizations
    with the explicit normal); for a ball all three coincide, for a proper
    ellipsoid the middle is strictly below the right-hand side.
    """
    validate(params)
    if params.k != params.l + 1.0:
        raise ValueError("divergence identity requires k = l + 1 exactly")
    a_ax, b_ax = _ellipsoid_axes(params, domain)
    N, l, al = params.N, params.l, params.alpha
    g = 0.5 * (N - 3)
    area = sphere_area(N - 2)

    def evaluate(n):
        rule = gauss_jacobi(n, p=g, q=al, interval=(0.0, 1.0))
        c = rule.nodes
        smooth = (1.0 + c) ** g
        r2 = a_ax * a_ax * (1.0 - c * c) + b_ax * b_ax * c * c  # |x|^2 on the surface
        metric = np.sqrt(a_ax * a_ax * c * c + b_ax * b_ax * (1.0 - c * c))
        x_dot_nu = 1.0 / np.sqrt((1.0 - c * c) / a_ax ** 2 + c * c / b_ax ** 2)
        lhs = (
            2.0 * area * a_ax ** (N - 1) * b_ax ** (1.0 + al)
            * float(rule.weights @ (smooth * r2 ** (0.5 * l)))
        )
        surf = 2.0 * area * a_ax ** (N - 2) * b_ax ** al
        mid = surf * float(rule.weights @ (smooth * r2 ** (0.5 * l) * metric * x_dot_nu))
        rhs = surf * float(rule.weights @ (smooth * r2 ** (0.5 * (l + 1.0)) * metric))
        return lhs, mid, rhs

    n = 48
    prev = evaluate(n)
    while True:
        n *= 2
        cur = evaluate(n)
        err = max(abs(x - y) for x, y in zip(cur, prev))
        scale = max(abs(v) for v in cur)
        if err <= _REL_TOL * scale:
            return DivergenceIdentity(*cur, error_estimate=err)
        if n >= _N_MAX:
            raise BudgetExceeded(
                f"divergence quadrature stalled at {n} nodes",
                DivergenceIdentity(*cur, error_estimate=err),
            )
        prev = cur
