"""Acceptance battery: every verifiable claim, one runnable criterion each.

Each criterion returns a CriterionResult with measured values in its
details string.  The same registry backs the pytest acceptance module and
the ``verify`` CLI/service command, so there is exactly one definition of
"passing".

One criterion (A10-cruc2) checks a displayed intermediate inequality of
the source material verbatim; that inequality is mathematically false for
the pinned weight (the monotonicity of the decreasing weight is used
backwards), so the criterion fails by necessity.  It is kept faithful and
marked expected_failure; see the README for the analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import geometry, params, spectral, stereographic, sweeps
from .geometry import DoubledHalfBall, DoubledHalfEllipsoid, HalfBall, UpAxisBall, OnWallBall
from .params import RegionTag, WeightParams
from .quadrature import beta as beta_fn


@dataclass(frozen=True)
class CriterionResult:
    cid: str
    name: str
    passed: bool
    details: str
    expected_failure: bool = False


_REGISTRY: list[tuple[str, str, Callable[[], CriterionResult]]] = []


def _criterion(cid, name):
    def deco(fn):
        _REGISTRY.append((cid, name, fn))
        return fn

    return deco


def criterion_ids() -> list[str]:
    return [cid for cid, _, _ in _REGISTRY]


# friendly filter groups accepted by --only alongside raw criterion ids
GROUPS = {
    "eigen": ("A1", "A2", "A3", "A4"),
    "geometry": ("A5", "A6", "A9"),
    "classify": ("A8",),
    "sweeps": ("A7", "A10", "A10-CRUC2", "A11"),
    "stereographic": ("A12",),
    "montecarlo": ("A13",),
}


def _expand_filter(only: Iterable[str]) -> set[str]:
    wanted = set()
    known = {cid.upper() for cid in criterion_ids()}
    for token in only:
        t = token.strip()
        if t.lower() in GROUPS:
            wanted.update(GROUPS[t.lower()])
        elif t.upper() in known:
            wanted.add(t.upper())
        else:
            raise ValueError(
                f"unknown criterion or group {token!r}; ids: {criterion_ids()}, "
                f"groups: {sorted(GROUPS)}")
    return wanted


def run_acceptance(only: Optional[Iterable[str]] = None) -> list[CriterionResult]:
    wanted = None if only is None else _expand_filter(only)
    results = []
    for cid, name, fn in _REGISTRY:
        if wanted is not None and cid.upper() not in wanted:
            continue
        try:
            results.append(fn())
        except Exception as exc:  # a crashed criterion is a failed criterion
            results.append(CriterionResult(cid, name, False, f"raised {type(exc).__name__}: {exc}"))
    return results


_EIGEN_GRID = [(N, a) for N in (2, 3, 4, 7) for a in (-0.9, -0.5, -0.1, 0.0)]
_CHAIN_GRID = [(N, a) for N in (2, 3, 4, 7) for a in (-0.9, -0.5, -0.1)]


@_criterion("A1", "first Neumann eigenvalue equals N+alpha-1")
def _a1():
    worst = 0.0
    for N, a in _EIGEN_GRID:
        mu1 = spectral.first_neumann_eigenvalue(N, a, tol=1e-10)
        worst = max(worst, abs(mu1 - (N + a - 1.0)) / (N + a - 1.0))
    return CriterionResult("A1", "first Neumann eigenvalue equals N+alpha-1",
                           worst <= 1e-6, f"worst relative error {worst:.3e} (tol 1e-6)")


@_criterion("A2", "Dirichlet ground value (N-1)(1-alpha) and cos^(1-alpha) profile")
def _a2():
    worst_val = 0.0
    worst_sup = 0.0
    for N, a in _EIGEN_GRID:
        pair = spectral.dirichlet_ground_state(N, a, math.pi / 2, tol=1e-10)
        worst_val = max(worst_val, abs(pair.mu - (N - 1.0) * (1.0 - a)))
        theta = np.linspace(1e-6, math.pi / 2 - 1e-9, 800)
        ref = np.cos(theta) ** (1.0 - a)
        # L2(w) norm of cos^(1-alpha): int u^(2-a) (1-u^2)^((N-3)/2) du
        ref_norm = math.sqrt(0.5 * beta_fn(0.5 * (3.0 - a), 0.5 * (N - 1.0)))
        got = pair.evaluate(theta)
        worst_sup = max(worst_sup, float(np.max(np.abs(got - ref / ref_norm))))
    ok = worst_val <= 1e-6 and worst_sup <= 1e-5
    return CriterionResult("A2", "Dirichlet ground value (N-1)(1-alpha) and cos^(1-alpha) profile",
                           ok, f"worst value error {worst_val:.3e} (tol 1e-6), "
                               f"worst sup-norm gap {worst_sup:.3e} (tol 1e-5)")


@_criterion("A3", "exact eigenfunctions have weak-form defect below 1e-8")
def _a3():
    worst = 0.0
    for N, a in _EIGEN_GRID:
        r1 = spectral.exact_mode_residual(spectral.SLProblem(N, a, m=1), N + a - 1.0, [1.0])
        r0 = spectral.exact_mode_residual(
            spectral.SLProblem(N, a, m=0, bc=spectral.Dirichlet(math.pi / 2)),
            (N - 1.0) * (1.0 - a), [1.0])
        worst = max(worst, r1, r0)
    return CriterionResult("A3", "exact eigenfunctions have weak-form defect below 1e-8",
                           worst <= 1e-8, f"worst defect {worst:.3e} (tol 1e-8)")


@_criterion("A4", "strict chain mu0 > (N-1)(1-alpha) > N+alpha-1 and nodal identity")
def _a4():
    ok = True
    lines = []
    for N, a in _CHAIN_GRID:
        s = spectral.neumann_spectrum_summary(N, a, tol=1e-10)
        mid = (N - 1.0) * (1.0 - a)
        ident = spectral.nodal_angle_identity(N, a, tol=1e-10)
        gap = s["mu0"] - mid
        rel = abs(ident.mu0 - ident.lambda1_at_theta_hat) / ident.mu0
        this = gap > 1e-4 and mid > N + a - 1.0 and rel <= 1e-5
        ok = ok and this
        if not this:
            lines.append(f"N={N} a={a}: gap={gap:.3e} rel={rel:.3e}")
    detail = "all points passed" if ok else "; ".join(lines)
    return CriterionResult("A4", "strict chain mu0 > (N-1)(1-alpha) > N+alpha-1 and nodal identity",
                           ok, detail)


@_criterion("A5", "hemisphere area: quadrature vs Beta/Gamma closed forms")
def _a5():
    worst = 0.0
    for N in (2, 3, 4, 7):
        for a in (-0.9, -0.5, -0.1, 0.0, 1.0):
            q = geometry.hemisphere_area(N, a)
            c = geometry.hemisphere_area_closed_form(N, a)
            worst = max(worst, abs(q - c) / c)
    pin1 = abs(geometry.hemisphere_area_closed_form(2, -0.5) - 5.2441151085842396) / 5.2441151085842396
    pin2 = abs(geometry.hemisphere_area_closed_form(3, -0.5) - 4.0 * math.pi) / (4.0 * math.pi)
    m = geometry.measure_half_ball(WeightParams(3, 0.0, 0.0, -0.5), 1.0)
    pin3 = abs(m - 4.0 * math.pi / 2.5) / (4.0 * math.pi / 2.5)
    ok = worst <= 1e-10 and max(pin1, pin2, pin3) <= 1e-10
    return CriterionResult("A5", "hemisphere area: quadrature vs Beta/Gamma closed forms",
                           ok, f"worst route gap {worst:.3e}, pinned-value gaps "
                               f"{pin1:.1e}/{pin2:.1e}/{pin3:.1e} (tol 1e-10)")


@_criterion("A6", "scale invariance of the ratio on half-balls")
def _a6():
    gen = np.random.Generator(np.random.Philox(key=61))
    worst = 0.0
    for _ in range(5):
        p = WeightParams(int(gen.integers(2, 6)), float(gen.uniform(-0.5, 2.0)),
                         float(gen.uniform(-0.5, 2.0)), float(gen.uniform(-0.95, 1.0)))
        base = geometry.isoperimetric_ratio(p, HalfBall(1.0))
        for R in (0.5, 2.0, 10.0):
            worst = max(worst, abs(geometry.isoperimetric_ratio(p, HalfBall(R)) - base) / base)
    return CriterionResult("A6", "scale invariance of the ratio on half-balls",
                           worst <= 1e-8, f"worst relative drift {worst:.3e} (tol 1e-8)")


@_criterion("A7", "up-axis ratio decay: fitted slope -1/3 and implied decay factor")
def _a7():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    grid = np.geomspace(10.0, 1000.0, 12)
    res = sweeps.run_sweep(p, sweeps.Family.UP_AXIS, grid)
    slope_ok = abs(res.fitted_slope - (-1.0 / 3.0)) <= 0.01
    match_pred = abs(res.fitted_slope - res.predicted_slope) <= 0.01
    implied = (grid[-1] / grid[0]) ** res.predicted_slope
    got = res.rows[-1].ratio / res.rows[0].ratio
    factor_ok = abs(got - implied) / implied <= 0.05
    ok = slope_ok and match_pred and factor_ok
    return CriterionResult("A7", "up-axis ratio decay: fitted slope -1/3 and implied decay factor",
                           ok, f"fitted {res.fitted_slope:.6f} vs -1/3 (tol 0.01); decay factor "
                               f"{got:.6f} vs implied {implied:.6f} (tol 5%)")


@_criterion("A8", "model case classifies as stable-but-no-solution with margin >= -1e-9")
def _a8():
    ok = True
    lines = []
    for N in (2, 3):
        for a in (-0.9, -0.5, -0.1):
            p = WeightParams(N, 0.0, 0.0, a)
            cls = params.classify(p)
            margin = spectral.stability_margin(p, tol=1e-10)
            this = (cls.tag is RegionTag.NO_SOLUTION_STABLE_HALF_BALLS
                    and cls.witness.cond_1_3.holds and margin >= -1e-9)
            ok = ok and this
            lines.append(f"N={N} a={a}: {cls.tag.value} margin={margin:.2e}")
    return CriterionResult("A8", "model case classifies as stable-but-no-solution with margin >= -1e-9",
                           ok, "; ".join(lines))


@_criterion("A9", "divergence identity: equality on balls, strict gap on an ellipsoid")
def _a9():
    worst = 0.0
    for (N, l, a, R) in [(2, 0.0, -0.5, 1.0), (3, 0.4, -0.5, 1.3), (2, -0.3, -0.9, 0.7)]:
        p = WeightParams(N, l + 1.0, l, a)
        ident = geometry.divergence_check(p, DoubledHalfBall(R))
        scale = abs(ident.mid)
        worst = max(worst, abs(ident.lhs - ident.mid) / scale, abs(ident.mid - ident.rhs) / scale)
    pe = WeightParams(2, 1.0, 0.0, -0.5)
    el = geometry.divergence_check(pe, DoubledHalfEllipsoid((1.0, 2.0)))
    el_eq = abs(el.lhs - el.mid) / abs(el.mid)
    strict = (el.rhs - el.mid) / abs(el.mid)
    ok = worst <= 1e-8 and el_eq <= 1e-8 and strict > 1e-6
    return CriterionResult("A9", "divergence identity: equality on balls, strict gap on an ellipsoid",
                           ok, f"ball worst gap {worst:.3e} (tol 1e-8); ellipsoid lhs-mid "
                               f"{el_eq:.3e}, strict margin {strict:.6f}")


_COUNTER_WEIGHT = sweeps.exp_poly_weight(1.0, -2.0, 1.0)  # exp((r-1)^2)


@_criterion("A10", "decreasing log-convex weight: off-center ball beats centered ball")
def _a10():
    d0 = sweeps.certified_measure_threshold(_COUNTER_WEIGHT, 2, 1.0)
    cert = (sweeps._threshold_conditions(_COUNTER_WEIGHT, 2, 1.0, d0)
            and not sweeps._threshold_conditions(_COUNTER_WEIGHT, 2, 1.0, 2.0 * d0))
    cmp_ = sweeps.compare_equal_measure_balls(_COUNTER_WEIGHT, 2, 1.0, d0 / 2.0)
    rel_margin = (cmp_.perimeter_centered - cmp_.perimeter_offcenter) / cmp_.perimeter_centered
    mc = sweeps.mc_offcenter_ball_measure(
        _COUNTER_WEIGHT, 2, cmp_.center, cmp_.rho, samples=10_000_000, seed=1005)
    mc_gap = abs(mc.value - cmp_.d)
    mc_ok = mc_gap <= 3.0 * mc.error_estimate
    ok = d0 > 0 and cert and rel_margin > 1e-3 and mc_ok
    return CriterionResult("A10", "decreasing log-convex weight: off-center ball beats centered ball",
                           ok, f"d0={d0:.6g} certified={cert}; perimeter margin {rel_margin:.4f} "
                               f"(tol 1e-3); MC gap {mc_gap:.2e} vs 3*stderr {3*mc.error_estimate:.2e}")


@_criterion("A10-cruc2", "displayed intermediate radius bound, taken verbatim")
def _a10_cruc2():
    d0 = sweeps.certified_measure_threshold(_COUNTER_WEIGHT, 2, 1.0)
    cmp_ = sweeps.compare_equal_measure_balls(_COUNTER_WEIGHT, 2, 1.0, d0 / 2.0)
    ok = cmp_.radius_comparison_margin > 0.0
    return CriterionResult(
        "A10-cruc2", "displayed intermediate radius bound, taken verbatim", ok,
        f"displayed margin {cmp_.radius_comparison_margin:.6f} (needs > 0); the bound uses the "
        f"decreasing weight's monotonicity backwards and is false for this weight at every "
        f"admissible measure; corrected margin {cmp_.corrected_radius_margin:.6f} > 0 holds",
        expected_failure=True)


@_criterion("A11", "vanishing-perimeter family: slope -1/2, decade drop, receding balls")
def _a11():
    grid = np.geomspace(100.0, 10000.0, 9)
    rows = sweeps.vanishing_perimeter_family(1.0, 1.0, 1.0, 1.0, 2, 1.0, grid)
    n_tail = max(4, math.ceil(0.4 * len(rows)))
    slope, _ = sweeps._ols_loglog([r.t for r in rows[-n_tail:]],
                                  [r.perimeter for r in rows[-n_tail:]])
    drop = rows[-1].perimeter / rows[0].perimeter
    gaps = [r.t - r.R for r in rows]
    receding = all(b > a for a, b in zip(gaps, gaps[1:]))
    ok = abs(slope + 0.5) <= 0.02 and drop < 0.1 and receding
    return CriterionResult("A11", "vanishing-perimeter family: slope -1/2, decade drop, receding balls",
                           ok, f"tail slope {slope:.5f} (tol 0.02 around -0.5); "
                               f"P drop {drop:.5f} (< 0.1); t-R increasing: {receding}")


@_criterion("A12", "stereographic coordinates: roundtrip, area, gradient pullback")
def _a12():
    gen = np.random.Generator(np.random.Philox(key=12))
    worst_rt = 0.0
    for _ in range(10_000):
        N = int(gen.integers(2, 5))
        z = gen.normal(size=N)
        z /= np.linalg.norm(z)
        z[-1] = abs(z[-1])
        z /= np.linalg.norm(z)
        back = stereographic.from_disk(stereographic.to_disk(z))
        worst_rt = max(worst_rt, float(np.max(np.abs(back - z))))
    worst_area = max(stereographic.consistency_gap(N, a)
                     for N in (2, 3, 4) for a in (-0.9, -0.5, 0.0, 1.0))
    tests = [
        (lambda y: y[0], lambda y: np.eye(len(y))[0], np.array([0.0, 0.0])),
        (lambda y: float(np.dot(y, y)), lambda y: 2.0 * np.asarray(y), np.array([0.3, -0.2, 0.1])),
        (lambda y: math.sin(y[0]) * (1.0 + y[1]),
         lambda y: np.array([math.cos(y[0]) * (1.0 + y[1]), math.sin(y[0])]),
         np.array([0.4, 0.25])),
    ]
    worst_grad = 0.0
    for f, df, y in tests:
        lhs, rhs = stereographic.gradient_pullback_check(f, df, y)
        worst_grad = max(worst_grad, abs(lhs - rhs))
    ok = worst_rt <= 1e-12 and worst_area <= 1e-8 and worst_grad <= 1e-5
    return CriterionResult("A12", "stereographic coordinates: roundtrip, area, gradient pullback",
                           ok, f"roundtrip {worst_rt:.2e} (tol 1e-12); area route gap "
                               f"{worst_area:.2e} (tol 1e-8); gradient identity {worst_grad:.2e} (tol 1e-5)")


@_criterion("A13", "quadrature agrees with seeded Monte Carlo within 3 standard errors")
def _a13():
    gen = np.random.Generator(np.random.Philox(key=13))
    lines = []
    ok = True
    for case in range(5):
        N = int(gen.integers(2, 4))
        k = float(gen.uniform(-0.3, 1.2))
        l = float(gen.uniform(-0.3, 1.2))
        on_wall = case >= 3
        # keep the squared weight integrable so the 3-sigma band is meaningful
        a = float(gen.uniform(-0.45, -0.1)) if on_wall else float(gen.uniform(-0.9, -0.1))
        p = WeightParams(N, k, l, a)
        dom = OnWallBall(float(gen.uniform(3.0, 8.0))) if on_wall \
            else UpAxisBall(float(gen.uniform(2.0, 6.0)))
        quad = geometry.measure_ball(p, dom)
        mc = geometry.mc_measure_ball(p, dom, samples=10_000_000, seed=130 + case)
        gap = abs(quad.value - mc.value)
        this = gap <= 3.0 * mc.error_estimate
        ok = ok and this
        lines.append(f"case{case}: gap={gap:.2e} 3se={3*mc.error_estimate:.2e}")
    return CriterionResult("A13", "quadrature agrees with seeded Monte Carlo within 3 standard errors",
                           ok, "; ".join(lines))
