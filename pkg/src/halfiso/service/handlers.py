"""Operation handlers shared by the HTTP endpoints and the CLI.

Each handler takes a validated request model and returns a response
model; the CLI calls these in-process (its outputs never depend on a
running server), the FastAPI app exposes the same functions over HTTP.
"""

from __future__ import annotations

import math

import numpy as np

from .. import acceptance, geometry, params as params_mod, spectral, sweeps
from ..geometry import HalfBall, OnWallBall, UpAxisBall
from . import models as m


def _classify_one(p: params_mod.WeightParams) -> m.ClassifyResponse:
    cls = params_mod.classify(p)
    conditions = None
    k_ge = None
    if cls.witness is not None:
        w = cls.witness
        conditions = {
            name: m.ComparisonModel(lhs=c.lhs, rhs=c.rhs, relation=c.relation, holds=c.holds)
            for name, c in [("cond_1_1", w.cond_1_1), ("cond_1_2", w.cond_1_2),
                            ("cond_1_3", w.cond_1_3), ("nec1", w.nec1), ("nec2", w.nec2)]
        }
        k_ge = w.k_ge_l_plus_1
    return m.ClassifyResponse(
        params=m.ParamsModel(N=p.N, k=p.k, l=p.l, alpha=p.alpha),
        tag=cls.tag.value,
        conditions=conditions,
        k_ge_l_plus_1=k_ge,
    )


def classify(req: m.ClassifyRequest) -> m.ClassifyResponse:
    return _classify_one(req.to_domain())


def classify_grid(req: m.ClassifyGridRequest) -> m.ClassifyGridResponse:
    rows = params_mod.sweep_grid(req.N, req.k, req.l, req.alpha)
    return m.ClassifyGridResponse(rows=[_classify_one(p) for p, _ in rows])


def eigen(req: m.EigenRequest) -> m.EigenResponse:
    summary = spectral.neumann_spectrum_summary(req.N, req.alpha, tol=req.tol)
    lam = spectral.first_dirichlet_eigenvalue(req.N, req.alpha, math.pi / 2, tol=req.tol)
    theta_hat = None
    lam_hat = None
    if -1.0 < req.alpha < 1.0:
        ident = spectral.nodal_angle_identity(req.N, req.alpha, tol=req.tol)
        theta_hat = ident.theta_hat
        lam_hat = ident.lambda1_at_theta_hat
    profiles = None
    if req.include_profiles:
        radial = spectral.solve_branch(
            spectral.SLProblem(req.N, req.alpha, m=0), count=2, tol=req.tol)[1]
        angular = spectral.solve_branch(
            spectral.SLProblem(req.N, req.alpha, m=1), count=1, tol=req.tol)[0]
        theta = np.linspace(1e-6, math.pi / 2 - 1e-9, req.profile_points)
        profiles = m.EigenProfilesModel(
            theta=theta.tolist(),
            radial_zero_mean=radial.evaluate(theta).tolist(),
            first_angular=angular.evaluate(theta).tolist(),
        )
    return m.EigenResponse(
        N=req.N,
        alpha=req.alpha,
        mu1=summary["mu1"],
        mu1_closed_form=req.N + req.alpha - 1.0,
        mu0=summary["mu0"],
        mu_m1=summary["mu_m1"],
        lambda1_half_pi=lam,
        lambda1_closed_form=(req.N - 1.0) * (1.0 - req.alpha),
        theta_hat=theta_hat,
        lambda1_at_theta_hat=lam_hat,
        profiles=profiles,
    )


def _domain_from_model(dm: m.DomainModel):
    if dm.kind == "half_ball":
        return HalfBall(dm.radius)
    if dm.t is None:
        raise ValueError(f"domain kind {dm.kind!r} requires t")
    if dm.kind == "up_axis":
        return UpAxisBall(dm.t, dm.radius)
    return OnWallBall(dm.t, dm.radius)


def ratio(req: m.RatioRequest) -> m.RatioResponse:
    p = req.params.to_domain()
    geom = geometry.weighted_geometry(p, _domain_from_model(req.domain))
    return m.RatioResponse(
        measure=geom.measure.value,
        measure_error=geom.measure.error_estimate,
        perimeter=geom.perimeter.value,
        perimeter_error=geom.perimeter.error_estimate,
        ratio=geom.ratio,
        radial_constant=geometry.radial_constant(p),
    )


def sweep(req: m.SweepRequest) -> m.SweepResponse:
    grid = np.geomspace(req.t_min, req.t_max, req.points)
    res = sweeps.run_sweep(
        req.params.to_domain(),
        sweeps.Family(req.family),
        grid,
        tail_fraction=req.tail_fraction,
        jobs=req.jobs,
    )
    rows = [
        m.SweepRowModel(
            t=r.t,
            ratio=None if r.error else r.ratio,
            measure=None if r.error else r.measure,
            perimeter=None if r.error else r.perimeter,
            error=r.error,
        )
        for r in res.rows
    ]
    return m.SweepResponse(
        rows=rows,
        fitted_slope=res.fitted_slope,
        slope_stderr=res.slope_stderr,
        predicted_slope=res.predicted_slope,
        tail_start=res.tail_start,
    )


def counterexample(req: m.CounterexampleRequest) -> m.CounterexampleResponse:
    h = sweeps.RadialWeight(req.weight.kind, tuple(req.weight.coeffs))
    d0 = sweeps.certified_measure_threshold(h, req.N, req.r0)
    d = req.d if req.d is not None else d0 / 2.0
    cmp_ = sweeps.compare_equal_measure_balls(h, req.N, req.r0, d)
    mc_val = None
    mc_err = None
    if req.mc_samples:
        mc = sweeps.mc_offcenter_ball_measure(
            h, req.N, cmp_.center, cmp_.rho, req.mc_samples, req.seed)
        mc_val, mc_err = mc.value, mc.error_estimate
    return m.CounterexampleResponse(
        d0=d0,
        d=d,
        R_centered=cmp_.R_centered,
        rho=cmp_.rho,
        center=cmp_.center,
        perimeter_centered=cmp_.perimeter_centered,
        perimeter_offcenter=cmp_.perimeter_offcenter,
        relative_perimeter_margin=(cmp_.perimeter_centered - cmp_.perimeter_offcenter)
        / cmp_.perimeter_centered,
        chain=list(cmp_.chain),
        chain_margins=list(cmp_.margins),
        radius_comparison_margin=cmp_.radius_comparison_margin,
        corrected_radius_margin=cmp_.corrected_radius_margin,
        mc_measure=mc_val,
        mc_stderr=mc_err,
    )


def vanish(req: m.VanishRequest) -> m.VanishResponse:
    grid = np.geomspace(req.t_min, req.t_max, req.points)
    rows = sweeps.vanishing_perimeter_family(
        req.alpha_prime, req.beta, req.c1, req.c2, req.N, req.d, grid)
    n_tail = max(4, math.ceil(0.4 * len(rows)))
    slope, _ = sweeps._ols_loglog([r.t for r in rows[-n_tail:]],
                                  [r.perimeter for r in rows[-n_tail:]])
    return m.VanishResponse(
        rows=[m.VanishRowModel(t=r.t, R=r.R, perimeter=r.perimeter) for r in rows],
        tail_slope=slope,
        perimeter_drop=rows[-1].perimeter / rows[0].perimeter,
    )


def verify(req: m.VerifyRequest) -> m.VerifyResponse:
    results = acceptance.run_acceptance(only=req.only)
    items = [
        m.VerifyItemModel(
            cid=r.cid,
            name=r.name,
            passed=r.passed,
            expected_failure=r.expected_failure,
            details=r.details,
        )
        for r in results
    ]
    return m.VerifyResponse(passed=all(r.passed for r in results), items=items)
