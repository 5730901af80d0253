"""Weighted Sturm-Liouville eigenproblems on the half-sphere.

The angular operator separates over spherical-harmonic branches m, leaving
on (0, pi/2) the problem

    -(w g')' / w + m (m+N-3) g / sin^2(theta) = mu g,
    w(theta) = sin^(N-2)(theta) cos^alpha(theta),

discretized in weak (Galerkin) form with polynomials in u = cos(theta)
times the regularity factor sin^m(theta).  The weak form selects the
natural no-flux branch at the degenerate endpoint theta = pi/2 (Frobenius
exponents {0, 1-alpha}; shooting cannot separate them robustly, the weak
form does it for free).  Dirichlet problems on caps {theta < theta_max}
use a basis vanishing at the cap edge; at theta_max = pi/2 the basis
carries the explicit factor cos^(1-alpha)(theta), the branch the Dirichlet
condition selects, so the exact ground state is representable.

All mass/stiffness entries reduce to Jacobi-weighted integrals of
polynomials times (1+u)^const, assembled with Gauss-Jacobi rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh

from .params import WeightParams, validate
from .quadrature import gauss_jacobi

_HALF_PI = 0.5 * math.pi


class ConvergenceError(RuntimeError):
    """Eigenvalues failed to settle within the basis-size budget."""


@dataclass(frozen=True)
class NaturalNeumann:
    """No-flux condition at theta = pi/2, selected by the weak form."""


@dataclass(frozen=True)
class Dirichlet:
    theta_max: float

    def __post_init__(self):
        if not 0.0 < self.theta_max <= _HALF_PI + 1e-12:
            raise ValueError("theta_max must lie in (0, pi/2]")


@dataclass(frozen=True)
class SLProblem:
    """Angular branch m of the separated eigenproblem in dimension N.

    The branch contributes the potential m(m+N-3)/sin^2(theta); m = 0 is
    the radial branch (its lowest natural eigenvalue is 0 with constant
    eigenfunction), m = 1 the first angular branch.
    """

    N: int
    alpha: float
    m: int = 0
    bc: NaturalNeumann | Dirichlet = field(default_factory=NaturalNeumann)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        if not self.alpha > -1.0:
            raise ValueError("alpha must exceed -1")
        if self.m < 0:
            raise ValueError("branch index m must be >= 0")
        if isinstance(self.bc, Dirichlet) and self.m > 0 and self.bc.theta_max < _HALF_PI - 1e-12:
            raise ValueError("Dirichlet caps with theta_max < pi/2 support m = 0 only")


@dataclass(frozen=True)
class EigenPair:
    """One converged eigenpair, normalized to int g^2 w dtheta = 1.

    ``residual`` is the maximum weak-form defect of the pair against the
    test functions of an enriched basis, scaled by the eigenvalue.
    """

    mu: float
    theta: np.ndarray
    values: np.ndarray
    residual: float
    evaluate: Callable[[np.ndarray], np.ndarray]


def _legendre_table(x, n):
    """Values and derivatives of Legendre P_0..P_{n-1} at points x."""
    x = np.asarray(x, dtype=float)
    V = np.empty((x.size, n))
    dV = np.zeros((x.size, n))
    V[:, 0] = 1.0
    if n > 1:
        V[:, 1] = x
        dV[:, 1] = 1.0
    for i in range(1, n - 1):
        V[:, i + 1] = ((2 * i + 1) * x * V[:, i] - i * V[:, i - 1]) / (i + 1)
        dV[:, i + 1] = dV[:, i - 1] + (2 * i + 1) * V[:, i]
    return V, dV


def _basis_on(u, u_lo, n):
    """Shifted-Legendre values/(d/du)-derivatives on [u_lo, 1]."""
    scale = 2.0 / (1.0 - u_lo)
    x = (u - u_lo) * scale - 1.0
    V, dV = _legendre_table(x, n)
    return V, dV * scale


def _weighted_gram(rule, smooth, A, B):
    w = rule.weights * smooth
    return (A * w[:, None]).T @ B


class _Discretization:
    """Assembled (S, M) plus enough geometry to evaluate eigenfunctions."""

    def __init__(self, problem: SLProblem, n: int):
        N, a, m = problem.N, problem.alpha, problem.m
        gamma = m + 0.5 * (N - 3)
        nq = n + 60
        self.problem = problem
        self.n = n

        if isinstance(problem.bc, Dirichlet) and problem.bc.theta_max < _HALF_PI - 1e-12:
            u0 = math.cos(problem.bc.theta_max)
            rule = gauss_jacobi(nq, p=0.5 * (N - 3), q=0.0, interval=(u0, 1.0))
            u = rule.nodes
            V, dV = _basis_on(u, u0, n)
            fac = u - u0
            phi = fac[:, None] * V
            dphi = V + fac[:, None] * dV  # d/du of (u-u0) P_i
            sm_m = u ** a * (1.0 + u) ** (0.5 * (N - 3))
            self.M = _weighted_gram(rule, sm_m, phi, phi)
            rule_s = gauss_jacobi(nq, p=0.5 * (N - 1), q=0.0, interval=(u0, 1.0))
            us = rule_s.nodes
            Vs, dVs = _basis_on(us, u0, n)
            D = Vs + (us - u0)[:, None] * dVs
            sm_s = us ** a * (1.0 + us) ** (0.5 * (N - 1))
            self.S = _weighted_gram(rule_s, sm_s, D, D)
            self._u0 = u0
            self._kind = "dirichlet_cap"
            self._mass_nodes = u
        elif isinstance(problem.bc, Dirichlet):
            # cap edge at pi/2: basis sin^m(theta) u^(1-alpha) P_i(u)
            rule = gauss_jacobi(nq, p=gamma, q=2.0 - a, interval=(0.0, 1.0))
            u = rule.nodes
            V, _ = _basis_on(u, 0.0, n)
            self.M = _weighted_gram(rule, (1.0 + u) ** gamma, V, V)
            if m == 0:
                rule_s = gauss_jacobi(nq, p=gamma + 1.0, q=-a, interval=(0.0, 1.0))
                us = rule_s.nodes
                Vs, dVs = _basis_on(us, 0.0, n)
                T = (1.0 - a) * Vs + us[:, None] * dVs
                self.S = _weighted_gram(rule_s, (1.0 + us) ** (gamma + 1.0), T, T)
            else:
                rule_s = gauss_jacobi(nq, p=gamma - 1.0, q=-a, interval=(0.0, 1.0))
                us = rule_s.nodes
                Vs, dVs = _basis_on(us, 0.0, n)
                T = (
                    m * (us ** 2)[:, None] * Vs
                    - (1.0 - us ** 2)[:, None] * ((1.0 - a) * Vs + us[:, None] * dVs)
                )
                self.S = _weighted_gram(rule_s, (1.0 + us) ** (gamma - 1.0), T, T)
                coeff = m * (m + N - 3.0)
                if coeff != 0.0:
                    rule_p = gauss_jacobi(nq, p=gamma - 1.0, q=2.0 - a, interval=(0.0, 1.0))
                    up = rule_p.nodes
                    Vp, _ = _basis_on(up, 0.0, n)
                    self.S = self.S + coeff * _weighted_gram(
                        rule_p, (1.0 + up) ** (gamma - 1.0), Vp, Vp
                    )
            self._u0 = 0.0
            self._kind = "dirichlet_edge"
            self._mass_nodes = u
        else:
            rule = gauss_jacobi(nq, p=gamma, q=a, interval=(0.0, 1.0))
            u = rule.nodes
            V, _ = _basis_on(u, 0.0, n)
            self.M = _weighted_gram(rule, (1.0 + u) ** gamma, V, V)
            if m == 0:
                rule_s = gauss_jacobi(nq, p=gamma + 1.0, q=a, interval=(0.0, 1.0))
                us = rule_s.nodes
                _, dVs = _basis_on(us, 0.0, n)
                self.S = _weighted_gram(rule_s, (1.0 + us) ** (gamma + 1.0), dVs, dVs)
            else:
                rule_s = gauss_jacobi(nq, p=gamma - 1.0, q=a, interval=(0.0, 1.0))
                us = rule_s.nodes
                Vs, dVs = _basis_on(us, 0.0, n)
                Q = m * us[:, None] * Vs - (1.0 - us ** 2)[:, None] * dVs
                self.S = _weighted_gram(rule_s, (1.0 + us) ** (gamma - 1.0), Q, Q)
                coeff = m * (m + N - 3.0)
                if coeff != 0.0:
                    self.S = self.S + coeff * _weighted_gram(
                        rule_s, (1.0 + us) ** (gamma - 1.0), Vs, Vs
                    )
            self._u0 = 0.0
            self._kind = "neumann"
            self._mass_nodes = u

        self.S = 0.5 * (self.S + self.S.T)
        self.M = 0.5 * (self.M + self.M.T)

    def evaluator(self, coeffs):
        problem = self.problem
        u0 = self._u0
        kind = self._kind
        m, a = problem.m, problem.alpha
        c = np.asarray(coeffs, dtype=float)

        def g(theta):
            theta = np.asarray(theta, dtype=float)
            u = np.cos(theta)
            V, _ = _basis_on(np.atleast_1d(u), u0, c.size)
            base = V @ c
            if kind == "dirichlet_cap":
                base = base * (np.atleast_1d(u) - u0)
            else:
                if m > 0:
                    base = base * np.sin(np.atleast_1d(theta)) ** m
                if kind == "dirichlet_edge":
                    base = base * np.atleast_1d(u) ** (1.0 - a)
            return base if theta.ndim else float(base[0])

        return g

    def theta_grid(self):
        return np.sort(np.arccos(np.clip(self._mass_nodes, -1.0, 1.0)))


_BASIS_SIZES = (16, 32, 64, 128, 256)
_RESIDUAL_ENRICH = 24


def _weak_residual(problem, n_big, mu, coeffs):
    disc = _Discretization(problem, n_big)
    c = np.zeros(n_big)
    c[: coeffs.size] = coeffs
    defect = disc.S @ c - mu * (disc.M @ c)
    return float(np.max(np.abs(defect)) / max(abs(mu), 1.0))


def solve_branch(problem: SLProblem, count: int = 4, tol: float = 1e-10) -> list[EigenPair]:
    """Lowest ``count`` eigenpairs of one branch, converged under doubling.

    The basis is enlarged (16, 32, ..., 256) until the requested
    eigenvalues change by less than ``tol`` relative between consecutive
    sizes; tolerances below 1e-9 are clamped there, the realistic relative
    resolution of the dense generalized eigensolve in double precision
    (the ill-conditioning of the weighted Gram matrices amplifies roundoff
    on the higher requested modes).  The returned
    residuals are weak-form defects measured against a larger test basis,
    which flags spurious modes.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    tol = max(tol, 1e-9)
    prev = None
    last = None
    for n in _BASIS_SIZES:
        if n < count + 4:
            continue
        disc = _Discretization(problem, n)
        mu, vecs = eigh(disc.S, disc.M)
        mu = mu[:count]
        vecs = vecs[:, :count]
        last = (disc, mu, vecs)
        if prev is not None:
            change = np.abs(mu - prev)
            scale = np.maximum(np.abs(mu), 1.0)
            if np.all(change <= tol * scale):
                break
        prev = mu
    else:
        raise ConvergenceError(
            f"eigenvalues of {problem} did not converge within {_BASIS_SIZES[-1]} basis functions"
        )

    disc, mu, vecs = last
    theta = disc.theta_grid()
    pairs = []
    for i in range(count):
        c = vecs[:, i]
        g = disc.evaluator(c)
        vals = g(theta)
        top = np.argmax(np.abs(vals))
        if vals[top] < 0:
            c = -c
            g = disc.evaluator(c)
            vals = -vals
        res = _weak_residual(problem, min(disc.n + _RESIDUAL_ENRICH, 2 * disc.n), mu[i], c)
        pairs.append(EigenPair(float(mu[i]), theta, vals, res, g))
    return pairs


def exact_mode_residual(problem: SLProblem, mu: float, profile_coeffs, n: int = 96) -> float:
    """Weak-form defect of an explicitly known eigenfunction.

    ``profile_coeffs`` are shifted-Legendre coefficients of the polynomial
    factor multiplying the branch's regularity prefactor (so the constant
    polynomial [1] encodes sin(theta) on the m = 1 branch, or
    cos^(1-alpha)(theta) on the Dirichlet edge problem).
    """
    c = np.asarray(profile_coeffs, dtype=float)
    return _weak_residual(problem, n, mu, c)


def first_neumann_eigenvalue(N: int, alpha: float, tol: float = 1e-10) -> float:
    """Best constant in the weighted Poincare inequality on the half-sphere.

    Minimum over the second eigenvalue of the radial branch (the zero-mean
    one; the first is 0 with constant eigenfunction) and the lowest
    eigenvalue of the first angular branch.
    """
    radial = solve_branch(SLProblem(N, alpha, m=0), count=2, tol=tol)
    angular = solve_branch(SLProblem(N, alpha, m=1), count=1, tol=tol)
    return min(radial[1].mu, angular[0].mu)


def neumann_spectrum_summary(N: int, alpha: float, tol: float = 1e-10) -> dict:
    radial = solve_branch(SLProblem(N, alpha, m=0), count=2, tol=tol)
    angular = solve_branch(SLProblem(N, alpha, m=1), count=1, tol=tol)
    return {
        "mu1": min(radial[1].mu, angular[0].mu),
        "mu0": radial[1].mu,
        "mu_m1": angular[0].mu,
        "mu0_residual": radial[1].residual,
        "mu_m1_residual": angular[0].residual,
    }


def first_dirichlet_eigenvalue(N: int, alpha: float, theta_max: float, tol: float = 1e-10) -> float:
    """Lowest radial-branch eigenvalue with zero condition at theta_max."""
    pair = solve_branch(SLProblem(N, alpha, m=0, bc=Dirichlet(theta_max)), count=1, tol=tol)
    return pair[0].mu


def dirichlet_ground_state(N: int, alpha: float, theta_max: float, tol: float = 1e-10) -> EigenPair:
    return solve_branch(SLProblem(N, alpha, m=0, bc=Dirichlet(theta_max)), count=1, tol=tol)[0]


@dataclass(frozen=True)
class NodalIdentity:
    theta_hat: float
    mu0: float
    lambda1_at_theta_hat: float


def nodal_angle_identity(N: int, alpha: float, tol: float = 1e-10) -> NodalIdentity:
    """Locate the interior zero of the first zero-mean radial eigenfunction
    and confirm its eigenvalue equals the Dirichlet ground value of the cap
    it bounds.

    The zero is bracketed by a sign scan on a dense grid and pinned by
    bisection; exactly one interior zero must exist (two nodal domains).
    """
    if not -1.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (-1, 1)")
    g0 = solve_branch(SLProblem(N, alpha, m=0), count=2, tol=tol)[1]
    grid = np.linspace(1e-6, _HALF_PI - 1e-6, 4096)
    vals = g0.evaluate(grid)
    signs = np.sign(vals)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if flips.size != 1:
        raise ConvergenceError(
            f"expected exactly one interior sign change of the radial mode, found {flips.size}"
        )
    lo, hi = grid[flips[0]], grid[flips[0] + 1]
    flo = g0.evaluate(np.array([lo]))[0]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = g0.evaluate(np.array([mid]))[0]
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo < 1e-13:
            break
    theta_hat = 0.5 * (lo + hi)
    lam = first_dirichlet_eigenvalue(N, alpha, theta_hat, tol=tol)
    return NodalIdentity(theta_hat, g0.mu, lam)


def rayleigh_quotient(
    N: int,
    alpha: float,
    m: int,
    g: Callable[[np.ndarray], np.ndarray],
    dg: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    n: int = 400,
) -> float:
    """Weighted Dirichlet energy over weighted L2 norm of a branch profile.

    For the radial branch the zero-mean constraint is enforced by
    projecting out the constant component before forming the quotient.
    The finite-difference fallback for dg costs accuracy; pass the exact
    derivative when 1e-8 agreement matters.
    """
    if not alpha > -1.0:
        raise ValueError("alpha must exceed -1")
    gamma = 0.5 * (N - 3)
    rule = gauss_jacobi(n, p=gamma, q=alpha, interval=(0.0, 1.0))
    u = rule.nodes
    theta = np.arccos(u)
    smooth = (1.0 + u) ** gamma
    w = rule.weights * smooth

    gv = np.asarray(g(theta), dtype=float)
    if dg is not None:
        dgv = np.asarray(dg(theta), dtype=float)
    else:
        h = 1e-6
        dgv = (np.asarray(g(theta + h)) - np.asarray(g(theta - h))) / (2.0 * h)

    if m == 0:
        mean = float(w @ gv) / float(w.sum())
        gv = gv - mean
    num = float(w @ (dgv * dgv))
    coeff = m * (m + N - 3.0)
    if coeff != 0.0:
        num += coeff * float(w @ ((gv / np.sin(theta)) ** 2))
    den = float(w @ (gv * gv))
    if den <= 0.0:
        raise ValueError("profile is zero in the weighted L2 sense")
    return num / den


def stability_margin(params: WeightParams, tol: float = 1e-10) -> float:
    """k + mu1/(k+N+alpha-1) - (l+1), with mu1 the computed eigenvalue.

    Nonnegative exactly when the eigenvalue criterion certifies stability
    of the centered half-balls.
    """
    validate(params)
    mu1 = first_neumann_eigenvalue(params.N, params.alpha, tol=tol)
    return params.k + mu1 / (params.k + params.N + params.alpha - 1.0) - (params.l + 1.0)
