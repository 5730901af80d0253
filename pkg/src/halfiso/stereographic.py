"""Stereographic coordinates on the upper half-sphere.

Projection from the south pole maps the closed upper half-sphere onto the
closed unit ball of dimension N-1; the metric is conformal with factor
2/(|y|^2+1).  This module provides the coordinate maps, the weighted area
density in disk coordinates, a finite-difference check of the gradient
pullback identity, and probes of the two boundedness envelopes that drive
the compactness argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import hemisphere_area_closed_form, sphere_area
from .quadrature import gauss_jacobi


def to_disk(zeta):
    """Project a point of the closed upper half-sphere to the unit ball.

    y_i = zeta_i / (1 + zeta_N); the north pole goes to 0, the equator to
    the boundary sphere |y| = 1.
    """
    zeta = np.asarray(zeta, dtype=float)
    if abs(np.linalg.norm(zeta) - 1.0) > 1e-9:
        raise ValueError("point must lie on the unit sphere")
    if zeta[-1] < -1e-12:
        raise ValueError("point must lie on the closed upper half-sphere")
    return zeta[:-1] / (1.0 + zeta[-1])


def from_disk(y):
    """Inverse map: zeta_i = 2 y_i/(|y|^2+1), zeta_N = (1-|y|^2)/(|y|^2+1)."""
    y = np.asarray(y, dtype=float)
    r2 = float(y @ y)
    if r2 > 1.0 + 1e-12:
        raise ValueError("point must lie in the closed unit ball")
    denom = r2 + 1.0
    return np.concatenate([2.0 * y / denom, [(1.0 - r2) / denom]])


def weighted_area_density(y, N: int, alpha: float) -> float:
    """Density of the weighted hemisphere area in disk coordinates.

    ((1-|y|^2)/(|y|^2+1))^alpha * (2/(|y|^2+1))^(N-1).  Signals the
    boundary ring for negative alpha instead of silently returning inf.
    """
    y = np.asarray(y, dtype=float)
    r2 = float(y @ y)
    if r2 > 1.0:
        raise ValueError("point must lie in the unit ball")
    if r2 == 1.0 and alpha < 0.0:
        raise ValueError("density is singular on the boundary ring for alpha < 0")
    return ((1.0 - r2) / (r2 + 1.0)) ** alpha * (2.0 / (r2 + 1.0)) ** (N - 1)


def hemisphere_area_stereographic(N: int, alpha: float, n: int = 200) -> float:
    """Weighted hemisphere area evaluated in disk coordinates.

    Radial reduction of the density integral; the singular ring factor
    (1-r)^alpha goes into a Jacobi weight in 1-|y|, everything else is
    smooth.  Must agree with the spherical-coordinate route.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if not alpha > -1.0:
        raise ValueError("need alpha > -1")
    rule = gauss_jacobi(n, p=alpha, q=float(N - 2), interval=(0.0, 1.0))

    def f(r):
        r2 = r * r
        return (1.0 + r) ** alpha * (2.0 / (r2 + 1.0)) ** (N - 1) / (r2 + 1.0) ** alpha

    return sphere_area(N - 2) * rule.integrate(f)


def tangent_frame(zeta):
    """Orthonormal basis of the tangent space at a sphere point.

    Gram-Schmidt over the coordinate directions projected onto the tangent
    plane, keeping the first N-1 independent ones (smallest index wins).
    """
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.size
    frame = []
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        v -= (v @ zeta) * zeta
        for t in frame:
            v -= (v @ t) * t
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            frame.append(v / norm)
        if len(frame) == n - 1:
            break
    return np.array(frame)


def gradient_pullback_check(u_hat, grad_u_hat, y, step: float = 1e-4):
    """Compare the sphere-side gradient norm with its disk-side pullback.

    Left side: central finite differences of u(zeta) = u_hat(to_disk(zeta))
    along an orthonormal tangent frame at zeta = from_disk(y).  Right side:
    |grad u_hat(y)| * (|y|^2+1)/2, the inverse of the conformal factor (the
    metric is (2/(|y|^2+1))^2 times the identity, and gradients transform
    by the inverse metric).  Returns (lhs, rhs).
    """
    y = np.asarray(y, dtype=float)
    if float(y @ y) > (1.0 - 1e-3) ** 2:
        raise ValueError("probe point must stay away from the boundary ring")
    zeta = from_disk(y)
    frame = tangent_frame(zeta)
    sq = 0.0
    for t in frame:
        zp = zeta + step * t
        zm = zeta - step * t
        zp /= np.linalg.norm(zp)
        zm /= np.linalg.norm(zm)
        dplus = float(u_hat(to_disk(zp)))
        dminus = float(u_hat(to_disk(zm)))
        sq += ((dplus - dminus) / (2.0 * step)) ** 2
    lhs = math.sqrt(sq)
    rhs = float(np.linalg.norm(np.asarray(grad_u_hat(y), dtype=float))) * (float(y @ y) + 1.0) / 2.0
    return lhs, rhs


@dataclass(frozen=True)
class BoundednessProbe:
    """Sampled envelopes of the two norm-equivalence expressions.

    expr1: 2^(N-3) (|y|+1)^alpha / (|y|^2+1)^(N-3+alpha)
    expr2: 2^(N-1) (|y|+1)^alpha / (|y|^2+1)^(N-1+alpha)

    ``low``/``high`` is the joint envelope over both.
    """

    expr1_low: float
    expr1_high: float
    expr2_low: float
    expr2_high: float

    @property
    def low(self) -> float:
        return min(self.expr1_low, self.expr2_low)

    @property
    def high(self) -> float:
        return max(self.expr1_high, self.expr2_high)


def _envelope_exprs(r, N, alpha):
    e1 = 2.0 ** (N - 3) * (r + 1.0) ** alpha / (r * r + 1.0) ** (N - 3 + alpha)
    e2 = 2.0 ** (N - 1) * (r + 1.0) ** alpha / (r * r + 1.0) ** (N - 1 + alpha)
    return e1, e2


def boundedness_probe(N: int, alpha: float, samples: int = 100_000, seed: int = 20240) -> BoundednessProbe:
    """Min/max of both expressions over sampled |y|, endpoints included.

    The expressions depend on y through |y| only, so sampling the radius
    suffices; |y| = 0 and |y| = 1 are evaluated analytically alongside.
    """
    if not alpha > -1.0:
        raise ValueError("need alpha > -1")
    gen = np.random.Generator(np.random.Philox(key=seed))
    r = np.concatenate([[0.0, 1.0], gen.random(samples)])
    e1, e2 = _envelope_exprs(r, N, alpha)
    probe = BoundednessProbe(float(e1.min()), float(e1.max()), float(e2.min()), float(e2.max()))
    if not (0.0 < probe.low <= probe.high < math.inf):
        raise ArithmeticError("envelope left (0, inf); weight outside admissible range?")
    return probe


def consistency_gap(N: int, alpha: float) -> float:
    """Relative gap between the stereographic and spherical area routes."""
    a = hemisphere_area_stereographic(N, alpha)
    b = hemisphere_area_closed_form(N, alpha)
    return abs(a - b) / b
