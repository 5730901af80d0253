"""One-dimensional quadrature primitives.

Gauss-Legendre and Gauss-Jacobi rules (the Jacobi rules absorb the algebraic
endpoint factors (b-x)^p (x-a)^q exactly, which is how every cos^a / x_N^a
singularity in this package is treated), an adaptive bisection integrator
with a hard evaluation budget, a fixed-coefficient Lanczos log-gamma used as
the closed-form oracle for Beta identities, and a seeded Monte Carlo
integrator that serves as an independent cross-check of the deterministic
quadratures.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal


class QuadratureError(Exception):
    """Base class for quadrature failures."""


class BudgetExceeded(QuadratureError):
    """Evaluation budget exhausted; carries the best estimate so far."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class NonFiniteSample(QuadratureError):
    """The integrand returned NaN or infinity at a quadrature node."""


# Lanczos approximation, g = 7, 9 terms.  Relative error of exp(log_gamma)
# is below 1e-13 for real arguments >= 0.5; smaller arguments are lifted
# with one step of the recurrence Gamma(x+1) = x Gamma(x).
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x):
    """log Gamma(x) for x > 0, via the embedded Lanczos coefficients."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def log_beta(a, b):
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def beta(a, b):
    """Euler Beta through log-gamma (safe for small/large arguments)."""
    return math.exp(log_beta(a, b))


@dataclass(frozen=True)
class QuadRule:
    """Nodes/weights for integrating weight(x) * f(x) over (a, b).

    ``kind`` is "legendre" (weight 1) or "jacobi" with exponents (p, q),
    meaning the implicit weight is (b-x)^p (x-a)^q.  ``integrate(f)``
    returns sum(w_i * f(x_i)); the weight function itself is never
    evaluated, so integrable endpoint singularities cost nothing.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]
    kind: str
    exponents: tuple[float, float] = (0.0, 0.0)

    def integrate(self, f):
        vals = np.asarray(f(self.nodes), dtype=float)
        if vals.shape != self.nodes.shape:
            raise ValueError("integrand must be vectorized over the node array")
        return float(self.weights @ vals)


def _jacobi_golub_welsch(n, p, q):
    """Nodes/weights on (-1, 1) for weight (1-x)^p (1+x)^q, n >= 1.

    Symmetric tridiagonal Jacobi matrix from the monic three-term
    recurrence; nodes are its eigenvalues, weights come from the squared
    first eigenvector components scaled by the zeroth moment.
    """
    k = np.arange(n, dtype=float)
    s = p + q
    with np.errstate(invalid="ignore", divide="ignore"):
        diag = (q * q - p * p) / ((2.0 * k + s) * (2.0 * k + s + 2.0))
    diag[0] = (q - p) / (s + 2.0)  # the k = 0 denominator vanishes when s = 0
    j = np.arange(1, n, dtype=float)
    sj = 2.0 * j + s
    with np.errstate(invalid="ignore", divide="ignore"):
        bsq = 4.0 * j * (j + p) * (j + q) * (j + s) / (sj * sj * (sj * sj - 1.0))
    if n > 1:
        # cancelled form of the k = 1 coefficient; the raw one is 0/0 at s = -1
        bsq[0] = 4.0 * (1.0 + p) * (1.0 + q) / ((s + 2.0) ** 2 * (s + 3.0))
    off = np.sqrt(bsq)
    nodes, vecs = eigh_tridiagonal(diag, off)
    mu0 = math.exp((s + 1.0) * math.log(2.0) + log_beta(p + 1.0, q + 1.0))
    weights = mu0 * vecs[0, :] ** 2
    order = np.argsort(nodes)
    return nodes[order], weights[order]


def gauss_jacobi(n, p, q, interval=(-1.0, 1.0)):
    """n-point Gauss-Jacobi rule for weight (b-x)^p (x-a)^q on (a, b).

    Exact for weight * polynomial up to degree 2n-1.
    """
    if n < 1:
        raise ValueError("need n >= 1 nodes")
    if p <= -1.0 or q <= -1.0:
        raise ValueError(f"Jacobi exponents must exceed -1, got p={p}, q={q}")
    x, w = _jacobi_golub_welsch(int(n), float(p), float(q))
    a, b = interval
    if not b > a:
        raise ValueError("interval must satisfy a < b")
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x
    # the weight picks up ((b-a)/2)^(p+q) from the affine change of variable
    weights = w * half ** (p + q + 1.0)
    return QuadRule(nodes, weights, (float(a), float(b)), "jacobi", (float(p), float(q)))


def gauss_legendre(n, interval=(-1.0, 1.0)):
    """n-point Gauss-Legendre rule on (a, b); exact to degree 2n-1."""
    if n < 1:
        raise ValueError("need n >= 1 nodes")
    x, w = _jacobi_golub_welsch(int(n), 0.0, 0.0)
    a, b = interval
    if not b > a:
        raise ValueError("interval must satisfy a < b")
    half = 0.5 * (b - a)
    return QuadRule(0.5 * (a + b) + half * x, w * half, (float(a), float(b)), "legendre")


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error_estimate: float
    evaluations: int
    degenerate: bool = False

    def __post_init__(self):
        if self.error_estimate < 0.0:
            raise ValueError("error_estimate must be nonnegative")


_PANEL_RULE = _jacobi_golub_welsch(15, 0.0, 0.0)


def _eval_vectorized(f, nodes):
    try:
        vals = np.asarray(f(nodes), dtype=float)
        if vals.shape == nodes.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(f(x)) for x in nodes])


def _panel(f, a, b):
    x, w = _PANEL_RULE
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x
    vals = _eval_vectorized(f, nodes)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample(f"non-finite integrand sample in [{a}, {b}]")
    return float(half * (w @ vals))


def adaptive_integrate(f, interval, tol=1e-10, max_evals=400_000):
    """Adaptive bisection integral of f over (a, b).

    Each panel is estimated with a 15-point Gauss rule; the panel error is
    the difference between the panel value and the sum of its two halves
    (two refinement levels) scaled by a safety factor of 3, which bounds
    the residual of the finer level for any error decaying geometrically
    by at least 1/sqrt(2) per split (the worst integrable power
    singularity).  The worst panel is bisected until the total estimate
    falls under ``tol`` or the evaluation budget runs out.  Endpoint
    singularities are fine as long as they are integrable: nodes stay
    strictly interior.
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError("interval must satisfy a < b")
    evals = 0

    def panel(lo, hi):
        nonlocal evals
        evals += 15
        return _panel(f, lo, hi)

    whole = panel(a, b)
    left, right = panel(a, 0.5 * (a + b)), panel(0.5 * (a + b), b)
    # heap entries: (-error, lo, hi, left-half value, right-half value)
    err0 = 3.0 * abs(whole - (left + right))
    heap = [(-err0, a, b, left, right)]
    total = left + right
    total_err = err0
    min_width = (b - a) * 1e-14
    while total_err > tol and heap:
        if evals >= max_evals:
            raise BudgetExceeded(
                f"budget {max_evals} exhausted with error estimate {total_err:.3e}",
                IntegralEstimate(total, total_err, evals),
            )
        neg_err, lo, hi, vl, vr = heapq.heappop(heap)
        total_err += neg_err  # remove this panel's error
        mid = 0.5 * (lo + hi)
        if hi - lo < min_width:
            # cannot refine further; keep its error on the books and move on
            total_err -= neg_err
            break
        for (plo, phi, pv) in ((lo, mid, vl), (mid, hi, vr)):
            pmid = 0.5 * (plo + phi)
            cl, cr = panel(plo, pmid), panel(pmid, phi)
            perr = 3.0 * abs(pv - (cl + cr))
            total += (cl + cr) - pv
            total_err += perr
            heapq.heappush(heap, (-perr, plo, phi, cl, cr))
    return IntegralEstimate(total, total_err, evals)


_MC_CHUNK = 1 << 16


def mc_integrate(indicator, weight, box, samples, seed):
    """Uniform Monte Carlo integral of weight over {indicator} inside box.

    ``indicator`` and ``weight`` must accept an (n, dim) array and return a
    length-n array (bool / float).  The stream is a counter-based Philox
    generator keyed by (seed, chunk index) over fixed-size chunks, so the
    result is bit-identical for a given (seed, samples) no matter how the
    chunks are scheduled.  Returns the unbiased estimate with its standard
    error; if no sample lands in the region the estimate is flagged
    degenerate.
    """
    samples = int(samples)
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if seed < 0 or seed >= 1 << 64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    lo = np.array([float(l) for (l, _) in box])
    hi = np.array([float(h) for (_, h) in box])
    if np.any(hi <= lo):
        raise ValueError("box intervals must have positive length")
    volume = float(np.prod(hi - lo))
    dim = len(box)

    total = 0.0
    total_sq = 0.0
    hits = 0
    done = 0
    chunk_index = 0
    while done < samples:
        n = min(_MC_CHUNK, samples - done)
        gen = np.random.Generator(np.random.Philox(key=(int(seed) << 64) | chunk_index))
        pts = lo + (hi - lo) * gen.random((n, dim))
        inside = np.asarray(indicator(pts), dtype=bool)
        vals = np.zeros(n)
        if inside.any():
            vals[inside] = np.asarray(weight(pts[inside]), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteSample("non-finite weight sample in mc_integrate")
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        hits += int(inside.sum())
        done += n
        chunk_index += 1

    if hits == 0:
        return IntegralEstimate(0.0, 0.0, samples, degenerate=True)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    stderr = volume * math.sqrt(var / samples)
    return IntegralEstimate(volume * mean, stderr, samples)
