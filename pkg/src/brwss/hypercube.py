"""Exact combinatorial and probabilistic primitives of the b-ary hypercube.

Everything that can underflow for large d is computed in natural-log space
(``LogProb`` values are plain floats holding log-probabilities, -inf for an
exact zero); conversion to linear space happens only at API edges.  Counting
functions return exact arbitrary-precision integers.

Times are in rescaled units throughout: the walk has unit transition rate
(lambda2 = 1), so callers working in raw units must rescale by lambda2 first.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, DomainError, QuadratureError
from .model import Genotype, ModelParams

LogProb = float

_LOG_EPS = 1e-12  # slack allowed when exponentiated log-probs are checked against [0, 1]


def hamming_distance(x: Genotype, y: Genotype) -> int:
    """Number of coordinates where the two genotypes differ."""
    if len(x) != len(y):
        raise DimensionError(f"genotype lengths differ: {len(x)} vs {len(y)}")
    return int(np.count_nonzero(x.symbols != y.symbols))


def _check_m(d: int, m: int):
    if not 0 <= m <= d:
        raise DomainError(f"distance m must lie in [0, {d}], got {m}")


def sphere_size(d: int, b: int, m: int) -> int:
    """#{x : d_H(x, 0) = m} = C(d, m) * (b-1)^m, exact."""
    _check_m(d, m)
    return math.comb(d, m) * (b - 1) ** m


def log_sphere_size(d: int, b: int, m: int) -> float:
    """Natural log of sphere_size via log-gamma; usable up to d ~ 1e6."""
    _check_m(d, m)
    lg = math.lgamma(d + 1) - math.lgamma(m + 1) - math.lgamma(d - m + 1)
    return lg + m * math.log(b - 1)


def _decay(p: ModelParams, t: float) -> float:
    """exp(-b t / ((b-1) d)), the single-coordinate relaxation factor."""
    return math.exp(-p.b * t / ((p.b - 1) * p.d))


def transition_log_prob(p: ModelParams, m: int, t: float) -> LogProb:
    """log q_m(t): the walk's probability of being at a fixed vertex at distance m.

    q_m(t) = b^-d (1 + (b-1) e^{-bt/((b-1)d)})^(d-m) (1 - e^{-bt/((b-1)d)})^m,
    evaluated with log1p/expm1 so both t near 0 and t >> d are stable.
    """
    _check_m(p.d, m)
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    b, d = p.b, p.d
    u = b * t / ((b - 1) * d)
    w = -math.expm1(-u)  # 1 - e^{ -u }, accurate near 0
    # (d-m) * [log(1+(b-1)e^{-u}) - log b]  computed as log1p(-(b-1) w / b)
    stay = (d - m) * math.log1p(-(b - 1) * w / b)
    if m == 0:
        return stay
    if w == 0.0:
        return -math.inf
    move = m * (math.log(w) - math.log(b))
    return stay + move


def expected_particles_log(p: ModelParams, m: int, t: float) -> LogProb:
    """log E[N_0(t)] = t log(rho) + log q_m(t) for the BRW started at distance m."""
    return p.log_rho() * t + transition_log_prob(p, m, t)


def expected_occupation_time(p: ModelParams, m: int, t: float,
                             rel_tol: float = 1e-8, max_evals: int = 10 ** 6) -> float:
    """E[time spent at the target up to t] = integral of E[N_0(s)] ds over [0, t].

    Adaptive Simpson on exp(g(s) - gmax), where g is the log integrand; the
    shift keeps the integrand in [0, 1] even though it spans hundreds of
    orders of magnitude.  Raises QuadratureError if the budget is exhausted.
    """
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    if t == 0:
        return 0.0

    def g(s: float) -> float:
        return expected_particles_log(p, m, s)

    # locate the scale on a coarse grid; g is smooth with a single interior max
    grid = np.linspace(0.0, t, 129)
    gvals = np.array([g(s) for s in grid])
    gmax = float(np.max(gvals))

    def f(s: float) -> float:
        v = g(s) - gmax
        return math.exp(v) if v > -745.0 else 0.0

    evals = [0]

    def feval(s):
        evals[0] += 1
        if evals[0] > max_evals:
            raise QuadratureError("occupation-time quadrature exceeded its evaluation budget",
                                  estimate=None, evaluations=evals[0])
        return f(s)

    def simpson(a, fa, fm, fb, bnd):
        return (bnd - a) / 6.0 * (fa + 4.0 * fm + fb)

    def adapt(a, bnd, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (a + bnd)
        flm = feval(0.5 * (a + mid))
        frm = feval(0.5 * (mid + bnd))
        left = simpson(a, fa, flm, fm, mid)
        right = simpson(mid, fm, frm, fb, bnd)
        if depth <= 0:
            raise QuadratureError("occupation-time quadrature did not converge",
                                  estimate=math.exp(gmax) * whole, evaluations=evals[0])
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (adapt(a, mid, fa, flm, fm, left, tol / 2.0, depth - 1)
                + adapt(mid, bnd, fm, frm, fb, right, tol / 2.0, depth - 1))

    # seed the recursion on the coarse grid panels so the sharp exponential
    # ramp near t cannot be missed by a single global Simpson estimate
    total = 0.0
    rough = 0.0
    panels = []
    for i in range(len(grid) - 1):
        a, bnd = float(grid[i]), float(grid[i + 1])
        fa, fb = f(a), f(bnd)
        fm = feval(0.5 * (a + bnd))
        whole = simpson(a, fa, fm, fb, bnd)
        panels.append((a, bnd, fa, fm, fb, whole))
        rough += whole
    tol_abs = max(rel_tol * rough, 1e-300)
    for a, bnd, fa, fm, fb, whole in panels:
        total += adapt(a, bnd, fa, fm, fb, whole, tol_abs / len(panels), 48)
    return math.exp(gmax) * total


def projected_rates(p: ModelParams, k: int) -> tuple[float, float, float]:
    """Per-particle mutation rates (down, lateral, up) of the distance-to-target chain.

    A mutation picks one of d coordinates uniformly and one of the b-1 other
    symbols uniformly, so from distance k: a mismatched coordinate is repaired
    with rate lambda2 * k/((b-1)d), rewritten to a different wrong symbol with
    rate lambda2 * k(b-2)/((b-1)d), and a matched coordinate is broken with
    rate lambda2 * (d-k)/d.  The three sum to lambda2.
    """
    _check_m(p.d, k)
    b, d, lam2 = p.b, p.d, p.lambda2
    down = lam2 * k / ((b - 1) * d)
    lateral = down * (b - 2)
    up = lam2 * (d - k) / d
    return down, lateral, up


def mutate(g: Genotype, p: ModelParams, rng: np.random.Generator) -> Genotype:
    """One mutation step: a uniform coordinate is set to a uniform different symbol."""
    if len(g) != p.d or g.b != p.b:
        raise DimensionError("genotype does not match the model parameters")
    i = int(rng.integers(p.d))
    sym = g.symbols.copy()
    sym[i] = (sym[i] + 1 + int(rng.integers(p.b - 1))) % p.b
    return Genotype(sym, p.b)


def _comb(n: int, k: int) -> int:
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


def count_at_distance_pair(d: int, b: int, m: int, l: int, lp: int) -> int:
    """#{y : d_H(0, y) = lp and d_H(x, y) = l} for any fixed x with d_H(0, x) = m.

    Sum over i (the number of coordinates where x and y agree on a symbol
    that is wrong for the target) of
    C(m,i) C(m-i, i+l-lp) C(d-m, i+l-m) (b-2)^(lp-l+m-2i) (b-1)^(i+l-m),
    with 0^0 = 1 and out-of-range binomials equal to zero.
    """
    for name, v in (("m", m), ("l", l), ("lp", lp)):
        if not 0 <= v <= d:
            raise DomainError(f"{name} must lie in [0, {d}], got {v}")
    total = 0
    for i in range(m + 1):
        c = _comb(m, i) * _comb(m - i, i + l - lp) * _comb(d - m, i + l - m)
        if c == 0:
            continue
        e_mid = lp - l + m - 2 * i   # coordinates of y wrong in a new way among x's mismatches
        e_out = i + l - m            # coordinates broken outside x's mismatch set
        total += c * (b - 2) ** e_mid * (b - 1) ** e_out
    return total


def _comb_half(n: int, twice_k: int) -> int:
    """C(n, twice_k/2) when twice_k is a non-negative even integer, else 0."""
    if twice_k < 0 or twice_k % 2 != 0:
        return 0
    return _comb(n, twice_k // 2)


def count_triples(d: int, m: int, l1: int, l2: int, l3: int, k: int, kp: int) -> int:
    """Binary-alphabet count of tuples (x1, x2, x3) with x2, x3 at distances k, kp
    from the origin and d_H(x0,x1)=l1, d_H(x1,x2)=l2, d_H(x1,x3)=l3, for a fixed
    x0 at distance m from the origin.  Exported primarily as a test oracle.
    """
    for name, v in (("m", m), ("l1", l1), ("l2", l2), ("l3", l3), ("k", k), ("kp", kp)):
        if not 0 <= v <= d:
            raise DomainError(f"{name} must lie in [0, {d}], got {v}")
    total = 0
    for ell in range(d + 1):
        c = (_comb_half(m, m + l1 - ell)
             * _comb_half(d - m, ell + l1 - m)
             * _comb_half(ell, ell + l2 - k)
             * _comb_half(d - ell, l2 + k - ell)
             * _comb_half(ell, ell + l3 - kp)
             * _comb_half(d - ell, l3 + kp - ell))
        total += c
    return total
