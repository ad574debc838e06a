"""Linear-boundary non-crossing probabilities for empirical processes.

q_n(a, b) is the probability that the counting process N_t of n i.i.d.
uniforms on [0, 1] stays below the line a + (b - a) t after centering:

    q_n(a, b) = P(for all t in [0, 1]:  N_t - n t <= a + (b - a) t),

with q_0 := 1.  Between jumps of N_t the margin to the line shrinks (slope
-(n + b - a) < 0 whenever n + b - a > 0), so the constraint binds only at the
jump points t = U_(i), where N = i.  Rearranging i <= a + (n + b - a) U_(i)
gives the order-statistic form

    q_n(a, b) = P(U_(i) >= c_i for all i),   c_i = (i - a) / (n + b - a),

clamped below at 0 (vacuous constraint).  If n + b - a <= 0 the line lies
above n everywhere on [0, 1] and the probability is 1.

The exact value comes from the classical first-crossing volume recursion on
the reversed (upper-boundary) problem: with d_j = 1 - c_{n+1-j} and
T_k := P(k uniforms satisfy V_(j) <= d_j for all j <= k),

    T_k = d_k^k - sum_{j=1..k} C(k, j-1) T_{j-1} (d_k - d_j)^{k-j+1},

O(n^2) total, evaluated in summed-log form so the d_k^k factors cannot
underflow at large n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class BallotQuery:
    n: int
    a: float
    b_end: float

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"sample count n must be >= 0, got {self.n}")
        if not self.a > 0:
            raise DomainError(f"intercept a must be > 0, got {self.a}")
        if not self.b_end > 0:
            raise DomainError(f"boundary endpoint b must be > 0, got {self.b_end}")


EXACT_N_BUDGET = 4096


def _lower_boundaries(q: BallotQuery) -> np.ndarray | None:
    """c_i thresholds, or None when the constraint set is vacuous (q = 1)."""
    den = q.n + q.b_end - q.a
    if den <= 0:
        return None
    c = (np.arange(1, q.n + 1) - q.a) / den
    return np.clip(c, 0.0, None)


def ballot_exact(q: BallotQuery) -> float:
    """Exact q_n(a, b) by the O(n^2) boundary-crossing recursion (n <= 4096)."""
    if q.n == 0:
        return 1.0
    if q.n > EXACT_N_BUDGET:
        raise DomainError(f"exact recursion budget is n <= {EXACT_N_BUDGET}; use ballot_mc")
    c = _lower_boundaries(q)
    if c is None:
        return 1.0
    if c[-1] >= 1.0:
        return 0.0
    n = q.n
    d = 1.0 - c[::-1]          # nondecreasing upper boundaries for the reversed sample
    logd = np.log(d)
    lg = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n + 1)))))  # log k!
    log_t = np.empty(n + 1)
    log_t[0] = 0.0
    for k in range(1, n + 1):
        j = np.arange(1, k + 1)
        gap = d[k - 1] - d[j - 1]
        with np.errstate(divide="ignore"):
            log_gap = np.where(gap > 0.0, np.log(np.maximum(gap, 1e-320)), -np.inf)
        terms = (lg[k] - lg[j - 1] - lg[k - j + 1]) + log_t[j - 1] + (k - j + 1) * log_gap
        base = k * logd[k - 1]
        m = max(base, terms.max()) if terms.size else base
        if m == -np.inf:
            log_t[k] = -np.inf
            continue
        val = math.exp(base - m) - np.exp(terms - m).sum()
        log_t[k] = m + math.log(val) if val > 0.0 else -np.inf
    return float(np.exp(log_t[n]))


def ballot_mc(q: BallotQuery, replicas: int, rng: np.random.Generator,
              batch: int = 4_000_000) -> tuple[float, float]:
    """Monte Carlo q_n(a, b): checks the boundary at every jump point.

    Returns (estimate, binomial standard error).
    """
    if replicas < 1:
        raise DomainError("replicas must be >= 1")
    if q.n == 0:
        return 1.0, 0.0
    rows_per_batch = max(1, batch // q.n)
    idx = np.arange(1, q.n + 1)
    line_slope = q.b_end - q.a
    good = 0
    done = 0
    while done < replicas:
        rows = min(rows_per_batch, replicas - done)
        u = rng.random((rows, q.n))
        u.sort(axis=1)
        lhs = idx - q.n * u               # N_t - n t at the jump points
        bound = q.a + line_slope * u
        good += int(np.count_nonzero((lhs <= bound).all(axis=1)))
        done += rows
    p_hat = good / replicas
    return p_hat, math.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / replicas)


@dataclass(frozen=True)
class SmirnovCell:
    lam: float
    n: int
    p_hat: float
    std_err: float
    normalized: float   # (n / lam^2) * p_hat


def smirnov_scaling_report(lambda_grid, n_grid, replicas: int,
                           rng: np.random.Generator) -> list[SmirnovCell]:
    """Estimate P(sup_t (N_t - n t) < lam) on a grid and normalize by lam^2/n.

    The uniform lam^2/n law holds for 1 <= lam <= sqrt(n); cells outside that
    range are a domain error.
    """
    cells = []
    for lam in lambda_grid:
        for n in n_grid:
            if not 1.0 <= lam <= math.sqrt(n):
                raise DomainError(f"smirnov scaling requires 1 <= lam <= sqrt(n), "
                                  f"got lam={lam}, n={n}")
            p_hat, se = ballot_mc(BallotQuery(n=n, a=lam, b_end=lam), replicas, rng)
            cells.append(SmirnovCell(lam=float(lam), n=int(n), p_hat=p_hat,
                                     std_err=se, normalized=n / lam ** 2 * p_hat))
    return cells
