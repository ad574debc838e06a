"""Root solving for the first-moment equation and the regime FPT predictors.

The first-moment equation for the BRW started at distance m is
rho^t q_m(t) = 1; in log form its residual is

    phi(t) = t log(rho) - d log(b)
             + (d-m) log(1 + (b-1) e^{-bt/((b-1)d)})
             + m log(1 - e^{-bt/((b-1)d)}).

All times here are in rescaled units (lambda2 = 1).  Three predictors cover
the regimes: slow branching rho in (1, e) with the affine expansion
x0*d + r*m, fast branching rho > e via the Lambert W function, and the
ultra-slow schedule rho(d) -> 1 with an explicit correction.

Everything is pure and reentrant; tolerances live in SolverConfig.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, NoRootError, RegimeError
from .model import ModelParams

E = math.e


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and the 'large enough' window constants of the asymptotic regimes."""

    l1: float = 32.0            # slow-regime uniqueness window: m <= d / l1
    l2: float = 64.0            # ultra-slow schedule floor: log rho(d) >= l2 / d
    l3: float = 64.0            # ultra-slow m window: m <= d / l3
    rho_guard: float = 1e-6     # guard band half-width around rho = 1 and rho = e
    bracket_growth: float = 1.25
    root_xtol: float = 1e-11
    lambert_max_iter: int = 50


DEFAULT_CONFIG = SolverConfig()


class Regime(enum.Enum):
    SLOW_CONSTANT_RHO = "slow"
    FAST_CONSTANT_RHO = "fast"
    ULTRA_SLOW = "ultraslow"


@dataclass(frozen=True)
class RegimeConstants:
    """Slow-regime constants: x0, r and alpha = exp(-b x0/(b-1)), for rho in (1, e)."""

    x0: float
    r: float
    alpha: float
    b: int
    rho: float


@dataclass(frozen=True)
class FptPrediction:
    regime: Regime
    m: int
    t_first_moment: float | None
    t_predicted: float
    decomposition: tuple[tuple[str, float], ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class SolveDetails:
    bracket: tuple[float, float]
    sign_changes: int
    multiple_roots: bool
    warnings: tuple[str, ...]


def lambert_w0(x: float, max_iter: int = 50) -> float:
    """Principal-branch Lambert W on [0, inf): w >= 0 with w e^w = x.

    Asymptotic guess log x - log log x for x > e, log1p(x) otherwise, then
    Halley iterations; residual |w e^w - x| <= 1e-12 max(1, x).
    """
    if x < 0:
        raise DomainError(f"lambert_w0 requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x > E:
        lx = math.log(x)
        w = lx - math.log(lx)
    else:
        w = math.log1p(x)
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 1e-14 * max(1.0, x):
            break
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def _phi(b: int, d: int, log_rho: float, m: int, t: float) -> float:
    """Stable evaluation of the first-moment residual phi(t)."""
    u = b * t / ((b - 1) * d)
    w = -math.expm1(-u)  # 1 - e^{-u}
    stay = (d - m) * math.log1p(-(b - 1) * w / b)
    if m == 0:
        return t * log_rho + stay
    if w == 0.0:
        return -math.inf
    return t * log_rho + stay + m * (math.log(w) - math.log(b))


def _phi_prime(b: int, d: int, log_rho: float, m: int, t: float) -> float:
    u = b * t / ((b - 1) * d)
    v = math.exp(-u)
    down = b * v / (1.0 + (b - 1) * v)
    up = b * v / ((b - 1) * (1.0 - v)) if v < 1.0 else math.inf
    return log_rho - (d - m) / d * down + (m / d) * up


def first_moment_residual(p: ModelParams, m: int, t: float) -> float:
    """phi(t); zero exactly at roots of the first-moment equation."""
    if t <= 0:
        raise DomainError(f"first_moment_residual requires t > 0, got {t}")
    if not 1 <= m <= p.d:
        raise DomainError(f"m must lie in [1, {p.d}], got {m}")
    return _phi(p.b, p.d, p.log_rho(), m, t)


def _x0_root(b: int, rho: float) -> float:
    """Unique positive root of h(x) = x log rho - log b + log(1+(b-1)e^{-bx/(b-1)})."""
    log_rho = math.log(rho)

    def h(x: float) -> float:
        u = b * x / (b - 1)
        w = -math.expm1(-u)
        return x * log_rho + math.log1p(-(b - 1) * w / b)

    def h_prime(x: float) -> float:
        u = b * x / (b - 1)
        eu = math.exp(u) if u < 700.0 else math.inf
        return log_rho - b / (b - 1 + eu)

    hi = 2.0 * math.log(b) / log_rho
    x = brentq(h, 1e-300, hi, xtol=1e-14, rtol=8.9e-16)
    for _ in range(3):  # Newton polish to push the defining-equation residual near eps
        hp = h_prime(x)
        if hp <= 0:
            break
        step = h(x) / hp
        if not math.isfinite(step):
            break
        x -= step
        if x <= 0:
            x += step
            break
    return x


def regime_constants(b: int, rho: float, config: SolverConfig = DEFAULT_CONFIG) -> RegimeConstants:
    """Constants x0(b, rho) and r(b, rho) of the slow-regime affine expansion.

    x0 solves x0 log rho = log(b / (1 + (b-1) e^{-b x0/(b-1)})); r comes from
    the closed form r = log((1+(b-1)a)/(1-a)) / (log rho - b a/(1+(b-1)a))
    with a = e^{-b x0/(b-1)}, whose denominator is positive on (1, e).
    """
    if b < 2:
        raise DomainError(f"alphabet size b must be >= 2, got {b}")
    if not (1.0 + config.rho_guard <= rho <= E - config.rho_guard):
        raise RegimeError(
            f"regime constants require rho in [{1 + config.rho_guard}, {E - config.rho_guard}], got {rho}")
    x0 = _x0_root(b, rho)
    alpha = math.exp(-b * x0 / (b - 1))
    num = math.log1p((b - 1) * alpha) - math.log1p(-alpha)
    den = math.log(rho) - b * alpha / (1.0 + (b - 1) * alpha)
    r = num / den
    return RegimeConstants(x0=x0, r=r, alpha=alpha, b=b, rho=rho)


def solve_first_moment(p: ModelParams, m: int,
                       config: SolverConfig = DEFAULT_CONFIG,
                       details: bool = False):
    """Smallest strictly positive root of the first-moment equation.

    Brackets by scanning phi on a geometric grid (growth 1.25) from a seed
    where phi < 0 is guaranteed: x0*d for rho < e (no root exists below it),
    a small multiple of d otherwise.  The scan continues to the window end
    2.05 d log(b)/log(rho), past which phi is provably positive, and flags any
    additional sign change.  The bracket is closed with Brent and polished
    with Newton steps.
    """
    if not 1 <= m <= p.d:
        raise DomainError(f"m must lie in [1, {p.d}], got {m}")
    b, d, log_rho = p.b, p.d, p.log_rho()
    rho = p.rho()

    def phi(t):
        return _phi(b, d, log_rho, m, t)

    if rho < E:
        t0 = _x0_root(b, rho) * d
    else:
        t0 = 1e-6 * d
    while phi(t0) >= 0.0 and t0 > 1e-280:
        t0 /= 4.0
    t_end = 2.05 * d * math.log(b) / log_rho

    warnings = []
    if rho < E and m > d / config.l1:
        warnings.append(f"m={m} exceeds d/L1={d / config.l1:.3g}; "
                        "slow-regime uniqueness window not guaranteed")

    brackets = []
    t_prev, f_prev = t0, phi(t0)
    t_cur = t0
    while t_cur < t_end:
        t_cur = min(t_cur * config.bracket_growth, t_end)
        f_cur = phi(t_cur)
        if (f_prev < 0.0 <= f_cur) or (f_prev > 0.0 >= f_cur):
            brackets.append((t_prev, t_cur, f_prev, f_cur))
        t_prev, f_prev = t_cur, f_cur

    if not brackets:
        raise NoRootError("no sign change of the first-moment residual",
                          (t0, t_end), (phi(t0), phi(t_end)))

    lo, hi, _, _ = brackets[0]
    root = brentq(phi, lo, hi, xtol=max(config.root_xtol, 1e-13 * max(1.0, hi)),
                  rtol=8.9e-16)
    for _ in range(2):
        fp = _phi_prime(b, d, log_rho, m, root)
        if not math.isfinite(fp) or fp == 0.0:
            break
        step = phi(root) / fp
        cand = root - step
        if lo < cand < hi:
            root = cand

    if len(brackets) > 1:
        warnings.append(f"{len(brackets)} sign changes in the scan window; returning the smallest root")

    if details:
        return root, SolveDetails(bracket=(lo, hi), sign_changes=len(brackets),
                                  multiple_roots=len(brackets) > 1,
                                  warnings=tuple(warnings))
    return root


def predict_slow(p: ModelParams, m: int, config: SolverConfig = DEFAULT_CONFIG) -> FptPrediction:
    """Slow-regime centering: t_predicted = x0*d + r*m, rho in (1, e)."""
    rc = regime_constants(p.b, p.rho(), config)
    if not 1 <= m <= p.d:
        raise DomainError(f"m must lie in [1, {p.d}], got {m}")
    t_fm, det = solve_first_moment(p, m, config, details=True)
    t_pred = rc.x0 * p.d + rc.r * m
    return FptPrediction(
        regime=Regime.SLOW_CONSTANT_RHO,
        m=m,
        t_first_moment=t_fm,
        t_predicted=t_pred,
        decomposition=(("x0*d", rc.x0 * p.d), ("r*m", rc.r * m)),
        warnings=det.warnings,
    )


def predict_fast(p: ModelParams, m: int, config: SolverConfig = DEFAULT_CONFIG) -> FptPrediction:
    """Fast-regime centering via Lambert W, rho > e.

    t = m W((log rho - 1)(b-1) d / m) / (log rho - 1), equivalently the unique
    positive solution of (rho/e)^t (t / ((b-1) d))^m = 1.
    """
    rho = p.rho()
    if rho <= E:
        raise RegimeError(f"fast-regime predictor requires rho > e, got rho={rho}")
    if not 1 <= m:
        raise DomainError(f"m must be >= 1, got {m}")
    log_rho = p.log_rho()
    z = (log_rho - 1.0) * (p.b - 1) * p.d / m
    t_pred = m * lambert_w0(z, config.lambert_max_iter) / (log_rho - 1.0)
    warnings = []
    if m > math.sqrt(p.d):
        warnings.append(f"m={m} exceeds sqrt(d)={math.sqrt(p.d):.3g}; "
                        "fast-regime window m = O(sqrt(d)/log d) not guaranteed")
    t_fm = None
    if m <= p.d:
        t_fm, det = solve_first_moment(p, m, config, details=True)
        warnings.extend(det.warnings)
    return FptPrediction(
        regime=Regime.FAST_CONSTANT_RHO,
        m=m,
        t_first_moment=t_fm,
        t_predicted=t_pred,
        decomposition=(("m*W/(log(rho)-1)", t_pred),),
        warnings=tuple(warnings),
    )


def bar_t(p: ModelParams, m: int, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """The shifted fast-regime time: unique t with (rho/e)^t (t/((b-1)d))^m = m.

    Equals m W((log rho - 1)(b-1) d m^{1/m} / m)/(log rho - 1) and sits within
    O(log d) of the fast-regime centering.
    """
    rho = p.rho()
    if rho <= E:
        raise RegimeError(f"bar_t requires rho > e, got rho={rho}")
    if not 1 <= m:
        raise DomainError(f"m must be >= 1, got {m}")
    log_rho = p.log_rho()
    z = (log_rho - 1.0) * (p.b - 1) * p.d * math.exp(math.log(m) / m) / m
    return m * lambert_w0(z, config.lambert_max_iter) / (log_rho - 1.0)


def predict_ultraslow(schedule, d: int, m: int,
                      config: SolverConfig = DEFAULT_CONFIG) -> FptPrediction:
    """Ultra-slow regime (b = 2, rho(d) -> 1): first-moment root with correction.

    t_predicted = t_root + log(log rho)/log rho; since log log rho < 0 the
    correction is strictly negative.  ``schedule`` maps d to rho(d) (a float
    is accepted as a constant schedule).  Violations of the regime hypothesis
    log rho(d) >= L2/d are reported as warnings, not errors.
    """
    rho = float(schedule(d)) if callable(schedule) else float(schedule)
    if not rho > 1.0:
        raise DomainError(f"ultra-slow schedule must give rho > 1, got {rho}")
    if rho >= E:
        raise RegimeError(f"ultra-slow predictor requires rho < e, got {rho}")
    if not 1 <= m <= d:
        raise DomainError(f"m must lie in [1, {d}], got {m}")
    p = ModelParams.from_rho(2, d, rho)
    log_rho = p.log_rho()
    warnings = []
    if log_rho < config.l2 / d:
        warnings.append(f"log rho = {log_rho:.3g} is below L2/d = {config.l2 / d:.3g}; "
                        "ultra-slow regime hypotheses violated")
    if m > d / config.l3:
        warnings.append(f"m={m} exceeds d/L3={d / config.l3:.3g}")
    t_fm, det = solve_first_moment(p, m, config, details=True)
    warnings.extend(det.warnings)
    leading = d * math.log(2.0) / log_rho
    correction = math.log(log_rho) / log_rho  # negative: log log rho < 0 < log rho
    t_pred = t_fm + correction
    return FptPrediction(
        regime=Regime.ULTRA_SLOW,
        m=m,
        t_first_moment=t_fm,
        t_predicted=t_pred,
        decomposition=(("d*log2/log(rho)", leading),
                       ("correction", correction),
                       ("root minus leading", t_fm - leading)),
        warnings=tuple(warnings),
    )


def mutation_delay_coefficient(b: int, lambda1: float, lambda2: float, lambda2p: float,
                               config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Per-d coefficient of the FPT delay caused by raising the mutation rate.

    For 0 < lambda1 < lambda2 < lambda2p the leading-order delay is
    (x0(b, e^{lambda1/lambda2p})/lambda2p - x0(b, e^{lambda1/lambda2})/lambda2) * d,
    and the coefficient returned here is strictly positive.
    """
    if not (0 < lambda1 < lambda2 < lambda2p):
        raise DomainError("rates must satisfy 0 < lambda1 < lambda2 < lambda2p, got "
                          f"({lambda1}, {lambda2}, {lambda2p})")
    x0_new = _x0_root(b, math.exp(lambda1 / lambda2p))
    x0_old = _x0_root(b, math.exp(lambda1 / lambda2))
    return x0_new / lambda2p - x0_old / lambda2
