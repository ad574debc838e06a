"""Event-driven Monte Carlo simulation of the branching random walk.

Two engines: an exact distance-projected chain (counts over levels 0..d,
distributionally exact for fixed-target FPT by hypercube symmetry) and a
full-genotype Gillespie simulation for small b^d, which also measures cover
times.  All times are in rescaled units (lambda2 = 1); divide by lambda2 to
recover raw times.

Replica i of an ensemble uses a xoshiro256++ stream seeded by splitmix64
hashing of (master_seed, i), so results are bit-identical for identical
configs regardless of thread count.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

import numpy as np
import numba

from . import _kernels
from .errors import DimensionError, DomainError
from .model import Genotype, ModelParams
from .numerics import solve_first_moment

RNG_NAME = _kernels.RNG_NAME
REPLICA_SEED_RULE = "xoshiro256++ state = splitmix64 chain on master_seed ^ mix(replica_index)"


class SimMode(enum.Enum):
    PROJECTED = "projected"
    FULL_GENOTYPE = "full"


class CensoringReason(enum.Enum):
    NONE = "none"
    TIME_HORIZON = "time_horizon"
    POPULATION_CAP = "population_cap"


_CODE_TO_REASON = {
    _kernels.HIT: CensoringReason.NONE,
    _kernels.TIME_HORIZON: CensoringReason.TIME_HORIZON,
    _kernels.POPULATION_CAP: CensoringReason.POPULATION_CAP,
}

_COVER_GUARD = 2 ** 26


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    m: int
    t_max: float | None = None          # None: 4x the first-moment prediction
    population_cap: int = 10 ** 7
    master_seed: int = 0
    replicas: int = 1
    mode: SimMode = SimMode.PROJECTED

    def __post_init__(self):
        if not 0 <= self.m <= self.params.d:
            raise DomainError(f"start distance m must lie in [0, {self.params.d}], got {self.m}")
        if self.t_max is not None and not self.t_max > 0:
            raise DomainError(f"t_max must be > 0, got {self.t_max}")
        if self.population_cap < 1:
            raise DomainError("population_cap must be >= 1")
        if self.replicas < 1:
            raise DomainError("replicas must be >= 1")
        if self.mode is SimMode.FULL_GENOTYPE:
            if self.params.d * math.log2(self.params.b) > 62:
                raise DomainError("full-genotype mode needs b^d to fit in an int64 encoding")

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return self.t_max
        if self.m == 0:
            return 1.0
        return 4.0 * solve_first_moment(self.params.rescaled(), self.m)


@dataclass(frozen=True)
class FptSample:
    hit_time: float | None
    events_processed: int
    peak_population: int
    censoring_reason: CensoringReason

    @property
    def censored(self) -> bool:
        return self.censoring_reason is not CensoringReason.NONE


@dataclass(frozen=True)
class EnsembleStats:
    samples: list[FptSample]
    quantiles: dict[str, float] | None
    censored_count: int
    master_seed: int
    replica_seed_rule: str = REPLICA_SEED_RULE
    rng_name: str = RNG_NAME


def resolve_threads() -> int:
    """Worker count: BRWSS_THREADS env var, else hardware concurrency."""
    env = os.environ.get("BRWSS_THREADS")
    hw = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), hw))
        except ValueError:
            pass
    return hw


def _scan_order(b: int, d: int) -> np.ndarray:
    """Static level-scan order for the categorical pick, densest levels first.

    Most events happen late, when the distance profile sits near the walk's
    stationary mean d(b-1)/b, so scanning outward from there keeps the
    linear-scan pick short.  Any order is distributionally correct.
    """
    center = d * (b - 1) / b
    ks = np.arange(d + 1)
    return ks[np.argsort(np.abs(ks - center), kind="stable")].astype(np.int64)


def _state_from(rng) -> tuple[int, int, int, int]:
    if isinstance(rng, np.random.Generator):
        w = rng.integers(0, 2 ** 64, size=4, dtype=np.uint64)
        if not w.any():
            w[0] = 1
        return tuple(np.uint64(x) for x in w)
    if isinstance(rng, (int, np.integer)):
        return tuple(np.uint64(x) for x in _kernels._seed_state(np.uint64(rng), np.uint64(0)))
    if len(rng) == 4:
        return tuple(np.uint64(x) for x in rng)
    raise DomainError("rng must be a numpy Generator, an integer seed, or 4 state words")


def derive_replica_state(master_seed: int, index: int) -> tuple[int, int, int, int]:
    """The xoshiro256++ state words replica `index` of an ensemble will use."""
    return tuple(_kernels._seed_state(np.uint64(master_seed), np.uint64(index)))


def _sample_from_row(t, code, events, peak) -> FptSample:
    reason = _CODE_TO_REASON[int(code)]
    return FptSample(
        hit_time=float(t) if reason is CensoringReason.NONE else None,
        events_processed=int(events),
        peak_population=int(peak),
        censoring_reason=reason,
    )


def simulate_fpt_projected(cfg: SimConfig, rng) -> FptSample:
    """One replica of the distance-projected FPT simulation."""
    if cfg.mode is not SimMode.PROJECTED:
        raise DomainError("simulate_fpt_projected requires mode=PROJECTED")
    if cfg.m == 0:
        return FptSample(0.0, 0, 1, CensoringReason.NONE)
    p = cfg.params.rescaled()
    s0, s1, s2, s3 = _state_from(rng)
    order = _scan_order(p.b, p.d)
    t, code, ev, peak = _kernels._fpt_projected(
        p.b, p.d, p.lambda1, cfg.m, cfg.resolved_t_max(),
        float(cfg.population_cap), order, s0, s1, s2, s3)
    return _sample_from_row(t, code, ev, peak)


def _full_setup(cfg: SimConfig, target: Genotype | None):
    p = cfg.params.rescaled()
    if target is None:
        target = Genotype.zeros(p.d, p.b)
    if len(target) != p.d or target.b != p.b:
        raise DimensionError("target genotype does not match the model parameters")
    powers = (p.b ** np.arange(p.d, dtype=np.int64)).astype(np.int64)
    target_digits = target.symbols.astype(np.int64)
    start_digits = target_digits.copy()
    start_digits[:cfg.m] = (start_digits[:cfg.m] + 1) % p.b
    start_geno = int(np.dot(start_digits, powers))
    return p, powers, target_digits, start_geno


def simulate_fpt_full(cfg: SimConfig, target: Genotype | None, rng) -> FptSample:
    """One replica of the full-genotype Gillespie simulation.

    The start genotype differs from the target in its first m coordinates;
    by symmetry any other choice has the same law.
    """
    if cfg.mode is not SimMode.FULL_GENOTYPE:
        raise DomainError("simulate_fpt_full requires mode=FULL_GENOTYPE")
    p, powers, target_digits, start_geno = _full_setup(cfg, target)
    if cfg.m == 0:
        return FptSample(0.0, 0, 1, CensoringReason.NONE)
    s0, s1, s2, s3 = _state_from(rng)
    dummy = np.zeros(1, dtype=np.uint64)
    t, code, ev, peak = _kernels._fpt_full(
        p.b, p.d, p.lambda1, start_geno, cfg.m, target_digits, powers,
        cfg.resolved_t_max(), float(cfg.population_cap), False, dummy, 0,
        s0, s1, s2, s3)
    return _sample_from_row(t, code, ev, peak)


def simulate_cover_time(cfg: SimConfig, rng) -> FptSample:
    """First time every vertex of the hypercube has been visited (full mode only)."""
    if cfg.mode is not SimMode.FULL_GENOTYPE:
        raise DomainError("cover times require mode=FULL_GENOTYPE")
    n_vertices = cfg.params.b ** cfg.params.d
    if n_vertices > _COVER_GUARD:
        raise DomainError(f"cover-time tracking requires b^d <= 2^26, got {n_vertices}")
    p, powers, target_digits, start_geno = _full_setup(cfg, None)
    s0, s1, s2, s3 = _state_from(rng)
    visited = np.zeros((n_vertices + 63) // 64, dtype=np.uint64)
    t, code, ev, peak = _kernels._fpt_full(
        p.b, p.d, p.lambda1, start_geno, cfg.m, target_digits, powers,
        cfg.resolved_t_max(), float(cfg.population_cap), True, visited, n_vertices,
        s0, s1, s2, s3)
    return _sample_from_row(t, code, ev, peak)


def count_particles_at_target(cfg: SimConfig, t: float, rng) -> int:
    """N_0(t): particles at the target at time t, one replica, no absorption."""
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    if cfg.t_max is not None and t > cfg.t_max:
        raise DomainError(f"t={t} exceeds the configured horizon {cfg.t_max}")
    p = cfg.params.rescaled()
    s0, s1, s2, s3 = _state_from(rng)
    order = _scan_order(p.b, p.d)
    n0, occ, code, ev, peak = _kernels._measure_projected(
        p.b, p.d, p.lambda1, cfg.m, t, float(cfg.population_cap), order,
        s0, s1, s2, s3)
    if int(code) == _kernels.POPULATION_CAP:
        raise DomainError("population cap reached before the measurement time; "
                          "sample must be discarded")
    return int(n0)


def run_measure_ensemble(cfg: SimConfig, t: float):
    """Batch version of count_particles_at_target.

    Returns (n0, occupation, ok) arrays over replicas; entries with ok=False
    hit the population cap and must be discarded.
    """
    p = cfg.params.rescaled()
    order = _scan_order(p.b, p.d)
    out = np.empty((cfg.replicas, 5), dtype=np.float64)
    numba.set_num_threads(resolve_threads())
    _kernels._batch_measure_projected(p.b, p.d, p.lambda1, cfg.m, t,
                                      float(cfg.population_cap), order,
                                      np.uint64(cfg.master_seed), cfg.replicas, out)
    ok = out[:, 2] != _kernels.POPULATION_CAP
    return out[:, 0].copy(), out[:, 1].copy(), ok


def _ensemble_rows(cfg: SimConfig, kind: str) -> np.ndarray:
    p = cfg.params.rescaled()
    out = np.empty((cfg.replicas, 4), dtype=np.float64)
    numba.set_num_threads(resolve_threads())
    t_max = cfg.resolved_t_max()
    if kind == "cover":
        if cfg.mode is not SimMode.FULL_GENOTYPE:
            raise DomainError("cover ensembles require mode=FULL_GENOTYPE")
        n_vertices = cfg.params.b ** cfg.params.d
        if n_vertices > _COVER_GUARD:
            raise DomainError(f"cover-time tracking requires b^d <= 2^26, got {n_vertices}")
        _, powers, target_digits, start_geno = _full_setup(cfg, None)
        _kernels._batch_fpt_full(p.b, p.d, p.lambda1, start_geno, cfg.m,
                                 target_digits, powers, t_max,
                                 float(cfg.population_cap), True, n_vertices,
                                 np.uint64(cfg.master_seed), cfg.replicas, out)
    elif cfg.mode is SimMode.PROJECTED:
        if cfg.m == 0:
            out[:, 0] = 0.0
            out[:, 1] = _kernels.HIT
            out[:, 2] = 0.0
            out[:, 3] = 1.0
            return out
        order = _scan_order(p.b, p.d)
        _kernels._batch_fpt_projected(p.b, p.d, p.lambda1, cfg.m, t_max,
                                      float(cfg.population_cap), order,
                                      np.uint64(cfg.master_seed), cfg.replicas, out)
    else:
        _, powers, target_digits, start_geno = _full_setup(cfg, None)
        if cfg.m == 0:
            out[:, 0] = 0.0
            out[:, 1] = _kernels.HIT
            out[:, 2] = 0.0
            out[:, 3] = 1.0
            return out
        _kernels._batch_fpt_full(p.b, p.d, p.lambda1, start_geno, cfg.m,
                                 target_digits, powers, t_max,
                                 float(cfg.population_cap), False, 0,
                                 np.uint64(cfg.master_seed), cfg.replicas, out)
    return out


_QUANTILE_KEYS = (("q10", 0.10), ("q25", 0.25), ("median", 0.50),
                  ("q75", 0.75), ("q90", 0.90))


def run_ensemble(cfg: SimConfig, kind: str = "fpt") -> EnsembleStats:
    """Run `replicas` independent replicas; deterministic for a given config.

    kind is "fpt" (projected or full per cfg.mode) or "cover".  Quantiles are
    computed over uncensored samples only and reported as None when more than
    half the replicas were censored.
    """
    if kind not in ("fpt", "cover"):
        raise DomainError(f"unknown ensemble kind {kind!r}")
    rows = _ensemble_rows(cfg, kind)
    samples = [_sample_from_row(*row) for row in rows]
    hits = np.array([s.hit_time for s in samples if not s.censored], dtype=np.float64)
    censored = sum(1 for s in samples if s.censored)
    if censored / cfg.replicas > 0.5 or hits.size == 0:
        quantiles = None
    else:
        quantiles = {key: float(np.quantile(hits, q)) for key, q in _QUANTILE_KEYS}
    return EnsembleStats(samples=samples, quantiles=quantiles, censored_count=censored,
                         master_seed=cfg.master_seed)


def censored_median(stats: EnsembleStats) -> float:
    """Sample median with censored replicas treated as +infinity.

    Identifies the distribution median whenever fewer than half the replicas
    were censored; returns +inf otherwise.
    """
    vals = np.array([math.inf if s.censored else s.hit_time for s in stats.samples])
    return float(np.median(vals))


def survived_barrier(mutation_times, m: int, t: float) -> bool:
    """True iff the running count of mutation times stays below s*m/t + 1 on [0, t].

    The left side jumps only at the given times, and between jumps the margin
    to the line is shrinking, so checking N_s <= s*m/t + 1 at each jump time
    is exact: for the i-th time s_i this reads (i-1)*t <= s_i*m.
    """
    if t <= 0:
        raise DomainError(f"barrier horizon t must be > 0, got {t}")
    if m < 1:
        raise DomainError(f"barrier slope parameter m must be >= 1, got {m}")
    prev = 0.0
    for i, s in enumerate(mutation_times, start=1):
        if s < prev:
            raise DomainError("mutation times must be sorted nondecreasing")
        if not 0.0 <= s <= t:
            raise DomainError(f"mutation time {s} outside [0, {t}]")
        prev = s
        if (i - 1) * t > s * m:
            return False
    return True
