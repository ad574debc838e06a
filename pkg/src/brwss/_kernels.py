"""Numba event loops for the simulator.

The projected-mode state is a count vector over distances {0..d}; full mode
stores one base-b-encoded genotype per particle.  Each replica owns a
xoshiro256++ stream whose state is derived by splitmix64 hashing of
(master_seed, replica_index), so ensembles are reproducible regardless of
thread schedule.

Censoring codes: 0 = hit, 1 = time horizon, 2 = population cap.
"""

import numpy as np
from numba import njit, prange

U64 = np.uint64
_MIX1 = U64(0x9E3779B97F4A7C15)
_MIX2 = U64(0xBF58476D1CE4E5B9)
_MIX3 = U64(0x94D049BB133111EB)
_SH30 = U64(30)
_SH27 = U64(27)
_SH31 = U64(31)
_SH17 = U64(17)
_SH45 = U64(45)
_SH11 = U64(11)
_SH64_23 = U64(23)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53

HIT = 0
TIME_HORIZON = 1
POPULATION_CAP = 2

RNG_NAME = "xoshiro256++ (replica streams via splitmix64(master_seed, index))"


@njit(cache=True, inline="always")
def _splitmix64(z):
    z = z + _MIX1
    z = (z ^ (z >> _SH30)) * _MIX2
    z = (z ^ (z >> _SH27)) * _MIX3
    return z ^ (z >> _SH31), z


@njit(cache=True)
def _seed_state(master, idx):
    """Four xoshiro256++ state words from (master_seed, replica_index)."""
    z = U64(master) ^ (U64(idx) * _MIX2 + _MIX1)
    s0, z = _splitmix64(z)
    s1, z = _splitmix64(z)
    s2, z = _splitmix64(z)
    s3, z = _splitmix64(z)
    if s0 == U64(0) and s1 == U64(0) and s2 == U64(0) and s3 == U64(0):
        s0 = _MIX1
    return s0, s1, s2, s3


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (U64(64) - k))


@njit(cache=True, inline="always")
def _next_u64(s0, s1, s2, s3):
    result = _rotl(s0 + s3, _SH64_23) + s0
    t = s1 << _SH17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _SH45)
    return result, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _next_f64(s0, s1, s2, s3):
    r, s0, s1, s2, s3 = _next_u64(s0, s1, s2, s3)
    return (r >> _SH11) * _INV53, s0, s1, s2, s3


@njit(cache=True, fastmath=True)
def _fpt_projected(b, d, log_rho, m, t_max, pop_cap, order, s0, s1, s2, s3):
    """FPT of the distance-projected branching chain started at level m.

    Returns (time, code, events, peak_population); time is the censoring time
    when code != 0.  The direction decision reuses the within-level excess of
    the categorical pick (uniform on [0, count) given the level) and compares
    it against rate * count so no per-event division is needed.
    """
    counts = np.zeros(d + 1, dtype=np.float64)
    counts[m] = 1.0
    n = 1.0
    peak = 1.0
    events = 0.0
    lam_tot = log_rho + 1.0
    p_branch = log_rho / lam_tot
    inv_pb = n / p_branch
    inv_pm = n / (1.0 - p_branch)
    inv_rate = 1.0 / lam_tot
    inv_bm1d = 1.0 / ((b - 1.0) * d)
    lat_mult = (b - 1.0) * inv_bm1d
    t = 0.0
    norder = order.shape[0]
    binary = b == 2
    while True:
        u, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
        t -= np.log(1.0 - u) * inv_rate
        if t > t_max:
            return t_max, TIME_HORIZON, events, peak
        events += 1.0
        v, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
        branch = v < p_branch
        if branch:
            w = v * inv_pb
        else:
            w = (v - p_branch) * inv_pm
        # categorical pick of a level proportional to its count
        acc = 0.0
        k = -1
        c = 0.0
        for j in range(norder):
            kk = order[j]
            cc = counts[kk]
            acc += cc
            if w < acc:
                k = kk
                c = cc
                break
        if k < 0:
            # float fallthrough (w rounded up to n); take the last occupied level
            for kk in range(d, -1, -1):
                if counts[kk] > 0.0:
                    k = kk
                    c = counts[kk]
                    acc = w + 0.5 * c  # synthetic mid-bin excess
                    break
        if branch:
            if n + 1.0 > pop_cap:
                return t, POPULATION_CAP, events, peak
            counts[k] += 1.0
            n += 1.0
            if n > peak:
                peak = n
            inv_rate = 1.0 / (n * lam_tot)
            inv_pb = n / p_branch
            inv_pm = n / (1.0 - p_branch)
        elif binary:
            # no lateral moves: a branch-free down/up select
            excess = w - (acc - c)          # uniform on [0, c)
            knext = k - 1 if excess < k * inv_bm1d * c else k + 1
            counts[k] -= 1.0
            counts[knext] += 1.0
            if knext == 0:
                return t, HIT, events, peak
        else:
            excess = w - (acc - c)
            thr_down = k * inv_bm1d * c
            if excess < thr_down:
                counts[k] -= 1.0
                if k == 1:
                    return t, HIT, events, peak
                counts[k - 1] += 1.0
            elif excess >= k * lat_mult * c:
                counts[k] -= 1.0
                counts[k + 1] += 1.0
            # lateral move: level unchanged


@njit(cache=True, fastmath=True)
def _measure_projected(b, d, log_rho, m, t_end, pop_cap, order, s0, s1, s2, s3):
    """Run without absorption to time t_end.

    Returns (n0, occupation, code, events, peak): the number of particles at
    level 0, the accumulated particle-time spent at level 0, and bookkeeping.
    """
    counts = np.zeros(d + 1, dtype=np.float64)
    counts[m] = 1.0
    n = 1.0
    peak = 1.0
    events = 0.0
    lam_tot = log_rho + 1.0
    p_branch = log_rho / lam_tot
    inv_rate = 1.0 / lam_tot
    inv_bm1d = 1.0 / ((b - 1.0) * d)
    lat_mult = (b - 1.0) * inv_bm1d
    t = 0.0
    occ = 0.0
    norder = order.shape[0]
    while True:
        u, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
        dt = -np.log(1.0 - u) * inv_rate
        if t + dt > t_end:
            occ += counts[0] * (t_end - t)
            return counts[0], occ, HIT, events, peak
        occ += counts[0] * dt
        t += dt
        events += 1.0
        v, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
        branch = v < p_branch
        if branch:
            w = (v / p_branch) * n
        else:
            w = ((v - p_branch) / (1.0 - p_branch)) * n
        acc = 0.0
        k = -1
        c = 0.0
        for j in range(norder):
            kk = order[j]
            cc = counts[kk]
            acc += cc
            if w < acc:
                k = kk
                c = cc
                break
        if k < 0:
            for kk in range(d, -1, -1):
                if counts[kk] > 0.0:
                    k = kk
                    c = counts[kk]
                    acc = w + 0.5 * c
                    break
        if branch:
            if n + 1.0 > pop_cap:
                return counts[0], occ, POPULATION_CAP, events, peak
            counts[k] += 1.0
            n += 1.0
            if n > peak:
                peak = n
            inv_rate = 1.0 / (n * lam_tot)
        else:
            excess = w - (acc - c)
            if excess < k * inv_bm1d * c:
                counts[k] -= 1.0
                counts[k - 1] += 1.0
            elif excess >= k * lat_mult * c:
                counts[k] -= 1.0
                counts[k + 1] += 1.0


@njit(cache=True, fastmath=True)
def _fpt_full(b, d, log_rho, start_geno, start_dist, target_digits, powers,
              t_max, pop_cap, track_cover, visited, n_vertices,
              s0, s1, s2, s3):
    """Full-genotype Gillespie run; doubles as the cover-time engine.

    When track_cover is true the run ends when every vertex has been visited
    and the FPT absorption is disabled; otherwise it ends at the first hit of
    the target (distance 0).
    """
    cap = int(pop_cap)
    size = 1024
    if size > cap:
        size = cap
    geno = np.empty(size, dtype=np.int64)
    dist = np.empty(size, dtype=np.int64)
    geno[0] = start_geno
    dist[0] = start_dist
    n = 1
    peak = 1.0
    events = 0.0
    covered = 0
    if track_cover:
        wq = start_geno >> 6
        bq = U64(1) << U64(start_geno & 63)
        visited[wq] |= bq
        covered = 1
        if covered >= n_vertices:
            return 0.0, HIT, events, peak
    elif start_dist == 0:
        return 0.0, HIT, events, peak
    lam_tot = log_rho + 1.0
    p_branch = log_rho / lam_tot
    t = 0.0
    while True:
        u, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
        t -= np.log(1.0 - u) / (n * lam_tot)
        if t > t_max:
            return t_max, TIME_HORIZON, events, peak
        events += 1.0
        v, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
        if v < p_branch:
            if n + 1 > cap:
                return t, POPULATION_CAP, events, peak
            j = int((v / p_branch) * n)
            if j >= n:
                j = n - 1
            if n == size:
                new_size = min(2 * size, cap)
                geno2 = np.empty(new_size, dtype=np.int64)
                dist2 = np.empty(new_size, dtype=np.int64)
                geno2[:n] = geno[:n]
                dist2[:n] = dist[:n]
                geno = geno2
                dist = dist2
                size = new_size
            geno[n] = geno[j]
            dist[n] = dist[j]
            n += 1
            if n > peak:
                peak = float(n)
        else:
            w = ((v - p_branch) / (1.0 - p_branch)) * n
            j = int(w)
            if j >= n:
                j = n - 1
            u2, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
            i = int(u2 * d)
            if i >= d:
                i = d - 1
            u3, s0, s1, s2, s3 = _next_f64(s0, s1, s2, s3)
            r = int(u3 * (b - 1))
            if r >= b - 1:
                r = b - 2
            pw = powers[i]
            g = geno[j]
            old = (g // pw) % b
            new = (old + 1 + r) % b
            g += (new - old) * pw
            geno[j] = g
            td = target_digits[i]
            if old == td:
                dist[j] += 1
            elif new == td:
                dist[j] -= 1
                if dist[j] == 0 and not track_cover:
                    return t, HIT, events, peak
            if track_cover:
                wq = g >> 6
                bq = U64(1) << U64(g & 63)
                if visited[wq] & bq == U64(0):
                    visited[wq] |= bq
                    covered += 1
                    if covered >= n_vertices:
                        return t, HIT, events, peak


@njit(cache=True, parallel=True)
def _batch_fpt_projected(b, d, log_rho, m, t_max, pop_cap, order, master_seed,
                         n_replicas, out):
    for i in prange(n_replicas):
        s0, s1, s2, s3 = _seed_state(master_seed, i)
        t, code, ev, peak = _fpt_projected(b, d, log_rho, m, t_max, pop_cap,
                                           order, s0, s1, s2, s3)
        out[i, 0] = t
        out[i, 1] = code
        out[i, 2] = ev
        out[i, 3] = peak


@njit(cache=True, parallel=True)
def _batch_measure_projected(b, d, log_rho, m, t_end, pop_cap, order,
                             master_seed, n_replicas, out):
    for i in prange(n_replicas):
        s0, s1, s2, s3 = _seed_state(master_seed, i)
        n0, occ, code, ev, peak = _measure_projected(b, d, log_rho, m, t_end,
                                                     pop_cap, order, s0, s1, s2, s3)
        out[i, 0] = n0
        out[i, 1] = occ
        out[i, 2] = code
        out[i, 3] = ev
        out[i, 4] = peak


@njit(cache=True, parallel=True)
def _batch_fpt_full(b, d, log_rho, start_geno, start_dist, target_digits, powers,
                    t_max, pop_cap, track_cover, n_vertices, master_seed,
                    n_replicas, out):
    n_words = (n_vertices + 63) // 64 if track_cover else 1
    for i in prange(n_replicas):
        s0, s1, s2, s3 = _seed_state(master_seed, i)
        visited = np.zeros(n_words, dtype=np.uint64)
        t, code, ev, peak = _fpt_full(b, d, log_rho, start_geno, start_dist,
                                      target_digits, powers, t_max, pop_cap,
                                      track_cover, visited, n_vertices,
                                      s0, s1, s2, s3)
        out[i, 0] = t
        out[i, 1] = code
        out[i, 2] = ev
        out[i, 3] = peak
