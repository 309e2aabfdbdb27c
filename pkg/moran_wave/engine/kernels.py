"""
JIT-compiled event loops

All loops draw uniforms from a numpy Generator with `rng.random()` only, so a
given (generator state, inputs) pair reproduces the same event sequence.
Fitness histograms live in a sliding window `counts` where class k sits at
index k - offset; the window is regrown and recentred when a class falls
outside it.
"""

import math

import numpy as np
from numba import njit

# Record table columns
COL_TIME = 0
COL_MEAN = 1
COL_C2 = 2
COL_C3 = 3
COL_C4 = 4
COL_KC = 5
COL_KD = 6
COL_KW = 7
COL_MIN = 8
COL_MAX = 9
N_COLUMNS = 10

# Run status
STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_DOMINATION = 2

# Tally slots
TALLY_MUT_UP = 0
TALLY_MUT_DOWN = 1
TALLY_SELECTION = 2
TALLY_RESAMPLING = 3
TALLY_RESAMPLING_NOOP = 4
TALLY_PROPOSALS = 5
N_TALLIES = 6

MIN_WINDOW = 16


@njit(cache=True)
def exponential_wait(rng, rate):
    return -math.log(1.0 - rng.random()) / rate


@njit(cache=True)
def make_window(classes, occ):
    """Histogram window holding the given (ascending) classes with headroom"""
    kmin = classes[0]
    kmax = classes[classes.size - 1]
    width = kmax - kmin + 1
    cap = max(MIN_WINDOW, 4 * width)
    offset = kmin - (cap - width) // 2
    counts = np.zeros(cap, dtype=np.int64)
    for i in range(classes.size):
        counts[classes[i] - offset] += occ[i]
    return counts, offset, kmin, kmax


@njit(cache=True)
def grow_window(counts, offset, kmin, kmax, k):
    """Return a recentred copy of the window that also covers class k"""
    lo = min(kmin, k)
    hi = max(kmax, k)
    width = hi - lo + 1
    cap = max(counts.size, 4 * width)
    new_offset = lo - (cap - width) // 2
    grown = np.zeros(cap, dtype=np.int64)
    for c in range(kmin, kmax + 1):
        grown[c - new_offset] = counts[c - offset]
    return grown, new_offset


@njit(cache=True)
def add_to_window(counts, offset, kmin, kmax, k):
    idx = k - offset
    if idx < 0 or idx >= counts.size:
        counts, offset = grow_window(counts, offset, kmin, kmax, k)
        idx = k - offset
    counts[idx] += 1
    if k < kmin:
        kmin = k
    if k > kmax:
        kmax = k
    return counts, offset, kmin, kmax


@njit(cache=True)
def remove_from_window(counts, offset, kmin, kmax, k):
    # Callers add before they remove, so the window never empties
    idx = k - offset
    counts[idx] -= 1
    if counts[idx] == 0:
        if k == kmin:
            while counts[kmin - offset] == 0:
                kmin += 1
        if k == kmax:
            while counts[kmax - offset] == 0:
                kmax -= 1
    return kmin, kmax


@njit(cache=True)
def write_window_stats(records, r, time, counts, offset, kmin, kmax, pop_size, kc_thr, kd_thr):
    """Fill record row r from the histogram (two-pass moments)"""
    n = float(pop_size)
    acc = 0.0
    for k in range(kmin, kmax + 1):
        acc += (k - kmin) * counts[k - offset]
    rel_mean = acc / n
    c2 = 0.0
    c3 = 0.0
    c4 = 0.0
    for k in range(kmin, kmax + 1):
        nk = counts[k - offset]
        if nk > 0:
            d = (k - kmin) - rel_mean
            d2 = d * d
            c2 += d2 * nk
            c3 += d2 * d * nk
            c4 += d2 * d2 * nk
    kc = np.nan
    kd = np.nan
    tail = 0
    for k in range(kmax, kmin - 1, -1):
        nk = counts[k - offset]
        if nk == 0:
            continue
        tail += nk
        if math.isnan(kc) and tail > kc_thr:
            kc = float(k)
        if math.isnan(kd) and tail > kd_thr:
            kd = float(k)
        if not math.isnan(kc) and not math.isnan(kd):
            break
    records[r, COL_TIME] = time
    records[r, COL_MEAN] = kmin + rel_mean
    records[r, COL_C2] = c2 / n
    records[r, COL_C3] = c3 / n
    records[r, COL_C4] = c4 / n
    records[r, COL_KC] = kc
    records[r, COL_KD] = kd
    records[r, COL_KW] = float(kmax - kmin)
    records[r, COL_MIN] = float(kmin)
    records[r, COL_MAX] = float(kmax)


@njit(cache=True)
def sample_class(rng, counts, offset, kmin, kmax, pop_size):
    """Class of an individual drawn uniformly from the population"""
    u = rng.random() * pop_size
    acc = 0.0
    for k in range(kmin, kmax + 1):
        acc += counts[k - offset]
        if u < acc:
            return k
    return kmax


@njit(cache=True)
def selection_weight_total(counts, offset, kmin, kmax):
    """sum_k n_k (k C(k) - D(k)) = sum_{k>l} (k-l) n_k n_l"""
    below = 0
    below_weighted = 0
    total = 0
    for k in range(kmin, kmax + 1):
        nk = counts[k - offset]
        rel = k - kmin
        if nk > 0:
            total += nk * (rel * below - below_weighted)
        below += nk
        below_weighted += rel * nk
    return total


@njit(cache=True)
def sample_selection_pair(rng, counts, offset, kmin, kmax, weight_total):
    """(source, target) with source > target, drawn with weight (k-l) n_k n_l"""
    u = rng.random() * weight_total
    below = 0
    below_weighted = 0
    acc = 0.0
    source = kmax
    source_weight = 0
    for k in range(kmin, kmax + 1):
        nk = counts[k - offset]
        rel = k - kmin
        w = rel * below - below_weighted
        if nk > 0 and w > 0:
            # the last eligible class absorbs rounding at the top of the range
            source = k
            source_weight = w
            acc += nk * w
            if u < acc:
                break
        below += nk
        below_weighted += rel * nk
    v = rng.random() * source_weight
    acc = 0.0
    target = kmin
    for l in range(kmin, source):
        nl = counts[l - offset]
        if nl > 0:
            acc += (source - l) * nl
            if v < acc:
                target = l
                break
    return source, target


@njit(cache=True)
def run_class_level(
    rng, classes, occ, pop_size, mu, q, s, interval, n_records, budget,
    kc_thr, kd_thr, records, tallies,
):
    """
    Exact SSA on the class histogram

    Total rates: mutation mu N, resampling N (same-class draws are no-ops),
    selection (s/N) sum_{k>l} (k-l) n_k n_l. Row r of `records` receives the
    state held at time r * interval.
    """
    counts, offset, kmin, kmax = make_window(classes, occ)
    r_mut = mu * pop_size
    r_res = float(pop_size)
    sel_scale = s / pop_size
    t = 0.0
    r = 0
    events = 0
    status = STATUS_OK
    while True:
        weight_total = selection_weight_total(counts, offset, kmin, kmax)
        r_sel = sel_scale * weight_total
        total = r_mut + r_res + r_sel
        t_next = t + exponential_wait(rng, total)
        while r < n_records and r * interval < t_next:
            write_window_stats(
                records, r, r * interval, counts, offset, kmin, kmax, pop_size, kc_thr, kd_thr
            )
            r += 1
        if r >= n_records:
            break
        if events >= budget:
            status = STATUS_BUDGET
            break
        t = t_next
        events += 1
        u = rng.random() * total
        if u < r_mut:
            k = sample_class(rng, counts, offset, kmin, kmax, pop_size)
            if rng.random() < q:
                dest = k + 1
                tallies[TALLY_MUT_UP] += 1
            else:
                dest = k - 1
                tallies[TALLY_MUT_DOWN] += 1
            counts, offset, kmin, kmax = add_to_window(counts, offset, kmin, kmax, dest)
            kmin, kmax = remove_from_window(counts, offset, kmin, kmax, k)
        elif u < r_mut + r_res:
            src = sample_class(rng, counts, offset, kmin, kmax, pop_size)
            dst = sample_class(rng, counts, offset, kmin, kmax, pop_size)
            tallies[TALLY_RESAMPLING] += 1
            if src == dst:
                tallies[TALLY_RESAMPLING_NOOP] += 1
            else:
                counts, offset, kmin, kmax = add_to_window(counts, offset, kmin, kmax, src)
                kmin, kmax = remove_from_window(counts, offset, kmin, kmax, dst)
        else:
            src, dst = sample_selection_pair(rng, counts, offset, kmin, kmax, weight_total)
            tallies[TALLY_SELECTION] += 1
            counts, offset, kmin, kmax = add_to_window(counts, offset, kmin, kmax, src)
            kmin, kmax = remove_from_window(counts, offset, kmin, kmax, dst)
    out_classes = np.arange(kmin, kmax + 1).astype(np.int64)
    out_occ = counts[kmin - offset : kmax - offset + 1].copy()
    return status, events, t, out_classes, out_occ


@njit(cache=True)
def window_from_values(values):
    lo = values.min()
    hi = values.max()
    width = hi - lo + 1
    classes = np.arange(lo, hi + 1).astype(np.int64)
    occ = np.zeros(width, dtype=np.int64)
    for v in values:
        occ[v - lo] += 1
    return make_window(classes, occ)


@njit(cache=True)
def run_individual_level(
    rng, x, y, coupled, mu, q, s, interval, n_records, budget,
    kc_thr, kd_thr, records_x, records_y, tallies,
):
    """
    Exact simulation on the individual vector x (and shadow y when coupled)

    Mutation hits individual i at rate mu; ordered pair (i, j) resamples at
    rate 1/N with x[j] <- x[i]; selection is realised by thinning: pairs are
    proposed at total rate s k_w N and accepted with probability
    (x[i] - x[j])^+ / k_w. In coupled mode y receives the same mutation and
    resampling events and no selection. Returns STATUS_DOMINATION as soon
    as y[j] > x[j] for the individual just updated.
    """
    n = x.size
    hx, ox, xmin, xmax = window_from_values(x)
    hy, oy, ymin, ymax = window_from_values(y)
    r_mut = mu * n
    r_res = float(n)
    t = 0.0
    r = 0
    events = 0
    status = STATUS_OK
    bad = -1
    while True:
        kw = xmax - xmin
        r_prop = s * kw * n
        total = r_mut + r_res + r_prop
        t_next = t + exponential_wait(rng, total)
        while r < n_records and r * interval < t_next:
            write_window_stats(records_x, r, r * interval, hx, ox, xmin, xmax, n, kc_thr, kd_thr)
            if coupled:
                write_window_stats(records_y, r, r * interval, hy, oy, ymin, ymax, n, kc_thr, kd_thr)
            r += 1
        if r >= n_records:
            break
        if events >= budget:
            status = STATUS_BUDGET
            break
        t = t_next
        events += 1
        u = rng.random() * total
        if u < r_mut:
            i = min(int(rng.random() * n), n - 1)
            step = 1 if rng.random() < q else -1
            if step > 0:
                tallies[TALLY_MUT_UP] += 1
            else:
                tallies[TALLY_MUT_DOWN] += 1
            old = x[i]
            x[i] = old + step
            hx, ox, xmin, xmax = add_to_window(hx, ox, xmin, xmax, x[i])
            xmin, xmax = remove_from_window(hx, ox, xmin, xmax, old)
            if coupled:
                old = y[i]
                y[i] = old + step
                hy, oy, ymin, ymax = add_to_window(hy, oy, ymin, ymax, y[i])
                ymin, ymax = remove_from_window(hy, oy, ymin, ymax, old)
            j = i
        elif u < r_mut + r_res:
            i = min(int(rng.random() * n), n - 1)
            j = min(int(rng.random() * n), n - 1)
            tallies[TALLY_RESAMPLING] += 1
            if x[i] == x[j] and (not coupled or y[i] == y[j]):
                tallies[TALLY_RESAMPLING_NOOP] += 1
            if x[i] != x[j]:
                old = x[j]
                x[j] = x[i]
                hx, ox, xmin, xmax = add_to_window(hx, ox, xmin, xmax, x[j])
                xmin, xmax = remove_from_window(hx, ox, xmin, xmax, old)
            if coupled and y[i] != y[j]:
                old = y[j]
                y[j] = y[i]
                hy, oy, ymin, ymax = add_to_window(hy, oy, ymin, ymax, y[j])
                ymin, ymax = remove_from_window(hy, oy, ymin, ymax, old)
        else:
            i = min(int(rng.random() * n), n - 1)
            j = min(int(rng.random() * n), n - 1)
            tallies[TALLY_PROPOSALS] += 1
            diff = x[i] - x[j]
            if diff > 0 and rng.random() * kw < diff:
                tallies[TALLY_SELECTION] += 1
                old = x[j]
                x[j] = x[i]
                hx, ox, xmin, xmax = add_to_window(hx, ox, xmin, xmax, x[j])
                xmin, xmax = remove_from_window(hx, ox, xmin, xmax, old)
        if coupled and y[j] > x[j]:
            status = STATUS_DOMINATION
            bad = j
            break
    return status, events, t, bad


@njit(cache=True)
def birth_death_terminal_counts(rng, a, b, z0, horizon, out, budget):
    """Fill `out` with independent draws of Z(horizon); returns total events or -1 on budget"""
    events = 0
    for rep in range(out.size):
        z = z0
        t = 0.0
        while z > 0:
            rate = (a + b) * z
            if rate <= 0.0:
                break
            t += exponential_wait(rng, rate)
            if t > horizon:
                break
            if events >= budget:
                return -1
            events += 1
            if rng.random() * (a + b) < a:
                z += 1
            else:
                z -= 1
        out[rep] = z
    return events
