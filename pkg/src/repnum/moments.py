"""Segmented bulk computation of representation-count moments.

The heavy lifting happens in per-segment kernels: a bucket pass that
generates lattice pairs (a, b) with lo <= a^2 + b^2 < hi and increments
per-n counters, and a factorization pass that sieves omega-style statistics
over the same window.  Segments reduce to histograms of exact integers, so
results are independent of segment size and worker schedule by construction
(integer addition is associative and commutative).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import repfun
from .errors import CapacityError
from .repfun import RepFamily

DEFAULT_SEGMENT_SIZE = 1 << 20
MAX_X = 10**9          # desk-scale budget for the segment engine
MAX_POWER = 8
MAX_BINOMIAL = 8
_COUNTER_MAX = (1 << 32) - 1
_FLUSH_PAIRS = 1 << 22


@dataclass(frozen=True)
class CountSegment:
    """Per-n representation counts over the half-open range [lo, hi)."""

    lo: int
    hi: int
    family: RepFamily
    counts: np.ndarray  # uint32, indexed by n - lo

    def extend(self, other):
        """Concatenate with an adjacent segment for the same family."""
        if other.family is not self.family or other.lo != self.hi:
            raise ValueError("segments must be adjacent and share a family")
        return CountSegment(self.lo, other.hi, self.family,
                            np.concatenate([self.counts, other.counts]))


@dataclass(frozen=True)
class MomentQuery:
    """One bulk-moment request: family, cutoff, mode, optional omega filter."""

    family: RepFamily
    x: int
    mode: str              # 'power' | 'binomial' | 'zeroth'
    k: int = 1             # exponent (power) or lower index (binomial)
    omega_filter: tuple = None  # (kind, value); kind in {'omega', 'omega_star'}


# ---------------------------------------------------------------------------
# Segment kernels
# ---------------------------------------------------------------------------

def _segment_counts(lo, hi, traits, bvals, primes):
    """Counts of family pairs per n in [lo, hi), as int64."""
    size = hi - lo
    counts = np.zeros(size, dtype=np.int64)
    bmax = math.isqrt(hi - 1)
    buf, pending = [], 0

    def flush():
        nonlocal buf, pending
        if buf:
            idx = buf[0] if len(buf) == 1 else np.concatenate(buf)
            np.add(counts, np.bincount(idx, minlength=size), out=counts)
            buf, pending = [], 0

    for b in bvals:
        b = int(b)
        if b > bmax:
            break
        bb = b * b
        a_hi = math.isqrt(hi - 1 - bb)
        t = lo - bb
        a_lo = 0 if t <= 0 else math.isqrt(t - 1) + 1
        if traits.unordered:
            a_hi = min(a_hi, b - 1)
        if a_lo > a_hi:
            continue
        if traits.first_prime:
            i0 = int(np.searchsorted(primes, a_lo, side="left"))
            i1 = int(np.searchsorted(primes, a_hi, side="right"))
            a = primes[i0:i1].astype(np.int64)
        else:
            a = np.arange(a_lo, a_hi + 1, dtype=np.int64)
        if traits.distinct:
            a = a[a != b]
        if traits.coprime:
            a = a[np.gcd(a, b) == 1]
        if len(a) == 0:
            continue
        buf.append(a * a + (bb - lo))
        pending += len(a)
        if pending >= _FLUSH_PAIRS:
            flush()
    flush()
    return counts


def _window_primes(primes, lo, hi):
    """Sieving primes for the window: p <= max(isqrt(hi-1), 2) when hi > 2."""
    pmax = math.isqrt(hi - 1)
    if hi > 2:
        pmax = max(pmax, 2)
    cut = int(np.searchsorted(primes, pmax, side="right"))
    return [int(p) for p in primes[:cut]]


def _segment_omega(lo, hi, primes, kind):
    """omega(n) or omega_star(n) for n in [lo, hi), as uint8."""
    size = hi - lo
    om = np.zeros(size, dtype=np.uint8)
    rem = np.arange(lo, hi, dtype=np.int64)
    for p in _window_primes(primes, lo, hi):
        start = -lo % p
        if kind == "omega" or p != 2:
            om[start::p] += 1
        q = p
        while q <= hi - 1:
            rem[-lo % q::q] //= p
            q *= p
    left = rem > 1
    if kind == "omega":
        om[left] += 1
    else:
        om[left & (rem & 1 == 1)] += 1
    return om


@dataclass(frozen=True)
class SegmentProfile:
    """Factorization statistics for n in [lo, hi), one entry per n."""

    lo: int
    hi: int
    omega: np.ndarray       # distinct primes
    omega_star: np.ndarray  # distinct odd primes
    n1mod4: np.ndarray      # distinct primes = 1 (mod 4)
    has3: np.ndarray        # divisible by some prime = 3 (mod 4)
    v2: np.ndarray          # exponent of 2, capped at 2
    lpf: np.ndarray         # largest prime factor (0 for n = 1)
    lpf_sq: np.ndarray      # P(n)^2 | n

    def r0_star_values(self):
        return np.where(self.has3 | (self.v2 >= 2), 0,
                        np.left_shift(1, self.n1mod4.astype(np.int64)))

    def in_nn(self):
        """Membership in the set with no 3-mod-4 prime factors and 4 not dividing n."""
        return ~self.has3 & (self.v2 <= 1)


def segment_profile(lo, hi, primes):
    size = hi - lo
    omega = np.zeros(size, dtype=np.uint8)
    omega_star = np.zeros(size, dtype=np.uint8)
    n1mod4 = np.zeros(size, dtype=np.uint8)
    has3 = np.zeros(size, dtype=bool)
    v2 = np.zeros(size, dtype=np.uint8)
    lpf = np.zeros(size, dtype=np.int64)
    lpf_sq = np.zeros(size, dtype=bool)
    rem = np.arange(lo, hi, dtype=np.int64)
    for p in _window_primes(primes, lo, hi):
        start = -lo % p
        sl = slice(start, None, p)
        omega[sl] += 1
        if p != 2:
            omega_star[sl] += 1
            if p % 4 == 1:
                n1mod4[sl] += 1
            else:
                has3[sl] = True
        else:
            v2[sl] = 1
            if 4 <= hi - 1:
                v2[-lo % 4::4] = 2
        lpf[sl] = p
        lpf_sq[sl] = False
        if p * p <= hi - 1:
            lpf_sq[-lo % (p * p)::p * p] = True
        q = p
        while q <= hi - 1:
            rem[-lo % q::q] //= p
            q *= p
    left = rem > 1  # leftover is a single odd prime > sqrt(hi-1); 2 was sieved
    omega[left] += 1
    omega_star[left] += 1
    n1mod4[left & (rem % 4 == 1)] += 1
    has3 |= rem % 4 == 3
    lpf[left] = rem[left]
    lpf_sq[left] = False
    return SegmentProfile(lo, hi, omega, omega_star, n1mod4, has3, v2,
                          lpf, lpf_sq)


# ---------------------------------------------------------------------------
# Histogram driver (single entry point for every moment kind)
# ---------------------------------------------------------------------------

_WORKER = {}


def _init_worker(state):
    _WORKER.clear()
    _WORKER.update(state)


def _run_segment(seg):
    lo, hi = seg
    mode = _WORKER["mode"]
    primes = _WORKER["primes"]
    if mode == "nn":
        prof = segment_profile(lo, hi, primes)
        return np.bincount(prof.omega_star[prof.in_nn()].astype(np.int64))
    counts = _segment_counts(lo, hi, _WORKER["traits"], _WORKER["bvals"],
                             primes)
    if counts.max(initial=0) > _COUNTER_MAX:
        raise RuntimeError("per-n counter exceeded 32 bits")  # unreachable
    kind = _WORKER["omega_kind"]
    if kind is None:
        return np.bincount(counts)
    om = _segment_omega(lo, hi, primes, kind)
    width = int(counts.max(initial=0)) + 1
    flat = np.bincount(om.astype(np.int64) * width + counts)
    rows = (len(flat) + width - 1) // width
    out = np.zeros(rows * width, dtype=np.int64)
    out[: len(flat)] = flat
    return out.reshape(rows, width)


def _pad_add(acc, h):
    if acc is None:
        return h.copy()
    if acc.ndim == 1:
        n = max(len(acc), len(h))
        out = np.zeros(n, dtype=np.int64)
        out[: len(acc)] += acc
        out[: len(h)] += h
        return out
    rows = max(acc.shape[0], h.shape[0])
    cols = max(acc.shape[1], h.shape[1])
    out = np.zeros((rows, cols), dtype=np.int64)
    out[: acc.shape[0], : acc.shape[1]] += acc
    out[: h.shape[0], : h.shape[1]] += h
    return out


def _plan_segments(xs, segment_size):
    cps = sorted(set(int(x) for x in xs))
    if cps[0] < 1:
        raise ValueError("moment cutoffs must be >= 1")
    top = cps[-1] + 1
    bounds = set(range(1, top, segment_size))
    bounds.update(c + 1 for c in cps)
    bounds.add(top)
    bounds = sorted(bounds)
    return cps, list(zip(bounds[:-1], bounds[1:]))


def _hist_sweep(state, xs, table, segment_size, workers):
    xmax = max(int(x) for x in xs)
    if xmax > MAX_X:
        raise CapacityError(f"x = {xmax} exceeds engine budget MAX_X = {MAX_X}")
    root = math.isqrt(xmax)
    if root > table.limit:
        raise CapacityError(
            f"x = {xmax} needs primes to {root} but table limit is {table.limit}")
    cps, segments = _plan_segments(xs, segment_size)
    snapshots = {}
    acc = None
    want = {c + 1 for c in cps}
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_init_worker,
                                 initargs=(state,)) as pool:
            results = pool.map(_run_segment, segments,
                               chunksize=max(1, len(segments) // (4 * workers)))
            for (lo, hi), h in zip(segments, results):
                acc = _pad_add(acc, h)
                if hi in want:
                    snapshots[hi - 1] = acc.copy()
    else:
        _init_worker(state)
        for seg in segments:
            acc = _pad_add(acc, _run_segment(seg))
            if seg[1] in want:
                snapshots[seg[1] - 1] = acc.copy()
    return [snapshots[int(x)] for x in xs]


def histogram_grid(family, xs, table, omega_kind=None,
                   segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """Cumulative count-histograms at each cutoff in xs.

    Returns one array per x: H[v] = #{n <= x : family(n) = v}, or with an
    omega kind, H[j, v] = #{n <= x : kind(n) = j, family(n) = v}.
    """
    if omega_kind not in (None, "omega", "omega_star"):
        raise ValueError(f"bad omega kind {omega_kind!r}")
    xmax = max(int(x) for x in xs)
    traits = family.traits
    bvals = repfun.base_values(traits.base, math.isqrt(xmax), table)
    state = {
        "mode": "family",
        "traits": traits,
        "bvals": bvals,
        "primes": table.primes,
        "omega_kind": omega_kind,
    }
    return _hist_sweep(state, xs, table, segment_size, workers)


def nn_omega_histograms(xs, table, segment_size=DEFAULT_SEGMENT_SIZE,
                        workers=1):
    """Per-cutoff histograms of omega_star over the 4-free, 3-mod-4-free set."""
    state = {"mode": "nn", "primes": table.primes}
    return _hist_sweep(state, xs, table, segment_size, workers)


# ---------------------------------------------------------------------------
# Public moment operations (exact integers throughout)
# ---------------------------------------------------------------------------

def accumulate_counts(family, lo, hi, table):
    """CountSegment for [lo, hi) via the bucket pass."""
    if not 1 <= lo < hi:
        raise ValueError("need 1 <= lo < hi")
    root = math.isqrt(hi - 1)
    if root > table.limit:
        raise CapacityError(
            f"range up to {hi - 1} needs primes to {root}, table limit "
            f"{table.limit}")
    traits = family.traits
    bvals = repfun.base_values(traits.base, root, table)
    counts = _segment_counts(lo, hi, traits, bvals, table.primes)
    if counts.max(initial=0) > _COUNTER_MAX:
        raise RuntimeError("per-n counter exceeded 32 bits")  # unreachable
    return CountSegment(lo, hi, family, counts.astype(np.uint32))


def _select_row(hist, omega_filter):
    if omega_filter is None:
        return hist if hist.ndim == 1 else hist.sum(axis=0)
    _, value = omega_filter
    if hist.ndim != 2:
        raise ValueError("histogram lacks the omega dimension")
    if value >= hist.shape[0]:
        return np.zeros(hist.shape[1], dtype=np.int64)
    return hist[value]


def _hists_for(family, xs, table, omega_filter, segment_size, workers):
    kind = omega_filter[0] if omega_filter else None
    if kind is not None and kind not in ("omega", "omega_star"):
        raise ValueError(f"bad omega filter kind {kind!r}")
    return histogram_grid(family, xs, table, omega_kind=kind,
                          segment_size=segment_size, workers=workers)


def power_moment_grid(family, xs, k, table, omega_filter=None,
                      segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """Exact sum of family(n)^k over n <= x, for each x in xs."""
    if not 0 <= k <= MAX_POWER:
        raise ValueError(f"power k must be in 0..{MAX_POWER}")
    hists = _hists_for(family, xs, table, omega_filter, segment_size, workers)
    out = []
    for h in hists:
        row = _select_row(h, omega_filter)
        out.append(sum(int(c) * v**k for v, c in enumerate(row) if c))
    return out


def binomial_moment_grid(family, xs, ell, table, omega_filter=None,
                         segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """Exact sum of C(family(n), ell) over n <= x, for each x in xs."""
    if not 0 <= ell <= MAX_BINOMIAL:
        raise ValueError(f"binomial ell must be in 0..{MAX_BINOMIAL}")
    hists = _hists_for(family, xs, table, omega_filter, segment_size, workers)
    out = []
    for h in hists:
        row = _select_row(h, omega_filter)
        out.append(sum(int(c) * math.comb(v, ell)
                       for v, c in enumerate(row) if c))
    return out


def zeroth_moment_grid(family, xs, table, omega_filter=None,
                       segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """#{n <= x : family(n) >= 1} for each x in xs."""
    hists = _hists_for(family, xs, table, omega_filter, segment_size, workers)
    out = []
    for h in hists:
        row = _select_row(h, omega_filter)
        out.append(sum(int(c) for v, c in enumerate(row) if v >= 1))
    return out


def power_moment(family, x, k, table, **kw):
    return power_moment_grid(family, [x], k, table, **kw)[0]


def binomial_moment(family, x, ell, table, **kw):
    return binomial_moment_grid(family, [x], ell, table, **kw)[0]


def zeroth_moment(family, x, table, **kw):
    return zeroth_moment_grid(family, [x], table, **kw)[0]


def evaluate(query, table, segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """Dispatch a MomentQuery to the matching moment function."""
    kw = dict(omega_filter=query.omega_filter, segment_size=segment_size,
              workers=workers)
    if query.mode == "power":
        return power_moment(query.family, query.x, query.k, table, **kw)
    if query.mode == "binomial":
        return binomial_moment(query.family, query.x, query.k, table, **kw)
    if query.mode == "zeroth":
        return zeroth_moment(query.family, query.x, table, **kw)
    raise ValueError(f"unknown moment mode {query.mode!r}")


# ---------------------------------------------------------------------------
# Stirling numbers and the power <-> binomial conversion
# ---------------------------------------------------------------------------

MAX_STIRLING = 64


@lru_cache(maxsize=None)
def stirling(k, l):
    """Stirling number of the second kind, exact, 0 <= l <= k <= 64."""
    if not (0 <= l <= k <= MAX_STIRLING):
        raise ValueError(f"need 0 <= l <= k <= {MAX_STIRLING}")
    if k == 0:
        return 1
    if l == 0:
        return 0
    if l == k:
        return 1
    return l * stirling(k - 1, l) + stirling(k - 1, l - 1)


def falling_factorial(x, l):
    """x (x-1) ... (x-l+1), exact for integer x."""
    out = 1
    for i in range(l):
        out *= x - i
    return out


def moment_identity_residual(family, x, k, table,
                             segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """power_moment minus its Stirling expansion in binomial moments; always 0."""
    if not 1 <= k <= 6:
        raise ValueError("identity checked for 1 <= k <= 6")
    hist = histogram_grid(family, [x], table, segment_size=segment_size,
                          workers=workers)[0]
    power = sum(int(c) * v**k for v, c in enumerate(hist) if c)
    expansion = 0
    for l in range(1, k + 1):
        binom = sum(int(c) * math.comb(v, l) for v, c in enumerate(hist) if c)
        expansion += stirling(k, l) * math.factorial(l) * binom
    return power - expansion


def rho_kN_grid(xs, table, segment_size=DEFAULT_SEGMENT_SIZE, workers=1):
    """Histograms h with h[k] = #{n <= x : n in the restricted set, omega_star = k}."""
    return nn_omega_histograms(xs, table, segment_size=segment_size,
                               workers=workers)


def rho_kN(x, k, table, **kw):
    """#{n <= x : 4 does not divide n, no 3-mod-4 prime divides n, omega_star = k}."""
    if x < 1 or k < 0:
        raise ValueError("need x >= 1 and k >= 0")
    h = rho_kN_grid([x], table, **kw)[0]
    return int(h[k]) if k < len(h) else 0
