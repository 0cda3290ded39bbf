"""Reference constants, predicted main terms, and empirical-vs-predicted reports.

Every statistic the moment engine can measure has exactly one predicted main
term here.  Infinite products over primes = 3 (mod 4) are truncated with an
explicit tail bound (sum of p^-2 beyond the cutoff is below 1/(cutoff-1)),
so no constant is ever invented.  Fitted constants are produced only by
calibrate() and stored in a text constants file that verification replays.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import moments
from .arith import prime_recip_sum
from .moments import segment_profile
from .repfun import RepFamily

DEFAULT_LANDAU_CUTOFF = 10**6

GSS_FAMILIES = (RepFamily.R1, RepFamily.RBIG_STAR, RepFamily.RPRIME_STAR)


@dataclass(frozen=True)
class Statistic:
    """One named statistic with optional shape parameters (ell, k)."""

    id: str
    ell: int = None
    k: int = None


@dataclass(frozen=True)
class RatioReport:
    statistic: str
    x: int
    empirical: float
    predicted: float
    ratio: float
    residual: float


# ---------------------------------------------------------------------------
# The Landau-Ramanujan product and derived constants
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def landau_ramanujan(cutoff):
    """Partial value of (2 prod_{p=3 mod 4} (1 - p^-2))^(-1/2) and a tail bound.

    tail_bound dominates |log(true/partial)| since the missing factors
    contribute at most sum_{p > cutoff} p^-2 < 1/(cutoff - 1) to the log.
    """
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    sieve = np.ones(cutoff + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(cutoff) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    primes = np.nonzero(sieve)[0]
    p3 = primes[primes % 4 == 3].astype(np.float64)
    log_prod = float(np.log1p(-1.0 / (p3 * p3)).sum())
    value = math.exp(-0.5 * (math.log(2.0) + log_prod))
    return value, 1.0 / (cutoff - 1)


def _landau_value(cutoff):
    return landau_ramanujan(cutoff)[0]


def _three_mod4_square_product(cutoff):
    """prod_{p = 3 mod 4} (1 - p^-2), via the cached Landau value."""
    k = _landau_value(cutoff)
    return 1.0 / (2.0 * k * k)


# ---------------------------------------------------------------------------
# Predicted main terms
# ---------------------------------------------------------------------------

def predicted_main(stat, x, constants=None, cutoff=DEFAULT_LANDAU_CUTOFF):
    """Closed-form main term for a statistic at cutoff x.

    The floor on x is per formula: 1 for the linear main term, 2 once a
    log x appears downstairs, 3 once log log x does.
    """
    sid = stat.id if isinstance(stat, Statistic) else stat
    floor = 1 if sid == "r0_first" else 3 if sid in ("gss_shape", "rR_shape") else 2
    if x < floor:
        raise ValueError(f"statistic {sid!r} needs x >= {floor}, got {x}")
    logx = math.log(x)
    if sid == "r0_first":
        return math.pi / 4 * x
    if sid == "r0_second":
        if not constants or "H" not in constants:
            raise ValueError("r0_second needs the calibrated constant H")
        return x * logx / 4 + constants["H"] * x
    if sid == "r1_first":
        return math.pi / 2 * x / logx
    if sid == "r2_first":
        return math.pi * x / logx**2
    if sid == "r1_binom2":
        return 9.0 / 8.0 * x / logx
    if sid == "r1_second":
        return (math.pi / 2 + 9.0 / 4.0) * x / logx
    if sid == "M0":
        return _landau_value(cutoff) * x / math.sqrt(logx)
    if sid == "M2":
        return math.pi / 2 * x / logx**2
    if sid == "M0star":
        # The counting function of the multiplicative set behind M0* has
        # Dirichlet-series square zeta * L * (1 - 2^-s) * prod(1 - p^-2s),
        # so the squared residue at s = 1 is (pi/4) * (1/2) * prod, and the
        # Tauberian main term is (3/4) sqrt(prod/2) x / sqrt(log x).
        return 0.75 * math.sqrt(_three_mod4_square_product(cutoff) / 2.0) \
            * x / math.sqrt(logx)
    if sid == "rR_first":
        c = math.pi / 4 * math.sqrt(2.0) * _landau_value(cutoff)
        return c * x / math.sqrt(logx)
    if sid == "rRprime_first":
        # (pi/4) * sqrt(2) * (M0* constant): same transform as rR_first
        c = 3 * math.pi / 16 * math.sqrt(_three_mod4_square_product(cutoff))
        return c * x / math.sqrt(logx)
    if sid in ("gss_shape", "rR_shape"):
        ell, k = stat.ell, stat.k
        big_l = math.log(logx)
        denom = logx if sid == "gss_shape" else math.sqrt(logx)
        return x * (2 ** (ell - 1) * big_l) ** k \
            / (math.factorial(k) * denom ** (ell + 1))
    raise ValueError(f"unknown statistic {sid!r}")


_EMPIRICAL = {
    # id -> (family, mode, index)
    "r0_first": (RepFamily.R0, "power", 1),
    "r0_second": (RepFamily.R0, "power", 2),
    "r1_first": (RepFamily.R1, "power", 1),
    "r2_first": (RepFamily.R2, "power", 1),
    "r1_binom2": (RepFamily.R1, "binomial", 2),
    "r1_second": (RepFamily.R1, "power", 2),
    "M0": (RepFamily.R0, "zeroth", None),
    "M2": (RepFamily.R2, "zeroth", None),
    "M0star": (RepFamily.R0_STAR, "zeroth", None),
    "rR_first": (RepFamily.RBIG, "power", 1),
    "rRprime_first": (RepFamily.RPRIME, "power", 1),
}


def empirical_grid(stat, xs, table, segment_size=moments.DEFAULT_SEGMENT_SIZE,
                   workers=1):
    """Exact empirical values of a statistic at each x, one engine sweep."""
    sid = stat.id if isinstance(stat, Statistic) else stat
    kw = dict(segment_size=segment_size, workers=workers)
    if sid in ("gss_shape", "rR_shape"):
        fam = RepFamily.R1 if sid == "gss_shape" else RepFamily.RBIG_STAR
        return moments.binomial_moment_grid(
            fam, xs, stat.ell, table,
            omega_filter=("omega_star", stat.k), **kw)
    if sid not in _EMPIRICAL:
        raise ValueError(f"unknown statistic {sid!r}")
    family, mode, idx = _EMPIRICAL[sid]
    if mode == "power":
        return moments.power_moment_grid(family, xs, idx, table, **kw)
    if mode == "binomial":
        return moments.binomial_moment_grid(family, xs, idx, table, **kw)
    return moments.zeroth_moment_grid(family, xs, table, **kw)


def ratio_report(stat, xs, table, constants=None,
                 cutoff=DEFAULT_LANDAU_CUTOFF,
                 segment_size=moments.DEFAULT_SEGMENT_SIZE, workers=1):
    """Empirical vs predicted rows for each x (ascending)."""
    xs = sorted(int(x) for x in xs)
    sid = stat.id if isinstance(stat, Statistic) else stat
    values = empirical_grid(stat, xs, table, segment_size=segment_size,
                            workers=workers)
    rows = []
    for x, emp in zip(xs, values):
        pred = predicted_main(stat, x, constants=constants, cutoff=cutoff)
        ratio = emp / pred if pred != 0 else math.inf
        rows.append(RatioReport(sid, x, float(emp), pred, ratio,
                                float(emp) - pred))
    return rows


def fit_secondary_constant(xs, table, segment_size=moments.DEFAULT_SEGMENT_SIZE,
                           workers=1):
    """Per-point estimates of the r0 second-moment constant H, plus spread."""
    xs = sorted(int(x) for x in xs)
    if len(xs) < 1:
        raise ValueError("need at least one grid point")
    m2 = moments.power_moment_grid(RepFamily.R0, xs, 2, table,
                                   segment_size=segment_size, workers=workers)
    ests = [(v - x * math.log(x) / 4) / x for x, v in zip(xs, m2)]
    tail = ests[len(ests) // 2:]
    return ests, max(tail) - min(tail)


# ---------------------------------------------------------------------------
# Mertens constants, the prime-power claim sum, and the argmax rule
# ---------------------------------------------------------------------------

def mertens_ap_constant(a, x, table=None):
    """Estimate of the Mertens constant M(4, a): recip sum minus (log log x)/2."""
    if a not in (1, 3):
        raise ValueError("a must be 1 or 3")
    if x < 3:
        raise ValueError("x must be >= 3 (log log x must be defined)")
    return prime_recip_sum(x, a, table) - 0.5 * math.log(math.log(x))


def argmax_k(l_value, l=1):
    """Smallest k maximizing (2^(l-1) L)^k / k!; ties broken downward."""
    if l_value <= 0 or l < 1:
        raise ValueError("need L > 0 and l >= 1")
    b = 2 ** (l - 1) * l_value
    return max(math.ceil(b) - 1, 0)


def inductive_claim_sum(x, table):
    """Sum of x/(q log(x/q)) over prime powers q <= sqrt(x), base p = 1 mod 4."""
    if x < 16:
        raise ValueError("x must be >= 16")
    root = math.isqrt(x)
    idx = int(np.searchsorted(table.primes, root, side="right"))
    total = 0.0
    for p in table.primes[:idx]:
        p = int(p)
        if p % 4 != 1:
            continue
        q = p
        while q <= root:
            total += x / (q * math.log(x / q))
            q *= p
    return total


# ---------------------------------------------------------------------------
# Profile-driven sums (smooth/squarefull, shape ratios, tau growth)
# ---------------------------------------------------------------------------

def _profile_segments(x, table, segment_size):
    lo = 1
    while lo <= x:
        hi = min(lo + segment_size, x + 1)
        yield segment_profile(lo, hi, table.primes)
        lo = hi


def smooth_squarefull_rstar_sum(x, m, table,
                                segment_size=moments.DEFAULT_SEGMENT_SIZE):
    """Exact sum of r0*(n)^m over n <= x that are z-smooth or squarefull-topped.

    z = x^(1/log log x); the condition is P(n) <= z or P(n)^2 | n, read off
    a segmented factorization pass.
    """
    if x < 16:
        raise ValueError("x must be >= 16")
    if m < 1:
        raise ValueError("m must be >= 1")
    z = x ** (1.0 / math.log(math.log(x)))
    hist = None
    for prof in _profile_segments(x, table, segment_size):
        cond = (prof.lpf <= z) | prof.lpf_sq
        vals = prof.r0_star_values()[cond]
        h = np.bincount(vals)
        hist = h if hist is None else moments._pad_add(hist, h)
    return sum(int(c) * v**m for v, c in enumerate(hist) if c)


def gss_shape_ratio(x, l, k, family, table,
                    segment_size=moments.DEFAULT_SEGMENT_SIZE, workers=1):
    """Dimensionless ratio of a filtered binomial moment to its shape term.

    B * D^(l+1) * k! / (x * (2^(l-1) L)^k) with D = log x for the prime
    family and sqrt(log x) for the sum-of-two-squares families; 0 when the
    filtered sum is empty.
    """
    if family not in GSS_FAMILIES:
        raise ValueError("family must be one of r1, rrstar, rrprimestar")
    if x < 3 or k < 0 or l < 1:
        raise ValueError("need x >= 3, k >= 0, l >= 1")
    b = moments.binomial_moment(family, x, l, table,
                                omega_filter=("omega_star", k),
                                segment_size=segment_size, workers=workers)
    return _shape_ratio_from_value(b, x, l, k, family)


def _shape_ratio_from_value(b, x, l, k, family):
    if b == 0:
        return 0.0
    logx = math.log(x)
    big_l = math.log(logx)
    d = logx if family is RepFamily.R1 else math.sqrt(logx)
    return float(b) * d ** (l + 1) * math.factorial(k) \
        / (x * (2 ** (l - 1) * big_l) ** k)


def gss_shape_ratios_grid(family, xs, table, ells=(1, 2), kmax=8,
                          segment_size=moments.DEFAULT_SEGMENT_SIZE,
                          workers=1):
    """All shape ratios for one family over a grid, one engine sweep.

    Returns {(x, ell, k): ratio}.
    """
    xs = sorted(int(x) for x in xs)
    hists = moments.histogram_grid(family, xs, table, omega_kind="omega_star",
                                   segment_size=segment_size, workers=workers)
    out = {}
    for x, hist in zip(xs, hists):
        for ell in ells:
            for k in range(kmax + 1):
                row = hist[k] if k < hist.shape[0] else ()
                b = sum(int(c) * math.comb(v, ell)
                        for v, c in enumerate(row) if c)
                out[(x, ell, k)] = _shape_ratio_from_value(b, x, ell, k, family)
    return out


def tau_growth_max(lo, hi, table):
    """max over lo <= n <= hi of log(tau(n)) log log n / (log n log 2)."""
    from .arith import factor, tau

    best = 0.0
    for n in range(lo, hi + 1):
        t = tau(factor(n, table))
        val = math.log(t) * math.log(math.log(n)) / (math.log(n) * math.log(2))
        if val > best:
            best = val
    return best


# ---------------------------------------------------------------------------
# Constants file: one "key = value # provenance" line each
# ---------------------------------------------------------------------------

def write_constants(path, values, provenance):
    lines = []
    for key in sorted(values):
        note = provenance.get(key, "")
        lines.append(f"{key} = {values[key]:.12g} # {note}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_constants(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = float(value)
    return out


def calibrate(table, grid_max=10**7, segment_size=moments.DEFAULT_SEGMENT_SIZE,
              workers=1, cutoff=DEFAULT_LANDAU_CUTOFF):
    """Compute the fitted constants (C, gamma1, gamma2, H, gss_bound).

    Every constant is the max (or fit) over its deterministic grid, so a
    replay of the same grids reproduces the file bit for bit.  The
    truncated Landau product at `cutoff` is recorded alongside, with its
    tail bound in the provenance comment.
    """
    def decades(lo):
        xs, x = [], lo
        while x <= grid_max:
            xs.append(x)
            x *= 10
        return xs

    values, notes = {}, {}

    xs_c = decades(10**3)
    r1 = moments.power_moment_grid(RepFamily.R1, xs_c, 1, table,
                                   segment_size=segment_size, workers=workers)
    r1s = moments.power_moment_grid(RepFamily.R1_STAR, xs_c, 1, table,
                                    segment_size=segment_size, workers=workers)
    gaps = [(a - b) / (math.sqrt(x) * math.log(math.log(x)))
            for x, a, b in zip(xs_c, r1, r1s)]
    values["C"] = max(gaps)
    notes["C"] = ("max of sum(r1 - r1*) / (sqrt(x) log log x) over x in "
                  f"{xs_c}")

    xs_g2 = decades(10**2)
    g2 = [inductive_claim_sum(x, table) * math.log(x) / x
          - 0.5 * math.log(math.log(x)) for x in xs_g2]
    values["gamma2"] = max(g2)
    notes["gamma2"] = ("max of claim-sum * log x / x - L/2 over x in "
                       f"{xs_g2}")

    xs_rho = decades(10**3)
    rho_hists = moments.rho_kN_grid(xs_rho, table, segment_size=segment_size,
                                    workers=workers)
    g1 = 0.0
    for x, hist in zip(xs_rho, rho_hists):
        for k in range(1, 9):
            rho = int(hist[k]) if k < len(hist) else 0
            bound_core = (x / math.log(x)
                          * (0.5 * math.log(math.log(x)) + values["gamma2"])
                          ** (k - 1) / math.factorial(k - 1))
            g1 = max(g1, rho / bound_core)
    values["gamma1"] = g1
    notes["gamma1"] = f"max of rho_kN / bound core over x in {xs_rho}, k <= 8"

    xs_h = [x for x in range(2 * 10**5, 10**6 + 1, 2 * 10**5)]
    ests, _ = fit_secondary_constant(xs_h, table, segment_size=segment_size,
                                     workers=workers)
    tail = ests[len(ests) // 2:]
    values["H"] = sum(tail) / len(tail)
    notes["H"] = f"mean of (m2 - x log x / 4)/x over the last half of {xs_h}"

    xs_gss = decades(10**4)
    best = 0.0
    for family in GSS_FAMILIES:
        ratios = gss_shape_ratios_grid(family, xs_gss, table,
                                       segment_size=segment_size,
                                       workers=workers)
        best = max(best, max(ratios.values()))
    values["gss_bound"] = best
    notes["gss_bound"] = ("max shape ratio over families r1/rrstar/"
                          f"rrprimestar, x in {xs_gss}, ell in (1, 2), k <= 8")

    k_val, k_tail = landau_ramanujan(cutoff)
    values["landau_K"] = k_val
    notes["landau_K"] = (f"truncated product over p = 3 mod 4 up to {cutoff}; "
                         f"|log(true/partial)| <= {k_tail:.3g}")
    return values, notes
