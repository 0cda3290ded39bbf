"""Prime generation, factorization, and classical arithmetic functions.

Everything downstream (representation counts, the moment engine, the sieve)
consumes the PrimeTable built here.  Tables are immutable after construction
and safe to share across workers; all operations are pure given the table.
All logarithms are natural.
"""

import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import CapacityError

# Hard cap on sieve size: a table beyond this would need >2.5 GB for the
# spf array alone.  Raise CapacityError instead of thrashing.
LIMIT_CAP = 2_000_000_000

# Default cap on the smallest-prime-factor table (entries, i.e. max n).
# Beyond it, factor() falls back to trial division by tabulated primes.
SPF_CAP = 100_000_000

CACHE_MAGIC = b"RNPK"
CACHE_VERSION = 1


@dataclass(frozen=True)
class Factorization:
    """n together with its prime-power decomposition, primes ascending."""

    n: int
    factors: tuple  # ((p, e), ...) with e >= 1; empty iff n == 1


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, plus a smallest-prime-factor array.

    spf[k] is the smallest prime factor of k for 2 <= k <= spf_limit
    (spf[0] = 0, spf[1] = 1).  spf_limit = min(limit, spf_cap).
    """

    limit: int
    primes: np.ndarray
    spf: np.ndarray = field(repr=False)
    spf_limit: int

    def is_prime(self, n):
        """Primality for 1 <= n <= limit**2 using the table."""
        if n < 2:
            return False
        if n <= self.spf_limit:
            return self.spf[n] == n
        if n <= self.limit:
            i = int(np.searchsorted(self.primes, n))
            return i < len(self.primes) and int(self.primes[i]) == n
        if n <= self.limit * self.limit:
            for p in self.primes:
                p = int(p)
                if p * p > n:
                    return True
                if n % p == 0:
                    return False
            return True
        raise CapacityError(
            f"primality of {n} not covered by table with limit {self.limit} "
            f"(guarantee is limit**2 = {self.limit**2})")


def _bool_sieve(limit):
    """Boolean primality array for 0..limit."""
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return sieve


def _spf_sieve(n):
    """Smallest-prime-factor array for 0..n (spf[0]=0, spf[1]=1)."""
    spf = np.zeros(n + 1, dtype=np.uint32)
    if n >= 1:
        spf[1] = 1
    if n >= 2:
        spf[2::2] = 2
    for p in range(3, math.isqrt(n) + 1, 2):
        if spf[p] == 0:
            sl = spf[p * p :: 2 * p]
            sl[sl == 0] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    return spf


def prime_table(limit, spf_cap=SPF_CAP):
    """Sieve all primes <= limit and the spf array up to min(limit, spf_cap)."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if limit > LIMIT_CAP:
        raise CapacityError(
            f"limit {limit} exceeds prime table cap LIMIT_CAP = {LIMIT_CAP}")
    spf_limit = min(limit, spf_cap)
    spf = _spf_sieve(spf_limit)
    if spf_limit == limit:
        primes = np.nonzero(spf[2:] == np.arange(2, limit + 1, dtype=np.uint32))[0] + 2
        primes = primes.astype(np.int64)
    else:
        primes = np.nonzero(_bool_sieve(limit))[0].astype(np.int64)
    return PrimeTable(limit=limit, primes=primes, spf=spf, spf_limit=spf_limit)


def factor(n, table):
    """Factorization of n, valid for 1 <= n <= table.limit**2."""
    if n < 1:
        raise ValueError(f"factor requires n >= 1, got {n}")
    if n == 1:
        return Factorization(1, ())
    out = []
    if n <= table.spf_limit:
        m = n
        spf = table.spf
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        return Factorization(n, tuple(out))
    if n > table.limit * table.limit:
        raise CapacityError(
            f"factor({n}) beyond guarantee limit**2 = {table.limit**2}; "
            f"build a larger table")
    m = n
    for p in table.primes:
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return Factorization(n, tuple(out))


# ---------------------------------------------------------------------------
# Classical arithmetic functions (exact; Lambda returns a natural log)
# ---------------------------------------------------------------------------

def tau(fact):
    """Number of divisors."""
    out = 1
    for _, e in fact.factors:
        out *= e + 1
    return out


def mobius(fact):
    """Mobius mu: 0 unless squarefree, else (-1)^(number of primes)."""
    for _, e in fact.factors:
        if e > 1:
            return 0
    return -1 if len(fact.factors) % 2 else 1


def omega(fact):
    """Number of distinct prime factors."""
    return len(fact.factors)


def omega_star(fact):
    """Number of distinct odd prime factors (exponents ignored)."""
    return sum(1 for p, _ in fact.factors if p != 2)


def largest_prime_factor(fact):
    """P(n), defined for n >= 2."""
    if not fact.factors:
        raise ValueError("largest_prime_factor undefined for n = 1")
    return fact.factors[-1][0]


def chi4(n):
    """Non-principal Dirichlet character mod 4: 0 on evens, +1/-1 on 4k+-1."""
    if n % 2 == 0:
        return 0
    return 1 if n % 4 == 1 else -1


def von_mangoldt(fact):
    """Lambda(n): log p if n is a prime power p^k, else 0."""
    if len(fact.factors) == 1:
        return math.log(fact.factors[0][0])
    return 0.0


def theta_indicator(fact):
    """Summand of Chebyshev theta: log n if n is prime, else 0."""
    if len(fact.factors) == 1 and fact.factors[0][1] == 1:
        return math.log(fact.n)
    return 0.0


_DISPATCH = {
    "tau": lambda f: tau(f),
    "mu": lambda f: mobius(f),
    "omega": lambda f: omega(f),
    "omega_star": lambda f: omega_star(f),
    "largest_prime_factor": lambda f: largest_prime_factor(f),
    "chi4": lambda f: chi4(f.n),
    "von_mangoldt": lambda f: von_mangoldt(f),
    "theta_indicator": lambda f: theta_indicator(f),
}


def arithmetic_function(name, n, table):
    """Evaluate one of the named classical functions at n."""
    if name not in _DISPATCH:
        raise ValueError(f"unknown arithmetic function {name!r}")
    return _DISPATCH[name](factor(n, table))


# ---------------------------------------------------------------------------
# Prime counting / reciprocal sums / Chebyshev functions / Li
# ---------------------------------------------------------------------------

def _filtered_primes(x, residue_filter, table):
    if x > table.limit:
        raise CapacityError(
            f"x = {x} exceeds table limit {table.limit}")
    primes = table.primes[: int(np.searchsorted(table.primes, x, side="right"))]
    if residue_filter is None:
        return primes
    if residue_filter not in (1, 3):
        raise ValueError("residue_filter must be None, 1 or 3 (mod 4)")
    return primes[primes % 4 == residue_filter]


def pi_count(x, residue_filter=None, table=None):
    """#{p <= x}, optionally restricted to p = residue_filter (mod 4)."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if x < 2:
        return 0
    if table is None:
        table = prime_table(x, spf_cap=0)
    return int(len(_filtered_primes(x, residue_filter, table)))


def prime_recip_sum(x, residue_filter=None, table=None):
    """Sum of 1/p over (filtered) primes <= x, accumulated smallest first."""
    if x < 2:
        raise ValueError("x must be >= 2")
    if table is None:
        table = prime_table(x, spf_cap=0)
    primes = _filtered_primes(x, residue_filter, table)
    # ascending accumulation keeps the float error well under 1e-12 relative
    return float(np.add.reduce(1.0 / primes.astype(np.float64)))


def chebyshev(kind, x, table=None):
    """Chebyshev psi(x) (prime powers) or theta(x) (primes), natural logs."""
    if kind not in ("psi", "theta"):
        raise ValueError(f"kind must be 'psi' or 'theta', got {kind!r}")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x < 2:
        return 0.0
    if table is None:
        table = prime_table(x, spf_cap=0)
    primes = _filtered_primes(x, None, table)
    total = float(np.log(primes.astype(np.float64)).sum())
    if kind == "theta":
        return total
    # proper prime powers p^k <= x need p <= sqrt(x)
    for p in primes:
        p = int(p)
        if p * p > x:
            break
        q = p * p
        while q <= x:
            total += math.log(p)
            q *= p
    return total


def log_integral(x):
    """Li(x) = integral of dt/log t from 2 to x, adaptive quadrature."""
    if x < 2:
        raise ValueError(f"log_integral requires x >= 2, got {x}")
    if x == 2:
        return 0.0
    val, err = quad(lambda t: 1.0 / math.log(t), 2.0, float(x),
                    epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


# ---------------------------------------------------------------------------
# Prime-table cache file
#
# Header: magic "RNPK", version u32 LE, limit u64 LE.
# Body: bitset over odd integers 3..limit (bit set <=> prime), LSB-first
# within each byte, padded to whole bytes.
# ---------------------------------------------------------------------------

def cache_dir():
    return os.environ.get("REPNUM_CACHE_DIR", "./.repnum-cache")


def cache_path(limit):
    return os.path.join(cache_dir(), f"primes-{limit}.rnpk")


def write_prime_cache(table, path=None):
    """Serialize the table's primality bitset; returns the path written."""
    if path is None:
        path = cache_path(table.limit)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    n_odd = max((table.limit - 1) // 2, 0)  # odds 3, 5, ..., up to limit
    bits = np.zeros(n_odd, dtype=bool)
    odd_primes = table.primes[table.primes >= 3]
    bits[(odd_primes - 3) // 2] = True
    body = np.packbits(bits, bitorder="little").tobytes()
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", CACHE_VERSION))
        fh.write(struct.pack("<Q", table.limit))
        fh.write(body)
    return path


def read_prime_cache(path, spf_cap=SPF_CAP):
    """Rebuild a PrimeTable from a cache file written by write_prime_cache."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CACHE_MAGIC:
            raise ValueError(f"bad cache magic {magic!r} in {path}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        (limit,) = struct.unpack("<Q", fh.read(8))
        body = np.frombuffer(fh.read(), dtype=np.uint8)
    n_odd = max((limit - 1) // 2, 0)
    bits = np.unpackbits(body, bitorder="little", count=n_odd).astype(bool)
    odd_primes = 3 + 2 * np.nonzero(bits)[0].astype(np.int64)
    if limit >= 2:
        primes = np.concatenate(([2], odd_primes))
    else:
        primes = odd_primes
    spf_limit = min(limit, spf_cap)
    spf = _spf_sieve(spf_limit)
    return PrimeTable(limit=int(limit), primes=primes, spf=spf,
                      spf_limit=int(spf_limit))


def cached_prime_table(limit, spf_cap=SPF_CAP):
    """prime_table() with read-through caching under REPNUM_CACHE_DIR."""
    path = cache_path(limit)
    if os.path.exists(path):
        return read_prime_cache(path, spf_cap=spf_cap)
    table = prime_table(limit, spf_cap=spf_cap)
    write_prime_cache(table, path)
    return table
