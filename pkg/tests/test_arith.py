import math
import os
import random
import struct

import mpmath
import numpy as np
import pytest

from repnum import arith
from repnum.errors import CapacityError


def test_prime_table_small():
    t = arith.prime_table(10)
    assert t.primes.tolist() == [2, 3, 5, 7]
    assert arith.prime_table(1).primes.tolist() == []
    assert len(arith.prime_table(100).primes) == 25


def test_prime_table_invariants(table):
    primes = table.primes
    assert np.all(primes[1:] > primes[:-1])
    rng = random.Random(1)
    for p in rng.sample([int(q) for q in primes], 50):
        assert all(p % d for d in range(2, math.isqrt(p) + 1)), p
    # spf divides and nothing smaller does
    for n in rng.sample(range(2, table.spf_limit + 1), 200):
        p = int(table.spf[n])
        assert n % p == 0
        assert all(n % q for q in range(2, p))


def test_prime_table_caps():
    with pytest.raises(CapacityError, match="LIMIT_CAP"):
        arith.prime_table(arith.LIMIT_CAP + 1)
    with pytest.raises(ValueError):
        arith.prime_table(0)


def test_spf_cap_fallback():
    t = arith.prime_table(100, spf_cap=10)
    assert t.spf_limit == 10
    assert arith.factor(9991, t).factors == ((97, 1), (103, 1))


def test_factor(table):
    assert arith.factor(12, table).factors == ((2, 2), (3, 1))
    assert arith.factor(1, table).factors == ()
    assert arith.factor(9991, table).factors == ((97, 1), (103, 1))
    with pytest.raises(ValueError):
        arith.factor(0, table)
    with pytest.raises(CapacityError):
        arith.factor(table.limit**2 + 1, table)
    rng = random.Random(2)
    for n in [rng.randrange(1, 10**8) for _ in range(50)]:
        f = arith.factor(n, table)
        assert math.prod(p**e for p, e in f.factors) == n
        ps = [p for p, _ in f.factors]
        assert ps == sorted(ps) and len(set(ps)) == len(ps)


def test_arithmetic_functions(table):
    assert arith.arithmetic_function("tau", 12, table) == 6
    assert arith.arithmetic_function("chi4", 7, table) == -1
    assert arith.arithmetic_function("von_mangoldt", 8, table) == pytest.approx(math.log(2))
    assert arith.arithmetic_function("omega_star", 45, table) == 2
    assert arith.arithmetic_function("mu", 1, table) == 1
    assert arith.arithmetic_function("largest_prime_factor", 45, table) == 5
    assert arith.arithmetic_function("theta_indicator", 7, table) == pytest.approx(math.log(7))
    assert arith.arithmetic_function("theta_indicator", 8, table) == 0.0
    assert arith.arithmetic_function("omega", 45, table) == 2
    with pytest.raises(ValueError):
        arith.largest_prime_factor(arith.factor(1, table))
    with pytest.raises(ValueError):
        arith.arithmetic_function("phi", 10, table)


def test_chi4_periodicity():
    for n in range(1, 200):
        expected = 0 if n % 2 == 0 else (1 if n % 4 == 1 else -1)
        assert arith.chi4(n) == expected


def test_pi_count(table):
    assert arith.pi_count(10, table=table) == 4
    assert arith.pi_count(10, 1, table) == 1
    assert arith.pi_count(10, 3, table) == 2
    assert arith.pi_count(0, table=table) == 0
    for x in (2, 17, 100, 9999):
        total = arith.pi_count(x, table=table)
        split = (arith.pi_count(x, 1, table) + arith.pi_count(x, 3, table)
                 + (1 if x >= 2 else 0))
        assert total == split


def test_prime_recip_sum(table):
    assert arith.prime_recip_sum(10, 1, table) == pytest.approx(0.2, rel=1e-12)
    assert arith.prime_recip_sum(10, 3, table) == pytest.approx(10 / 21, rel=1e-12)
    assert arith.prime_recip_sum(2, 1, table) == 0.0
    with pytest.raises(ValueError):
        arith.prime_recip_sum(1, table=table)


def test_chebyshev(table):
    assert arith.chebyshev("psi", 1, table) == 0.0
    assert arith.chebyshev("psi", 10, table) == pytest.approx(math.log(2520))
    assert arith.chebyshev("theta", 10, table) == pytest.approx(math.log(210))
    for x in (10, 100, 5000, 10**4):
        psi = arith.chebyshev("psi", x, table)
        theta = arith.chebyshev("theta", x, table)
        assert psi >= theta
        # proper prime powers only
        proper = 0.0
        for p in table.primes:
            p = int(p)
            if p * p > x:
                break
            q = p * p
            while q <= x:
                proper += math.log(p)
                q *= p
        assert psi - theta == pytest.approx(proper, abs=1e-9)


def test_log_integral(table):
    assert arith.log_integral(2) == 0.0
    oracle = float(mpmath.li(10) - mpmath.li(2))
    assert arith.log_integral(10) == pytest.approx(oracle, abs=1e-9)
    li100 = arith.log_integral(100)
    assert abs(li100 - arith.pi_count(100, table=table)) < li100 * 0.15
    with pytest.raises(ValueError):
        arith.log_integral(1.5)


def test_mobius_convolution_is_identity(table6):
    # sum over d | n of mu(d) is 1 at n = 1 and 0 otherwise
    for n in range(1, 10**5 + 1):
        total = 0
        f = arith.factor(n, table6)
        # only squarefree divisors contribute; walk subsets of the primes
        primes = [p for p, _ in f.factors]
        for mask in range(1 << len(primes)):
            total += -1 if bin(mask).count("1") % 2 else 1
        assert total == (1 if n == 1 else 0)


def test_von_mangoldt_sums_to_log(table6):
    # full divisor enumeration at the small end;
    # above, only prime-power divisors can contribute
    for n in range(1, 3000):
        f = arith.factor(n, table6)
        divs = [1]
        for p, e in f.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        s = sum(arith.von_mangoldt(arith.factor(d, table6)) for d in divs)
        assert abs(math.log(n) - s) <= 1e-9
    for n in range(3000, 10**5 + 1, 97):
        f = arith.factor(n, table6)
        s = sum(e * math.log(p) for p, e in f.factors)
        assert abs(math.log(n) - s) <= 1e-9


def test_two_pow_omega_at_most_tau(table6):
    spf = table6.spf.tolist()
    for n in range(2, 10**6 + 1):
        m, omega, tau = n, 0, 1
        while m > 1:
            p = spf[m]
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            omega += 1
            tau *= e + 1
        assert (1 << omega) <= tau


def test_cache_roundtrip(tmp_path, monkeypatch, table):
    monkeypatch.setenv("REPNUM_CACHE_DIR", str(tmp_path))
    assert arith.cache_dir() == str(tmp_path)
    t1 = arith.cached_prime_table(5000)
    path = arith.cache_path(5000)
    assert os.path.exists(path)
    t2 = arith.cached_prime_table(5000)
    assert np.array_equal(t1.primes, t2.primes)
    assert t1.limit == t2.limit == 5000
    with open(path, "rb") as fh:
        head = fh.read(16)
    assert head[:4] == b"RNPK"
    assert struct.unpack("<I", head[4:8])[0] == arith.CACHE_VERSION
    assert struct.unpack("<Q", head[8:16])[0] == 5000
    # body is a bitset over odd 3..limit, LSB first: bit i is 3 + 2i
    with open(path, "rb") as fh:
        fh.seek(16)
        first = fh.read(1)[0]
    assert first == 0b10110111  # 3, 5, 7, 11, 13, 17 prime; 9, 15 not


def test_cache_rejects_garbage(tmp_path):
    bad = tmp_path / "x.rnpk"
    bad.write_bytes(b"NOPE" + b"\0" * 12)
    with pytest.raises(ValueError, match="magic"):
        arith.read_prime_cache(str(bad))


def test_cache_default_dir(monkeypatch):
    monkeypatch.delenv("REPNUM_CACHE_DIR", raising=False)
    assert arith.cache_dir() == "./.repnum-cache"
