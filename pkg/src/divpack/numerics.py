"""Scalar numerics shared by the bound calculators: zeta values, ball volumes, primes."""

from __future__ import annotations

import math
from functools import lru_cache

# Bernoulli numbers B_2, B_4, ..., B_12 for the Euler-Maclaurin tail
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)


@lru_cache(maxsize=None)
def zeta(d: float, terms: int = 64) -> float:
    """Riemann zeta for real d >= 2: partial sum plus Euler-Maclaurin tail.

    With 64 explicit terms and six correction terms the truncation error is
    below 1e-16 for every d >= 2.
    """
    if d < 2:
        raise ValueError("zeta is only provided for d >= 2")
    if d > 60:
        # 2^-d already below double precision resolution beyond the first few terms
        return 1.0 + 2.0 ** -d + 3.0 ** -d
    n = terms
    head = math.fsum(k ** -d for k in range(1, n))
    tail = n ** (1 - d) / (d - 1) + 0.5 * n ** -d
    rising = d  # d (d+1) ... (d+2j-2)
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / math.factorial(2 * j) * rising * n ** (-d - 2 * j + 1)
        rising *= (d + 2 * j - 1) * (d + 2 * j)
    return head + tail


def log_ball_volume(d: int) -> float:
    """log V_d, V_d = pi^(d/2) / Gamma(d/2 + 1)."""
    return 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1)


def ball_volume(d: int) -> float:
    return math.exp(log_ball_volume(d))


def euler_phi(m: int) -> int:
    out = m
    x = m
    q = 2
    while q * q <= x:
        if x % q == 0:
            while x % q == 0:
                x //= q
            out -= out // q
        q += 1
    if x > 1:
        out -= out // x
    return out


def prime_factors(m: int) -> list[int]:
    out = []
    x = m
    q = 2
    while q * q <= x:
        if x % q == 0:
            out.append(q)
            while x % q == 0:
                x //= q
        q += 1
    if x > 1:
        out.append(x)
    return out


def is_small_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    q = 3
    while q * q <= n:
        if n % q == 0:
            return False
        q += 2
    return True


def primes_up_to(k: int) -> list[int]:
    if k < 2:
        return []
    sieve = bytearray([1]) * (k + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(k ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i, v in enumerate(sieve) if v]


def multiplicative_order(a: int, m: int) -> int:
    if math.gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    if m == 1:
        return 1
    k, x = 1, a % m
    while x != 1:
        x = x * a % m
        k += 1
    return k


def primitive_root(p: int) -> int:
    factors = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    if p == 2:
        return 1
    raise ValueError(f"no primitive root mod {p}")
