"""Exact integer arithmetic of roots of unity.

Everything here is universal: it depends only on the order q of the root,
never on particle numbers or energies.  The central object is the transfer
matrix T_q whose row p expands the p-th power of the primitive q-th root of
unity over the power basis {1, w, ..., w^(phi(q)-1)}.  All entries are exact
integers obtained from the cyclotomic polynomial by induction, so downstream
degeneracy counting never touches floating point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence


def prime_factors(n: int) -> list[int]:
    """Sorted distinct prime factors of n >= 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out

def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n >= 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]

def totient(n: int) -> int:
    """Euler totient via prime factorization."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    result = n
    for p in prime_factors(n):
        result = result // p * (p - 1)
    return result

def root_of_unity(q: int, p: int = 1) -> complex:
    """exp(2*pi*i*p/q), the numeric value of the p-th power of the q-th root."""
    return cmath.exp(2j * math.pi * (p % q) / q)


@dataclass(frozen=True)
class CycloPoly:
    """Minimal polynomial of the primitive q-th root of unity.

    coeffs[k] is the coefficient of x^k; the list has length phi(q)+1 and the
    leading coefficient is 1.
    """

    q: int
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


def _divide_exact(num: list[int], den: Sequence[int]) -> list[int]:
    # Exact division of integer polynomials; remainder must vanish.
    num = list(num)
    quot = [0] * (len(num) - len(den) + 1)
    for i in range(len(quot) - 1, -1, -1):
        c = num[i + len(den) - 1]
        q, r = divmod(c, den[-1])
        if r != 0:
            raise ArithmeticError("non-exact polynomial division")
        quot[i] = q
        for j, d in enumerate(den):
            num[i + j] -= q * d
    if any(num):
        raise ArithmeticError("nonzero remainder in polynomial division")
    return quot


@lru_cache(maxsize=None)
def cyclotomic_poly(q: int) -> CycloPoly:
    """q-th cyclotomic polynomial, computed by exact division of x^q - 1.

    x^q - 1 factors into the cyclotomic polynomials of all divisors of q;
    dividing out the proper divisors leaves the monic degree-phi(q) factor
    whose root is the primitive q-th root of unity.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    coeffs = [-1] + [0] * (q - 1) + [1]  # x^q - 1
    for d in divisors(q)[:-1]:
        coeffs = _divide_exact(coeffs, cyclotomic_poly(d).coeffs)
    return CycloPoly(q=q, coeffs=tuple(coeffs))


@dataclass(frozen=True)
class TransferMatrix:
    """Integer matrix expanding every q-th root of unity in the power basis.

    Row p holds the phi(q) coordinates of w^p; the first phi(q) rows are the
    identity by choice of basis.
    """

    q: int
    rows: tuple[tuple[int, ...], ...]

    @property
    def phi(self) -> int:
        return len(self.rows[0])

    def row(self, p: int) -> tuple[int, ...]:
        return self.rows[p % self.q]

    def max_abs_entry(self) -> int:
        return max(abs(e) for r in self.rows for e in r)


@lru_cache(maxsize=None)
def transfer_matrix(q: int) -> TransferMatrix:
    """Build T_q by induction seeded with the cyclotomic polynomial.

    Multiplying the expansion of w^p by w shifts coordinates up by one and
    folds the overflowing top coordinate back through the relation
    w^phi(q) = -sum_k phi_k w^k, giving

        row[p+1][0] = -phi_0 * row[p][-1]
        row[p+1][k] = row[p][k-1] - phi_k * row[p][-1]
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    phi = totient(q)
    poly = cyclotomic_poly(q).coeffs
    rows: list[tuple[int, ...]] = [
        tuple(1 if j == i else 0 for j in range(phi)) for i in range(phi)
    ]
    for _ in range(phi, q):
        prev = rows[-1]
        nxt = [-poly[0] * prev[phi - 1]]
        for k in range(1, phi):
            nxt.append(prev[k - 1] - poly[k] * prev[phi - 1])
        rows.append(tuple(nxt))
    return TransferMatrix(q=q, rows=tuple(rows))


@dataclass(frozen=True)
class CycloElement:
    """Element of the degree-phi(q) cyclotomic field in power-basis coordinates."""

    q: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != totient(self.q):
            raise ValueError(
                f"expected {totient(self.q)} coordinates for q={self.q}, "
                f"got {len(self.coords)}"
            )

    @classmethod
    def from_root(cls, q: int, p: int) -> "CycloElement":
        """The root power w^p as a basis-expanded element."""
        return cls(q=q, coords=transfer_matrix(q).row(p))

    def value(self) -> complex:
        """Numeric (double precision) value; exact coordinates remain authoritative."""
        return sum(c * root_of_unity(self.q, k) for k, c in enumerate(self.coords))


def frobenius_apply(q: int, k: int, x: CycloElement) -> CycloElement:
    """Map w^j -> w^(k*j) on each basis power of x and re-expand.

    For gcd(k, q) = 1 this is the field automorphism sending the primitive
    root to its k-th power; for other k it is only the linear extension of
    the basis-power substitution (not a ring homomorphism).
    """
    if x.q != q:
        raise ValueError(f"element has q={x.q}, expected {q}")
    if not 0 <= k < q:
        raise ValueError(f"k must lie in [0, {q}), got {k}")
    tmat = transfer_matrix(q)
    phi = tmat.phi
    out = [0] * phi
    for j, c in enumerate(x.coords):
        if c == 0:
            continue
        row = tmat.row((k * j) % q)
        for i in range(phi):
            out[i] += c * row[i]
    return CycloElement(q=q, coords=tuple(out))
