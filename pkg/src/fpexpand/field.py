"""Prime field arithmetic.

Elements are canonical least nonnegative residues. Python integers are
arbitrary precision, so products never overflow regardless of ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "FieldError",
    "ModulusMismatch",
    "NotPrimeError",
    "PrimeField",
    "FieldElement",
    "is_prime",
    "add",
    "mul",
    "inv",
    "inverse_table",
]

# Deterministic Miller-Rabin witness set, correct for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class FieldError(ValueError):
    pass


class ModulusMismatch(FieldError):
    pass


class NotPrimeError(FieldError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field F_p for an odd prime ``p``."""

    p: int

    def __post_init__(self):
        p = self.p
        if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
            raise NotPrimeError(f"modulus must be an integer, got {p!r}")
        object.__setattr__(self, "p", int(p))
        if self.p < 3 or not is_prime(self.p):
            raise NotPrimeError(f"modulus not prime: {p}")

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(int(value) % self.p, self.p)

    def __repr__(self):
        return f"PrimeField({self.p})"

    def reduce(self, value: int) -> int:
        return int(value) % self.p

    def inv(self, value: int) -> int:
        """Inverse of a raw residue."""
        value = int(value) % self.p
        if value == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return pow(value, -1, self.p)

    def nonzero(self) -> range:
        return range(1, self.p)

    def elements(self) -> list[FieldElement]:
        return [FieldElement(v, self.p) for v in range(self.p)]

    @property
    def numpy_safe(self) -> bool:
        """Whether int64 kernels can encode triples of residues (p**3 < 2**62)."""
        return self.p < (1 << 20)


@dataclass(frozen=True, order=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise FieldError(f"{self.value} is not a canonical residue mod {self.p}")

    def _check(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ModulusMismatch(f"mod {self.p} vs mod {other.p}")
            return other
        if isinstance(other, (int, np.integer)):
            return FieldElement(int(other) % self.p, self.p)
        return NotImplemented

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement((self.value + other.value) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement((self.value - other.value) % self.p, self.p)

    def __rsub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value * other.value % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.p, self.p)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return FieldElement(pow(self.value, k, self.p), self.p)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.p})"

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return FieldElement(pow(self.value, -1, self.p), self.p)


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    if x.p != y.p:
        raise ModulusMismatch(f"mod {x.p} vs mod {y.p}")
    return x + y


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    if x.p != y.p:
        raise ModulusMismatch(f"mod {x.p} vs mod {y.p}")
    return x * y


def inv(x: FieldElement) -> FieldElement:
    return x.inverse()


@lru_cache(maxsize=16)
def inverse_table(p: int) -> np.ndarray:
    """``table[x] = x^-1 mod p`` for x in [1, p-1]; ``table[0] = 0``.

    Uses inv(i) = -(p // i) * inv(p % i), so the whole table costs O(p).
    """
    table = [0, 1] + [0] * (p - 2)
    for i in range(2, p):
        table[i] = (p - (p // i) * table[p % i] % p) % p
    out = np.array(table, dtype=np.int64)
    out.setflags(write=False)
    return out
