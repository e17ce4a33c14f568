"""Canonical subsets of F_p, set algebra, and seeded set families."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

from .field import FieldElement, ModulusMismatch, PrimeField

__all__ = [
    "FSet",
    "SetFamilySpec",
    "SplitMix64",
    "sumset",
    "difference_set",
    "productset",
    "ratio_set",
    "inverse_set",
    "shift",
    "generate",
    "hypothesis_gate",
    "factorize",
    "primitive_root",
    "multiplicative_order",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class FSet:
    """Sorted, duplicate-free subset of F_p.

    ``star`` asserts that 0 is absent. Equality compares ``p`` and the
    elements only.
    """

    elements: tuple[int, ...]
    p: int
    star: bool = dc_field(default=False, compare=False)

    def __post_init__(self):
        els = tuple(sorted({int(e) % self.p for e in self.elements}))
        object.__setattr__(self, "elements", els)
        if self.star and els and els[0] == 0:
            raise ValueError("set flagged as a subset of F_p* contains 0")

    @classmethod
    def of(cls, field: PrimeField, values: Iterable, star: bool = False) -> "FSet":
        return cls(tuple(int(v) for v in values), field.p, star)

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        if isinstance(x, FieldElement):
            if x.p != self.p:
                return False
            x = x.value
        return int(x) % self.p in self._lookup

    @property
    def _lookup(self) -> frozenset:
        try:
            return self.__dict__["_lookup_cache"]
        except KeyError:
            s = frozenset(self.elements)
            object.__setattr__(self, "_lookup_cache", s)
            return s

    def __repr__(self):
        inner = ", ".join(map(str, self.elements[:12]))
        if len(self.elements) > 12:
            inner += ", ..."
        return f"FSet({{{inner}}} mod {self.p}, n={len(self)})"

    def issubset(self, other: "FSet") -> bool:
        return self.p == other.p and self._lookup <= other._lookup

    def has_zero(self) -> bool:
        return bool(self.elements) and self.elements[0] == 0

    def without_zero(self) -> "FSet":
        return FSet(tuple(e for e in self.elements if e), self.p, True)

    def as_star(self) -> "FSet":
        """Same elements, flagged as a subset of F_p* (raises if 0 is present)."""
        return FSet(self.elements, self.p, True)


def _same_modulus(A: FSet, B: FSet) -> int:
    if A.p != B.p:
        raise ModulusMismatch(f"mod {A.p} vs mod {B.p}")
    return A.p


def sumset(A: FSet, B: FSet) -> FSet:
    p = _same_modulus(A, B)
    return FSet(tuple({(a + b) % p for a in A for b in B}), p)


def difference_set(A: FSet, B: FSet) -> FSet:
    p = _same_modulus(A, B)
    return FSet(tuple({(a - b) % p for a in A for b in B}), p)


def productset(A: FSet, B: FSet) -> FSet:
    p = _same_modulus(A, B)
    out = FSet(tuple({a * b % p for a in A for b in B}), p)
    if A.star and B.star:
        return out.as_star()
    return out


def ratio_set(A: FSet, B: FSet) -> FSet:
    """{a / b : a in A, b in B, b != 0}."""
    p = _same_modulus(A, B)
    invs = [pow(b, -1, p) for b in B if b]
    out = FSet(tuple({a * bi % p for a in A for bi in invs}), p)
    return out.as_star() if A.star else out


def inverse_set(A: FSet) -> FSet:
    if A.has_zero():
        raise ZeroDivisionError("inverse set of a set containing 0")
    return FSet(tuple(pow(a, -1, A.p) for a in A), A.p, True)


def shift(A: FSet, t: int) -> FSet:
    """A + t (may contain 0)."""
    return FSet(tuple((a + t) % A.p for a in A), A.p)


def hypothesis_gate(sets: Sequence[FSet | int], field: PrimeField) -> bool:
    """True iff every |X| <= p^(5/8), compared exactly as |X|^8 <= p^5."""
    p5 = field.p**5
    return all((len(X) if isinstance(X, FSet) else int(X)) ** 8 <= p5 for X in sets)


class SplitMix64:
    """SplitMix64 (Steele, Lea, Flood 2014); portable 64-bit generator.

    ``below(n)`` draws uniformly from [0, n) by rejecting raw outputs at or
    above the largest multiple of ``n`` that fits in 64 bits.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            r = self.next()
            if r < limit:
                return r % n

    def sample_nonzero(self, p: int, n: int) -> list[int]:
        """``n`` distinct draws from [1, p-1] by partial Fisher-Yates.

        Swaps are kept in a dict so memory is O(n) rather than O(p).
        """
        size = p - 1
        if n > size:
            raise ValueError(f"cannot draw {n} distinct nonzero residues mod {p}")
        swapped: dict[int, int] = {}
        out = []
        for i in range(n):
            j = i + self.below(size - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            swapped[j] = vi
            out.append(vj + 1)
        return out


def derive_seed(seed: int, *labels: int) -> int:
    """Child seed for a (trial, slot, ...) path; one SplitMix64 step per label."""
    s = seed & _MASK64
    for lab in labels:
        s = SplitMix64(s ^ ((lab * 0xD1B54A32D192ED03) & _MASK64)).next()
    return s


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for the desk-scale moduli used here."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primitive_root(field: PrimeField) -> int:
    p = field.p
    qs = list(factorize(p - 1))
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
        g += 1


def multiplicative_order(x: int, field: PrimeField) -> int:
    p = field.p
    x %= p
    if x == 0:
        raise ZeroDivisionError("0 has no multiplicative order")
    order = p - 1
    for q, e in factorize(p - 1).items():
        for _ in range(e):
            if pow(x, order // q, p) == 1:
                order //= q
            else:
                break
    return order


KINDS = ("random", "interval", "geometric", "subgroup", "explicit")


@dataclass(frozen=True)
class SetFamilySpec:
    """Recipe for one experiment set.

    ``n`` is the size (unused for subgroup, where the order ``d`` fixes it).
    ``start`` is the first element of an interval or progression, ``ratio``
    the progression ratio. ``explicit`` holds literal residues.
    """

    kind: str
    n: int | None = None
    seed: int = 0
    start: int = 1
    ratio: int = 2
    order: int | None = None
    explicit: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown set family {self.kind!r}; expected one of {KINDS}")

    def with_size(self, n: int) -> "SetFamilySpec":
        return SetFamilySpec(self.kind, n, self.seed, self.start, self.ratio, self.order, self.explicit)

    def with_seed(self, seed: int) -> "SetFamilySpec":
        return SetFamilySpec(self.kind, self.n, seed, self.start, self.ratio, self.order, self.explicit)

    @classmethod
    def parse(cls, text: str) -> "SetFamilySpec":
        """Parse ``random[:n]``, ``interval[:n[:start]]``, ``geometric[:n[:start[:ratio]]]``,
        ``subgroup:d`` or ``explicit:e1;e2;...``."""
        kind, _, rest = text.strip().partition(":")
        parts = [s for s in rest.split(":") if s] if rest else []
        try:
            if kind == "explicit":
                vals = tuple(int(v) for v in rest.replace(" ", ";").split(";") if v)
                return cls("explicit", len(vals), explicit=vals)
            if kind == "subgroup":
                if len(parts) != 1:
                    raise ValueError("subgroup needs exactly one order, e.g. subgroup:5")
                return cls("subgroup", order=int(parts[0]))
            nums = [int(v) for v in parts]
        except ValueError as exc:
            raise ValueError(f"bad set family {text!r}: {exc}") from None
        if kind == "random" and len(nums) <= 1:
            return cls("random", nums[0] if nums else None)
        if kind == "interval" and len(nums) <= 2:
            return cls("interval", *(nums[:1] or [None]), start=nums[1] if len(nums) > 1 else 1)
        if kind == "geometric" and len(nums) <= 3:
            return cls(
                "geometric",
                nums[0] if nums else None,
                start=nums[1] if len(nums) > 1 else 1,
                ratio=nums[2] if len(nums) > 2 else 2,
            )
        raise ValueError(f"bad set family {text!r}")

    def tag(self) -> str:
        if self.kind == "random":
            return f"random:{self.n}"
        if self.kind == "interval":
            return f"interval:{self.n}:{self.start}"
        if self.kind == "geometric":
            return f"geometric:{self.n}:{self.start}:{self.ratio}"
        if self.kind == "subgroup":
            return f"subgroup:{self.order}"
        return "explicit:" + ";".join(map(str, self.explicit))


def generate(spec: SetFamilySpec, field: PrimeField, star: bool = True) -> FSet:
    """Build the set described by ``spec``; deterministic in (spec, seed)."""
    p = field.p
    kind = spec.kind
    if kind == "subgroup":
        d = spec.order
        if d is None or d < 1 or (p - 1) % d:
            raise ValueError(f"subgroup order {d} does not divide p-1 = {p - 1}")
        gen = pow(primitive_root(field), (p - 1) // d, p)
        els, x = [], 1
        for _ in range(d):
            els.append(x)
            x = x * gen % p
        return FSet(tuple(els), p, True)
    if kind == "explicit":
        out = FSet(spec.explicit, p)
        if len(out) != len(spec.explicit):
            raise ValueError("explicit set has repeated residues")
        return out.as_star() if star else out

    n = spec.n
    if n is None or n < 0:
        raise ValueError(f"{kind} family needs a size")
    limit = p - 1 if star else p
    if n > limit:
        raise ValueError(f"size {n} too large for p={p}")
    if kind == "random":
        if star:
            els = SplitMix64(spec.seed).sample_nonzero(p, n)
        else:
            els = [v - 1 for v in SplitMix64(spec.seed).sample_nonzero(p + 1, n)]
        return FSet(tuple(els), p, star)
    if kind == "interval":
        els = [(spec.start + i) % p for i in range(n)]
    else:  # geometric
        r = spec.ratio % p
        if r == 0 or spec.start % p == 0:
            raise ValueError("geometric progression needs nonzero start and ratio")
        if n > multiplicative_order(r, field):
            raise ValueError(f"ratio {r} has order below {n} mod {p}; progression repeats")
        els, x = [], spec.start % p
        for _ in range(n):
            els.append(x)
            x = x * r % p
    if star and 0 in els:
        raise ValueError(f"{kind} set contains 0 mod {p}")
    return FSet(tuple(els), p, star)
