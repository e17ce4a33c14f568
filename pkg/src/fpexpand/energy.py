"""Level counts E_lambda, their first and second moments, and the exact
counting / Cauchy-Schwarz checks built on them.

Both variants enumerate every (a, b, c) in A x B x C, form a point of F_p^3,
and deduplicate points per level:

* multiplicative: point (f(a,b), c g(a)^-1, c h(a)), level x*y - z  (= b c)
* additive:       point (f(a,b), g(a)^-1, c - h(a)), level x*y + z  (= b + c)
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .functions import DomainError, ExpanderSpec
from .sets import FSet, productset, sumset

__all__ = [
    "Variant",
    "LambdaCounts",
    "EnergyReport",
    "lambda_points",
    "lambda_counts",
    "energy_report",
    "verify_lambda_identity",
]


class Variant(str, enum.Enum):
    MULTIPLICATIVE = "mult"
    ADDITIVE = "add"

    @classmethod
    def parse(cls, text: "str | Variant") -> "Variant":
        if isinstance(text, Variant):
            return text
        key = str(text).strip().lower()
        aliases = {"mult": cls.MULTIPLICATIVE, "multiplicative": cls.MULTIPLICATIVE,
                   "add": cls.ADDITIVE, "additive": cls.ADDITIVE}
        if key not in aliases:
            raise ValueError(f"unknown variant {text!r}")
        return aliases[key]

    def combine(self, B: FSet, C: FSet) -> FSet:
        """The set B*C or B+C that indexes the levels."""
        return productset(B, C) if self is Variant.MULTIPLICATIVE else sumset(B, C)


def check_inputs(A: FSet, B: FSet, C: FSet, spec: ExpanderSpec) -> None:
    if not (len(A) and len(B) and len(C)):
        raise ValueError("A, B and C must be nonempty")
    if len({A.p, B.p, C.p, spec.p}) != 1:
        raise ValueError("sets and functions use different moduli")
    if not A.issubset(spec.domain):
        raise DomainError("A is not inside the domain of g, h")
    if B.has_zero() or C.has_zero():
        raise DomainError("B and C must lie in F_p*")


@dataclass(frozen=True)
class LambdaCounts:
    variant: Variant
    counts: dict[int, int]  # level -> E_lambda, keys ascending
    support_set: FSet

    @property
    def sum_E(self) -> int:
        return sum(self.counts.values())

    @property
    def E(self) -> int:
        return sum(e * e for e in self.counts.values())


def lambda_points(variant, A: FSet, B: FSet, C: FSet, spec: ExpanderSpec) -> set[tuple[int, int, int]]:
    """All distinct points (x, y, z) generated by A x B x C."""
    variant = Variant.parse(variant)
    check_inputs(A, B, C, spec)
    p = spec.p
    pts = set()
    for a in A:
        ga, ha = spec.g(a), spec.h(a)
        gi = pow(ga, -1, p)
        xs = [ga * (ha + b) % p for b in B]
        if variant is Variant.MULTIPLICATIVE:
            yz = [(c * gi % p, c * ha % p) for c in C]
        else:
            yz = [(gi, (c - ha) % p) for c in C]
        pts.update((x, y, z) for x in xs for (y, z) in yz)
    return pts


def level(variant: Variant, x: int, y: int, z: int, p: int) -> int:
    if variant is Variant.MULTIPLICATIVE:
        return (x * y - z) % p
    return (x * y + z) % p


def lambda_counts(variant, A: FSet, B: FSet, C: FSet, spec: ExpanderSpec) -> LambdaCounts:
    variant = Variant.parse(variant)
    p = spec.p
    tally = Counter(level(variant, x, y, z, p) for (x, y, z) in lambda_points(variant, A, B, C, spec))
    counts = dict(sorted(tally.items()))
    return LambdaCounts(variant, counts, FSet(tuple(counts), p))


@dataclass(frozen=True)
class EnergyReport:
    sum_E: int
    E: int
    lower_bound: Fraction  # |A||B||C| / m
    cs_lhs: int  # (sum E_lambda)^2
    cs_rhs: int  # E * |support|
    m: int
    support_ok: bool = True
    violations: tuple[str, ...] = field(default=())

    @property
    def counting_ok(self) -> bool:
        return self.sum_E * self.lower_bound.denominator >= self.lower_bound.numerator

    @property
    def cauchy_schwarz_ok(self) -> bool:
        return self.cs_lhs <= self.cs_rhs

    @property
    def ok(self) -> bool:
        return not self.violations


def energy_report(lc: LambdaCounts, A: FSet, B: FSet, C: FSet, m: int) -> EnergyReport:
    """Assemble moments and both exact inequalities.

    Violations are recorded in ``violations``; they are never raised here.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    sum_E, E = lc.sum_E, lc.E
    triples = len(A) * len(B) * len(C)
    lower = Fraction(triples, m)
    support_ok = lc.support_set == lc.variant.combine(B, C)
    cs_lhs = sum_E * sum_E
    cs_rhs = E * len(lc.support_set)
    bad = []
    if sum_E * m < triples:
        bad.append(f"counting bound: sum_E={sum_E} < {triples}/{m}")
    if sum_E > triples:
        bad.append(f"sum_E={sum_E} exceeds |A||B||C|={triples}")
    if cs_lhs > cs_rhs:
        bad.append(f"Cauchy-Schwarz: {cs_lhs} > {cs_rhs}")
    if not support_ok:
        bad.append("level support differs from the combined set of B and C")
    if any(e < 1 for e in lc.counts.values()):
        bad.append("a level in the support has E_lambda = 0")
    return EnergyReport(sum_E, E, lower, cs_lhs, cs_rhs, m, support_ok, tuple(bad))


def verify_lambda_identity(variant, A: FSet, B: FSet, C: FSet, spec: ExpanderSpec) -> bool:
    """Check that each triple's level collapses to b*c (or b + c)."""
    variant = Variant.parse(variant)
    check_inputs(A, B, C, spec)
    p = spec.p
    for a in A:
        ga, ha = spec.g(a), spec.h(a)
        gi = pow(ga, -1, p)
        for b in B:
            fab = ga * (ha + b) % p
            for c in C:
                if variant is Variant.MULTIPLICATIVE:
                    lhs = (fab * c * gi - c * ha) % p
                    rhs = b * c % p
                else:
                    lhs = (fab * gi + (c - ha)) % p
                    rhs = (b + c) % p
                if lhs != rhs:
                    return False
    return True
