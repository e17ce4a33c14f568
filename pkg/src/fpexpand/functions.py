"""Function tables g, h : D -> F_p* and the expander f(x, y) = g(x)(h(x) + y)."""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .field import FieldElement, PrimeField
from .sets import FSet

__all__ = [
    "FunctionTable",
    "ExpanderSpec",
    "DomainError",
    "identity",
    "constant",
    "inverse",
    "monomial",
    "explicit",
    "load_table_csv",
    "parse_family",
    "mu",
    "pointwise_product",
    "eval_f",
    "image_f",
    "COROLLARY_PRESETS",
    "corollary_spec",
]


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionTable:
    """Explicit map from ``domain`` (a subset of F_p*) to residues.

    Values must be nonzero. The one exception is ``constant(0)``, built with
    ``allow_zero=True``: it is needed for the h(x) = 0 specialisations of
    the additive bound.
    """

    domain: FSet
    values: tuple[int, ...]
    family: str = "explicit"
    allow_zero: bool = False

    def __post_init__(self):
        if len(self.values) != len(self.domain):
            raise ValueError("values must align with domain")
        if self.domain.has_zero():
            raise DomainError("function domain must lie in F_p*")
        p = self.domain.p
        vals = tuple(int(v) % p for v in self.values)
        object.__setattr__(self, "values", vals)
        if not self.allow_zero and any(v == 0 for v in vals):
            raise ValueError(f"{self.family}: function takes the value 0; codomain is F_p*")
        object.__setattr__(self, "_map", dict(zip(self.domain.elements, vals)))

    @property
    def p(self) -> int:
        return self.domain.p

    def __call__(self, x) -> int:
        key = x.value if isinstance(x, FieldElement) else int(x) % self.p
        try:
            return self._map[key]
        except KeyError:
            raise DomainError(f"{key} is outside the domain of {self.family}") from None

    def items(self):
        return zip(self.domain.elements, self.values)

    def restrict(self, A: FSet) -> "FunctionTable":
        if not A.issubset(self.domain):
            raise DomainError("restriction set is not inside the domain")
        return FunctionTable(A, tuple(self(a) for a in A), self.family, self.allow_zero)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)


def _domain(field: PrimeField, domain: FSet | None) -> FSet:
    if domain is None:
        return FSet(tuple(range(1, field.p)), field.p, True)
    if domain.p != field.p:
        raise DomainError("domain modulus differs from field")
    return domain


def identity(field: PrimeField, domain: FSet | None = None) -> FunctionTable:
    D = _domain(field, domain)
    return FunctionTable(D, D.elements, "identity")


def constant(field: PrimeField, c: int, domain: FSet | None = None) -> FunctionTable:
    D = _domain(field, domain)
    c %= field.p
    return FunctionTable(D, (c,) * len(D), f"constant:{c}", allow_zero=(c == 0))


def inverse(field: PrimeField, domain: FSet | None = None) -> FunctionTable:
    D = _domain(field, domain)
    return FunctionTable(D, tuple(pow(x, -1, field.p) for x in D), "inverse")


def monomial(field: PrimeField, k: int, domain: FSet | None = None) -> FunctionTable:
    D = _domain(field, domain)
    # negative k is fine: pow handles it for units
    return FunctionTable(D, tuple(pow(x, k, field.p) for x in D), f"monomial:{k}")


def explicit(field: PrimeField, mapping: dict, tag: str = "explicit") -> FunctionTable:
    D = FSet(tuple(mapping), field.p, True)
    return FunctionTable(D, tuple(mapping[x] for x in D), tag)


def load_table_csv(path: str | Path, field: PrimeField) -> FunctionTable:
    """Read a two-column ``x,value`` CSV. A header row is skipped if non-numeric."""
    mapping: dict[int, int] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                x, v = int(row[0]), int(row[1])
            except ValueError:
                if not mapping:
                    continue  # header
                raise
            x %= field.p
            if x in mapping:
                raise ValueError(f"{path}: duplicate domain point {x}")
            mapping[x] = v
    return explicit(field, mapping, f"explicit:{path}")


def parse_family(text: str, field: PrimeField, domain: FSet | None = None) -> FunctionTable:
    """``identity``, ``constant:<c>``, ``inverse``, ``monomial:<k>`` or ``explicit:<path>``."""
    name, _, arg = text.strip().partition(":")
    if name == "identity" and not arg:
        return identity(field, domain)
    if name == "inverse" and not arg:
        return inverse(field, domain)
    if name == "constant" and arg:
        return constant(field, int(arg), domain)
    if name == "monomial" and arg:
        return monomial(field, int(arg), domain)
    if name == "explicit" and arg:
        table = load_table_csv(arg, field)
        return table.restrict(domain) if domain is not None else table
    raise ValueError(f"unknown function family {text!r}")


@dataclass(frozen=True)
class ExpanderSpec:
    """f(x, y) = g(x) (h(x) + y) on a shared domain."""

    g: FunctionTable
    h: FunctionTable

    def __post_init__(self):
        if self.g.domain != self.h.domain:
            raise DomainError("g and h must share a domain")
        if self.g.allow_zero and any(v == 0 for v in self.g.values):
            raise ValueError("g must be nonzero everywhere (its inverse is used)")

    @property
    def domain(self) -> FSet:
        return self.g.domain

    @property
    def p(self) -> int:
        return self.g.p

    @property
    def tag(self) -> str:
        return f"g={self.g.family};h={self.h.family}"

    def __call__(self, a, b) -> int:
        return eval_f(self, a, b)


def mu(t: FunctionTable, on: FSet | None = None) -> int:
    """Largest fibre size over nonzero targets, optionally restricted to ``on``."""
    items = t.items() if on is None else ((x, t(x)) for x in on)
    fibres = Counter(v for _, v in items if v)
    if not fibres:
        raise ValueError("mu is undefined: empty domain or no nonzero values")
    return max(fibres.values())


def pointwise_product(g: FunctionTable, h: FunctionTable) -> FunctionTable:
    if g.domain != h.domain:
        raise DomainError("pointwise product needs equal domains")
    p = g.p
    # a zero factor (h = constant:0) raises in FunctionTable: the product leaves F_p*
    return FunctionTable(g.domain, tuple(x * y % p for x, y in zip(g.values, h.values)), f"({g.family})*({h.family})")


def eval_f(spec: ExpanderSpec, a, b) -> int:
    """g(a) (h(a) + b) mod p; the result may be 0."""
    p = spec.p
    a = a.value if isinstance(a, FieldElement) else int(a) % p
    b = b.value if isinstance(b, FieldElement) else int(b) % p
    return spec.g(a) * (spec.h(a) + b) % p


def image_f(spec: ExpanderSpec, A: FSet, B: FSet) -> FSet:
    if not A.issubset(spec.domain):
        raise DomainError("A is not inside the domain of f")
    p = spec.p
    out = set()
    for a in A:
        ga, ha = spec.g(a), spec.h(a)
        out.update(ga * (ha + b) % p for b in B)
    return FSet(tuple(out), p)


# Named specialisations f(A, B) of the form used by the corollaries.
COROLLARY_PRESETS = {
    "inverse-sum": ("constant:1", "inverse"),  # f(A, B) = A^-1 + B
    "shifted-product": ("identity", "constant:1"),  # f(A, B) = A (B + 1)
    "product": ("identity", "constant:0"),  # f(A, B) = A B
}


def corollary_spec(name: str, field: PrimeField, domain: FSet | None = None) -> ExpanderSpec:
    g, h = COROLLARY_PRESETS[name]
    return ExpanderSpec(parse_family(g, field, domain), parse_family(h, field, domain))
