"""Seeded random instances shared by the acceptance suite and its calibration run."""
from dataclasses import dataclass

from fpexpand.field import PrimeField
from fpexpand.functions import ExpanderSpec, parse_family
from fpexpand.sets import FSet, SetFamilySpec, SplitMix64, derive_seed, generate

PRIMES = (31, 101, 1009)
MAX_SIZE = 12
PER_VARIANT = 200
BASE_SEED = 20_180_611


@dataclass(frozen=True)
class Case:
    index: int
    variant: str
    field: PrimeField
    A: FSet
    B: FSet
    C: FSet
    spec: ExpanderSpec

    @property
    def label(self):
        return f"{self.variant}#{self.index} p={self.field.p} |A|,|B|,|C|={len(self.A)},{len(self.B)},{len(self.C)} {self.spec.tag}"


def _family(rng: SplitMix64, p: int, allow_zero: bool) -> str:
    kind = rng.below(4)
    if kind == 0:
        return "identity"
    if kind == 1:
        return "inverse"
    if kind == 2:
        lo = 0 if allow_zero else 1
        return f"constant:{lo + rng.below(p - lo)}"
    return f"monomial:{rng.below(10) - 3}"


def random_cases(variant: str, count: int = PER_VARIANT, seed: int = BASE_SEED) -> list[Case]:
    """``count`` instances with p cycling through PRIMES and sizes in [1, MAX_SIZE].

    g and h are drawn from every built-in family; the additive variant may
    also draw h = constant:0.
    """
    rng = SplitMix64(seed + (0 if variant == "mult" else 1))
    cases = []
    for i in range(count):
        F = PrimeField(PRIMES[i % len(PRIMES)])
        sizes = [1 + rng.below(MAX_SIZE) for _ in range(3)]
        sets = [generate(SetFamilySpec("random", n, seed=derive_seed(seed, i, j)), F) for j, n in enumerate(sizes)]
        g = parse_family(_family(rng, F.p, False), F)
        h = parse_family(_family(rng, F.p, variant == "add"), F)
        cases.append(Case(i, variant, F, *sets, ExpanderSpec(g, h)))
    return cases
