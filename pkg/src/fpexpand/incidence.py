"""Point set R, plane set S, incidence counts and collinearity in F_p^3.

Point sets are ``(n, 3)`` int64 arrays and plane sets ``(m, 4)`` arrays of
``(n1, n2, n3, d)`` for ``n1 X + n2 Y + n3 Z = d``; both hold distinct rows in
lexicographic order. Kernels need ``p < 2**20`` so that every intermediate
fits in int64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .energy import Variant, check_inputs
from .field import PrimeField, inverse_table
from .functions import ExpanderSpec
from .sets import FSet

__all__ = [
    "Point3",
    "Plane3",
    "IncidenceReport",
    "projection_T",
    "build_R",
    "build_S",
    "canonical_planes",
    "count_incidences",
    "count_incidences_naive",
    "incidences_by_level",
    "max_collinear",
    "k_paper_bound",
    "k_corrected_bound",
    "rudnev_rhs",
    "p2_gate",
    "incidence_report",
]

_DENSE_LIMIT = 1 << 26
_CHUNK = 1 << 16
_NAIVE_CHUNK = 1 << 16


class Point3(NamedTuple):
    x: int
    y: int
    z: int


class Plane3(NamedTuple):
    n1: int
    n2: int
    n3: int
    d: int

    @classmethod
    def make(cls, n1: int, n2: int, n3: int, d: int, p: int) -> "Plane3":
        """Scale so the first nonzero normal coefficient is 1."""
        coeffs = [n1 % p, n2 % p, n3 % p, d % p]
        pivot = next((c for c in coeffs[:3] if c), 0)
        if pivot == 0:
            raise ValueError("plane normal is zero")
        s = pow(pivot, -1, p)
        return cls(*(c * s % p for c in coeffs))

    def contains(self, pt, p: int) -> bool:
        x, y, z = pt
        return (self.n1 * x + self.n2 * y + self.n3 * z - self.d) % p == 0


def _require_numpy_field(p: int) -> None:
    if not PrimeField(p).numpy_safe:
        raise ValueError(f"incidence kernels support p < 2**20, got {p}")


def _as_rows(data, width: int) -> np.ndarray:
    arr = np.asarray(list(data) if not isinstance(data, np.ndarray) else data, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, width), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"expected rows of width {width}")
    return arr


def _per_a(spec: ExpanderSpec, A: FSet):
    p = spec.p
    g = np.array([spec.g(a) for a in A], dtype=np.int64)
    h = np.array([spec.h(a) for a in A], dtype=np.int64)
    gi = inverse_table(p)[g]
    return g, h, gi


def _image_array(spec: ExpanderSpec, A: FSet, B: FSet) -> np.ndarray:
    g, h, _ = _per_a(spec, A)
    b = np.array(B.elements, dtype=np.int64)
    return (g[:, None] * ((h[:, None] + b[None, :]) % spec.p)) % spec.p


def _yz_array(variant: Variant, spec: ExpanderSpec, A: FSet, C: FSet) -> tuple[np.ndarray, np.ndarray]:
    """First two point coordinates for every (a, c), shape (|A|, |C|) each."""
    p = spec.p
    _, h, gi = _per_a(spec, A)
    c = np.array(C.elements, dtype=np.int64)
    if variant is Variant.MULTIPLICATIVE:
        y = gi[:, None] * c[None, :] % p
        z = h[:, None] * c[None, :] % p
    else:
        y = np.broadcast_to(gi[:, None], (len(A), len(C)))
        z = (c[None, :] - h[:, None]) % p
    return y, z


def projection_T(variant, A: FSet, C: FSet, spec: ExpanderSpec) -> np.ndarray:
    """Distinct (y, z) prefixes of R, sorted."""
    variant = Variant.parse(variant)
    _require_numpy_field(spec.p)
    y, z = _yz_array(variant, spec, A, C)
    return np.unique(np.stack([y.ravel(), z.ravel()], axis=1), axis=0)


def build_R(variant, A: FSet, B: FSet, C: FSet, spec: ExpanderSpec) -> np.ndarray:
    """All points (y(a, c), z(a, c), f(a', b')) over a, a' in A, b' in B, c in C."""
    variant = Variant.parse(variant)
    check_inputs(A, B, C, spec)
    _require_numpy_field(spec.p)
    y, z = _yz_array(variant, spec, A, C)
    yz = np.stack([y.ravel(), z.ravel()], axis=1)
    f = _image_array(spec, A, B).ravel()
    raw = np.concatenate([np.repeat(yz, len(f), axis=0), np.tile(f, len(yz))[:, None]], axis=1)
    return np.unique(raw, axis=0)


def canonical_planes(planes: np.ndarray, p: int) -> np.ndarray:
    """Row-wise scaling so the first nonzero of (n1, n2, n3) is 1."""
    planes = np.asarray(planes, dtype=np.int64) % p
    normal = planes[:, :3]
    nz = normal != 0
    if not nz.any(axis=1).all():
        raise ValueError("plane normal is zero")
    pivot = normal[np.arange(len(planes)), nz.argmax(axis=1)]
    return planes * inverse_table(p)[pivot][:, None] % p


def build_S(variant, A: FSet, B: FSet, C: FSet, spec: ExpanderSpec) -> np.ndarray:
    """Canonical planes over a, a' in A, b in B, c' in C.

    multiplicative: f(a,b) X - Y - c' g(a')^-1 Z = -c' h(a')
    additive:       f(a,b) X + Y - g(a')^-1 Z    = c' - h(a')
    """
    variant = Variant.parse(variant)
    check_inputs(A, B, C, spec)
    p = spec.p
    _require_numpy_field(p)
    x = _image_array(spec, A, B).ravel()
    y, z = _yz_array(variant, spec, A, C)
    y, z = y.ravel(), z.ravel()
    n = len(x) * len(y)
    X = np.repeat(x, len(y))
    Y = np.tile(y, len(x))
    Z = np.tile(z, len(x))
    if variant is Variant.MULTIPLICATIVE:
        raw = np.stack([X, np.full(n, p - 1), -Y, -Z], axis=1)
    else:
        raw = np.stack([X, np.ones(n, dtype=np.int64), -Y, Z], axis=1)
    return np.unique(canonical_planes(raw, p), axis=0)


def count_incidences(R, S, p: int) -> int:
    """Exact I(R, S), sharing work across points with a common (x, y) prefix.

    For a plane and a prefix, the plane equation fixes at most one z when
    n3 != 0 (a sorted-key lookup), and either every z or none when n3 == 0.
    Cost is |S| times the number of distinct prefixes.
    """
    _require_numpy_field(p)
    R = _as_rows(R, 3)
    S = _as_rows(S, 4)
    if len(R) == 0 or len(S) == 0:
        return 0
    R = np.unique(R % p, axis=0)
    prefixes, group, sizes = np.unique(R[:, :2], axis=0, return_inverse=True, return_counts=True)
    keys = group.ravel() * p + R[:, 2]
    k = len(prefixes)
    # dense membership table when it fits, sorted keys otherwise
    table = None
    if k * p <= _DENSE_LIMIT:
        table = np.zeros(k * p, dtype=bool)
        table[keys] = True
    else:
        keys = np.sort(keys)
    px, py = prefixes[:, 0], prefixes[:, 1]
    inv = inverse_table(p)
    total = 0
    step = max(1, _CHUNK // k)
    for lo in range(0, len(S), step):
        s = S[lo:lo + step] % p
        rhs = (s[:, 3:4] - s[:, 0:1] * px[None, :] - s[:, 1:2] * py[None, :]) % p
        n3 = s[:, 2]
        flat = n3 == 0
        if flat.any():
            total += int(((rhs[flat] == 0) * sizes[None, :]).sum())
        steep = ~flat
        if steep.any():
            zsol = rhs[steep] * inv[n3[steep]][:, None] % p
            probe = (np.arange(k)[None, :] * p + zsol).ravel()
            if table is not None:
                total += int(np.count_nonzero(table[probe]))
                continue
            pos = np.searchsorted(keys, probe)
            pos[pos == len(keys)] = 0
            total += int(np.count_nonzero(keys[pos] == probe))
    return total


def count_incidences_naive(R, S, p: int) -> int:
    """Reference count: test every (point, plane) pair."""
    _require_numpy_field(p)
    R = _as_rows(R, 3)
    S = _as_rows(S, 4)
    if len(R) == 0 or len(S) == 0:
        return 0
    # floats are exact here since |n1 x + n2 y + n3 z - d| < 4 p^2, and the product goes through BLAS
    dtype = np.float32 if 4 * p * p < 2**24 else np.float64
    Rt = (R % p).T.astype(dtype)
    planes = (S % p).astype(dtype)
    inv_p, fp = dtype(1.0 / p), dtype(p)
    total = 0
    # small cache-resident blocks; v is a multiple of p iff rint(v / p) * p == v
    step = max(1, _NAIVE_CHUNK // len(R))
    for lo in range(0, len(planes), step):
        s = planes[lo:lo + step]
        v = s[:, :3] @ Rt
        v -= s[:, 3:4]
        q = v * inv_p
        np.rint(q, out=q)
        q *= fp
        total += int(np.count_nonzero(v == q))
    return total


def incidences_by_level(variant, T: np.ndarray, F, p: int) -> int:
    """I(R, S) for the constructed R = T x F and S ~ F x T, as sum of N_lambda^2.

    A point (t, u') meets the plane (u, t') iff level(u, t) == level(u', t'),
    with level(u, (y, z)) = u y - z (multiplicative) or u y + z (additive).
    """
    variant = Variant.parse(variant)
    T = _as_rows(T, 2)
    u = np.asarray(list(F) if not isinstance(F, np.ndarray) else F, dtype=np.int64)
    sign = -1 if variant is Variant.MULTIPLICATIVE else 1
    counts = np.zeros(p, dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(T)))
    for lo in range(0, len(u), step):
        lv = (u[lo:lo + step, None] * T[None, :, 0] + sign * T[None, :, 1]) % p
        counts += np.bincount(lv.ravel(), minlength=p)
    return int((counts * counts).sum())


def max_collinear(R, p: int, budget: int | None = 200_000) -> int | None:
    """Largest number of points of R on one line, or None if over ``budget`` pairs.

    Each unordered pair is keyed by its line: direction scaled so its first
    nonzero entry is 1, plus the line's unique point with 0 in that slot.
    A line holding t points collects t(t-1)/2 pairs.
    """
    _require_numpy_field(p)
    R = np.unique(_as_rows(R, 3) % p, axis=0)
    n = len(R)
    if n <= 2:
        return n
    npairs = n * (n - 1) // 2
    if budget is not None and npairs > budget:
        return None
    inv = inverse_table(p)
    i, j = np.triu_indices(n, k=1)
    P, Q = R[i], R[j]
    d = (Q - P) % p
    piv = (d != 0).argmax(axis=1)
    rows = np.arange(len(d))
    d = d * inv[d[rows, piv]][:, None] % p
    base = (P - P[rows, piv][:, None] * d) % p
    keys = np.concatenate([piv[:, None], d, base], axis=1)
    _, counts = np.unique(keys, axis=0, return_counts=True)
    c = int(counts.max())
    return (1 + math.isqrt(1 + 8 * c)) // 2


def _size(x) -> int:
    return x if isinstance(x, int) else len(x)


def k_paper_bound(A, C, fAB) -> int:
    """max{|A|, |C|, |f(A, B)|}; arguments may be sets or sizes."""
    return max(_size(A), _size(C), _size(fAB))


def k_corrected_bound(A, C, fAB, m: int) -> int:
    """max{|A|, m |C|, |f(A, B)|} with m the fibre bound on A.

    A line of the plane holding T points from several a with equal
    g(a)h(a) (or equal g(a) in the additive case) carries up to m |C| of them.
    """
    return max(_size(A), m * _size(C), _size(fAB))


def rudnev_rhs(size_R: int, size_S: int, k: int) -> float:
    return math.sqrt(size_R) * size_S + k * size_S


def p2_gate(size_R: int, field: PrimeField) -> bool:
    """True when |R| <= p^2, the branch where the incidence bound is applied."""
    return size_R <= field.p ** 2


@dataclass(frozen=True)
class IncidenceReport:
    size_R: int
    size_S: int
    size_T: int
    size_fAB: int
    incidences: int
    method: str  # "explicit" (built R, S) or "levels" (sum of N_lambda^2)
    k_exact: int | None
    k_paper: int
    k_corrected: int
    rudnev_rhs: float
    p2_gate: bool
    structure_ok: bool | None  # None when R, S were not materialised
    oracle_incidences: int | None = None
    E: int | None = None

    @property
    def k_used(self) -> int:
        return self.k_exact if self.k_exact is not None else self.k_paper

    @property
    def rudnev_ratio(self) -> float:
        rhs = rudnev_rhs(self.size_R, self.size_S, self.k_used)
        return self.incidences / rhs if rhs else 0.0

    @property
    def E_le_I(self) -> bool | None:
        return None if self.E is None else self.E <= self.incidences

    @property
    def k_ok(self) -> bool | None:
        return None if self.k_exact is None else self.k_exact <= self.k_paper

    @property
    def oracle_ok(self) -> bool | None:
        return None if self.oracle_incidences is None else self.oracle_incidences == self.incidences


def incidence_report(
    variant,
    A: FSet,
    B: FSet,
    C: FSet,
    spec: ExpanderSpec,
    *,
    m_A: int = 1,
    E: int | None = None,
    incidence_budget: int = 100_000,
    collinear_budget: int | None = 200_000,
    oracle_budget: int = 0,
) -> IncidenceReport:
    """Build R and S (when |R| <= ``incidence_budget``) and measure them.

    Above the budget, sizes come from |R| = |T| |f(A, B)| and I(R, S) from
    :func:`incidences_by_level`. The naive oracle runs when |R||S| is at most
    ``oracle_budget``.
    """
    variant = Variant.parse(variant)
    check_inputs(A, B, C, spec)
    p = spec.p
    field = PrimeField(p)
    T = projection_T(variant, A, C, spec)
    F = np.unique(_image_array(spec, A, B))
    size_T, size_F = len(T), len(F)
    predicted = size_T * size_F
    oracle = None
    k_exact = None
    if predicted <= incidence_budget:
        R = build_R(variant, A, B, C, spec)
        S = build_S(variant, A, B, C, spec)
        size_R, size_S = len(R), len(S)
        proj = np.unique(R[:, :2], axis=0)
        structure_ok = (
            size_R == size_S == predicted
            and np.array_equal(proj, T)
            and np.array_equal(np.unique(R[:, 2]), F)
        )
        inc = count_incidences(R, S, p)
        method = "explicit"
        if size_R * size_S <= oracle_budget:
            oracle = count_incidences_naive(R, S, p)
        if collinear_budget is None or size_R * (size_R - 1) // 2 <= collinear_budget:
            k_exact = max_collinear(R, p, budget=None)
    else:
        size_R = size_S = predicted
        structure_ok = None
        inc = incidences_by_level(variant, T, F, p)
        method = "levels"
    k_paper = k_paper_bound(A, C, size_F)
    return IncidenceReport(
        size_R=size_R,
        size_S=size_S,
        size_T=size_T,
        size_fAB=size_F,
        incidences=inc,
        method=method,
        k_exact=k_exact,
        k_paper=k_paper,
        k_corrected=k_corrected_bound(A, C, size_F, m_A),
        rudnev_rhs=rudnev_rhs(size_R, size_S, k_exact if k_exact is not None else k_paper),
        p2_gate=p2_gate(size_R, field),
        structure_ok=structure_ok,
        oracle_incidences=oracle,
        E=E,
    )
