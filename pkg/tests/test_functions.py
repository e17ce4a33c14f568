import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpexpand.field import PrimeField
from fpexpand.functions import (
    DomainError,
    ExpanderSpec,
    FunctionTable,
    constant,
    corollary_spec,
    eval_f,
    explicit,
    identity,
    image_f,
    inverse,
    load_table_csv,
    monomial,
    mu,
    parse_family,
    pointwise_product,
)
from fpexpand.sets import FSet, inverse_set, productset, sumset

from oracles import fibre_max


def test_families_match_formulas():
    F = PrimeField(13)
    for x in range(1, 13):
        assert identity(F)(x) == x
        assert inverse(F)(x) * x % 13 == 1
        assert monomial(F, 3)(x) == pow(x, 3, 13)
        assert constant(F, 5)(x) == 5


def test_zero_values_rejected():
    F = PrimeField(7)
    with pytest.raises(ValueError):
        explicit(F, {1: 2, 2: 0})
    with pytest.raises(DomainError):
        FunctionTable(FSet((0, 1), 7), (1, 1))
    assert constant(F, 0).is_zero()  # the one admitted exception


def test_mu_examples():
    F7 = PrimeField(7)
    assert mu(identity(F7)) == 1
    D5 = FSet((1, 2, 3, 4, 5), 7, True)
    assert mu(constant(F7, 3, D5)) == 5
    assert mu(monomial(F7, 2)) == 2  # squares 1, 4, 2, 2, 4, 1


def test_mu_pigeonhole_exhaustive():
    for p in (5, 7, 11, 13):
        F = PrimeField(p)
        for k in range(-3, p):
            t = monomial(F, k)
            assert mu(t) == fibre_max(t.values)
            assert mu(t) * len(set(t.values)) >= len(t.domain)


def test_mu_restricted():
    F = PrimeField(7)
    sq = monomial(F, 2)
    assert mu(sq, FSet((1, 2, 4), 7)) == 1
    assert mu(sq, FSet((1, 6), 7)) == 2


def test_pointwise_product():
    F = PrimeField(7)
    assert pointwise_product(identity(F), identity(F)).values == monomial(F, 2).values
    assert pointwise_product(identity(F), inverse(F)).values == constant(F, 1).values
    assert pointwise_product(constant(F, 2), constant(F, 3)).values == constant(F, 6).values
    with pytest.raises(ValueError):
        pointwise_product(identity(F), constant(F, 0))
    with pytest.raises(DomainError):
        pointwise_product(identity(F), identity(F, FSet((1, 2), 7, True)))


def test_eval_f_examples():
    F = PrimeField(7)
    idid = ExpanderSpec(identity(F), identity(F))
    assert eval_f(idid, 2, 2) == 1
    assert eval_f(ExpanderSpec(identity(F), constant(F, 1)), 3, 1) == 6
    assert eval_f(idid, 3, 4) == 0
    with pytest.raises(DomainError):
        eval_f(ExpanderSpec(identity(F, FSet((1,), 7, True)), identity(F, FSet((1,), 7, True))), 2, 1)


def test_image_f_example():
    F = PrimeField(7)
    A = FSet((1, 2, 3), 7, True)
    spec = ExpanderSpec(identity(F), identity(F))
    assert image_f(spec, A, A).elements == (1, 2, 3, 4, 5, 6)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([7, 11, 13, 31]), st.data())
def test_corollary_specialisations(p, data):
    F = PrimeField(p)
    A = FSet(tuple(data.draw(st.sets(st.integers(1, p - 1), min_size=1, max_size=6))), p, True)
    B = FSet(tuple(data.draw(st.sets(st.integers(1, p - 1), min_size=1, max_size=6))), p, True)
    assert image_f(corollary_spec("product", F), A, B) == productset(A, B)
    assert image_f(corollary_spec("inverse-sum", F), A, B) == sumset(inverse_set(A), B)
    shifted = FSet(tuple((b + 1) % p for b in B), p)
    assert image_f(corollary_spec("shifted-product", F), A, B) == productset(A, shifted)
    spec = ExpanderSpec(monomial(F, 2), inverse(F))
    img = image_f(spec, A, B)
    for a in A:
        for b in B:
            assert eval_f(spec, a, b) in img
    assert len(img) <= min(len(A) * len(B), p)


def test_parse_family_and_csv(tmp_path):
    F = PrimeField(11)
    assert parse_family("monomial:3", F).values == monomial(F, 3).values
    assert parse_family("constant:4", F).family == "constant:4"
    with pytest.raises(ValueError):
        parse_family("cubic", F)
    path = tmp_path / "g.csv"
    path.write_text("x,value\n1,3\n2,3\n5,7\n")
    t = load_table_csv(path, F)
    assert t.domain.elements == (1, 2, 5) and t(2) == 3 and mu(t) == 2
    assert parse_family(f"explicit:{path}", F, FSet((1, 5), 11, True)).values == (3, 7)
