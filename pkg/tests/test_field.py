from itertools import product

import pytest

from fpexpand.field import FieldElement, ModulusMismatch, NotPrimeError, PrimeField, add, inv, inverse_table, is_prime, mul


@pytest.mark.parametrize("p, x, y, expected", [(7, 3, 5, 1), (7, 0, 4, 4), (5, 4, 4, 3)])
def test_add(p, x, y, expected):
    F = PrimeField(p)
    assert add(F(x), F(y)) == F(expected)


@pytest.mark.parametrize("p, x, y, expected", [(7, 3, 5, 1), (7, 1, 6, 6), (5, 2, 4, 3)])
def test_mul(p, x, y, expected):
    F = PrimeField(p)
    assert mul(F(x), F(y)) == F(expected)


@pytest.mark.parametrize("p, x, expected", [(7, 3, 5), (7, 1, 1), (101, 2, 51)])
def test_inv(p, x, expected):
    F = PrimeField(p)
    assert inv(F(x)) == F(expected)
    assert (F(x) * F(expected)).value == 1


def test_inv_zero_is_domain_error(F7):
    with pytest.raises(ZeroDivisionError):
        inv(F7(0))
    with pytest.raises(ZeroDivisionError):
        F7.inv(14)


def test_modulus_mismatch():
    with pytest.raises(ModulusMismatch):
        add(PrimeField(5)(1), PrimeField(7)(1))
    with pytest.raises(ModulusMismatch):
        PrimeField(5)(1) * PrimeField(7)(1)


@pytest.mark.parametrize("p", [1, 2, 4, 9, 91, 561, 1 << 61])
def test_composite_or_too_small_rejected(p):
    with pytest.raises(NotPrimeError):
        PrimeField(p)


def test_large_prime_accepted():
    F = PrimeField((1 << 61) - 1)
    x = F(123456789)
    assert (x * x.inverse()).value == 1


def test_is_prime_matches_trial_division():
    def slow(n):
        return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))

    assert [n for n in range(3000) if is_prime(n)] == [n for n in range(3000) if slow(n)]


def test_canonical_values():
    F = PrimeField(11)
    assert F(-1).value == 10
    assert F(25).value == 3
    with pytest.raises(ValueError):
        FieldElement(11, 11)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_field_axioms_exhaustive(p):
    F = PrimeField(p)
    els = F.elements()
    for x, y in product(els, els):
        assert x + y == y + x
        assert x * y == y * x
    for x, y, z in product(els, els, els):
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
    for x in els[1:]:
        assert x.inverse().inverse() == x
        assert sorted(x * y for y in els) == els  # multiplication by x permutes F_p


def test_inverse_table():
    for p in (3, 7, 101, 1009):
        table = inverse_table(p)
        assert table[0] == 0
        assert all(x * int(table[x]) % p == 1 for x in range(1, p))
