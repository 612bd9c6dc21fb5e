from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from springerfib.errors import DivisionByZero, FieldMismatch, InvalidShape
from springerfib.scalar import (
    GF,
    QQ,
    QQi,
    Scalar,
    arith,
    field_from_name,
    is_prime,
    parse_scalar,
    sqrt_minus_one,
)


def test_rational_sum():
    assert QQ("1/2") + QQ("1/3") == QQ("5/6")


def test_prime_field_product():
    assert arith(GF(5)(2), GF(5)(3), "mul") == GF(5)(1)


def test_gaussian_i_squared():
    i = QQi("i")
    assert i * i == QQi(-1)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        QQ(1) / QQ(0)
    with pytest.raises(DivisionByZero):
        GF(7)(3) / GF(7)(0)


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        GF(5)(1) + GF(7)(1)
    with pytest.raises(FieldMismatch):
        arith(QQ(1), QQi(1), "add")


def test_sqrt_minus_one_examples():
    assert sqrt_minus_one(QQi) == QQi("i")
    assert sqrt_minus_one(GF(5)) == GF(5)(2)
    assert sqrt_minus_one(QQ) is None


def test_sqrt_minus_one_residue_classes():
    for p in range(3, 98):
        if not is_prime(p):
            continue
        squares = {a * a % p for a in range(p)}
        s = sqrt_minus_one(GF(p))
        assert (s is None) == (p % 4 == 3) == ((p - 1) not in squares)
        if s is not None:
            assert s * s == GF(p)(-1)
            assert s.value <= p - s.value


def test_rationals_canonical():
    v = QQ(Fraction(6, -4))
    assert v.value == Fraction(-3, 2)
    assert v.value.denominator > 0


def test_parse_scalar_syntax():
    assert parse_scalar("3/4") == QQ("3/4")
    assert parse_scalar("2+5i") == Scalar(QQi, QQi.coerce("2+5i"))
    assert parse_scalar("7 mod 13") == GF(13)(7)
    assert parse_scalar("-1 mod 5") == GF(5)(4)


def test_field_names():
    assert field_from_name("Q") is QQ
    assert field_from_name("Qi") is QQi
    assert field_from_name("Fp:17") == GF(17)
    assert field_from_name("Fp2:3").sqrt_minus_one() is not None
    with pytest.raises(InvalidShape):
        field_from_name("R")


def test_gaussian_prime_field_square_root():
    f = field_from_name("Fp2:7")
    s = f.sqrt_minus_one()
    assert f.norm(s * s) == f.coerce(-1)


def test_prime_field_elements():
    assert sorted(GF(5).elements()) == [0, 1, 2, 3, 4]


rationals = st.fractions(max_denominator=50).map(QQ)
residues = st.integers(0, 12).map(GF(13))
gaussians = st.tuples(st.fractions(max_denominator=20), st.fractions(max_denominator=20)).map(
    lambda t: QQi(f"{t[0]}") + QQi(f"{t[1]}") * QQi("i")
)


@pytest.mark.parametrize("values", [rationals, residues, gaussians], ids=["Q", "F13", "Qi"])
def test_field_axioms(values):
    @given(values, values, values)
    def check(a, b, c):
        assert (a + b) + c == a + (b + c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        if not a.is_zero():
            assert a * a.inverse() == a.field(1)

    check()


@given(st.fractions(max_denominator=1000), st.fractions(max_denominator=1000))
def test_rational_lowest_terms(x, y):
    r = (QQ(x) * QQ(y) + QQ(x)).value
    assert r.denominator > 0
    assert Fraction(r.numerator, r.denominator) == r
