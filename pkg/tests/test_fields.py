"""
Test suite for field arithmetic and exact linear algebra.

Covers:
- Literal parsing and formatting for every field.
- Determinant, kernel, solve and inverse over the rationals and GF(2).
- Field axioms on random triples.
- Rejection of exact-only operations over floating fields.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from app.core.errors import FieldError, InputError, SingularMatrixError
from app.services import fields as F
from app.services.fields import GaussianRational, PrimeField

GF2 = PrimeField(2)


def test_rational_literals_parse_in_lowest_terms():
    """"1/2" parses to one half and "4/8" is reduced."""
    assert F.RATIONAL.parse("1/2") == Fraction(1, 2)
    assert F.RATIONAL.parse("4/8") == Fraction(1, 2)
    assert F.RATIONAL.parse("-3") == Fraction(-3)
    assert F.RATIONAL.format(Fraction(-6, 4)) == "-3/2"


def test_gaussian_literal_round_trip():
    """Gaussian rationals parse from "a+b*i" and format back the same way."""
    z = F.GAUSSIAN.parse("1/2-3*i")
    assert z == GaussianRational(Fraction(1, 2), Fraction(-3))
    assert F.GAUSSIAN.parse(F.GAUSSIAN.format(z)) == z
    assert F.GAUSSIAN.parse("i") == GaussianRational(0, 1)
    assert F.GAUSSIAN.conj(F.GAUSSIAN.conj(z)) == z


def test_prime_field_values_reduce_mod_p():
    """GF(7) elements lie in [0, 7) and fractions invert the denominator."""
    gf7 = PrimeField(7)
    assert gf7.format(gf7.parse("10")) == "3"
    assert gf7.parse("1/3") * gf7.coerce(3) == gf7.one()
    with pytest.raises(InputError):
        PrimeField(6)


def test_field_tags_resolve():
    """Document tags and CLI shorthands name the same fields."""
    assert F.field_from_tag("rational") is F.RATIONAL
    assert F.field_from_tag({"gf": 5}) == PrimeField(5)
    assert F.field_from_tag("gf2") == GF2
    assert F.field_from_tag("c64") is F.COMPLEX128
    with pytest.raises(InputError):
        F.field_from_tag("quaternion")


def test_determinant_examples():
    """Identity and the two GF(2) Bezout matrices have the expected determinants."""
    assert F.determinant(F.RATIONAL, F.identity(F.RATIONAL, 3)) == 1
    assert F.determinant(GF2, F.as_matrix(GF2, [[1, 1], [1, 0]])) == GF2.one()
    assert F.determinant(GF2, F.as_matrix(GF2, [[0, 0, 0], [0, 1, 1], [0, 1, 0]])) == GF2.zero()


def test_kernel_examples():
    """Kernel bases match the worked examples."""
    assert F.kernel_basis(F.RATIONAL, F.identity(F.RATIONAL, 2)) == []
    ker = F.kernel_basis(GF2, F.as_matrix(GF2, [[0, 0, 0], [0, 1, 1], [0, 1, 0]]))
    assert len(ker) == 1
    assert [GF2.format(x) for x in ker[0]] == ["1", "0", "0"]
    assert len(F.kernel_basis(F.RATIONAL, F.zeros(F.RATIONAL, 2, 2))) == 2


def test_solve_multiplies_back(rng):
    """A X = B exactly for a random nonsingular rational A."""
    a = F.random_matrix(F.RATIONAL, rng, 4, 4, 20)
    while F.determinant(F.RATIONAL, a) == 0:
        a = F.random_matrix(F.RATIONAL, rng, 4, 4, 20)
    b = F.random_matrix(F.RATIONAL, rng, 4, 2, 20)
    x = F.solve(F.RATIONAL, a, b)
    assert F.matrices_equal(F.RATIONAL, a @ x, b)
    half = F.solve(F.RATIONAL, F.as_matrix(F.RATIONAL, [[2, 0], [0, 2]]), F.identity(F.RATIONAL, 2))
    assert half[0, 0] == Fraction(1, 2) and half[0, 1] == 0


def test_determinant_zero_iff_kernel_nonempty(rng):
    """det A = 0 exactly when A has a nontrivial kernel."""
    for _ in range(20):
        a = F.random_matrix(F.RATIONAL, rng, 3, 3, 3)
        a[2] = a[0] * rng.randint(-2, 2)
        singular = F.determinant(F.RATIONAL, a) == 0
        assert singular == bool(F.kernel_basis(F.RATIONAL, a))


def test_singular_solve_raises():
    """Solving with a singular matrix raises SingularMatrixError."""
    with pytest.raises(SingularMatrixError):
        F.inverse(F.RATIONAL, F.zeros(F.RATIONAL, 2, 2))


@pytest.mark.parametrize("field", [F.RATIONAL, F.GAUSSIAN, PrimeField(13)])
def test_field_axioms_on_random_triples(field, rng):
    """Associativity, distributivity and inverses hold on random triples."""
    for _ in range(25):
        a, b, c = (field.random(rng, 50) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        if not field.is_zero(a):
            assert a * (field.one() / a) == field.one()


def test_floating_fields_refuse_exact_operations():
    """kernel_basis over floats raises FieldError."""
    with pytest.raises(FieldError):
        F.kernel_basis(F.FLOAT64, F.identity(F.FLOAT64, 2))


def test_prime_field_elements_hash_like_their_representative():
    """GF(p) elements equal to an int share its hash, so sets and dict keys mix."""
    gf7 = PrimeField(7)
    three = gf7.coerce(10)
    assert three == 3 and hash(three) == hash(3)
    assert three != 10
    assert {three, 3} == {3}
    assert {3: "x"}[three] == "x"
