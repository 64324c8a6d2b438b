"""
Test suite for the polynomial literal grammar and document files.

Covers:
- Scalar polynomial literals over the rationals, Gaussian rationals and GF(p).
- Ascending coefficient lists.
- MatrixPolynomial and Pencil documents: round trip and validation errors.
"""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.core.errors import InputError
from app.models.schemas import MatPolyDocument
from app.persistence import documents
from app.persistence.literals import parse_scalar_list, parse_scalar_poly
from app.services import fields as F
from app.services.bases import Basis
from app.services.blockpoly import BlockMatrix, Pencil
from app.services.fields import GaussianRational, PrimeField
from app.services.polynomials import ScalarPoly


def test_parse_rational_polynomial():
    """x^2+3/2*x-1 has ascending coefficients [-1, 3/2, 1]."""
    p = parse_scalar_poly("x^2+3/2*x-1", F.RATIONAL)
    assert p.coeffs == (Fraction(-1), Fraction(3, 2), Fraction(1))
    assert parse_scalar_poly(p.format(), F.RATIONAL) == p


def test_parse_collects_repeated_powers_and_spaces():
    """Terms of equal degree add up and spaces are ignored."""
    p = parse_scalar_poly(" x + 2*x - x^3 ", F.RATIONAL)
    assert p.coeffs == (0, 3, 0, -1)
    assert parse_scalar_poly("x-x", F.RATIONAL).is_zero


def test_parse_parenthesized_gaussian_coefficient():
    """(1+2*i)*x keeps the inner sign inside the coefficient."""
    p = parse_scalar_poly("(1+2*i)*x-(1/2)", F.GAUSSIAN)
    assert p.coefficient(1) == GaussianRational(1, 2)
    assert p.coefficient(0) == GaussianRational(Fraction(-1, 2), 0)


def test_parse_exponent_notation_is_one_term():
    """1e-3 is a single coefficient, not 1e minus 3."""
    p = parse_scalar_poly("1e-3*x+2", F.RATIONAL)
    assert p.coeffs == (Fraction(2), Fraction(1, 1000))


def test_parse_over_prime_field():
    """Coefficients reduce mod p."""
    gf2 = PrimeField(2)
    p = parse_scalar_poly("x^2+3*x+1", gf2)
    assert p == ScalarPoly.from_coeffs(gf2, [1, 1, 1])


@pytest.mark.parametrize("text", ["", "x^2+(1", "x)+1", "2*y", "1/0"])
def test_parse_rejects_malformed_literals(text):
    """Malformed literals raise InputError."""
    with pytest.raises(InputError):
        parse_scalar_poly(text, F.RATIONAL)


def test_parse_scalar_list():
    """Comma lists parse left to right; empty items are refused."""
    assert parse_scalar_list("0, 1/2 ,3", F.RATIONAL) == [0, Fraction(1, 2), 3]
    with pytest.raises(InputError):
        parse_scalar_list("1,,2", F.RATIONAL)


def test_cubic_document_reads_exactly(cubic_cheb):
    """The fixture is a rational Chebyshev polynomial of grade 3."""
    assert cubic_cheb.n == 2 and cubic_cheb.grade == 3
    assert cubic_cheb.basis == Basis.chebyshev_t()
    assert cubic_cheb.coefficient(1)[0, 0] == Fraction(1, 2)
    assert cubic_cheb.coefficient(2)[1, 1] == Fraction(5, 3)


def test_matpoly_document_round_trip(cubic_cheb, write_matpoly):
    """serialize/parse and write/read preserve every coefficient."""
    assert documents.parse(documents.serialize(cubic_cheb)) == cubic_cheb
    assert documents.read_matpoly(write_matpoly(cubic_cheb)) == cubic_cheb


def test_gaussian_document_round_trip(random_matpoly, write_matpoly):
    """Gaussian-rational literals survive a file round trip."""
    p = random_matpoly(2, 2, field=F.GAUSSIAN)
    assert documents.read_matpoly(write_matpoly(p)) == p


def test_pencil_document_round_trip(tmp_path):
    """A pencil with an ansatz round-trips through write_document/read_pencil."""
    x = BlockMatrix(F.as_matrix(F.RATIONAL, [[1, 0], [0, Fraction(1, 3)]]), 1, F.RATIONAL)
    y = BlockMatrix(F.as_matrix(F.RATIONAL, [[0, -2], [5, 1]]), 1, F.RATIONAL)
    pencil = Pencil(x, y, Basis.monomial(), (F.RATIONAL.one(), F.RATIONAL.zero()))
    path = tmp_path / "pencil.json"
    documents.write_document(path, documents.pencil_to_document(pencil))
    back = documents.read_pencil(path)
    assert back == pencil
    assert back.ansatz == pencil.ansatz


def test_document_shape_errors_are_validation_errors():
    """Wrong coefficient count, non-square blocks and bad tags are refused."""
    good = {"field": "rational", "basis": "monomial", "n": 1, "grade": 1, "coeffs": [[["1"]], [["2"]]]}
    MatPolyDocument.model_validate(good)
    for bad in (
        {**good, "grade": 2},
        {**good, "coeffs": [[["1", "2"]], [["2"]]]},
        {**good, "field": "quaternion"},
        {**good, "field": "gf2", "basis": "chebyshev-t"},
        {**good, "n": 0},
    ):
        with pytest.raises(ValidationError):
            MatPolyDocument.model_validate(bad)


def test_field_tag_is_normalized():
    """The "gf7" shorthand is stored as {"gf": 7}."""
    doc = MatPolyDocument(field="gf7", n=1, grade=0, coeffs=[[["3"]]])
    assert doc.field == {"gf": 7}


def test_unreadable_and_invalid_files_raise_input_error(tmp_path):
    """Missing files and broken JSON become InputError."""
    with pytest.raises(InputError):
        documents.read_matpoly(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError):
        documents.read_matpoly(broken)


def test_bad_literal_in_document_raises_input_error(tmp_path):
    """A grid entry outside the field grammar is an input error."""
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 1, "grade": 0, "coeffs": [[["1/0"]]]}), encoding="utf-8")
    with pytest.raises(InputError):
        documents.read_matpoly(path)
