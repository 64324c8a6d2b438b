"""
Bezout matrices of scalar and matrix polynomials.

Every Bezout matrix here is phi_unmap of a bivariate quotient N(x, y)/(x - y).
The numerators are formed in the working basis; the division itself is done
on monomial coefficients and converted back.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

import numpy as np

from app.core.errors import DivisionError, IncompatibleMultipliersError, PreconditionError, TheoremViolation
from app.services import bases as B
from app.services import fields as F
from app.services.bases import Basis
from app.services.blockpoly import (
    BivariateMatrixPolynomial,
    BlockMatrix,
    MatrixPolynomial,
    phi_unmap,
)
from app.services.fields import Field
from app.services.polynomials import ScalarPoly

logger = logging.getLogger("bezout")


@dataclass(frozen=True)
class BezoutResult:
    """A Bezout block matrix together with its Bezoutian phi(matrix)."""

    matrix: BlockMatrix
    bezoutian: BivariateMatrixPolynomial
    grade: int
    multiplier_grade: int

    @property
    def field(self) -> Field:
        return self.matrix.field

    def kernel(self) -> list[np.ndarray]:
        return F.kernel_basis(self.field, self.matrix.data)

    @property
    def kernel_dimension(self) -> Optional[int]:
        """None over floating fields, where no rank decision is made."""
        if not self.field.exact:
            return None
        return len(self.kernel())


def _zero_grid_block(field: Field, n: int) -> np.ndarray:
    return F.zeros(field, n, n)


def divide_x_minus_y(num: BivariateMatrixPolynomial) -> BivariateMatrixPolynomial:
    """The exact quotient N(x, y)/(x - y), with grades one lower in each variable."""
    field, n = num.field, num.n
    gy, gx = num.grade_y, num.grade_x
    mono = num.to_monomial_grid()

    for d in range(gy + gx + 1):
        acc = _zero_grid_block(field, n)
        for a in range(max(0, d - gx), min(gy, d) + 1):
            acc = acc + mono[a, d - a]
        if not F.is_zero_matrix(field, acc):
            raise DivisionError(
                f"N(x, x) has a nonzero coefficient at x^{d}; N is not divisible by x - y",
                detail={"degree": d},
            )

    qy, qx = max(gy - 1, 0), max(gx - 1, 0)
    quot = BivariateMatrixPolynomial.zeros(field, Basis.monomial(), qy, qx, n).grid
    if gy >= 1 and gx >= 1:
        # N_{a,b} = f_{a,b-1} - f_{a-1,b}
        for a in range(gy):
            for b in range(1, gx + 1):
                above = quot[a - 1, b] if a >= 1 and b <= gx - 1 else _zero_grid_block(field, n)
                quot[a, b - 1] = mono[a, b] + above

    check = _times_x_minus_y(field, quot, gy, gx, n)
    if not F.matrices_equal(field, check.reshape(-1, 1), mono.reshape(-1, 1)):
        raise TheoremViolation("quotient by x - y does not multiply back to the numerator")

    logger.debug("divided a grade (%d, %d) numerator by x - y", gy, gx)
    return BivariateMatrixPolynomial.from_monomial_grid(field, num.basis, quot)


def _times_x_minus_y(field: Field, quot: np.ndarray, gy: int, gx: int, n: int) -> np.ndarray:
    out = BivariateMatrixPolynomial.zeros(field, Basis.monomial(), gy, gx, n).grid
    rows, cols = quot.shape[0], quot.shape[1]
    for a in range(rows):
        for b in range(cols):
            if a <= gy and b + 1 <= gx:
                out[a, b + 1] = out[a, b + 1] + quot[a, b]
            if a + 1 <= gy and b <= gx:
                out[a + 1, b] = out[a + 1, b] - quot[a, b]
    return out


def _result(quotient: BivariateMatrixPolynomial, grade: int, multiplier_grade: int) -> BezoutResult:
    quotient = quotient.with_grades(max(multiplier_grade - 1, 0), max(grade - 1, 0))
    return BezoutResult(phi_unmap(quotient), quotient, grade, multiplier_grade)


def _promote(polys: Sequence[MatrixPolynomial]) -> tuple[int, list[MatrixPolynomial]]:
    grade = max(p.grade for p in polys)
    n = polys[0].n
    for p in polys[1:]:
        if p.n != n:
            raise PreconditionError(f"matrix sizes differ: {n} vs {p.n}")
        if p.field != polys[0].field or p.basis != polys[0].basis:
            raise PreconditionError("all polynomials must share a field and a basis")
    return grade, [p.with_grade(grade) for p in polys]


def bezout_lt(
    p1: MatrixPolynomial,
    p2: MatrixPolynomial,
    m1: MatrixPolynomial,
    m2: MatrixPolynomial,
) -> BezoutResult:
    """(M2(y) P2(x) - M1(y) P1(x))/(x - y) for multipliers with M1 P1 = M2 P2."""
    if not (m1 @ p1).equals(m2 @ p2):
        raise IncompatibleMultipliersError("the multipliers do not satisfy M1 P1 = M2 P2")
    k, (p1, p2) = _promote([p1, p2])
    ell, (m1, m2) = _promote([m1, m2])
    if p1.n != m1.n or p1.basis != m1.basis:
        raise PreconditionError("multipliers and polynomials must share size and basis")
    if k < 1 or ell < 1:
        raise PreconditionError("Bezout matrices need grades of at least 1")
    num = BivariateMatrixPolynomial.from_product(m2, p2) - BivariateMatrixPolynomial.from_product(m1, p1)
    logger.debug("Lerer-Tismenetsky Bezoutian: n=%d, multiplier grade %d, grade %d", p1.n, ell, k)
    return _result(divide_x_minus_y(num), k, ell)


def bezout_commuting(p1: MatrixPolynomial, p2: MatrixPolynomial) -> BezoutResult:
    """B(P1, P2) = (P1(y) P2(x) - P2(y) P1(x))/(x - y); needs P1 P2 = P2 P1."""
    if not (p1 @ p2).equals(p2 @ p1):
        raise IncompatibleMultipliersError("P1 and P2 do not commute")
    k, (p1, p2) = _promote([p1, p2])
    if k < 1:
        raise PreconditionError("Bezout matrices need a grade of at least 1")
    num = BivariateMatrixPolynomial.from_product(p1, p2) - BivariateMatrixPolynomial.from_product(p2, p1)
    return _result(divide_x_minus_y(num), k, k)


def bezout_onesided(p1: MatrixPolynomial, p2: MatrixPolynomial) -> BezoutResult:
    """(P1(y) P2(x) - P1(x) P2(y))/(x - y).

    Vanishes on y = x for any inputs, but unlike the Lerer-Tismenetsky
    matrix its kernel says nothing reliable about common eigenpairs.
    """
    k, (p1, p2) = _promote([p1, p2])
    if k < 1:
        raise PreconditionError("Bezout matrices need a grade of at least 1")
    field = p1.field
    num = BivariateMatrixPolynomial.zeros(field, p1.basis, k, k, p1.n)
    grid = num.grid
    for i in range(k + 1):
        for j in range(k + 1):
            grid[i, j] = p1.coeffs[i] @ p2.coeffs[j] - p1.coeffs[j] @ p2.coeffs[i]
    return _result(divide_x_minus_y(num), k, k)


ScalarInput = Union[ScalarPoly, Sequence[Any]]


def _scalar_as_matpoly(p: ScalarInput, grade: int, basis: Basis, field: Field) -> MatrixPolynomial:
    if isinstance(p, ScalarPoly):
        coeffs = B.from_monomial(basis, p, grade, field)
    else:
        coeffs = [field.coerce(c) for c in p]
        if len(coeffs) > grade + 1 and any(not field.is_zero(c) for c in coeffs[grade + 1:]):
            raise PreconditionError(f"polynomial has degree above the grade {grade}")
        coeffs = (coeffs + [field.zero()] * (grade + 1))[: grade + 1]
    return MatrixPolynomial.from_coeffs(field, basis, [[[c]] for c in coeffs])


def bezout_scalar(
    p1: ScalarInput,
    p2: ScalarInput,
    grade: int,
    basis: Basis,
    field: Optional[Field] = None,
) -> BezoutResult:
    """k x k Bezout matrix of two scalar polynomials at an explicit grade.

    ``p1``/``p2`` are ScalarPolys (monomial coefficients) or coefficient
    sequences in ``basis``.
    """
    if field is None:
        if not isinstance(p1, ScalarPoly):
            raise PreconditionError("a field is needed for raw coefficient sequences")
        field = p1.field
    a = _scalar_as_matpoly(p1, grade, basis, field)
    b = _scalar_as_matpoly(p2, grade, basis, field)
    return bezout_commuting(a, b)
