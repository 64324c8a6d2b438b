"""
Matrix polynomials, block matrices and bivariate matrix polynomials.

The map phi sends a k x h grid of n x n blocks X to the bivariate polynomial
F(x, y) = sum X_{k-1-i, h-1-j} phi_i(y) phi_j(x) (0-based block indices):
block rows follow y, block columns follow x, both in descending degree.
Operations on one side of that duality (shift sums, evaluation, Sigma/R
multiplication) have a matching operation on the other, which the tests
exercise at random points.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from app.core.errors import FieldError, InputError, PreconditionError, TheoremViolation
from app.services import bases as B
from app.services import fields as F
from app.services.bases import Basis, BasisKind
from app.services.fields import Field
from app.services.polynomials import ScalarPoly, interpolate

logger = logging.getLogger("blockpoly")


def _same_field(a: Field, b: Field) -> None:
    if a != b:
        raise FieldError(f"operands live in different fields: {a} and {b}")


def _same_basis(a: Basis, b: Basis) -> None:
    if a != b:
        raise PreconditionError(f"operands use different bases: {a.kind.value} and {b.kind.value}")


# ---------------------------------------------------------------------------
# Block matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """A k x h grid of n x n blocks stored as one (nk) x (nh) object array."""

    # ndarray @ BlockMatrix defers to __rmatmul__
    __array_ufunc__ = None

    data: np.ndarray
    n: int
    field: Field

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError("block size must be positive")
        rows, cols = self.data.shape
        if rows % self.n or cols % self.n:
            raise InputError(f"a {rows}x{cols} matrix is not a grid of {self.n}x{self.n} blocks")

    @property
    def k(self) -> int:
        return self.data.shape[0] // self.n

    @property
    def h(self) -> int:
        return self.data.shape[1] // self.n

    @classmethod
    def zeros(cls, field: Field, k: int, h: int, n: int) -> "BlockMatrix":
        return cls(F.zeros(field, k * n, h * n), n, field)

    @classmethod
    def identity(cls, field: Field, k: int, n: int) -> "BlockMatrix":
        return cls(F.identity(field, k * n), n, field)

    @classmethod
    def from_blocks(cls, field: Field, grid: Sequence[Sequence[np.ndarray]]) -> "BlockMatrix":
        if not grid or not grid[0]:
            raise InputError("empty block grid")
        n = grid[0][0].shape[0]
        k, h = len(grid), len(grid[0])
        out = F.zeros(field, k * n, h * n)
        for i, row in enumerate(grid):
            if len(row) != h:
                raise InputError("ragged block grid")
            for j, blk in enumerate(row):
                if blk.shape != (n, n):
                    raise InputError(f"block ({i},{j}) has shape {blk.shape}, expected {(n, n)}")
                out[i * n:(i + 1) * n, j * n:(j + 1) * n] = blk
        return cls(out, n, field)

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.n
        return self.data[i * n:(i + 1) * n, j * n:(j + 1) * n]

    def _wrap(self, data: np.ndarray) -> "BlockMatrix":
        return BlockMatrix(data, self.n, self.field)

    def _check(self, other: "BlockMatrix") -> None:
        _same_field(self.field, other.field)
        if other.data.shape != self.data.shape or other.n != self.n:
            raise PreconditionError(
                f"block shapes differ: {self.k}x{self.h} vs {other.k}x{other.h} (n={self.n}, {other.n})"
            )

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        self._check(other)
        return self._wrap(self.data + other.data)

    def __sub__(self, other: "BlockMatrix") -> "BlockMatrix":
        self._check(other)
        return self._wrap(self.data - other.data)

    def __neg__(self) -> "BlockMatrix":
        return self._wrap(-self.data)

    def scale(self, s: Any) -> "BlockMatrix":
        return self._wrap(self.data * self.field.coerce(s))

    def __matmul__(self, other: Any) -> "BlockMatrix":
        rhs = other.data if isinstance(other, BlockMatrix) else other
        return self._wrap(self.data @ rhs)

    def __rmatmul__(self, other: np.ndarray) -> "BlockMatrix":
        return self._wrap(other @ self.data)

    def block_transpose(self) -> "BlockMatrix":
        return BlockMatrix.from_blocks(
            self.field, [[self.block(i, j) for i in range(self.k)] for j in range(self.h)]
        )

    def transpose(self) -> "BlockMatrix":
        return self._wrap(self.data.T.copy())

    def conj_transpose(self) -> "BlockMatrix":
        return self._wrap(F.conj_matrix(self.field, self.data.T))

    @property
    def is_zero(self) -> bool:
        return F.is_zero_matrix(self.field, self.data)

    def first_difference(self, other: "BlockMatrix", rtol: Optional[float] = None) -> Optional[tuple[int, int]]:
        """Position of the first block where the two matrices differ, or None."""
        self._check(other)
        for i in range(self.k):
            for j in range(self.h):
                if not F.matrices_equal(self.field, self.block(i, j), other.block(i, j), rtol):
                    return (i, j)
        return None

    def equals(self, other: "BlockMatrix", rtol: Optional[float] = None) -> bool:
        if self.data.shape != other.data.shape or self.n != other.n:
            return False
        return F.matrices_equal(self.field, self.data, other.data, rtol)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def format(self) -> list[list[str]]:
        return F.format_matrix(self.field, self.data)


# ---------------------------------------------------------------------------
# Matrix polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """P(t) = sum_i coeffs[i] phi_i(t) with a declared grade len(coeffs) - 1."""

    coeffs: tuple
    basis: Basis
    field: Field

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise InputError("a matrix polynomial needs at least one coefficient")
        n = self.coeffs[0].shape[0]
        for i, c in enumerate(self.coeffs):
            if c.shape != (n, n):
                raise InputError(f"coefficient {i} has shape {c.shape}, expected {(n, n)}")
        self.basis.check_field(self.field)
        self.basis.check_degree(self.grade)

    @classmethod
    def from_coeffs(
        cls, field: Field, basis: Basis, coeffs: Iterable[Any], grade: Optional[int] = None
    ) -> "MatrixPolynomial":
        mats = tuple(
            c if isinstance(c, np.ndarray) and c.dtype == object else F.as_matrix(field, c)
            for c in coeffs
        )
        poly = cls(mats, basis, field)
        return poly if grade is None else poly.with_grade(grade)

    @classmethod
    def zero(cls, field: Field, basis: Basis, n: int, grade: int = 0) -> "MatrixPolynomial":
        return cls(tuple(F.zeros(field, n, n) for _ in range(grade + 1)), basis, field)

    @classmethod
    def scalar_identity(
        cls, field: Field, basis: Basis, coeffs: Sequence[Any], n: int
    ) -> "MatrixPolynomial":
        """v(t) I_n for v given by its coefficients in ``basis``."""
        eye = F.identity(field, n)
        items = list(coeffs) or [field.zero()]
        return cls(tuple(eye * field.coerce(c) for c in items), basis, field)

    @classmethod
    def random(
        cls,
        field: Field,
        basis: Basis,
        n: int,
        grade: int,
        rng: random.Random,
        bound: int = 100,
    ) -> "MatrixPolynomial":
        return cls(
            tuple(F.random_matrix(field, rng, n, n, bound) for _ in range(grade + 1)), basis, field
        )

    @property
    def n(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def grade(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        """Index of the highest nonzero coefficient; -1 for the zero polynomial."""
        for i in range(self.grade, -1, -1):
            if not F.is_zero_matrix(self.field, self.coeffs[i]):
                return i
        return -1

    @property
    def leading(self) -> np.ndarray:
        """Coefficient at the declared grade."""
        return self.coeffs[-1]

    def coefficient(self, i: int) -> np.ndarray:
        if 0 <= i <= self.grade:
            return self.coeffs[i]
        return F.zeros(self.field, self.n, self.n)

    def with_grade(self, grade: int) -> "MatrixPolynomial":
        if grade < self.degree:
            raise PreconditionError(f"grade {grade} is below the degree {self.degree}")
        coeffs = tuple(self.coefficient(i) for i in range(grade + 1))
        return MatrixPolynomial(coeffs, self.basis, self.field)

    def evaluate(self, t: Any) -> np.ndarray:
        values = B.evaluate_basis(self.basis, self.grade + 1, t, self.field)
        acc = F.zeros(self.field, self.n, self.n)
        for c, phi in zip(self.coeffs, values):
            acc = acc + c * phi
        return acc

    __call__ = evaluate

    def _binary(self, other: "MatrixPolynomial", sign: int) -> "MatrixPolynomial":
        _same_field(self.field, other.field)
        _same_basis(self.basis, other.basis)
        if other.n != self.n:
            raise PreconditionError(f"sizes differ: {self.n} vs {other.n}")
        g = max(self.grade, other.grade)
        coeffs = tuple(
            self.coefficient(i) + other.coefficient(i) if sign > 0 else self.coefficient(i) - other.coefficient(i)
            for i in range(g + 1)
        )
        return MatrixPolynomial(coeffs, self.basis, self.field)

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        return self._binary(other, 1)

    def __sub__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        return self._binary(other, -1)

    def __neg__(self) -> "MatrixPolynomial":
        return MatrixPolynomial(tuple(-c for c in self.coeffs), self.basis, self.field)

    def scale(self, s: Any) -> "MatrixPolynomial":
        s = self.field.coerce(s)
        return MatrixPolynomial(tuple(c * s for c in self.coeffs), self.basis, self.field)

    def right_multiply(self, a: np.ndarray) -> "MatrixPolynomial":
        return MatrixPolynomial(tuple(c @ a for c in self.coeffs), self.basis, self.field)

    def map_coefficients(self, fn) -> "MatrixPolynomial":
        return MatrixPolynomial(tuple(fn(c) for c in self.coeffs), self.basis, self.field)

    def transpose(self) -> "MatrixPolynomial":
        return self.map_coefficients(lambda c: c.T.copy())

    def conj_transpose(self) -> "MatrixPolynomial":
        return self.map_coefficients(lambda c: F.conj_matrix(self.field, c.T))

    def to_monomial(self) -> "MatrixPolynomial":
        if self.basis.kind is BasisKind.MONOMIAL:
            return self
        u = B.to_monomial_matrix(self.basis, self.grade, self.field)
        coeffs = []
        for a in range(self.grade + 1):
            acc = F.zeros(self.field, self.n, self.n)
            for i in range(self.grade + 1):
                if not self.field.is_zero(u[i, a]):
                    acc = acc + self.coeffs[i] * u[i, a]
            coeffs.append(acc)
        return MatrixPolynomial(tuple(coeffs), Basis.monomial(), self.field)

    def in_basis(self, basis: Basis) -> "MatrixPolynomial":
        """Re-express a polynomial (any basis) in ``basis`` at the same grade."""
        if basis == self.basis:
            return self
        mono = self.to_monomial()
        if basis.kind is BasisKind.MONOMIAL:
            return mono
        w = B.from_monomial_matrix(basis, self.grade, self.field)
        coeffs = []
        for i in range(self.grade + 1):
            acc = F.zeros(self.field, self.n, self.n)
            for a in range(self.grade + 1):
                if not self.field.is_zero(w[a, i]):
                    acc = acc + mono.coeffs[a] * w[a, i]
            coeffs.append(acc)
        return MatrixPolynomial(tuple(coeffs), basis, self.field)

    def __matmul__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        """Product P(t) Q(t), returned in this basis at grade deg_P + deg_Q."""
        _same_field(self.field, other.field)
        _same_basis(self.basis, other.basis)
        a, b = self.to_monomial(), other.to_monomial()
        g = a.grade + b.grade
        coeffs = [F.zeros(self.field, self.n, other.n) for _ in range(g + 1)]
        for i, ca in enumerate(a.coeffs):
            for j, cb in enumerate(b.coeffs):
                coeffs[i + j] = coeffs[i + j] + ca @ cb
        return MatrixPolynomial(tuple(coeffs), Basis.monomial(), self.field).in_basis(self.basis)

    def times_x(self) -> "MatrixPolynomial":
        """x P(x) at grade + 1, through the basis recurrence."""
        coeffs = [F.zeros(self.field, self.n, self.n) for _ in range(self.grade + 2)]
        for j, c in enumerate(self.coeffs):
            for i, t in self.basis.recurrence(j).items():
                coeffs[i] = coeffs[i] + c * self.field.coerce(t)
        return MatrixPolynomial(tuple(coeffs), self.basis, self.field)

    def equals(self, other: "MatrixPolynomial", rtol: Optional[float] = None) -> bool:
        if self.field != other.field or self.basis != other.basis or self.n != other.n:
            return False
        g = max(self.grade, other.grade)
        return all(
            F.matrices_equal(self.field, self.coefficient(i), other.coefficient(i), rtol)
            for i in range(g + 1)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def entry_polys(self) -> list[list[ScalarPoly]]:
        """Entries as scalar polynomials in monomials."""
        mono = self.to_monomial()
        return [
            [
                ScalarPoly.from_coeffs(self.field, [c[r, s] for c in mono.coeffs])
                for s in range(self.n)
            ]
            for r in range(self.n)
        ]


def eval_matpoly(p: MatrixPolynomial, t: Any) -> np.ndarray:
    return p.evaluate(t)


def _poly_bareiss(field: Field, m: list[list[ScalarPoly]]) -> ScalarPoly:
    """Fraction-free elimination over F[t]; divisions are exact by Sylvester's identity."""
    n = len(m)
    sign = 1
    prev = ScalarPoly.constant(field, 1)
    for k in range(n - 1):
        if m[k][k].is_zero:
            swap = next((r for r in range(k + 1, n) if not m[r][k].is_zero), None)
            if swap is None:
                return ScalarPoly.zero(field)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                q, r = num.divmod(prev)
                if not r.is_zero:
                    raise TheoremViolation("inexact division in polynomial Bareiss elimination")
                m[i][j] = q
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det


def scalar_det(p: MatrixPolynomial) -> ScalarPoly:
    """det P(t) in monomial coefficients, exact."""
    field = p.field
    field.require_exact("scalar_det")
    bound = p.n * p.grade
    if field.characteristic == 0 or field.characteristic > bound:
        nodes = [field.coerce(i) for i in range(bound + 1)]
        values = [F.determinant(field, p.evaluate(t)) for t in nodes]
        return interpolate(field, nodes, values)
    logger.debug("GF(%d) too small for %d interpolation nodes; expanding symbolically",
                 field.characteristic, bound + 1)
    return _poly_bareiss(field, p.entry_polys())


def is_regular(p: MatrixPolynomial) -> bool:
    return not scalar_det(p).is_zero


# ---------------------------------------------------------------------------
# Bivariate matrix polynomials
# ---------------------------------------------------------------------------


def _grid(field: Field, gy: int, gx: int, n: int) -> np.ndarray:
    out = np.empty((gy + 1, gx + 1, n, n), dtype=object)
    out.fill(field.zero())
    return out


@dataclass(frozen=True, eq=False)
class BivariateMatrixPolynomial:
    """F(x, y) = sum grid[i, j] phi_i(y) phi_j(x), grid shape (g_y+1, g_x+1, n, n)."""

    grid: np.ndarray
    basis: Basis
    field: Field

    def __post_init__(self) -> None:
        if self.grid.ndim != 4 or self.grid.shape[2] != self.grid.shape[3]:
            raise InputError(f"bad bivariate coefficient grid shape {self.grid.shape}")

    @classmethod
    def zeros(cls, field: Field, basis: Basis, gy: int, gx: int, n: int) -> "BivariateMatrixPolynomial":
        return cls(_grid(field, gy, gx, n), basis, field)

    @classmethod
    def from_product(cls, py: MatrixPolynomial, px: MatrixPolynomial) -> "BivariateMatrixPolynomial":
        """Py(y) Px(x)."""
        _same_field(py.field, px.field)
        _same_basis(py.basis, px.basis)
        grid = _grid(py.field, py.grade, px.grade, py.n)
        for i, a in enumerate(py.coeffs):
            for j, b in enumerate(px.coeffs):
                grid[i, j] = a @ b
        return cls(grid, py.basis, py.field)

    @property
    def n(self) -> int:
        return self.grid.shape[2]

    @property
    def grade_y(self) -> int:
        return self.grid.shape[0] - 1

    @property
    def grade_x(self) -> int:
        return self.grid.shape[1] - 1

    def coefficient(self, i: int, j: int) -> np.ndarray:
        if 0 <= i <= self.grade_y and 0 <= j <= self.grade_x:
            return self.grid[i, j]
        return F.zeros(self.field, self.n, self.n)

    def _wrap(self, grid: np.ndarray) -> "BivariateMatrixPolynomial":
        return BivariateMatrixPolynomial(grid, self.basis, self.field)

    def with_grades(self, gy: int, gx: int) -> "BivariateMatrixPolynomial":
        """Pad with zeros, or drop rows/columns that are identically zero."""
        for i in range(self.grade_y + 1):
            for j in range(self.grade_x + 1):
                if (i > gy or j > gx) and not F.is_zero_matrix(self.field, self.grid[i, j]):
                    raise PreconditionError(
                        f"coefficient of phi_{i}(y)phi_{j}(x) is nonzero; cannot lower grades to ({gy}, {gx})"
                    )
        grid = _grid(self.field, gy, gx, self.n)
        for i in range(min(gy, self.grade_y) + 1):
            for j in range(min(gx, self.grade_x) + 1):
                grid[i, j] = self.grid[i, j]
        return self._wrap(grid)

    def evaluate(self, x: Any, y: Any) -> np.ndarray:
        phi_y = B.evaluate_basis(self.basis, self.grade_y + 1, y, self.field)
        phi_x = B.evaluate_basis(self.basis, self.grade_x + 1, x, self.field)
        acc = F.zeros(self.field, self.n, self.n)
        for i, py in enumerate(phi_y):
            for j, px in enumerate(phi_x):
                acc = acc + self.grid[i, j] * (py * px)
        return acc

    def _aligned(self, other: "BivariateMatrixPolynomial") -> tuple[np.ndarray, np.ndarray]:
        _same_field(self.field, other.field)
        _same_basis(self.basis, other.basis)
        gy = max(self.grade_y, other.grade_y)
        gx = max(self.grade_x, other.grade_x)
        return self.with_grades(gy, gx).grid, other.with_grades(gy, gx).grid

    def __add__(self, other: "BivariateMatrixPolynomial") -> "BivariateMatrixPolynomial":
        a, b = self._aligned(other)
        return self._wrap(a + b)

    def __sub__(self, other: "BivariateMatrixPolynomial") -> "BivariateMatrixPolynomial":
        a, b = self._aligned(other)
        return self._wrap(a - b)

    def __neg__(self) -> "BivariateMatrixPolynomial":
        return self._wrap(-self.grid)

    def scale(self, s: Any) -> "BivariateMatrixPolynomial":
        return self._wrap(self.grid * self.field.coerce(s))

    def swap_variables(self) -> "BivariateMatrixPolynomial":
        """F(y, x)."""
        return self._wrap(np.ascontiguousarray(self.grid.transpose(1, 0, 2, 3)))

    def transpose_coefficients(self) -> "BivariateMatrixPolynomial":
        return self._wrap(np.ascontiguousarray(self.grid.transpose(0, 1, 3, 2)))

    def conj_coefficients(self) -> "BivariateMatrixPolynomial":
        return self._wrap(F.map_entries(self.grid, self.field.conj))

    def times_x(self) -> "BivariateMatrixPolynomial":
        """F(x, y) x, through the basis recurrence in x."""
        grid = _grid(self.field, self.grade_y, self.grade_x + 1, self.n)
        for j in range(self.grade_x + 1):
            for i, t in self.basis.recurrence(j).items():
                grid[:, i] = grid[:, i] + self.grid[:, j] * self.field.coerce(t)
        return self._wrap(grid)

    def times_y(self) -> "BivariateMatrixPolynomial":
        return self.swap_variables().times_x().swap_variables()

    @property
    def is_zero(self) -> bool:
        return F.is_zero_matrix(self.field, self.grid)

    def equals(self, other: "BivariateMatrixPolynomial", rtol: Optional[float] = None) -> bool:
        if self.field != other.field or self.basis != other.basis or self.n != other.n:
            return False
        a, b = self._aligned(other)
        return F.matrices_equal(self.field, a.reshape(-1, 1), b.reshape(-1, 1), rtol)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BivariateMatrixPolynomial):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def to_monomial_grid(self) -> np.ndarray:
        """Coefficients of y^a x^b."""
        u_y = B.to_monomial_matrix(self.basis, self.grade_y, self.field)
        u_x = B.to_monomial_matrix(self.basis, self.grade_x, self.field)
        return _congruence(self.field, self.grid, u_y, u_x)

    @classmethod
    def from_monomial_grid(
        cls, field: Field, basis: Basis, mono: np.ndarray
    ) -> "BivariateMatrixPolynomial":
        gy, gx = mono.shape[0] - 1, mono.shape[1] - 1
        w_y = B.from_monomial_matrix(basis, gy, field)
        w_x = B.from_monomial_matrix(basis, gx, field)
        return cls(_congruence(field, mono, w_y, w_x), basis, field)

    def in_basis(self, basis: Basis) -> "BivariateMatrixPolynomial":
        if basis == self.basis:
            return self
        return BivariateMatrixPolynomial.from_monomial_grid(self.field, basis, self.to_monomial_grid())


def _congruence(field: Field, grid: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """out[a, b] = sum_{i, j} left[i, a] right[j, b] grid[i, j]."""
    rows, cols, n, _ = grid.shape
    tmp = _grid(field, rows - 1, right.shape[1] - 1, n)
    for i in range(rows):
        for b in range(right.shape[1]):
            acc = tmp[i, b]
            for j in range(cols):
                if not field.is_zero(right[j, b]):
                    acc = acc + grid[i, j] * right[j, b]
            tmp[i, b] = acc
    out = _grid(field, left.shape[1] - 1, right.shape[1] - 1, n)
    for a in range(left.shape[1]):
        for b in range(right.shape[1]):
            acc = out[a, b]
            for i in range(rows):
                if not field.is_zero(left[i, a]):
                    acc = acc + tmp[i, b] * left[i, a]
            out[a, b] = acc
    return out


# ---------------------------------------------------------------------------
# Pencils
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pencil:
    """L(t) = t X + Y."""

    X: BlockMatrix
    Y: BlockMatrix
    basis: Basis
    ansatz: Optional[tuple] = None

    def __post_init__(self) -> None:
        if self.X.data.shape != self.Y.data.shape or self.X.n != self.Y.n:
            raise InputError("pencil coefficients X and Y have different shapes")
        if self.X.k != self.X.h:
            raise InputError("pencil coefficients must be square block matrices")

    @property
    def k(self) -> int:
        return self.X.k

    @property
    def n(self) -> int:
        return self.X.n

    @property
    def field(self) -> Field:
        return self.X.field

    def evaluate(self, t: Any) -> np.ndarray:
        return self.X.data * self.field.coerce(t) + self.Y.data

    def left_multiply(self, a: np.ndarray) -> "Pencil":
        return Pencil(a @ self.X, a @ self.Y, self.basis, self.ansatz)

    def equals(self, other: "Pencil", rtol: Optional[float] = None) -> bool:
        return self.X.equals(other.X, rtol) and self.Y.equals(other.Y, rtol)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pencil):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "Pencil") -> "Pencil":
        return Pencil(self.X + other.X, self.Y + other.Y, self.basis)

    def scale(self, s: Any) -> "Pencil":
        return Pencil(self.X.scale(s), self.Y.scale(s), self.basis)


# ---------------------------------------------------------------------------
# The phi duality and its operation table
# ---------------------------------------------------------------------------


def phi_map(x: BlockMatrix, basis: Basis) -> BivariateMatrixPolynomial:
    grid = _grid(x.field, x.k - 1, x.h - 1, x.n)
    for i in range(x.k):
        for j in range(x.h):
            grid[i, j] = x.block(x.k - 1 - i, x.h - 1 - j)
    return BivariateMatrixPolynomial(grid, basis, x.field)


def phi_unmap(f: BivariateMatrixPolynomial) -> BlockMatrix:
    k, h = f.grade_y + 1, f.grade_x + 1
    return BlockMatrix.from_blocks(
        f.field, [[f.grid[k - 1 - i, h - 1 - j] for j in range(h)] for i in range(k)]
    )


def block_transpose(x: BlockMatrix) -> BlockMatrix:
    return x.block_transpose()


def _zero_block_col_left(x: BlockMatrix) -> np.ndarray:
    return np.hstack([F.zeros(x.field, x.data.shape[0], x.n), x.data])


def _zero_block_row_top(x: BlockMatrix) -> np.ndarray:
    return np.vstack([F.zeros(x.field, x.n, x.data.shape[1]), x.data])


def col_shift_sum(x: BlockMatrix, y: BlockMatrix, basis: Basis) -> BlockMatrix:
    """X M + [0 Y]; corresponds to F(x, y) x + G(x, y)."""
    x._check(y)
    m = B.mult_matrix(basis, x.h, x.n, x.field)
    return BlockMatrix(x.data @ m + _zero_block_col_left(y), x.n, x.field)


def row_shift_sum(x: BlockMatrix, y: BlockMatrix, basis: Basis) -> BlockMatrix:
    """M^T X + [0; Y]; corresponds to y F(x, y) + G(x, y)."""
    x._check(y)
    m = B.mult_matrix(basis, x.k, x.n, x.field)
    return BlockMatrix(m.T @ x.data + _zero_block_row_top(y), x.n, x.field)


def _kron_vector(field: Field, values: Sequence[Any], n: int) -> np.ndarray:
    """Column block vector values (x) I_n."""
    out = F.zeros(field, len(values) * n, n)
    for b, v in enumerate(values):
        for r in range(n):
            out[b * n + r, r] = v
    return out


def eval_right(x: BlockMatrix, t: Any, basis: Basis) -> np.ndarray:
    """X (Lambda(t) (x) I_n): block coefficients of F(t, y) in descending phi(y)."""
    lam = B.lambda_vector(basis, x.h, t, x.field)
    return x.data @ _kron_vector(x.field, lam, x.n)


def eval_left(x: BlockMatrix, t: Any, basis: Basis) -> np.ndarray:
    """(Lambda(t)^T (x) I_n) X: block coefficients of F(x, t) in descending phi(x)."""
    lam = B.lambda_vector(basis, x.k, t, x.field)
    return _kron_vector(x.field, lam, x.n).T @ x.data


def sigma_matrix(field: Field, k: int, n: int) -> np.ndarray:
    """diag(..., I, -I, I) with +I in the last block."""
    out = F.identity(field, k * n)
    for b in range(k):
        if (k - 1 - b) % 2:
            for r in range(n):
                out[b * n + r, b * n + r] = -field.one()
    return out


def flip_matrix(field: Field, k: int, n: int) -> np.ndarray:
    """Anti-diagonal block identity R."""
    out = F.zeros(field, k * n, k * n)
    for b in range(k):
        for r in range(n):
            out[b * n + r, (k - 1 - b) * n + r] = field.one()
    return out


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise InputError(f"side must be 'left' or 'right', got {side!r}")


def apply_sigma(x: BlockMatrix, side: str, basis: Basis) -> BlockMatrix:
    """Sigma X (left; F(x, -y)) or X Sigma (right; F(-x, y))."""
    _check_side(side)
    if not basis.is_alternating:
        raise PreconditionError("Sigma needs an alternating basis")
    if side == "left":
        return BlockMatrix(sigma_matrix(x.field, x.k, x.n) @ x.data, x.n, x.field)
    return BlockMatrix(x.data @ sigma_matrix(x.field, x.h, x.n), x.n, x.field)


def apply_flip(x: BlockMatrix, side: str, basis: Basis) -> BlockMatrix:
    """R X (left; y^{k-1} F(x, 1/y)) or X R (right; x^{h-1} F(1/x, y))."""
    _check_side(side)
    if basis.kind is not BasisKind.MONOMIAL:
        raise PreconditionError("the block flip R needs the monomial basis")
    if side == "left":
        return BlockMatrix(flip_matrix(x.field, x.k, x.n) @ x.data, x.n, x.field)
    return BlockMatrix(x.data @ flip_matrix(x.field, x.h, x.n), x.n, x.field)
