"""
The double ansatz space DL(P).

Three independent constructions of DL(P, v):
- ``dl_pencil``: block-row recurrence on the Sylvester-type equation
  [0; Y] M - M^T [0 Y] = T M - M^T S, valid for any degree-graded basis;
- ``dl_pencil_bezout``: X = B(vI, P), Y = B(P, xvI);
- ``dl_pencil_monomial``: closed-form block sums (monomial basis only).

Plus ansatz recovery from a pencil and the eigenvalue exclusion verdict.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from app.core.errors import (
    InputError,
    NotRegularError,
    PreconditionError,
    RejectionError,
    TheoremViolation,
)
from app.services import bases as B
from app.services import fields as F
from app.services.bases import Basis, BasisKind
from app.services.bezout import bezout_commuting
from app.services.blockpoly import (
    BlockMatrix,
    MatrixPolynomial,
    Pencil,
    col_shift_sum,
    row_shift_sum,
    scalar_det,
)
from app.services.fields import Field
from app.services.polynomials import ScalarPoly, poly_gcd

logger = logging.getLogger("dl")

# Over floating fields the recurrence's consistency rows hold up to rounding.
FLOAT_CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class Ansatz:
    """v(y) = sum_i coeffs[i] phi_i(y); ``coeffs`` ascending, length k."""

    coeffs: tuple
    basis: Basis
    field: Field

    @classmethod
    def from_ascending(cls, field: Field, basis: Basis, values: Iterable[Any]) -> "Ansatz":
        coeffs = tuple(field.coerce(c) for c in values)
        if not coeffs:
            raise InputError("an ansatz needs at least one coefficient")
        return cls(coeffs, basis, field)

    @classmethod
    def from_descending(cls, field: Field, basis: Basis, values: Iterable[Any]) -> "Ansatz":
        return cls.from_ascending(field, basis, reversed(list(values)))

    @classmethod
    def unit(cls, field: Field, basis: Basis, k: int) -> "Ansatz":
        """v = phi_0 = 1."""
        return cls.from_ascending(field, basis, [1] + [0] * (k - 1))

    @property
    def k(self) -> int:
        return len(self.coeffs)

    @property
    def descending(self) -> tuple:
        return tuple(reversed(self.coeffs))

    @property
    def is_zero(self) -> bool:
        return all(self.field.is_zero(c) for c in self.coeffs)

    @property
    def poly(self) -> ScalarPoly:
        """v in monomial coefficients."""
        return B.to_monomial(self.basis, self.coeffs, self.field)

    def evaluate(self, t: Any) -> Any:
        values = B.evaluate_basis(self.basis, self.k, t, self.field)
        acc = self.field.zero()
        for c, phi in zip(self.coeffs, values):
            acc = acc + c * phi
        return acc

    def as_matpoly(self, n: int, grade: Optional[int] = None) -> MatrixPolynomial:
        """v(x) I_n, optionally padded to ``grade``."""
        poly = MatrixPolynomial.scalar_identity(self.field, self.basis, self.coeffs, n)
        return poly if grade is None else poly.with_grade(grade)

    def combine(self, other: "Ansatz", a: Any, b: Any) -> "Ansatz":
        a, b = self.field.coerce(a), self.field.coerce(b)
        return Ansatz(tuple(a * x + b * y for x, y in zip(self.coeffs, other.coeffs)), self.basis, self.field)

    def format(self) -> list[str]:
        return [self.field.format(c) for c in self.coeffs]


def _check_inputs(p: MatrixPolynomial, v: Ansatz) -> int:
    k = p.grade
    if k < 1:
        raise PreconditionError("DL pencils need a matrix polynomial of grade at least 1")
    if v.k != k:
        raise InputError(f"ansatz has {v.k} coefficients, expected k = {k}")
    if v.basis != p.basis or v.field != p.field:
        raise PreconditionError("ansatz and polynomial must share a basis and a field")
    return k


def _close(field: Field, a: np.ndarray, b: np.ndarray) -> bool:
    return F.matrices_equal(field, a, b, FLOAT_CONSISTENCY_RTOL)


# ---------------------------------------------------------------------------
# Construction by recurrence
# ---------------------------------------------------------------------------


def dl_pencil(p: MatrixPolynomial, v: Ansatz) -> Pencil:
    """DL(P, v) by solving the shifted-sum equations one block row at a time."""
    k = _check_inputs(p, v)
    field, n = p.field, p.n
    m = B.mult_coefficients(p.basis, k, field)
    zero = F.zeros(field, n, n)
    pd = [p.coefficient(k - q) for q in range(k + 1)]  # P_k, ..., P_0
    vd = v.descending

    # S = v (x) [P_k ... P_0] (k x (k+1) blocks), T = [P_k; ...; P_0] (x) v^T
    s = [[pd[q] * vd[p_] for q in range(k + 1)] for p_ in range(k)]
    t = [[pd[p_] * vd[q] for q in range(k)] for p_ in range(k + 1)]

    def tm(p_: int, q: int) -> np.ndarray:
        acc = zero
        for r in range(min(q, k - 1) + 1):
            if not field.is_zero(m[r, q]):
                acc = acc + t[p_][r] * m[r, q]
        return acc

    def mts(p_: int, q: int) -> np.ndarray:
        acc = zero
        for r in range(min(p_, k - 1) + 1):
            if not field.is_zero(m[r, p_]):
                acc = acc + s[r][q] * m[r, p_]
        return acc

    rhs = [[tm(p_, q) - mts(p_, q) for q in range(k + 1)] for p_ in range(k + 1)]

    def row_times_m(row: Sequence[np.ndarray], q: int) -> np.ndarray:
        acc = zero
        for r in range(min(q, k - 1) + 1):
            if not field.is_zero(m[r, q]):
                acc = acc + row[r] * m[r, q]
        return acc

    # z[i] = [0 Y_i], a block row of length k+1
    z: list[list[np.ndarray]] = []
    for p_ in range(k + 1):
        if p_ == 0:
            acc = [-rhs[0][q] for q in range(k + 1)]
        else:
            y_prev = z[p_ - 1][1:]
            acc = [row_times_m(y_prev, q) - rhs[p_][q] for q in range(k + 1)]
            for r in range(p_):
                if r < k and not field.is_zero(m[r, p_]):
                    acc = [a - z[r][q] * m[r, p_] for q, a in enumerate(acc)]
        if p_ == k:
            if not all(_close(field, blk, zero) for blk in acc):
                raise TheoremViolation(
                    "DL recurrence: the last block row is inconsistent",
                    detail={"block_row": k},
                )
            break
        inv = field.one() / m[p_, p_]
        row = [blk * inv for blk in acc]
        if not _close(field, row[0], zero):
            raise TheoremViolation(
                "DL recurrence: the zero first block column of [0 Y] is violated",
                detail={"block_row": p_},
            )
        row[0] = zero
        z.append(row)

    # X M = S - [0 Y], solved row by row by forward substitution
    x_rows: list[list[np.ndarray]] = []
    for i in range(k):
        target = [s[i][q] - z[i][q] for q in range(k + 1)]
        x_row: list[np.ndarray] = []
        for q in range(k):
            acc = target[q]
            for r in range(q):
                if not field.is_zero(m[r, q]):
                    acc = acc - x_row[r] * m[r, q]
            x_row.append(acc * (field.one() / m[q, q]))
        if not _close(field, row_times_m(x_row, k), target[k]):
            raise TheoremViolation(
                "DL recurrence: X M = S - [0 Y] has no solution in the last block column",
                detail={"block_row": i},
            )
        x_rows.append(x_row)

    x = BlockMatrix.from_blocks(field, x_rows)
    y = BlockMatrix.from_blocks(field, [row[1:] for row in z])
    logger.debug("DL pencil by recurrence: basis=%s n=%d k=%d", p.basis.kind.value, n, k)
    return Pencil(x, y, p.basis, v.coeffs)


# ---------------------------------------------------------------------------
# Construction through Bezout matrices
# ---------------------------------------------------------------------------


def dl_pencil_bezout(p: MatrixPolynomial, v: Ansatz) -> Pencil:
    """X = B(vI, P) and Y = B(P, x v I), both at grade k."""
    k = _check_inputs(p, v)
    p.field.require_exact("dl_pencil_bezout")
    v_mat = v.as_matpoly(p.n, grade=k)
    xv = B.times_x(p.basis, v.coeffs, p.field)
    xv_mat = MatrixPolynomial.scalar_identity(p.field, p.basis, xv, p.n)
    x = bezout_commuting(v_mat, p).matrix
    y = bezout_commuting(p, xv_mat).matrix
    return Pencil(x, y, p.basis, v.coeffs)


# ---------------------------------------------------------------------------
# Closed form in the monomial basis
# ---------------------------------------------------------------------------


def dl_pencil_monomial(p: MatrixPolynomial, v: Ansatz) -> Pencil:
    """DL(P, v) from the closed-form coefficients of the two Bezoutians.

    With f, g the monomial coefficients of the numerator factors,
    (f(y)g(x) - g(y)f(x))/(x - y) has y^i x^j coefficient
    sum_{a <= min(i, j)} f_a g_{i+j+1-a} - g_a f_{i+j+1-a}.
    """
    k = _check_inputs(p, v)
    if p.basis.kind is not BasisKind.MONOMIAL:
        raise PreconditionError("the closed-form DL construction needs the monomial basis")
    field, n = p.field, p.n
    zero = F.zeros(field, n, n)

    def pc(i: int) -> np.ndarray:
        return p.coefficient(i) if 0 <= i <= k else zero

    def vc(i: int) -> Any:
        return v.coeffs[i] if 0 <= i < k else field.zero()

    def x_coeff(i: int, j: int) -> np.ndarray:
        acc = zero
        for a in range(min(i, j) + 1):
            b = i + j + 1 - a
            acc = acc + pc(b) * vc(a) - pc(a) * vc(b)
        return acc

    def y_coeff(i: int, j: int) -> np.ndarray:
        # g = x v, so g_b = v_{b-1}
        acc = zero
        for a in range(min(i, j) + 1):
            b = i + j + 1 - a
            acc = acc + pc(a) * vc(b - 1) - pc(b) * vc(a - 1)
        return acc

    x = BlockMatrix.from_blocks(field, [[x_coeff(k - 1 - r, k - 1 - c) for c in range(k)] for r in range(k)])
    y = BlockMatrix.from_blocks(field, [[y_coeff(k - 1 - r, k - 1 - c) for c in range(k)] for r in range(k)])
    return Pencil(x, y, p.basis, v.coeffs)


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def _shift_sum_ansatz(z: BlockMatrix, p: MatrixPolynomial, space: str) -> list:
    """Read v off Z = v (x) [P_k ... P_0]; reject with the failing block row."""
    field, k = p.field, p.grade
    pd = [p.coefficient(k - q) for q in range(k + 1)]
    pivot = next(
        ((q, idx) for q, blk in enumerate(pd) for idx, val in np.ndenumerate(blk) if not field.is_zero(val)),
        None,
    )
    if pivot is None:
        raise NotRegularError("P is identically zero")
    q0, idx = pivot
    values = []
    for i in range(z.k):
        vi = z.block(i, q0)[idx] / pd[q0][idx]
        for q in range(k + 1):
            if not F.matrices_equal(field, z.block(i, q), pd[q] * vi):
                raise RejectionError(
                    f"pencil is not in {space}(P): block row {i} of the shift sum "
                    f"is not a multiple of [P_k ... P_0]",
                    detail={"space": space, "block_row": i, "block_col": q},
                )
        values.append(vi)
    return values


def recover_ansatz(pencil: Pencil, p: MatrixPolynomial) -> Ansatz:
    """The unique ansatz of a DL(P) pencil, or RejectionError with a witness."""
    p.field.require_exact("recover_ansatz")
    k = p.grade
    if pencil.k != k or pencil.n != p.n:
        raise InputError(f"pencil is {pencil.k}x{pencil.k} blocks of size {pencil.n}; P needs k={k}, n={p.n}")
    right = _shift_sum_ansatz(col_shift_sum(pencil.X, pencil.Y, p.basis), p, "L1")
    left = _shift_sum_ansatz(
        col_shift_sum(pencil.X.block_transpose(), pencil.Y.block_transpose(), p.basis), p, "L2"
    )
    if any(a != b for a, b in zip(right, left)):
        raise RejectionError(
            "pencil is in L1(P) and L2(P) with different ansatz vectors, so it is not in DL(P)",
            detail={
                "space": "DL",
                "v": [p.field.format(a) for a in right],
                "w": [p.field.format(b) for b in left],
            },
        )
    return Ansatz.from_descending(p.field, p.basis, right)


def shifted_sums_hold(pencil: Pencil, p: MatrixPolynomial, v: Ansatz) -> bool:
    """X col-shift Y = v (x) [P_k..P_0] and X row-shift Y = [P_k;..;P_0] (x) v^T."""
    k, field, n = p.grade, p.field, p.n
    pd = [p.coefficient(k - q) for q in range(k + 1)]
    vd = v.descending
    expected_col = BlockMatrix.from_blocks(field, [[pd[q] * vd[r] for q in range(k + 1)] for r in range(k)])
    expected_row = BlockMatrix.from_blocks(field, [[pd[r] * vd[q] for q in range(k)] for r in range(k + 1)])
    rtol = FLOAT_CONSISTENCY_RTOL
    return col_shift_sum(pencil.X, pencil.Y, p.basis).equals(expected_col, rtol) and row_shift_sum(
        pencil.X, pencil.Y, p.basis
    ).equals(expected_row, rtol)


# ---------------------------------------------------------------------------
# Eigenvalue exclusion
# ---------------------------------------------------------------------------


class VerdictKind(str, Enum):
    LINEARIZATION = "linearization"
    SHARED_FINITE_ROOT = "shared-finite-root"
    SHARED_INFINITE = "shared-infinite-eigenvalue"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ExclusionVerdict:
    kind: VerdictKind
    witness: Optional[ScalarPoly] = None
    reason: str = ""

    @property
    def is_linearization(self) -> bool:
        return self.kind is VerdictKind.LINEARIZATION


def exclusion_check(p: MatrixPolynomial, v: Ansatz) -> ExclusionVerdict:
    """DL(P, v) is a linearization iff v(x) I (grade k-1) and P(x) share no eigenvalue."""
    _check_inputs(p, v)
    field = p.field
    field.require_exact("exclusion_check")
    det = scalar_det(p)
    if det.is_zero:
        raise NotRegularError("P is not regular: det P(x) vanishes identically")
    if v.is_zero:
        return ExclusionVerdict(VerdictKind.SHARED_INFINITE, reason="the zero ansatz gives the zero pencil")

    g = poly_gcd(v.poly, det)
    if g.degree >= 1:
        logger.debug("v and det P share the factor %s", g)
        return ExclusionVerdict(
            VerdictKind.SHARED_FINITE_ROOT,
            witness=g,
            reason=f"v(x) and det P(x) share the factor {g}",
        )
    if field.is_zero(v.coeffs[-1]) and field.is_zero(F.determinant(field, p.leading)):
        return ExclusionVerdict(
            VerdictKind.SHARED_INFINITE,
            reason="v has a root at infinity at grade k-1 and the leading coefficient of P is singular",
        )
    return ExclusionVerdict(VerdictKind.LINEARIZATION, reason="no shared eigenvalue")

