"""
Beyond DL: companion matrices, matrix polynomial division and BDL(P, v).

Monomial basis with an invertible leading coefficient throughout.
BDL(P, v) = DL(P, 1) v(C1) is built three ways (right multiplication by
v(C1), left multiplication by v(C2), and as a Lerer-Tismenetsky Bezoutian
with the left/right ansatz polynomials Q and S), and the routes must agree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Literal, NamedTuple, Optional

import numpy as np

from app.core.errors import (
    InputError,
    PreconditionError,
    SingularMatrixError,
    TheoremViolation,
)
from app.services import fields as F
from app.services.bases import BasisKind
from app.services.bezout import bezout_lt
from app.services.blockpoly import (
    BivariateMatrixPolynomial,
    BlockMatrix,
    MatrixPolynomial,
    Pencil,
    apply_flip,
    apply_sigma,
    phi_map,
    scalar_det,
)
from app.services.dl import Ansatz, ExclusionVerdict, VerdictKind, dl_pencil
from app.services.fields import Field
from app.services.polynomials import ScalarPoly, poly_gcd

logger = logging.getLogger("bdl")

Side = Literal["left", "right"]


def _require_monomial(p: MatrixPolynomial, what: str) -> None:
    if p.basis.kind is not BasisKind.MONOMIAL:
        raise PreconditionError(f"{what} works in the monomial basis only")


def _leading_inverse(p: MatrixPolynomial) -> np.ndarray:
    if p.grade < 1:
        raise PreconditionError("P must have grade at least 1")
    try:
        return F.inverse(p.field, p.leading)
    except SingularMatrixError as exc:
        raise SingularMatrixError("the leading coefficient P_k is singular") from exc


# ---------------------------------------------------------------------------
# Companion matrices
# ---------------------------------------------------------------------------


def companion_first(p: MatrixPolynomial) -> np.ndarray:
    """First block row -P_k^{-1} P_{k-1}, ..., -P_k^{-1} P_0; identities below the diagonal."""
    _require_monomial(p, "companion_first")
    inv = _leading_inverse(p)
    k, n, field = p.grade, p.n, p.field
    blocks = [[F.zeros(field, n, n) for _ in range(k)] for _ in range(k)]
    for j in range(k):
        blocks[0][j] = -(inv @ p.coeffs[k - 1 - j])
    for i in range(1, k):
        blocks[i][i - 1] = F.identity(field, n)
    return BlockMatrix.from_blocks(field, blocks).data


def companion_second(p: MatrixPolynomial) -> np.ndarray:
    """First block column -P_{k-1} P_k^{-1}, ..., -P_0 P_k^{-1}; identities above the diagonal."""
    _require_monomial(p, "companion_second")
    inv = _leading_inverse(p)
    k, n, field = p.grade, p.n, p.field
    blocks = [[F.zeros(field, n, n) for _ in range(k)] for _ in range(k)]
    for i in range(k):
        blocks[i][0] = -(p.coeffs[k - 1 - i] @ inv)
    for i in range(k - 1):
        blocks[i][i + 1] = F.identity(field, n)
    return BlockMatrix.from_blocks(field, blocks).data


def poly_of_matrix(v: ScalarPoly, c: np.ndarray) -> np.ndarray:
    """v(C) by Horner's scheme."""
    field = v.field
    size = c.shape[0]
    acc = F.zeros(field, size, size)
    eye = F.identity(field, size)
    for coeff in reversed(v.coeffs):
        acc = acc @ c + eye * coeff
    return acc


# ---------------------------------------------------------------------------
# Division
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivisionResult:
    """V = A P + remainder (left) or V = P A + remainder (right)."""

    quotient: MatrixPolynomial
    remainder: MatrixPolynomial
    side: str


def matdiv(v: MatrixPolynomial, p: MatrixPolynomial, side: Side = "left") -> DivisionResult:
    """Unique division with a remainder of grade k - 1 by block back-substitution."""
    if side not in ("left", "right"):
        raise InputError(f"side must be 'left' or 'right', got {side!r}")
    _require_monomial(p, "matdiv")
    _require_monomial(v, "matdiv")
    if v.n != p.n or v.field != p.field:
        raise PreconditionError("V and P must share size and field")
    inv = _leading_inverse(p)
    k, field, n = p.grade, p.field, p.n
    dv = v.degree
    if dv < k:
        zero = MatrixPolynomial.zero(field, p.basis, n, 0)
        return DivisionResult(zero, v.with_grade(k - 1), side)

    da = dv - k
    a: dict[int, np.ndarray] = {}
    for c in range(da + 1):
        acc = v.coefficient(dv - c)
        for r in range(c):
            if side == "left":
                acc = acc - a[da - r] @ p.coefficient(k - c + r)
            else:
                acc = acc - p.coefficient(k - c + r) @ a[da - r]
        a[da - c] = acc @ inv if side == "left" else inv @ acc

    quotient = MatrixPolynomial(tuple(a[i] for i in range(da + 1)), p.basis, field)
    product = quotient @ p if side == "left" else p @ quotient
    rest = v - product
    if rest.degree >= k:
        raise TheoremViolation(f"{side} division left a remainder of degree {rest.degree}")
    logger.debug("%s division: deg V=%d, k=%d, deg A=%d", side, dv, k, da)
    return DivisionResult(quotient, rest.with_grade(k - 1), side)


# ---------------------------------------------------------------------------
# BDL
# ---------------------------------------------------------------------------


class BdlAnsatz(NamedTuple):
    right: MatrixPolynomial  # Q, from v I = A P + Q
    left: MatrixPolynomial  # S, from v I = P A + S
    quotient: MatrixPolynomial  # A


def _v_identity(p: MatrixPolynomial, v: ScalarPoly) -> MatrixPolynomial:
    if v.field != p.field:
        raise PreconditionError("v and P must share a field")
    coeffs = list(v.coeffs) or [p.field.zero()]
    return MatrixPolynomial.scalar_identity(p.field, p.basis, coeffs, p.n)


def bdl_ansatz(p: MatrixPolynomial, v: ScalarPoly) -> BdlAnsatz:
    """Q, S and the shared quotient A with v I = A P + Q = P A + S."""
    vi = _v_identity(p, v)
    left = matdiv(vi, p, "left")
    right = matdiv(vi, p, "right")
    if not left.quotient.equals(right.quotient):
        raise TheoremViolation("left and right quotients of v I by P differ")
    q, s, a = left.remainder, right.remainder, left.quotient
    if not (s - q).equals(a @ p - p @ a):
        raise TheoremViolation("S - Q differs from the commutator A P - P A")
    if not (p @ q).equals(s @ p):
        raise TheoremViolation("P Q differs from S P")
    return BdlAnsatz(right=q, left=s, quotient=a)


@dataclass(frozen=True)
class BdlPencil:
    pencil: Pencil
    left_ansatz: MatrixPolynomial  # S(y)
    right_ansatz: MatrixPolynomial  # Q(x)
    quotient: MatrixPolynomial  # A(x)
    v: ScalarPoly


def _unit_dl(p: MatrixPolynomial) -> Pencil:
    return dl_pencil(p, Ansatz.unit(p.field, p.basis, p.grade))


def _first_difference(a: Pencil, b: Pencil) -> Optional[tuple[str, int, int]]:
    for name, left, right in (("X", a.X, b.X), ("Y", a.Y, b.Y)):
        where = left.first_difference(right)
        if where is not None:
            return (name, *where)
    return None


def bdl_pencil(p: MatrixPolynomial, v: ScalarPoly) -> BdlPencil:
    """BDL(P, v), checked across the three constructions."""
    _require_monomial(p, "bdl_pencil")
    n = p.n
    base = _unit_dl(p)
    ansatz = bdl_ansatz(p, v)

    v_c1 = poly_of_matrix(v, companion_first(p))
    v_c2 = poly_of_matrix(v, companion_second(p))
    right_route = Pencil(base.X @ v_c1, base.Y @ v_c1, p.basis)
    left_route = base.left_multiply(v_c2)

    q, s = ansatz.right, ansatz.left
    x = bezout_lt(q, p, p, s).matrix
    y = bezout_lt(p, q.times_x(), s.times_x(), p).matrix
    bezout_route = Pencil(x, y, p.basis)

    for name, other in (("v(C2) DL(P,1)", left_route), ("Bezoutian", bezout_route)):
        where = _first_difference(right_route, other)
        if where is not None:
            raise TheoremViolation(
                f"BDL constructions disagree: DL(P,1) v(C1) vs {name}",
                detail={"route": name, "coefficient": where[0], "block": list(where[1:])},
            )
    logger.debug("BDL pencil: n=%d k=%d deg v=%d, three routes agree", n, p.grade, v.degree)
    return BdlPencil(right_route, s, q, ansatz.quotient, v)


@dataclass(frozen=True)
class CheckOutcome:
    holds: bool
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.holds


def barnett_check(p: MatrixPolynomial, v: ScalarPoly) -> CheckOutcome:
    """DL(P, v) = DL(P, 1) v(C1) for deg v <= k - 1."""
    _require_monomial(p, "barnett_check")
    k = p.grade
    if v.degree > k - 1:
        raise PreconditionError(f"Barnett's identity needs deg v <= {k - 1}, got {v.degree}")
    dl = dl_pencil(p, Ansatz.from_ascending(p.field, p.basis, v.padded(k)))
    base = _unit_dl(p)
    v_c1 = poly_of_matrix(v, companion_first(p))
    where = _first_difference(dl, Pencil(base.X @ v_c1, base.Y @ v_c1, p.basis))
    return CheckOutcome(where is None, where)


def hankel_inverse_check(b: BlockMatrix) -> bool:
    """True iff block (i, j) of B^{-1} depends only on i + j."""
    b.field.require_exact("hankel_inverse_check")
    if b.k != b.h:
        raise PreconditionError("block Hankel check needs a square block matrix")
    inv = BlockMatrix(F.inverse(b.field, b.data), b.n, b.field)
    seen: dict[int, np.ndarray] = {}
    for i in range(inv.k):
        for j in range(inv.h):
            blk = inv.block(i, j)
            first = seen.setdefault(i + j, blk)
            if first is not blk and not F.matrices_equal(b.field, first, blk):
                return False
    return True


# ---------------------------------------------------------------------------
# Bivariate reduction modulo P
# ---------------------------------------------------------------------------


def quotient_representative(
    f: BivariateMatrixPolynomial, p: MatrixPolynomial, var: Literal["x", "y"]
) -> BivariateMatrixPolynomial:
    """Representative of F modulo A(x, y) P(x) (var="x") or P(y) B(x, y) (var="y").

    The result has grade k - 1 in the reduced variable.
    """
    _require_monomial(p, "quotient_representative")
    if f.basis.kind is not BasisKind.MONOMIAL:
        raise PreconditionError("quotient_representative needs a monomial bivariate polynomial")
    field, k = p.field, p.grade
    grid = f.grid
    if var == "x":
        out = BivariateMatrixPolynomial.zeros(field, f.basis, f.grade_y, k - 1, p.n).grid
        for a in range(f.grade_y + 1):
            row = MatrixPolynomial(tuple(grid[a, b] for b in range(f.grade_x + 1)), p.basis, field)
            rem = matdiv(row, p, "left").remainder
            for b in range(k):
                out[a, b] = rem.coeffs[b]
    elif var == "y":
        out = BivariateMatrixPolynomial.zeros(field, f.basis, k - 1, f.grade_x, p.n).grid
        for b in range(f.grade_x + 1):
            col = MatrixPolynomial(tuple(grid[a, b] for a in range(f.grade_y + 1)), p.basis, field)
            rem = matdiv(col, p, "right").remainder
            for a in range(k):
                out[a, b] = rem.coeffs[a]
    else:
        raise InputError(f"var must be 'x' or 'y', got {var!r}")
    return BivariateMatrixPolynomial(out, f.basis, field)


def reduce_sandwich(p: MatrixPolynomial, x: BlockMatrix) -> BivariateMatrixPolynomial:
    """phi(C2 X C1) for a monic quadratic P and X = [[A, B], [C, D]].

    Computed in closed form and checked against the matrix product and against
    reducing y phi(X) x modulo P(x) and then P(y).
    """
    _require_monomial(p, "reduce_sandwich")
    field = p.field
    if p.grade != 2 or not F.matrices_equal(field, p.leading, F.identity(field, p.n)):
        raise PreconditionError("reduce_sandwich needs a monic quadratic P")
    if x.k != 2 or x.h != 2 or x.n != p.n:
        raise InputError("X must be a 2 x 2 block matrix matching P")
    a, b, c, d = x.block(0, 0), x.block(0, 1), x.block(1, 0), x.block(1, 1)
    p1, p0 = p.coeffs[1], p.coeffs[0]
    closed = BlockMatrix.from_blocks(
        field,
        [
            [p1 @ a @ p1 + d - p1 @ b - c @ p1, p1 @ a @ p0 - c @ p0],
            [p0 @ a @ p1 - p0 @ b, p0 @ a @ p0],
        ],
    )
    expected = phi_map(closed, p.basis)

    product = phi_map(BlockMatrix(companion_second(p) @ x.data @ companion_first(p), x.n, field), p.basis)
    reduced = quotient_representative(
        quotient_representative(phi_map(x, p.basis).times_x(), p, "x").times_y(), p, "y"
    )
    if not expected.equals(product) or not expected.equals(reduced):
        raise TheoremViolation("closed-form reduction of phi(C2 X C1) disagrees with the direct routes")
    return expected


# ---------------------------------------------------------------------------
# Exclusion
# ---------------------------------------------------------------------------


def bdl_exclusion_check(p: MatrixPolynomial, v: ScalarPoly) -> ExclusionVerdict:
    """Sufficient test: gcd(det P, det Q) constant implies BDL(P, v) is a linearization."""
    p.field.require_exact("bdl_exclusion_check")
    q = bdl_ansatz(p, v).right
    det_p, det_q = scalar_det(p), scalar_det(q)
    if det_q.is_zero:
        return ExclusionVerdict(VerdictKind.INCONCLUSIVE, reason="det Q(x) vanishes identically")
    g = poly_gcd(det_p, det_q)
    if g.degree >= 1:
        return ExclusionVerdict(
            VerdictKind.INCONCLUSIVE,
            witness=g,
            reason=f"det P and det Q share the factor {g}; an eigenpair test would be needed",
        )
    return ExclusionVerdict(VerdictKind.LINEARIZATION, reason="det P and det Q have no common root")


# ---------------------------------------------------------------------------
# Structured pencils
# ---------------------------------------------------------------------------


class Structure(str, Enum):
    HERMITIAN = "hermitian"
    SKEW_HERMITIAN = "skew-hermitian"
    SYMMETRIC = "symmetric"
    SKEW_SYMMETRIC = "skew-symmetric"
    STAR_EVEN = "star-even"
    STAR_ODD = "star-odd"
    T_EVEN = "t-even"
    T_ODD = "t-odd"
    STAR_PALINDROMIC = "star-palindromic"
    STAR_ANTIPALINDROMIC = "star-antipalindromic"
    T_PALINDROMIC = "t-palindromic"
    T_ANTIPALINDROMIC = "t-antipalindromic"


class _Rule(NamedTuple):
    star: bool  # conjugate transpose, else plain transpose
    family: str  # "self", "even" or "palindromic"
    sign: int


_RULES: dict[Structure, _Rule] = {
    Structure.HERMITIAN: _Rule(True, "self", 1),
    Structure.SKEW_HERMITIAN: _Rule(True, "self", -1),
    Structure.SYMMETRIC: _Rule(False, "self", 1),
    Structure.SKEW_SYMMETRIC: _Rule(False, "self", -1),
    Structure.STAR_EVEN: _Rule(True, "even", 1),
    Structure.STAR_ODD: _Rule(True, "even", -1),
    Structure.T_EVEN: _Rule(False, "even", 1),
    Structure.T_ODD: _Rule(False, "even", -1),
    Structure.STAR_PALINDROMIC: _Rule(True, "palindromic", 1),
    Structure.STAR_ANTIPALINDROMIC: _Rule(True, "palindromic", -1),
    Structure.T_PALINDROMIC: _Rule(False, "palindromic", 1),
    Structure.T_ANTIPALINDROMIC: _Rule(False, "palindromic", -1),
}


def _adjoint(field: Field, a: np.ndarray, star: bool) -> np.ndarray:
    return F.conj_matrix(field, a.T) if star else a.T.copy()


def _same(field: Field, a: np.ndarray, b: np.ndarray) -> bool:
    return F.matrices_equal(field, a, b)


def has_structure(p: MatrixPolynomial, structure: Structure) -> bool:
    """Coefficientwise test of P against a structure."""
    rule = _RULES[structure]
    field, k = p.field, p.grade
    for i, c in enumerate(p.coeffs):
        if rule.family == "self":
            target = _adjoint(field, c, rule.star) * rule.sign
        elif rule.family == "even":
            target = _adjoint(field, c, rule.star) * (rule.sign * (-1) ** i)
        else:
            target = _adjoint(field, p.coeffs[k - i], rule.star) * rule.sign
        if not _same(field, c, target):
            return False
    return True


def _v_admissible(v: ScalarPoly, k: int, rule: _Rule) -> bool:
    field = v.field
    conj = field.conj if rule.star else (lambda z: z)
    coeffs = v.padded(max(len(v.coeffs), 1))
    if rule.family == "self":
        return not rule.star or all(c == field.conj(c) for c in coeffs)
    if rule.family == "even":
        return all(c == conj(c) * (-1) ** i for i, c in enumerate(coeffs))
    if v.degree > k - 1:
        return False
    padded = v.padded(k)
    return all(padded[i] == conj(padded[k - 1 - i]) for i in range(k))


def pencil_has_structure(pencil: Pencil, structure: Structure) -> bool:
    rule = _RULES[structure]
    field = pencil.field
    x, y = pencil.X.data, pencil.Y.data
    adj_x, adj_y = _adjoint(field, x, rule.star), _adjoint(field, y, rule.star)
    if rule.family == "self":
        return _same(field, x, adj_x * rule.sign) and _same(field, y, adj_y * rule.sign)
    if rule.family == "even":
        return _same(field, x, adj_x * -rule.sign) and _same(field, y, adj_y * rule.sign)
    return _same(field, y, adj_x * rule.sign)


def structured_pencil(p: MatrixPolynomial, v: ScalarPoly, structure: Structure) -> Pencil:
    """BDL(P, v), Sigma BDL(P, v) or R BDL(P, v), whichever preserves ``structure``."""
    rule = _RULES[structure]
    if not has_structure(p, structure):
        raise PreconditionError(f"P is not {structure.value}")
    if not _v_admissible(v, p.grade, rule):
        raise PreconditionError(f"v does not meet the {structure.value} requirement")

    pencil = bdl_pencil(p, v).pencil
    if rule.family == "even":
        pencil = Pencil(apply_sigma(pencil.X, "left", p.basis), apply_sigma(pencil.Y, "left", p.basis), p.basis)
    elif rule.family == "palindromic":
        pencil = Pencil(apply_flip(pencil.X, "left", p.basis), apply_flip(pencil.Y, "left", p.basis), p.basis)
    if not pencil_has_structure(pencil, structure):
        raise TheoremViolation(f"structured pencil is not {structure.value}")
    logger.debug("%s pencil built for n=%d k=%d", structure.value, p.n, p.grade)
    return pencil
