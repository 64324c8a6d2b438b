"""
Degree-graded polynomial bases.

A basis is described by its multiplication rule x*phi_j = sum_i t(j, i) phi_i
(i <= j+1, t(j, j+1) != 0) with phi_0 = 1. Everything else (evaluation
vectors, the multiplication matrix M, change of basis to monomials) is
derived from that rule. Coefficients are stored as Fractions and coerced into
the working field on use.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional, Sequence

import numpy as np

from app.core.errors import FieldError, InputError, PreconditionError
from app.services import fields as F
from app.services.fields import Field
from app.services.polynomials import ScalarPoly


class BasisKind(str, Enum):
    MONOMIAL = "monomial"
    CHEBYSHEV_T = "chebyshev-t"
    ORTHOGONAL = "orthogonal"
    DEGREE_GRADED = "degree-graded"


def _fractions(values: Sequence[Any]) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(str(v)) if not isinstance(v, Fraction) else v for v in values)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed basis coefficient in {list(values)!r}") from exc


@dataclass(frozen=True)
class Basis:
    kind: BasisKind
    a: tuple[Fraction, ...] = ()
    b: tuple[Fraction, ...] = ()
    c: tuple[Fraction, ...] = ()
    table: tuple[tuple[Fraction, ...], ...] = dc_field(default=())

    # Constructors

    @classmethod
    def monomial(cls) -> "Basis":
        return cls(BasisKind.MONOMIAL)

    @classmethod
    def chebyshev_t(cls) -> "Basis":
        return cls(BasisKind.CHEBYSHEV_T)

    @classmethod
    def orthogonal(cls, a: Sequence[Any], b: Sequence[Any], c: Sequence[Any]) -> "Basis":
        """x*phi_j = a_j phi_{j+1} + b_j phi_j + c_j phi_{j-1}."""
        a_, b_, c_ = _fractions(a), _fractions(b), _fractions(c)
        if not (len(a_) == len(b_) == len(c_)):
            raise InputError("orthogonal basis needs sequences a, b, c of equal length")
        if any(x == 0 for x in a_):
            raise InputError("orthogonal basis is not degree-graded: some a_j is zero")
        return cls(BasisKind.ORTHOGONAL, a=a_, b=b_, c=c_)

    @classmethod
    def legendre(cls, max_degree: int) -> "Basis":
        js = range(max_degree + 1)
        return cls.orthogonal(
            [Fraction(j + 1, 2 * j + 1) for j in js],
            [Fraction(0)] * (max_degree + 1),
            [Fraction(j, 2 * j + 1) for j in js],
        )

    @classmethod
    def degree_graded(cls, table: Sequence[Sequence[Any]]) -> "Basis":
        """Row j lists the coefficients of phi_0 .. phi_{j+1} in x*phi_j."""
        rows = tuple(_fractions(row) for row in table)
        for j, row in enumerate(rows):
            if len(row) != j + 2:
                raise InputError(f"degree-graded table row {j} must have {j + 2} entries")
            if row[-1] == 0:
                raise InputError(f"table is not degree-graded: x*phi_{j} has no phi_{j + 1} term")
        return cls(BasisKind.DEGREE_GRADED, table=rows)

    # Recurrence

    @property
    def max_degree(self) -> Optional[int]:
        """Largest k for which phi_0..phi_k are defined, None if unbounded."""
        if self.kind is BasisKind.ORTHOGONAL:
            return len(self.a)
        if self.kind is BasisKind.DEGREE_GRADED:
            return len(self.table)
        return None

    def check_degree(self, k: int) -> None:
        limit = self.max_degree
        if limit is not None and k > limit:
            raise PreconditionError(
                f"{self.kind.value} basis is only specified up to degree {limit}, need {k}"
            )

    def recurrence(self, j: int) -> dict[int, Fraction]:
        """Nonzero coefficients {i: t(j, i)} of x*phi_j."""
        self.check_degree(j + 1)
        if self.kind is BasisKind.MONOMIAL:
            return {j + 1: Fraction(1)}
        if self.kind is BasisKind.CHEBYSHEV_T:
            if j == 0:
                return {1: Fraction(1)}
            return {j + 1: Fraction(1, 2), j - 1: Fraction(1, 2)}
        if self.kind is BasisKind.ORTHOGONAL:
            out = {j + 1: self.a[j]}
            if self.b[j] != 0:
                out[j] = self.b[j]
            if j > 0 and self.c[j] != 0:
                out[j - 1] = self.c[j]
            return out
        return {i: t for i, t in enumerate(self.table[j]) if t != 0}

    def coefficient(self, j: int, i: int) -> Fraction:
        return self.recurrence(j).get(i, Fraction(0))

    @property
    def is_alternating(self) -> bool:
        """phi_i is even/odd with i; true iff x*phi_j only involves phi_i with i = j+1 mod 2."""
        if self.kind in (BasisKind.MONOMIAL, BasisKind.CHEBYSHEV_T):
            return True
        if self.kind is BasisKind.ORTHOGONAL:
            return all(x == 0 for x in self.b)
        return all(
            (j + 1 - i) % 2 == 0 for j in range(len(self.table)) for i in self.recurrence(j)
        )

    def check_field(self, field: Field) -> None:
        if self.kind is BasisKind.CHEBYSHEV_T and field.characteristic == 2:
            raise FieldError("the Chebyshev basis needs a field of characteristic other than 2")

    def tag(self) -> Any:
        if self.kind in (BasisKind.MONOMIAL, BasisKind.CHEBYSHEV_T):
            return self.kind.value
        if self.kind is BasisKind.ORTHOGONAL:
            return {"orthogonal": {k: [str(x) for x in getattr(self, k)] for k in ("a", "b", "c")}}
        return {"degree-graded": [[str(x) for x in row] for row in self.table]}


def basis_from_tag(tag: Any) -> Basis:
    if isinstance(tag, str):
        key = tag.strip().lower()
        if key == BasisKind.MONOMIAL.value:
            return Basis.monomial()
        if key in (BasisKind.CHEBYSHEV_T.value, "chebyshev"):
            return Basis.chebyshev_t()
        if key.startswith("legendre"):
            degree = key.partition(":")[2]
            return Basis.legendre(int(degree) if degree else 16)
    if isinstance(tag, dict) and "orthogonal" in tag:
        spec = tag["orthogonal"]
        return Basis.orthogonal(spec["a"], spec["b"], spec["c"])
    if isinstance(tag, dict) and "degree-graded" in tag:
        return Basis.degree_graded(tag["degree-graded"])
    raise InputError(f"unknown basis tag {tag!r}")


# ---------------------------------------------------------------------------
# Derived matrices and vectors
# ---------------------------------------------------------------------------


def _coerce(field: Field, value: Fraction) -> Any:
    return field.coerce(value)


def mult_coefficients(basis: Basis, k: int, field: Field) -> np.ndarray:
    """Scalar k x (k+1) matrix m with x*phi_{k-p} = sum_q m[p, q] phi_{k-q} (0-based)."""
    if k < 1:
        raise PreconditionError("the multiplication matrix needs k >= 1")
    basis.check_field(field)
    m = F.zeros(field, k, k + 1)
    for p in range(k):
        j = k - 1 - p
        for i, t in basis.recurrence(j).items():
            m[p, k - i] = _coerce(field, t)
        if field.is_zero(m[p, p]):
            raise FieldError(
                f"basis is not degree-graded over {field}: x*phi_{j} loses its phi_{j + 1} term"
            )
    return m


def block_scalar(field: Field, m: np.ndarray, n: int) -> np.ndarray:
    """Kronecker product m (x) I_n for a scalar object matrix m."""
    rows, cols = m.shape
    out = F.zeros(field, rows * n, cols * n)
    for p in range(rows):
        for q in range(cols):
            if field.is_zero(m[p, q]):
                continue
            for r in range(n):
                out[p * n + r, q * n + r] = m[p, q]
    return out


def mult_matrix(basis: Basis, k: int, n: int, field: Field) -> np.ndarray:
    """The nk x n(k+1) block multiplication matrix M with blocks m_{p,q} I_n."""
    return block_scalar(field, mult_coefficients(basis, k, field), n)


def evaluate_basis(basis: Basis, k: int, t: Any, field: Field) -> list:
    """[phi_0(t), ..., phi_{k-1}(t)] by the recurrence."""
    basis.check_field(field)
    t = field.coerce(t) if not isinstance(t, (complex, float)) else t
    values = [field.one()]
    for j in range(k - 1):
        rule = basis.recurrence(j)
        acc = values[j] * t
        for i, coef in rule.items():
            if i <= j:
                acc = acc - values[i] * _coerce(field, coef)
        values.append(acc / _coerce(field, rule[j + 1]))
    return values[:k]


def lambda_vector(basis: Basis, k: int, t: Any, field: Field) -> list:
    """Descending evaluation vector [phi_{k-1}(t), ..., phi_0(t)]."""
    return list(reversed(evaluate_basis(basis, k, t, field)))


def monomial_table(basis: Basis, g: int, field: Field) -> list[ScalarPoly]:
    """phi_0..phi_g expanded in monomials."""
    return list(_monomial_table_cached(basis, g, field))


@lru_cache(maxsize=256)
def _monomial_table_cached(basis: Basis, g: int, field: Field) -> tuple[ScalarPoly, ...]:
    basis.check_field(field)
    x = ScalarPoly.x(field)
    polys = [ScalarPoly.constant(field, 1)]
    for j in range(g):
        rule = basis.recurrence(j)
        acc = x * polys[j]
        for i, coef in rule.items():
            if i <= j:
                acc = acc - polys[i] * _coerce(field, coef)
        polys.append(acc * (field.one() / _coerce(field, rule[j + 1])))
    return tuple(polys[: g + 1])


def to_monomial_matrix(basis: Basis, g: int, field: Field) -> np.ndarray:
    """U with U[i, a] = coefficient of t^a in phi_i (i, a = 0..g)."""
    table = monomial_table(basis, g, field)
    u = F.zeros(field, g + 1, g + 1)
    for i, poly in enumerate(table):
        for a, c in enumerate(poly.coeffs):
            u[i, a] = c
    return u


def from_monomial_matrix(basis: Basis, g: int, field: Field) -> np.ndarray:
    """W = U^{-1}: W[a, i] = coefficient of phi_i in t^a."""
    return _from_monomial_cached(basis, g, field)


@lru_cache(maxsize=256)
def _from_monomial_cached(basis: Basis, g: int, field: Field) -> np.ndarray:
    w = F.inverse(field, to_monomial_matrix(basis, g, field))
    w.flags.writeable = False
    return w


def change_of_basis(basis: Basis, k: int, field: Field) -> np.ndarray:
    """S with Lambda(t) = S [t^{k-1}, ..., t, 1]^T."""
    u = to_monomial_matrix(basis, k - 1, field)
    s = F.zeros(field, k, k)
    for r in range(k):
        for c in range(k):
            s[r, c] = u[k - 1 - r, k - 1 - c]
    return s


def to_monomial(basis: Basis, coeffs: Sequence[Any], field: Field) -> ScalarPoly:
    """Scalar polynomial sum_i coeffs[i] phi_i expressed in monomials."""
    if not coeffs:
        return ScalarPoly.zero(field)
    table = monomial_table(basis, len(coeffs) - 1, field)
    acc = ScalarPoly.zero(field)
    for c, phi in zip(coeffs, table):
        acc = acc + phi * c
    return acc


def from_monomial(basis: Basis, poly: ScalarPoly, grade: int, field: Field) -> list:
    """Coefficients of ``poly`` in phi_0..phi_grade."""
    if poly.degree > grade:
        raise PreconditionError(f"degree {poly.degree} exceeds grade {grade}")
    w = from_monomial_matrix(basis, grade, field)
    out = [field.zero()] * (grade + 1)
    for a, c in enumerate(poly.coeffs):
        if field.is_zero(c):
            continue
        for i in range(grade + 1):
            out[i] = out[i] + c * w[a, i]
    return out


def times_x(basis: Basis, coeffs: Sequence[Any], field: Field) -> list:
    """Coefficients of x * sum_j coeffs[j] phi_j, one grade higher."""
    out = [field.zero()] * (len(coeffs) + 1)
    for j, c in enumerate(coeffs):
        if field.is_zero(c):
            continue
        for i, t in basis.recurrence(j).items():
            out[i] = out[i] + c * _coerce(field, t)
    return out
