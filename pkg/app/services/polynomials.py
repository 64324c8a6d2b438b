"""
Univariate scalar polynomials over a field, in the monomial basis.

Used for determinants of matrix polynomials, gcd-based eigenvalue exclusion
and the scalar polynomial v that drives BDL pencils.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from app.core.errors import FieldError, PreconditionError
from app.services.fields import Field


def _trim(field: Field, coeffs: Sequence[Any]) -> tuple:
    out = list(coeffs)
    while out and field.is_zero(out[-1]):
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class ScalarPoly:
    """Coefficients in ascending powers of x with trailing zeros removed."""

    coeffs: tuple
    field: Field

    @classmethod
    def from_coeffs(cls, field: Field, coeffs: Iterable[Any]) -> "ScalarPoly":
        return cls(_trim(field, [field.coerce(c) for c in coeffs]), field)

    @classmethod
    def zero(cls, field: Field) -> "ScalarPoly":
        return cls((), field)

    @classmethod
    def constant(cls, field: Field, value: Any) -> "ScalarPoly":
        return cls.from_coeffs(field, [value])

    @classmethod
    def x(cls, field: Field) -> "ScalarPoly":
        return cls.from_coeffs(field, [0, 1])

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Any:
        return self.coeffs[-1] if self.coeffs else self.field.zero()

    def coefficient(self, i: int) -> Any:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.field.zero()

    def padded(self, length: int) -> list:
        if length < len(self.coeffs):
            raise PreconditionError(f"degree {self.degree} does not fit in {length} coefficients")
        return list(self.coeffs) + [self.field.zero()] * (length - len(self.coeffs))

    def _check(self, other: "ScalarPoly") -> None:
        if other.field != self.field:
            raise FieldError(f"polynomials over {self.field} and {other.field} cannot be combined")

    def __add__(self, other: "ScalarPoly") -> "ScalarPoly":
        self._check(other)
        size = max(len(self.coeffs), len(other.coeffs))
        return ScalarPoly.from_coeffs(
            self.field, [self.coefficient(i) + other.coefficient(i) for i in range(size)]
        )

    def __neg__(self) -> "ScalarPoly":
        return ScalarPoly(tuple(-c for c in self.coeffs), self.field)

    def __sub__(self, other: "ScalarPoly") -> "ScalarPoly":
        return self + (-other)

    def __mul__(self, other: Any) -> "ScalarPoly":
        if not isinstance(other, ScalarPoly):
            s = self.field.coerce(other)
            return ScalarPoly.from_coeffs(self.field, [c * s for c in self.coeffs])
        self._check(other)
        if self.is_zero or other.is_zero:
            return ScalarPoly.zero(self.field)
        out = [self.field.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return ScalarPoly.from_coeffs(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "ScalarPoly":
        result = ScalarPoly.constant(self.field, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def __call__(self, t: Any) -> Any:
        return self.evaluate(t)

    def evaluate(self, t: Any) -> Any:
        acc = self.field.zero()
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def derivative(self) -> "ScalarPoly":
        return ScalarPoly.from_coeffs(
            self.field, [c * i for i, c in enumerate(self.coeffs)][1:]
        )

    def divmod(self, other: "ScalarPoly") -> tuple["ScalarPoly", "ScalarPoly"]:
        """Long division: self = q*other + r with deg r < deg other."""
        self._check(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [self.field.zero()] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead_inv = self.field.one() / other.leading
        for shift in range(len(quot) - 1, -1, -1):
            factor = rem[shift + len(other.coeffs) - 1] * lead_inv
            quot[shift] = factor
            if self.field.is_zero(factor):
                continue
            for i, c in enumerate(other.coeffs):
                rem[shift + i] = rem[shift + i] - factor * c
        return ScalarPoly.from_coeffs(self.field, quot), ScalarPoly.from_coeffs(self.field, rem)

    def monic(self) -> "ScalarPoly":
        if self.is_zero:
            return self
        inv = self.field.one() / self.leading
        return ScalarPoly(tuple(c * inv for c in self.coeffs), self.field)

    def format(self, var: str = "x") -> str:
        """Render in the command-line grammar, e.g. ``x^2+3/2*x-1``."""
        if self.is_zero:
            return "0"
        terms: list[str] = []
        for power in range(self.degree, -1, -1):
            c = self.coeffs[power]
            if self.field.is_zero(c):
                continue
            text = self.field.format(c)
            if " " in text or ("+" in text[1:] or "-" in text[1:]) or "*i" in text:
                text = f"({text})"
            mono = "" if power == 0 else (var if power == 1 else f"{var}^{power}")
            if mono and text == "1":
                term = mono
            elif mono and text == "-1":
                term = f"-{mono}"
            elif mono:
                term = f"{text}*{mono}"
            else:
                term = text
            if terms and not term.startswith("-"):
                term = "+" + term
            terms.append(term)
        return "".join(terms)

    def __str__(self) -> str:
        return self.format()


def poly_gcd(a: ScalarPoly, b: ScalarPoly) -> ScalarPoly:
    """Monic gcd by the Euclidean algorithm; refuses floating fields."""
    a.field.require_exact("gcd")
    while not b.is_zero:
        _, r = a.divmod(b)
        a, b = b, r
    return a.monic()


def interpolate(field: Field, xs: Sequence[Any], ys: Sequence[Any]) -> ScalarPoly:
    """Newton divided differences, returned in monomial coefficients."""
    if len(xs) != len(ys):
        raise PreconditionError("interpolation needs as many values as nodes")
    n = len(xs)
    coef = list(ys)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level])
    result = ScalarPoly.zero(field)
    for i in range(n - 1, -1, -1):
        result = result * ScalarPoly.from_coeffs(field, [-xs[i], 1]) + ScalarPoly.constant(field, coef[i])
    return result
