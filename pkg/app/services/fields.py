"""
Field arithmetic and exact dense linear algebra.

Scalars are plain Python values (``Fraction``, ``float``, ``complex``) or the
small element classes defined here (``GF`` for prime fields,
``GaussianRational`` for a+bi with rational parts). Matrices are numpy arrays
of dtype ``object`` holding elements of a single field; every routine takes
the ``Field`` explicitly so that zero, one, pivoting and exactness are never
guessed from the values.
"""

from __future__ import annotations

import logging
import math
import random
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence, Union

import numpy as np

from app.core.config import settings
from app.core.errors import FieldError, InputError, PreconditionError, SingularMatrixError

logger = logging.getLogger("fields")

FieldTag = Union[str, dict]


# ---------------------------------------------------------------------------
# Element types
# ---------------------------------------------------------------------------


class GF:
    """Element of the prime field Z/pZ, stored as its representative in [0, p)."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int) -> None:
        self.value = value % p
        self.p = p

    def _lift(self, other: Any) -> Optional[int]:
        if isinstance(other, GF):
            if other.p != self.p:
                raise FieldError(f"cannot mix GF({self.p}) and GF({other.p}) elements")
            return other.value
        if isinstance(other, int):
            return other
        return None

    def __add__(self, other: Any) -> "GF":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GF(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "GF":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GF(self.value - o, self.p)

    def __rsub__(self, other: Any) -> "GF":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GF(o - self.value, self.p)

    def __mul__(self, other: Any) -> "GF":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GF(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "GF":
        return GF(-self.value, self.p)

    def inverse(self) -> "GF":
        if self.value == 0:
            raise ZeroDivisionError(f"zero has no inverse in GF({self.p})")
        return GF(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other: Any) -> "GF":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * GF(o, self.p).inverse()

    def __rtruediv__(self, other: Any) -> "GF":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GF(o, self.p) * self.inverse()

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, GF):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            # an int matches only the representative in [0, p)
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"GF{self.p}({self.value})"

    def __str__(self) -> str:
        return str(self.value)


class GaussianRational:
    """a + b*i with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction] = 0, im: Union[int, Fraction] = 0) -> None:
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(other: Any) -> Optional["GaussianRational"]:
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other: Any) -> "GaussianRational":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "GaussianRational":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: Any) -> "GaussianRational":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> "GaussianRational":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other: Any) -> "GaussianRational":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        d = o.norm2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other: Any) -> "GaussianRational":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    def __eq__(self, other: Any) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        return _format_complex_parts(self.re, self.im, str)


def _format_complex_parts(re: Any, im: Any, fmt: Callable[[Any], str]) -> str:
    if im == 0:
        return fmt(re)
    if re == 0:
        return f"{fmt(im)}*i"
    if im < 0:
        return f"{fmt(re)}-{fmt(-im)}*i"
    return f"{fmt(re)}+{fmt(im)}*i"


def _split_complex_literal(text: str) -> tuple[str, str]:
    """Split "a+b*i" style text into real and imaginary literal parts."""
    s = text.replace(" ", "")
    if not s:
        raise InputError("empty scalar literal")
    if not s.endswith(("i", "j")):
        return s, "0"
    body = s[:-1]
    if body.endswith("*"):
        body = body[:-1]
    # Last sign that is not an exponent sign separates real from imaginary part.
    cut = -1
    for idx in range(len(body) - 1, 0, -1):
        if body[idx] in "+-" and body[idx - 1] not in "eE":
            cut = idx
            break
    real, imag = (body[:cut], body[cut:]) if cut > 0 else ("0", body)
    if imag in ("", "+"):
        imag = "1"
    elif imag == "-":
        imag = "-1"
    return real or "0", imag


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


class Field(ABC):
    """Arithmetic context for matrices and polynomials."""

    exact: bool = True
    characteristic: int = 0
    has_conjugation: bool = False

    @abstractmethod
    def tag(self) -> FieldTag:
        """Document tag identifying this field."""

    @abstractmethod
    def coerce(self, value: Any) -> Any:
        """Convert ints, Fractions or elements of this field into an element."""

    @abstractmethod
    def parse(self, literal: str) -> Any:
        ...

    @abstractmethod
    def format(self, value: Any) -> str:
        ...

    @abstractmethod
    def random(self, rng: random.Random, bound: int = 100) -> Any:
        ...

    def zero(self) -> Any:
        return self.coerce(0)

    def one(self) -> Any:
        return self.coerce(1)

    def conj(self, value: Any) -> Any:
        return value

    def is_zero(self, value: Any) -> bool:
        return value == 0

    def magnitude(self, value: Any) -> float:
        """Pivot-ranking size; only meaningful for floating fields."""
        return 0.0 if self.is_zero(value) else 1.0

    def require_exact(self, operation: str) -> None:
        if not self.exact:
            raise FieldError(
                f"{operation} needs an exact field; {self.tag()} is floating point",
                detail={"operation": operation},
            )

    def __str__(self) -> str:
        tag = self.tag()
        return tag if isinstance(tag, str) else f"gf{tag['gf']}"


def _parse_fraction(literal: str) -> Fraction:
    try:
        return Fraction(literal.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed rational literal {literal!r}") from exc


@dataclass(frozen=True)
class RationalField(Field):
    """The rationals with arbitrary-precision numerator and denominator."""

    def tag(self) -> FieldTag:
        return "rational"

    def coerce(self, value: Any) -> Fraction:
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        if isinstance(value, GaussianRational) and value.im == 0:
            return value.re
        raise FieldError(f"cannot represent {value!r} as a rational")

    def parse(self, literal: str) -> Fraction:
        return _parse_fraction(str(literal))

    def format(self, value: Any) -> str:
        return str(value)

    def random(self, rng: random.Random, bound: int = 100) -> Fraction:
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class PrimeField(Field):
    p: int = 2

    def __post_init__(self) -> None:
        if not _is_prime(self.p):
            raise InputError(f"GF({self.p}) is not a field: {self.p} is not prime")

    @property
    def characteristic(self) -> int:  # type: ignore[override]
        return self.p

    def tag(self) -> FieldTag:
        return {"gf": self.p}

    def coerce(self, value: Any) -> GF:
        if isinstance(value, GF):
            if value.p != self.p:
                raise FieldError(f"GF({value.p}) element used in GF({self.p})")
            return value
        if isinstance(value, int):
            return GF(value, self.p)
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise FieldError(f"{value} is not representable in GF({self.p})")
            return GF(value.numerator, self.p) / GF(value.denominator, self.p)
        raise FieldError(f"cannot represent {value!r} in GF({self.p})")

    def parse(self, literal: str) -> GF:
        return self.coerce(_parse_fraction(str(literal)))

    def format(self, value: Any) -> str:
        return str(self.coerce(value).value)

    def random(self, rng: random.Random, bound: int = 100) -> GF:
        return GF(rng.randrange(self.p), self.p)


@dataclass(frozen=True)
class GaussianRationalField(Field):
    has_conjugation = True

    def tag(self) -> FieldTag:
        return "gaussian-rational"

    def coerce(self, value: Any) -> GaussianRational:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        raise FieldError(f"cannot represent {value!r} as a Gaussian rational")

    def parse(self, literal: str) -> GaussianRational:
        real, imag = _split_complex_literal(str(literal))
        return GaussianRational(_parse_fraction(real), _parse_fraction(imag))

    def format(self, value: Any) -> str:
        return str(self.coerce(value))

    def conj(self, value: Any) -> GaussianRational:
        return self.coerce(value).conjugate()

    def random(self, rng: random.Random, bound: int = 100) -> GaussianRational:
        return GaussianRational(
            Fraction(rng.randint(-bound, bound), rng.randint(1, bound)),
            Fraction(rng.randint(-bound, bound), rng.randint(1, bound)),
        )


@dataclass(frozen=True)
class Float64Field(Field):
    exact = False

    def tag(self) -> FieldTag:
        return "f64"

    def coerce(self, value: Any) -> float:
        if isinstance(value, GaussianRational):
            if value.im != 0:
                raise FieldError(f"cannot represent {value} as a real float")
            value = value.re
        if isinstance(value, complex):
            raise FieldError(f"cannot represent {value} as a real float")
        return float(value)

    def parse(self, literal: str) -> float:
        try:
            return float(str(literal))
        except ValueError:
            return float(_parse_fraction(str(literal)))

    def format(self, value: Any) -> str:
        return repr(float(value))

    def magnitude(self, value: Any) -> float:
        return abs(value)

    def random(self, rng: random.Random, bound: int = 100) -> float:
        return rng.uniform(-1.0, 1.0)


@dataclass(frozen=True)
class Complex128Field(Field):
    exact = False
    has_conjugation = True

    def tag(self) -> FieldTag:
        return "c64"

    def coerce(self, value: Any) -> complex:
        if isinstance(value, GaussianRational):
            return complex(float(value.re), float(value.im))
        return complex(value)

    def parse(self, literal: str) -> complex:
        real, imag = _split_complex_literal(str(literal))
        try:
            return complex(float(real), float(imag))
        except ValueError:
            return complex(float(_parse_fraction(real)), float(_parse_fraction(imag)))

    def format(self, value: Any) -> str:
        c = complex(value)
        return _format_complex_parts(c.real, c.imag, repr)

    def conj(self, value: Any) -> complex:
        return complex(value).conjugate()

    def magnitude(self, value: Any) -> float:
        return abs(value)

    def random(self, rng: random.Random, bound: int = 100) -> complex:
        return complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))


RATIONAL = RationalField()
GAUSSIAN = GaussianRationalField()
FLOAT64 = Float64Field()
COMPLEX128 = Complex128Field()

_NAMED_FIELDS: dict[str, Field] = {
    "rational": RATIONAL,
    "gaussian-rational": GAUSSIAN,
    "f64": FLOAT64,
    "c64": COMPLEX128,
}
_GF_SHORTHAND = re.compile(r"^gf\(?(\d+)\)?$", re.IGNORECASE)


def field_from_tag(tag: FieldTag) -> Field:
    """Resolve a document tag or a CLI shorthand such as ``gf7``."""
    if isinstance(tag, dict):
        if set(tag) != {"gf"}:
            raise InputError(f"unknown field tag {tag!r}")
        return PrimeField(int(tag["gf"]))
    if isinstance(tag, str):
        key = tag.strip().lower()
        if key in _NAMED_FIELDS:
            return _NAMED_FIELDS[key]
        match = _GF_SHORTHAND.match(key)
        if match:
            return PrimeField(int(match.group(1)))
    raise InputError(f"unknown field tag {tag!r}")


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------


def zeros(field: Field, rows: int, cols: int) -> np.ndarray:
    out = np.empty((rows, cols), dtype=object)
    out.fill(field.zero())
    return out


def identity(field: Field, n: int) -> np.ndarray:
    out = zeros(field, n, n)
    for i in range(n):
        out[i, i] = field.one()
    return out


def as_matrix(field: Field, rows: Iterable[Iterable[Any]]) -> np.ndarray:
    """Build an object matrix, coercing every entry into ``field``."""
    data = [[field.coerce(x) for x in row] for row in rows]
    if not data:
        return np.empty((0, 0), dtype=object)
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise InputError("ragged matrix rows")
    out = np.empty((len(data), width), dtype=object)
    for i, row in enumerate(data):
        for j, x in enumerate(row):
            out[i, j] = x
    return out


def map_entries(a: np.ndarray, fn: Callable[[Any], Any]) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = fn(x)
    return out


def conj_matrix(field: Field, a: np.ndarray) -> np.ndarray:
    return map_entries(a, field.conj)


def is_zero_matrix(field: Field, a: np.ndarray) -> bool:
    return all(field.is_zero(x) for x in a.flat)


def matrices_equal(field: Field, a: np.ndarray, b: np.ndarray, rtol: Optional[float] = None) -> bool:
    """Exact equality over exact fields, relative closeness over floating ones."""
    if a.shape != b.shape:
        return False
    if field.exact:
        return all(x == y for x, y in zip(a.flat, b.flat))
    rtol = settings.float_rtol if rtol is None else rtol
    fa = np.asarray(a, dtype=complex)
    fb = np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(fa), initial=0.0)), float(np.max(np.abs(fb), initial=0.0)))
    return bool(np.all(np.abs(fa - fb) <= rtol * scale))


def _require_square(a: np.ndarray, what: str) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError(f"{what} needs a square matrix, got shape {a.shape}")
    return a.shape[0]


def _bareiss(m: list[list[int]]) -> int:
    """Fraction-free elimination; every division below is exact."""
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _choose_pivot(field: Field, rows: list[list[Any]], col: int, start: int) -> Optional[int]:
    candidates = [r for r in range(start, len(rows)) if not field.is_zero(rows[r][col])]
    if not candidates:
        return None
    if field.exact:
        return candidates[0]
    return max(candidates, key=lambda r: field.magnitude(rows[r][col]))


def determinant(field: Field, a: np.ndarray) -> Any:
    """Determinant; Bareiss over the rationals, Gaussian elimination otherwise."""
    n = _require_square(a, "determinant")
    if n == 0:
        return field.one()
    if isinstance(field, RationalField):
        scales = [math.lcm(*(Fraction(x).denominator for x in a[i])) for i in range(n)]
        ints = [[int(Fraction(x) * scales[i]) for x in a[i]] for i in range(n)]
        return Fraction(_bareiss(ints), math.prod(scales))
    if not field.exact:
        logger.debug("determinant over %s is inexact", field)
    rows = [list(a[i]) for i in range(n)]
    det = field.one()
    for col in range(n):
        piv = _choose_pivot(field, rows, col, col)
        if piv is None:
            return field.zero()
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        pivot = rows[col][col]
        det = det * pivot
        for r in range(col + 1, n):
            factor = rows[r][col] / pivot
            if field.is_zero(factor):
                continue
            for c in range(col, n):
                rows[r][c] = rows[r][c] - factor * rows[col][c]
    return det


def row_echelon(field: Field, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns (exact fields only)."""
    field.require_exact("row_echelon")
    rows = [list(a[i]) for i in range(a.shape[0])]
    ncols = a.shape[1] if a.ndim == 2 else 0
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == len(rows):
            break
        piv = _choose_pivot(field, rows, col, r)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.one() / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for other in range(len(rows)):
            if other != r and not field.is_zero(rows[other][col]):
                factor = rows[other][col]
                rows[other] = [x - factor * y for x, y in zip(rows[other], rows[r])]
        pivots.append(col)
        r += 1
    out = as_matrix(field, rows) if rows else np.empty(a.shape, dtype=object)
    return out, pivots


def rank(field: Field, a: np.ndarray) -> int:
    return len(row_echelon(field, a)[1])


def kernel_basis(field: Field, a: np.ndarray) -> list[np.ndarray]:
    """Basis of the right null space; empty when the columns are independent."""
    field.require_exact("kernel_basis")
    rref, pivots = row_echelon(field, a)
    ncols = a.shape[1]
    free = [c for c in range(ncols) if c not in pivots]
    basis: list[np.ndarray] = []
    for f in free:
        vec = np.empty(ncols, dtype=object)
        vec.fill(field.zero())
        vec[f] = field.one()
        for row, pcol in enumerate(pivots):
            vec[pcol] = -rref[row, f]
        basis.append(vec)
    return basis


def solve(field: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """X with A X = B by Gauss-Jordan elimination on [A | B]."""
    n = _require_square(a, "solve")
    if b.shape[0] != n:
        raise PreconditionError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    width = b.shape[1]
    rows = [list(a[i]) + list(b[i]) for i in range(n)]
    for col in range(n):
        piv = _choose_pivot(field, rows, col, col)
        if piv is None:
            raise SingularMatrixError("matrix is singular", detail={"column": col})
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = field.one() / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(n):
            if r != col and not field.is_zero(rows[r][col]):
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    out = zeros(field, n, width)
    for i in range(n):
        for j in range(width):
            out[i, j] = rows[i][n + j]
    return out


def inverse(field: Field, a: np.ndarray) -> np.ndarray:
    n = _require_square(a, "inverse")
    return solve(field, a, identity(field, n))


def random_matrix(field: Field, rng: random.Random, rows: int, cols: int, bound: int = 100) -> np.ndarray:
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = field.random(rng, bound)
    return out


def format_matrix(field: Field, a: np.ndarray) -> list[list[str]]:
    return [[field.format(x) for x in row] for row in a]


def parse_matrix(field: Field, rows: Sequence[Sequence[Any]]) -> np.ndarray:
    return as_matrix(field, ([field.parse(str(x)) for x in row] for row in rows))
