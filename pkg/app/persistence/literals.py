"""
Command-line grammar for scalar polynomials and coefficient lists.

Polynomials are written in the monomial basis, e.g. ``x^2+3/2*x-1``.
Coefficients that contain their own sign or an imaginary unit must be
parenthesized: ``(1+2*i)*x^2-(1/2)``. Non-monomial inputs come from files.
"""

from __future__ import annotations

import re
from typing import Any

from app.core.errors import InputError
from app.services.fields import Field
from app.services.polynomials import ScalarPoly

_MONOMIAL_RE = re.compile(r"^(?P<coef>.*?)\*?x(?:\^(?P<exp>\d+))?$")


def _split_terms(text: str) -> list[str]:
    """Split at top-level signs, keeping each sign with its term."""
    terms: list[str] = []
    depth, start = 0, 0
    for idx, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise InputError(f"unbalanced parentheses in {text!r}")
        elif ch in "+-" and depth == 0 and idx > start:
            prev = text[idx - 1]
            # 1e-3 keeps its exponent sign; "*-" and "^-" are not term breaks
            if prev in "*^" or (prev in "eE" and idx >= 2 and (text[idx - 2].isdigit() or text[idx - 2] == ".")):
                continue
            terms.append(text[start:idx])
            start = idx
    if depth != 0:
        raise InputError(f"unbalanced parentheses in {text!r}")
    terms.append(text[start:])
    return terms


def _unwrap(text: str) -> str:
    if text.startswith("(") and text.endswith(")"):
        return text[1:-1]
    return text


def _coefficient(field: Field, text: str, term: str) -> Any:
    if text in ("", "+"):
        return field.one()
    if text == "-":
        return -field.one()
    sign = 1
    if text[0] in "+-" and text[1:2] == "(":
        sign, text = (-1 if text[0] == "-" else 1), text[1:]
    try:
        value = field.parse(_unwrap(text))
    except InputError as exc:
        raise InputError(f"malformed coefficient in term {term!r}: {exc.message}") from exc
    return -value if sign < 0 else value


def parse_scalar_poly(text: str, field: Field) -> ScalarPoly:
    """Parse ``x^2+3/2*x-1`` style text into a ScalarPoly over ``field``."""
    body = text.replace(" ", "")
    if not body:
        raise InputError("empty polynomial literal")
    acc: dict[int, Any] = {}
    for term in _split_terms(body):
        match = _MONOMIAL_RE.match(term)
        if match:
            coef = _coefficient(field, match.group("coef"), term)
            power = int(match.group("exp") or 1)
        else:
            coef = _coefficient(field, term, term)
            power = 0
        acc[power] = acc.get(power, field.zero()) + coef
    top = max(acc)
    return ScalarPoly.from_coeffs(field, [acc.get(i, field.zero()) for i in range(top + 1)])


def parse_scalar_list(text: str, field: Field) -> list:
    """Comma-separated scalar literals, e.g. an ascending ansatz ``0,0,1``."""
    items = [s.strip() for s in text.split(",")]
    if not items or any(not s for s in items):
        raise InputError(f"malformed coefficient list {text!r}")
    return [field.parse(s) for s in items]
