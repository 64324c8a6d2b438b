"""
Pydantic schemas for documents and command reports.

Documents carry matrix polynomials and pencils as grids of scalar literals so
they survive a JSON round trip exactly. Reports are what each subcommand
emits; all of them are versioned "v1".
"""

from __future__ import annotations

from typing import Any, List, Literal, Optional, Union

from pydantic import BaseModel, field_validator, model_validator

from app.core.errors import InputError
from app.services.bases import basis_from_tag
from app.services.fields import field_from_tag

SCHEMA_VERSION = "v1"

FieldTag = Union[str, dict[str, int]]
BasisTag = Union[str, dict[str, Any]]
LiteralGrid = List[List[str]]


def _literal(x: Any) -> str:
    if isinstance(x, bool) or not isinstance(x, (str, int, float)):
        raise ValueError(f"scalar literal expected, got {x!r}")
    text = str(x).strip()
    if not text:
        raise ValueError("scalar literal cannot be empty.")
    return text


def _literal_grid(rows: Any) -> LiteralGrid:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValueError("a matrix must be a list of rows.")
    return [[_literal(x) for x in row] for row in rows]


def _check_square(grid: LiteralGrid, size: int, what: str) -> None:
    if len(grid) != size or any(len(row) != size for row in grid):
        raise ValueError(f"{what} must be {size}x{size}.")


def _check_tags(field: FieldTag, basis: BasisTag) -> None:
    try:
        f = field_from_tag(field)
        basis_from_tag(basis).check_field(f)
    except InputError as exc:
        raise ValueError(exc.message) from exc


class MatPolyDocument(BaseModel):
    """
    A matrix polynomial on disk.

    ``coeffs[i]`` is the coefficient of phi_i, ascending, each an n x n grid
    of literals in the field's grammar.
    """
    field: FieldTag = "rational"
    basis: BasisTag = "monomial"
    n: int
    grade: int
    coeffs: List[LiteralGrid]

    @field_validator("field")
    @classmethod
    def _validate_field(cls, v: FieldTag) -> FieldTag:
        try:
            return field_from_tag(v).tag()
        except InputError as exc:
            raise ValueError(exc.message) from exc

    @field_validator("n")
    @classmethod
    def _validate_n(cls, v: int) -> int:
        if v < 1:
            raise ValueError("n must be at least 1.")
        return v

    @field_validator("grade")
    @classmethod
    def _validate_grade(cls, v: int) -> int:
        if v < 0:
            raise ValueError("grade cannot be negative.")
        return v

    @field_validator("coeffs", mode="before")
    @classmethod
    def _validate_coeffs(cls, v: Any) -> List[LiteralGrid]:
        if not isinstance(v, list):
            raise ValueError("coeffs must be a list of matrices.")
        return [_literal_grid(c) for c in v]

    @model_validator(mode="after")
    def _validate_shape(self) -> "MatPolyDocument":
        if len(self.coeffs) != self.grade + 1:
            raise ValueError(f"coeffs has {len(self.coeffs)} matrices, grade {self.grade} needs {self.grade + 1}.")
        for i, c in enumerate(self.coeffs):
            _check_square(c, self.n, f"coeffs[{i}]")
        _check_tags(self.field, self.basis)
        return self


class PencilDocument(BaseModel):
    """
    A pencil t X + Y on disk, as written by ``dl --output``.

    X and Y are nk x nk literal grids; ``ansatz`` (ascending) is informational.
    """
    field: FieldTag = "rational"
    basis: BasisTag = "monomial"
    n: int
    k: int
    X: LiteralGrid
    Y: LiteralGrid
    ansatz: Optional[List[str]] = None

    @field_validator("field")
    @classmethod
    def _validate_field(cls, v: FieldTag) -> FieldTag:
        try:
            return field_from_tag(v).tag()
        except InputError as exc:
            raise ValueError(exc.message) from exc

    @field_validator("X", "Y", mode="before")
    @classmethod
    def _validate_grid(cls, v: Any) -> LiteralGrid:
        return _literal_grid(v)

    @model_validator(mode="after")
    def _validate_shape(self) -> "PencilDocument":
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be at least 1.")
        _check_square(self.X, self.n * self.k, "X")
        _check_square(self.Y, self.n * self.k, "Y")
        if self.ansatz is not None and len(self.ansatz) != self.k:
            raise ValueError(f"ansatz must have k = {self.k} entries.")
        _check_tags(self.field, self.basis)
        return self


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class Report(BaseModel):
    schema_version: Literal["v1"] = SCHEMA_VERSION


class Verdict(BaseModel):
    """Outcome of an eigenvalue exclusion test."""
    kind: Literal["linearization", "shared-finite-root", "shared-infinite-eigenvalue", "inconclusive"]
    witness: Optional[str] = None
    reason: str = ""


class DlReport(Report):
    """X, Y of DL(P, v) with the exclusion verdict (None over floats)."""
    field: FieldTag
    basis: BasisTag
    n: int
    k: int
    ansatz: List[str]
    X: LiteralGrid
    Y: LiteralGrid
    verdict: Optional[Verdict] = None
    cross_checked: bool = False


class BdlReport(Report):
    """BDL(P, v) together with Q(x), S(x) and the quotient A(x), ascending."""
    field: FieldTag
    n: int
    k: int
    v: str
    X: LiteralGrid
    Y: LiteralGrid
    Q: List[LiteralGrid]
    S: List[LiteralGrid]
    A: List[LiteralGrid]
    verdict: Optional[Verdict] = None


class BezoutReport(Report):
    field: FieldTag
    basis: BasisTag
    grade: int
    multiplier_grade: int
    matrix: LiteralGrid
    kernel_dimension: Optional[int] = None
    kernel: List[List[str]] = []


class CompanionReport(Report):
    which: Literal[1, 2]
    field: FieldTag
    matrix: LiteralGrid


class DivisionReport(Report):
    """V = A P + R (left) or V = P A + R (right), coefficients ascending."""
    side: Literal["left", "right"]
    field: FieldTag
    quotient: List[LiteralGrid]
    remainder: List[LiteralGrid]


class CheckReport(Report):
    """A pencil that belongs to DL(P), with its recovered ansatz (ascending)."""
    member: bool
    space: str = "DL"
    ansatz: List[str]


class EigenvalueItem(BaseModel):
    re: float
    im: float
    in_interval: bool
    residual: float
    ratio: Optional[float] = None
    lhopital_error: Optional[float] = None


class PerturbationItem(BaseModel):
    value_re: float
    value_im: float
    predicted_re: float
    predicted_im: float
    error: float
    kappa: float
    allowed: float
    within: bool


class ConditioningReport(Report):
    """
    Conditioning of DL(P, 1) against P over [-1, 1].

    ``perturbation`` is filled when the report comes from a document and
    random perturbation trials were requested.
    """
    seed: Optional[int] = None
    n: int
    k: int
    p_norm: float
    l_norm: float
    v_norm: float
    ratio_bound: float
    norm_bound: float
    norm_bound_holds: bool
    max_ratio: Optional[float] = None
    passed: bool
    eigenvalues: List[EigenvalueItem] = []
    perturbation: List[PerturbationItem] = []

    @model_validator(mode="after")
    def _validate_passed(self) -> "ConditioningReport":
        if self.passed and not self.norm_bound_holds:
            raise ValueError("a report cannot pass while the norm bound fails.")
        return self


class ConditioningBatchReport(Report):
    seed: int
    trials: int
    violations: int
    reports: List[ConditioningReport]

    @model_validator(mode="after")
    def _validate_count(self) -> "ConditioningBatchReport":
        if len(self.reports) != self.trials:
            raise ValueError("trials must match the number of reports.")
        return self


class ErrorReport(Report):
    """Structured failure, printed instead of a report."""
    code: str
    message: str
    exit_code: int
    detail: dict[str, Any] = {}
