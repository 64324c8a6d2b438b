"""
Linearization service used by every subcommand.

Runs the constructions, cross-checks independent routes where the field is
exact, and turns the results into versioned reports.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Union

import numpy as np

from app.core.config import settings
from app.core.errors import PreconditionError, TheoremViolation
from app.models import schemas
from app.services import bases as B
from app.services import bdl as BDL
from app.services import conditioning as C
from app.services import dl as DL
from app.services import fields as F
from app.services.bases import Basis, BasisKind
from app.services.bezout import BezoutResult, bezout_commuting, bezout_lt, bezout_onesided, bezout_scalar
from app.services.blockpoly import MatrixPolynomial, Pencil
from app.services.fields import Field
from app.services.polynomials import ScalarPoly

# Configure module logger
logger = logging.getLogger("linearization_service")

Operand = Union[ScalarPoly, MatrixPolynomial]


def _coeff_grids(p: MatrixPolynomial) -> list[list[list[str]]]:
    return [F.format_matrix(p.field, c) for c in p.coeffs]


def _verdict(v: DL.ExclusionVerdict) -> schemas.Verdict:
    witness = None if v.witness is None else v.witness.format()
    return schemas.Verdict(kind=v.kind.value, witness=witness, reason=v.reason)


def _complex_parts(z: complex) -> tuple[float, float]:
    z = complex(z)
    return float(z.real), float(z.imag)


class LinearizationService:
    """
    Entry points for the command line, one per subcommand.
    Stateless apart from logging; one instance can serve any number of calls.
    """

    def __init__(self, cross_check: bool = True, max_workers: Optional[int] = None) -> None:
        # Ensure logger level respects DEBUG flag without reconfiguring global handlers.
        logger.setLevel(logging.DEBUG if settings.debug else logging.INFO)
        self._cross_check = cross_check
        self._max_workers = max_workers or settings.max_workers

    # ------------------------------------------------------------------
    # DL
    # ------------------------------------------------------------------

    def dl(self, p: MatrixPolynomial, ansatz: Sequence) -> tuple[schemas.DlReport, Pencil]:
        """
        DL(P, v) for an ascending ansatz, with the exclusion verdict.

        Over exact fields the recurrence is compared against the Bezout route
        (and the closed form in the monomial basis); any disagreement is a
        theorem violation.
        """
        v = DL.Ansatz.from_ascending(p.field, p.basis, ansatz)
        pencil = DL.dl_pencil(p, v)
        checked = False
        verdict = None
        if p.field.exact:
            if self._cross_check:
                self._compare_routes(p, v, pencil)
                checked = True
            verdict = _verdict(DL.exclusion_check(p, v))
        else:
            logger.warning("DL pencil over %s: no exclusion verdict is computed in floating point", p.field)

        report = schemas.DlReport(
            field=p.field.tag(),
            basis=p.basis.tag(),
            n=p.n,
            k=p.grade,
            ansatz=v.format(),
            X=pencil.X.format(),
            Y=pencil.Y.format(),
            verdict=verdict,
            cross_checked=checked,
        )
        return report, pencil

    def _compare_routes(self, p: MatrixPolynomial, v: DL.Ansatz, pencil: Pencil) -> None:
        routes = [("Bezout", DL.dl_pencil_bezout)]
        if p.basis.kind is BasisKind.MONOMIAL:
            routes.append(("closed form", DL.dl_pencil_monomial))
        for name, build in routes:
            other = build(p, v)
            for coeff, a, b in (("X", pencil.X, other.X), ("Y", pencil.Y, other.Y)):
                where = a.first_difference(b)
                if where is not None:
                    raise TheoremViolation(
                        f"DL recurrence and {name} route disagree in {coeff}",
                        detail={"route": name, "coefficient": coeff, "block": list(where)},
                    )
        logger.debug("DL routes agree: n=%d k=%d basis=%s", p.n, p.grade, p.basis.kind.value)

    def check(self, pencil: Pencil, p: MatrixPolynomial) -> schemas.CheckReport:
        """Recovers the ansatz of a DL(P) pencil; rejection propagates as RejectionError."""
        if pencil.basis != p.basis:
            raise PreconditionError("pencil and polynomial documents declare different bases")
        v = DL.recover_ansatz(pencil, p)
        if not DL.dl_pencil(p, v).equals(pencil):
            raise TheoremViolation("recovered ansatz does not rebuild the pencil")
        return schemas.CheckReport(member=True, ansatz=v.format())

    # ------------------------------------------------------------------
    # BDL, companions, division
    # ------------------------------------------------------------------

    def bdl(self, p: MatrixPolynomial, v: ScalarPoly) -> schemas.BdlReport:
        result = BDL.bdl_pencil(p, v)
        verdict = _verdict(BDL.bdl_exclusion_check(p, v)) if p.field.exact else None
        return schemas.BdlReport(
            field=p.field.tag(),
            n=p.n,
            k=p.grade,
            v=v.format(),
            X=result.pencil.X.format(),
            Y=result.pencil.Y.format(),
            Q=_coeff_grids(result.right_ansatz),
            S=_coeff_grids(result.left_ansatz),
            A=_coeff_grids(result.quotient),
            verdict=verdict,
        )

    def companion(self, p: MatrixPolynomial, which: int) -> schemas.CompanionReport:
        if which not in (1, 2):
            raise PreconditionError(f"companion form must be 1 or 2, got {which}")
        matrix = BDL.companion_first(p) if which == 1 else BDL.companion_second(p)
        return schemas.CompanionReport(which=which, field=p.field.tag(), matrix=F.format_matrix(p.field, matrix))

    def divide(self, v: MatrixPolynomial, p: MatrixPolynomial, side: str) -> schemas.DivisionReport:
        result = BDL.matdiv(v, p, side)  # type: ignore[arg-type]
        return schemas.DivisionReport(
            side=result.side,
            field=p.field.tag(),
            quotient=_coeff_grids(result.quotient),
            remainder=_coeff_grids(result.remainder),
        )

    # ------------------------------------------------------------------
    # Bezout
    # ------------------------------------------------------------------

    def bezout(
        self,
        p1: Operand,
        p2: Operand,
        *,
        grade: Optional[int] = None,
        multipliers: Optional[tuple[Operand, Operand]] = None,
        onesided: bool = False,
        field: Field = F.RATIONAL,
        basis: Optional[Basis] = None,
    ) -> schemas.BezoutReport:
        """
        Bezout matrix of two operands.

        Two scalar literals without multipliers give the scalar Bezout matrix
        at ``grade``. Otherwise scalar operands are lifted to v I_n next to
        any matrix operand.
        """
        basis = basis or Basis.monomial()
        operands = [p1, p2] + list(multipliers or ())
        matrices = [op for op in operands if isinstance(op, MatrixPolynomial)]
        if not matrices and multipliers is None and not onesided:
            top = max(p1.degree, p2.degree)  # type: ignore[union-attr]
            result = bezout_scalar(p1, p2, grade if grade is not None else max(top, 1), basis, field)
            return self._bezout_report(result, basis)

        if matrices:
            field, basis, n = matrices[0].field, matrices[0].basis, matrices[0].n
        else:
            n = 1
        lifted = [self._lift(op, n, basis, field) for op in operands]
        if grade is not None:
            lifted[:2] = [op.with_grade(max(grade, op.grade)) for op in lifted[:2]]
        if multipliers is not None:
            result = bezout_lt(lifted[0], lifted[1], lifted[2], lifted[3])
        elif onesided:
            result = bezout_onesided(lifted[0], lifted[1])
        else:
            result = bezout_commuting(lifted[0], lifted[1])
        return self._bezout_report(result, basis)

    @staticmethod
    def _lift(op: Operand, n: int, basis: Basis, field: Field) -> MatrixPolynomial:
        if isinstance(op, MatrixPolynomial):
            if op.n != n or op.field != field or op.basis != basis:
                raise PreconditionError("all Bezout operands must share size, field and basis")
            return op
        if op.field != field:
            op = ScalarPoly.from_coeffs(field, op.coeffs)
        coeffs = B.from_monomial(basis, op, max(op.degree, 0), field)
        return MatrixPolynomial.scalar_identity(field, basis, coeffs, n)

    @staticmethod
    def _bezout_report(result: BezoutResult, basis: Basis) -> schemas.BezoutReport:
        field = result.field
        kernel = [[field.format(x) for x in vec.ravel()] for vec in result.kernel()] if field.exact else []
        return schemas.BezoutReport(
            field=field.tag(),
            basis=basis.tag(),
            grade=result.grade,
            multiplier_grade=result.multiplier_grade,
            matrix=result.matrix.format(),
            kernel_dimension=result.kernel_dimension,
            kernel=kernel,
        )

    # ------------------------------------------------------------------
    # Conditioning
    # ------------------------------------------------------------------

    def condition(
        self,
        p: MatrixPolynomial,
        *,
        trials: int = 0,
        seed: Optional[int] = None,
        eps: float = 1e-6,
    ) -> schemas.ConditioningReport:
        """Bound report for DL(P, 1) plus ``trials`` seeded perturbation checks."""
        report = C.bound_report(p, seed=seed)
        base = report.seed if report.seed is not None else settings.random_seed
        items: list[schemas.PerturbationItem] = []
        for i in range(trials):
            for e in C.perturbation_check(p, eps=eps, seed=base + i).entries:
                items.append(self._perturbation_item(e))
        return self._conditioning_model(report, items)

    async def condition_batch(
        self,
        trials: int,
        *,
        seed: Optional[int] = None,
        n: Optional[int] = None,
        k: Optional[int] = None,
    ) -> schemas.ConditioningBatchReport:
        """Random Chebyshev instances fanned out over worker threads."""
        batch = await C.bound_batch(trials, n=n, k=k, seed=seed, max_workers=self._max_workers)
        return schemas.ConditioningBatchReport(
            seed=batch.seed,
            trials=trials,
            violations=batch.violations,
            reports=[self._conditioning_model(r, []) for r in batch.reports],
        )

    @staticmethod
    def _perturbation_item(e: C.PerturbationEntry) -> schemas.PerturbationItem:
        v_re, v_im = _complex_parts(e.value)
        p_re, p_im = _complex_parts(e.predicted)
        return schemas.PerturbationItem(
            value_re=v_re,
            value_im=v_im,
            predicted_re=p_re,
            predicted_im=p_im,
            error=e.error,
            kappa=e.kappa,
            allowed=100.0 * e.eps_squared * e.scale,
            within=e.within,
        )

    @staticmethod
    def _conditioning_model(
        report: C.ConditioningReport, perturbation: list[schemas.PerturbationItem]
    ) -> schemas.ConditioningReport:
        eigenvalues = []
        for e in report.entries:
            re, im = _complex_parts(e.value)
            eigenvalues.append(
                schemas.EigenvalueItem(
                    re=re,
                    im=im,
                    in_interval=e.in_interval,
                    residual=e.residual,
                    ratio=e.ratio,
                    lhopital_error=e.lhopital_error,
                )
            )
        ratios = [e.ratio for e in report.entries if e.ratio is not None]
        return schemas.ConditioningReport(
            seed=report.seed,
            n=report.n,
            k=report.k,
            p_norm=report.p_norm,
            l_norm=report.l_norm,
            v_norm=report.v_norm,
            ratio_bound=report.ratio_bound,
            norm_bound=report.norm_bound,
            norm_bound_holds=report.norm_bound_holds,
            max_ratio=float(np.max(ratios)) if ratios else None,
            passed=report.passed and all(item.within for item in perturbation),
            eigenvalues=eigenvalues,
            perturbation=perturbation,
        )
