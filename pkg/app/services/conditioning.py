"""
Eigenvalue conditioning of DL(P, v) for Chebyshev-basis matrix polynomials.

Norms are maxima of spectral norms over a Chebyshev-point grid on [-1, 1]
of max(norm_grid_min, norm_grid_factor * k^2) points. Eigenvalues come from
a dense QZ solve of the pencil; the polynomial's own eigenvectors are the
smallest singular pair of P(lambda). Only eigenvalues in [-1, 1] are held to
the ratio bound 16 n (e - 1) k^4.
"""

from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev as cheb

from app.core.config import settings
from app.core.dependencies import get_numpy_rng, resolve_seed
from app.core.errors import EigensolverError, FieldError, PreconditionError
from app.services import fields as F
from app.services.bases import Basis, BasisKind
from app.services.blockpoly import MatrixPolynomial, Pencil
from app.services.dl import Ansatz, dl_pencil

logger = logging.getLogger("conditioning")

E_MINUS_ONE = math.e - 1.0


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenTriple:
    value: complex
    right: np.ndarray
    left: np.ndarray
    residual: float
    simple: bool = True


@dataclass(frozen=True)
class EigenEntry:
    """One eigenvalue of the pencil and its conditioning ratio."""

    value: complex
    in_interval: bool
    residual: float
    ratio: Optional[float] = None
    lhopital_error: Optional[float] = None


@dataclass(frozen=True)
class ConditioningReport:
    n: int
    k: int
    seed: Optional[int]
    p_norm: float
    l_norm: float
    v_norm: float
    ratio_bound: float
    norm_bound: float
    entries: tuple[EigenEntry, ...] = ()

    @property
    def norm_bound_holds(self) -> bool:
        return self.l_norm <= self.norm_bound * (1.0 + 1e-12)

    @property
    def ratio_violations(self) -> list[EigenEntry]:
        return [e for e in self.entries if e.ratio is not None and e.ratio > self.ratio_bound]

    @property
    def passed(self) -> bool:
        return self.norm_bound_holds and not self.ratio_violations


@dataclass(frozen=True)
class PerturbationEntry:
    value: complex
    predicted: complex
    recomputed: complex
    error: float
    kappa: float
    scale: float
    eps_squared: float

    @property
    def within(self) -> bool:
        return self.error <= 100.0 * self.eps_squared * self.scale


@dataclass(frozen=True)
class PerturbationReport:
    eps: float
    seed: int
    entries: tuple[PerturbationEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.within for e in self.entries)


@dataclass(frozen=True)
class ConditioningBatch:
    seed: int
    reports: tuple[ConditioningReport, ...] = dc_field(default=())

    @property
    def violations(self) -> int:
        return sum(0 if r.passed else 1 for r in self.reports)


# ---------------------------------------------------------------------------
# Norms and evaluation
# ---------------------------------------------------------------------------


def _require_chebyshev(p: MatrixPolynomial) -> None:
    if p.basis.kind is not BasisKind.CHEBYSHEV_T:
        raise PreconditionError("conditioning analysis is set up for the Chebyshev basis")
    if p.field.exact:
        raise FieldError(f"conditioning analysis runs in floating point, not over {p.field}")


def coefficient_stack(p: MatrixPolynomial) -> np.ndarray:
    """Coefficients as a complex (grade+1, n, n) array."""
    return np.array([np.asarray(c, dtype=complex) for c in p.coeffs])


def chebyshev_grid(k: int) -> np.ndarray:
    size = max(settings.norm_grid_min, settings.norm_grid_factor * k * k)
    return np.cos(np.pi * np.arange(size) / (size - 1))


def _values(coeffs: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.moveaxis(cheb.chebval(xs, coeffs), -1, 0)


def poly_norm(p: MatrixPolynomial, grid: Optional[np.ndarray] = None) -> float:
    """max over the grid of ||P(x)||_2."""
    _require_chebyshev(p)
    xs = chebyshev_grid(p.grade) if grid is None else grid
    return float(np.max(np.linalg.norm(_values(coefficient_stack(p), xs), 2, axis=(1, 2))))


def pencil_norm(pencil: Pencil, grid: np.ndarray) -> float:
    x = np.asarray(pencil.X.data, dtype=complex)
    y = np.asarray(pencil.Y.data, dtype=complex)
    values = grid[:, None, None] * x[None] + y[None]
    return float(np.max(np.linalg.norm(values, 2, axis=(1, 2))))


def lambda_vector(k: int, lam: complex) -> np.ndarray:
    """[T_{k-1}(lam), ..., T_0(lam)]."""
    return cheb.chebvander(np.array([lam], dtype=complex), k - 1)[0][::-1]


def in_interval(lam: complex) -> bool:
    tol = settings.interval_tol
    return abs(lam.imag) <= settings.residual_tol and -1.0 - tol <= lam.real <= 1.0 + tol


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------


def eigensolve(pencil: Pencil) -> list[EigenTriple]:
    """Finite eigenvalues of lambda X + Y with left/right eigenvectors (QZ)."""
    x = np.asarray(pencil.X.data, dtype=complex)
    y = np.asarray(pencil.Y.data, dtype=complex)
    try:
        values, left, right = scipy.linalg.eig(-y, x, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"generalized eigensolver failed: {exc}") from exc
    norm_x, norm_y = np.linalg.norm(x, 2), np.linalg.norm(y, 2)
    triples: list[EigenTriple] = []
    for i, lam in enumerate(values):
        if not np.isfinite(lam):
            logger.debug("dropping infinite eigenvalue %d", i)
            continue
        xr, yl = right[:, i], left[:, i]
        scale = (abs(lam) * norm_x + norm_y) * np.linalg.norm(xr)
        residual = float(np.linalg.norm((lam * x + y) @ xr) / scale) if scale else 0.0
        if residual > settings.residual_tol:
            raise EigensolverError(
                f"eigenvalue {complex(lam):.6g} has residual {residual:.2e}",
                detail={"index": i, "residual": residual},
            )
        triples.append(EigenTriple(complex(lam), xr, yl, residual))
    logger.debug("QZ: %d finite eigenvalues, max residual %.2e",
                 len(triples), max((t.residual for t in triples), default=0.0))
    return triples


def polynomial_triple(p: MatrixPolynomial, lam: complex) -> EigenTriple:
    """Unit right/left eigenvectors of P at lam from the smallest singular pair."""
    coeffs = coefficient_stack(p)
    u, s, vh = np.linalg.svd(cheb.chebval(lam, coeffs))
    x, y = vh[-1].conj(), u[:, -1]
    derivative = _derivative_at(p, lam)
    denom = abs(y.conj() @ derivative @ x)
    simple = denom > 1e-8 * max(1.0, float(np.linalg.norm(derivative, 2)))
    return EigenTriple(complex(lam), x, y, float(s[-1] / max(s[0], np.finfo(float).tiny)), simple)


def _derivative_at(p: MatrixPolynomial, lam: complex) -> np.ndarray:
    coeffs = coefficient_stack(p)
    if p.grade == 0:
        return np.zeros_like(coeffs[0])
    return cheb.chebval(lam, cheb.chebder(coeffs, axis=0))


def _ansatz_values(v: Ansatz, xs) -> np.ndarray:
    return cheb.chebval(xs, np.array([complex(c) for c in v.coeffs]))


def _lifted(k: int, lam: complex, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam_vec = lambda_vector(k, lam)
    return np.kron(lam_vec, x), np.kron(lam_vec.conj(), y)


def lhopital_error(p: MatrixPolynomial, v: Ansatz, pencil: Pencil, triple: EigenTriple) -> float:
    """Relative gap in y_hat^* X x_hat = v(lam) y^* P'(lam) x."""
    x_hat, y_hat = _lifted(p.grade, triple.value, triple.right, triple.left)
    x_mat = np.asarray(pencil.X.data, dtype=complex)
    lhs = y_hat.conj() @ x_mat @ x_hat
    rhs = _ansatz_values(v, triple.value) * (triple.left.conj() @ _derivative_at(p, triple.value) @ triple.right)
    scale = max(abs(rhs), np.finfo(float).eps * np.linalg.norm(y_hat) * np.linalg.norm(x_mat, 2) * np.linalg.norm(x_hat))
    return float(abs(lhs - rhs) / scale) if scale else 0.0


def cond_ratio(
    p: MatrixPolynomial,
    v: Ansatz,
    triple: EigenTriple,
    *,
    p_norm: Optional[float] = None,
    l_norm: Optional[float] = None,
    pencil: Optional[Pencil] = None,
) -> float:
    """(||y_hat|| ||L|| ||x_hat||) / (|v(lam)| ||y|| ||P|| ||x||) for a polynomial eigentriple."""
    _require_chebyshev(p)
    grid = chebyshev_grid(p.grade)
    if l_norm is None:
        l_norm = pencil_norm(pencil or dl_pencil(p, v), grid)
    if p_norm is None:
        p_norm = poly_norm(p, grid)
    v_at = abs(_ansatz_values(v, triple.value))
    if v_at <= np.finfo(float).eps:
        raise PreconditionError(
            f"v vanishes at the eigenvalue {triple.value:.6g}; the ratio is undefined",
            detail={"eigenvalue": str(triple.value)},
        )
    x_hat, y_hat = _lifted(p.grade, triple.value, triple.right, triple.left)
    num = np.linalg.norm(y_hat) * l_norm * np.linalg.norm(x_hat)
    den = v_at * np.linalg.norm(triple.left) * p_norm * np.linalg.norm(triple.right)
    return float(num / den)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def bound_report(p: MatrixPolynomial, v: Optional[Ansatz] = None, seed: Optional[int] = None) -> ConditioningReport:
    """Check r_hat <= 16n(e-1)k^4 and ||L|| <= 16n(e-1)k^3 ||P|| ||v|| for DL(P, v)."""
    _require_chebyshev(p)
    n, k = p.n, p.grade
    v = v or Ansatz.unit(p.field, p.basis, k)
    pencil = dl_pencil(p, v)
    grid = chebyshev_grid(k)
    p_norm = poly_norm(p, grid)
    l_norm = pencil_norm(pencil, grid)
    v_norm = float(np.max(np.abs(_ansatz_values(v, grid))))

    entries = []
    for t in eigensolve(pencil):
        if not in_interval(t.value):
            entries.append(EigenEntry(t.value, False, t.residual))
            continue
        pt = polynomial_triple(p, t.value.real + 0j)
        ratio = cond_ratio(p, v, pt, p_norm=p_norm, l_norm=l_norm)
        entries.append(EigenEntry(t.value, True, t.residual, ratio, lhopital_error(p, v, pencil, pt)))

    report = ConditioningReport(
        n=n,
        k=k,
        seed=seed,
        p_norm=p_norm,
        l_norm=l_norm,
        v_norm=v_norm,
        ratio_bound=16 * n * E_MINUS_ONE * k**4,
        norm_bound=16 * n * E_MINUS_ONE * k**3 * p_norm * v_norm,
        entries=tuple(entries),
    )
    if not report.passed:
        logger.warning("conditioning bound violated (seed=%s, n=%d, k=%d)", seed, n, k)
    return report


def random_chebyshev_poly(rng: np.random.Generator, n: int, k: int, complex_entries: bool = False) -> MatrixPolynomial:
    """Coefficients drawn from U(-1, 1)."""
    coeffs = rng.uniform(-1.0, 1.0, size=(k + 1, n, n))
    field = F.FLOAT64
    if complex_entries:
        coeffs = coeffs + 1j * rng.uniform(-1.0, 1.0, size=(k + 1, n, n))
        field = F.COMPLEX128
    return MatrixPolynomial.from_coeffs(field, Basis.chebyshev_t(), [c.tolist() for c in coeffs])


def perturbation_scale(k: int, kappa: float, p_norm: float, value: complex) -> float:
    """max((k kappa)^2 (1 + kappa ||P||), 1, |lam|), kappa = ||x|| ||y|| / |y^* P' x|.

    The floor makes the allowance at least 100 eps^2 relative to max(1, |lam|).
    """
    return max((k * kappa) ** 2 * (1.0 + kappa * p_norm), 1.0, abs(value))


def perturbation_check(p: MatrixPolynomial, eps: float = 1e-6, seed: Optional[int] = None) -> PerturbationReport:
    """Compare recomputed eigenvalues of P + dP with the first-order prediction.

    dP is a random direction scaled to ||dP(.)|| = eps. The allowed error is
    100 eps^2 times ``perturbation_scale``.
    """
    _require_chebyshev(p)
    seed = resolve_seed(seed)
    rng = get_numpy_rng(seed)
    k = p.grade
    direction = rng.standard_normal(size=(k + 1, p.n, p.n))
    if p.field.has_conjugation:
        direction = direction + 1j * rng.standard_normal(size=(k + 1, p.n, p.n))
    grid = chebyshev_grid(k)
    delta = direction * (eps / float(np.max(np.linalg.norm(_values(direction, grid), 2, axis=(1, 2)))))
    base = coefficient_stack(p)
    if not p.field.has_conjugation:
        base = base.real
    perturbed = MatrixPolynomial.from_coeffs(p.field, p.basis, [c.tolist() for c in base + delta])
    v = Ansatz.unit(p.field, p.basis, k)
    p_norm = poly_norm(p, grid)
    moved = np.array([t.value for t in eigensolve(dl_pencil(perturbed, v))])

    entries = []
    for t in eigensolve(dl_pencil(p, v)):
        pt = polynomial_triple(p, t.value)
        if not pt.simple or moved.size == 0:
            continue
        denom = pt.left.conj() @ _derivative_at(p, t.value) @ pt.right
        shift = pt.left.conj() @ cheb.chebval(t.value, delta) @ pt.right
        predicted = t.value - shift / denom
        recomputed = complex(moved[np.argmin(np.abs(moved - predicted))])
        kappa = float(np.linalg.norm(pt.left) * np.linalg.norm(pt.right) / abs(denom))
        entries.append(
            PerturbationEntry(
                value=t.value,
                predicted=complex(predicted),
                recomputed=recomputed,
                error=abs(recomputed - predicted),
                kappa=kappa,
                scale=perturbation_scale(k, kappa, p_norm, t.value),
                eps_squared=eps * eps,
            )
        )
    return PerturbationReport(eps, seed, tuple(entries))


# ---------------------------------------------------------------------------
# Batches
# ---------------------------------------------------------------------------


def _trial(seed: int, n: Optional[int], k: Optional[int]) -> ConditioningReport:
    rng = get_numpy_rng(seed)
    n = n or int(rng.choice([1, 2, 3]))
    k = k or int(rng.choice([2, 3, 4]))
    return bound_report(random_chebyshev_poly(rng, n, k), seed=seed)


async def bound_batch(
    trials: int,
    *,
    n: Optional[int] = None,
    k: Optional[int] = None,
    seed: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> ConditioningBatch:
    """Run ``trials`` seeded random instances on worker threads."""
    base = resolve_seed(seed)
    limit = asyncio.Semaphore(max_workers or settings.max_workers)

    async def run(i: int) -> ConditioningReport:
        async with limit:
            return await asyncio.to_thread(_trial, base + i, n, k)

    reports: Sequence[ConditioningReport] = await asyncio.gather(*(run(i) for i in range(trials)))
    batch = ConditioningBatch(base, tuple(reports))
    logger.info("conditioning batch: %d trials, %d violations", trials, batch.violations)
    return batch
