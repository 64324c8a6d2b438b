"""
Test suite for companion matrices, division and BDL(P, v).

Covers:
- Companion matrices and their characteristic polynomials.
- Left and right matrix polynomial division on random instances up to deg V = 3k.
- The BDL ansatz pair Q, S and the agreement of the three BDL constructions
  for ansatz polynomials up to degree 2k.
- Barnett's identity and the block-Hankel inverse property.
- Bivariate reduction modulo P and the closed-form sandwich C2 X C1.
- Structured pencils for the structures of P, on random instances.
"""

from __future__ import annotations

import pytest

from app.core.errors import PreconditionError, SingularMatrixError
from app.services import bdl as BDL
from app.services import dl as DL
from app.services import fields as F
from app.services.bases import Basis
from app.services.bdl import Structure
from app.services.blockpoly import BivariateMatrixPolynomial, BlockMatrix, MatrixPolynomial, phi_map, scalar_det
from app.services.dl import Ansatz, VerdictKind
from app.services.fields import GaussianRational
from app.services.polynomials import ScalarPoly
from conftest import matpoly, monic_random

Q = F.RATIONAL
G = F.GAUSSIAN
MONO = Basis.monomial()


def _scalar(field, *coeffs) -> ScalarPoly:
    return ScalarPoly.from_coeffs(field, coeffs)


def _random_v(rng, degree: int, field=Q) -> ScalarPoly:
    """Random integer coefficients with a nonzero leading one."""
    coeffs = [rng.randint(-4, 4) for _ in range(degree)] + [rng.choice([-3, -2, -1, 1, 2, 3])]
    return _scalar(field, *coeffs)


def _with_invertible_leading(make):
    p = make()
    while F.determinant(p.field, p.leading) == 0:
        p = make()
    return p


def test_scalar_companion_matrices():
    """x^2 + 3x + 2 has C1 = [[-3,-2],[1,0]] and C2 = C1^T."""
    p = matpoly(Q, MONO, [[2]], [[3]], [[1]])
    assert F.format_matrix(Q, BDL.companion_first(p)) == [["-3", "-2"], ["1", "0"]]
    assert F.format_matrix(Q, BDL.companion_second(p)) == [["-3", "1"], ["-2", "0"]]


def test_companions_share_the_determinant_of_p(rng):
    """det(t I - C) = det P(t) for a monic P, for both companions."""
    p = monic_random(Q, 2, 3, rng)
    c1, c2 = BDL.companion_first(p), BDL.companion_second(p)
    eye = F.identity(Q, 6)
    for _ in range(4):
        t = Q.random(rng, 30)
        expected = F.determinant(Q, p.evaluate(t))
        assert F.determinant(Q, eye * t - c1) == expected
        assert F.determinant(Q, eye * t - c2) == expected


def test_companion_needs_invertible_leading_coefficient():
    """A singular P_k is refused."""
    p = matpoly(Q, MONO, [[1, 0], [0, 1]], [[1, 0], [0, 0]])
    with pytest.raises(SingularMatrixError):
        BDL.companion_first(p)


def test_scalar_division_example():
    """x^2 / (x + 1) has quotient x - 1 and remainder 1."""
    v = matpoly(Q, MONO, [[0]], [[0]], [[1]])
    p = matpoly(Q, MONO, [[1]], [[1]])
    for side in ("left", "right"):
        result = BDL.matdiv(v, p, side)
        assert result.quotient == matpoly(Q, MONO, [[-1]], [[1]])
        assert result.remainder == matpoly(Q, MONO, [[1]])


@pytest.mark.parametrize("side", ["left", "right"])
def test_division_multiplies_back(side, random_matpoly):
    """V = A P + R (left) or P A + R (right) with grade R = k - 1, for deg V up to 3k."""
    for trial in range(100):
        n, k = 1 + trial % 2, 1 + (trial // 2) % 3
        p = _with_invertible_leading(lambda: random_matpoly(n, k))
        v = random_matpoly(n, trial % (3 * k + 1))
        result = BDL.matdiv(v, p, side)
        product = result.quotient @ p if side == "left" else p @ result.quotient
        assert product + result.remainder == v
        assert result.remainder.grade == k - 1


def test_division_of_low_degree_is_trivial(random_matpoly, rng):
    """deg V < k gives A = 0 and R = V."""
    v = random_matpoly(2, 1)
    p = monic_random(Q, 2, 3, rng)
    result = BDL.matdiv(v, p)
    assert result.quotient.degree == -1
    assert result.remainder == v


def test_low_degree_ansatz_is_v_times_identity(rng):
    """deg v <= k - 1 gives Q = S = v I and A = 0."""
    p = monic_random(Q, 2, 3, rng)
    v = _scalar(Q, 2, -1, 5)
    ansatz = BDL.bdl_ansatz(p, v)
    vi = MatrixPolynomial.scalar_identity(Q, MONO, [2, -1, 5], 2)
    assert ansatz.right == vi and ansatz.left == vi
    assert ansatz.quotient.degree == -1


def test_bdl_routes_agree_on_random_instances(rng):
    """The three BDL routes agree; P Q = S P and S - Q = A P - P A; low degree v gives DL(P, v)."""
    for trial in range(100):
        n, k = 1 + trial % 2, 2 + (trial // 2) % 2
        p = monic_random(Q, n, k, rng)
        v = _random_v(rng, trial % (2 * k + 1))
        result = BDL.bdl_pencil(p, v)
        q, s, a = result.right_ansatz, result.left_ansatz, result.quotient
        assert (p @ q) == (s @ p)
        assert (s - q) == (a @ p - p @ a)
        assert result.pencil.X.k == k
        if v.degree <= k - 1:
            expected = DL.dl_pencil(p, Ansatz.from_ascending(Q, MONO, v.padded(k)))
            assert result.pencil == expected
            assert BDL.barnett_check(p, v)


def test_barnett_rejects_high_degree(rng):
    """Barnett's identity is stated for deg v <= k - 1 only."""
    p = monic_random(Q, 1, 2, rng)
    with pytest.raises(PreconditionError):
        BDL.barnett_check(p, _scalar(Q, 0, 0, 1))


def test_hankel_inverse_check_examples():
    """I_2 has a block-Hankel inverse; [[1,2],[3,4]] does not."""
    assert BDL.hankel_inverse_check(BlockMatrix.identity(Q, 2, 1))
    assert not BDL.hankel_inverse_check(BlockMatrix(F.as_matrix(Q, [[1, 2], [3, 4]]), 1, Q))


def test_dl_unit_pencils_have_block_hankel_inverses(rng):
    """X and, when P_0 is invertible, Y of DL(P, 1) for monic P invert to block-Hankel matrices."""
    for trial in range(50):
        n, k = 1 + trial % 2, 2 + (trial // 2) % 2
        p = monic_random(Q, n, k, rng)
        pencil = DL.dl_pencil(p, Ansatz.unit(Q, MONO, k))
        assert BDL.hankel_inverse_check(pencil.X)
        if F.determinant(Q, pencil.Y.data) != 0:
            assert BDL.hankel_inverse_check(pencil.Y)


def test_quotient_representative_drops_multiples_of_p(random_matpoly, rng):
    """B(y) P(x) + R and P(y) B(x) + R' reduce to R and R'."""
    p = monic_random(Q, 2, 2, rng)
    b = random_matpoly(2, 2)
    r = BivariateMatrixPolynomial.from_product(random_matpoly(2, 2), random_matpoly(2, 1))
    f = BivariateMatrixPolynomial.from_product(b, p) + r
    assert BDL.quotient_representative(f, p, "x") == r

    r2 = BivariateMatrixPolynomial.from_product(random_matpoly(2, 1), random_matpoly(2, 3))
    f2 = BivariateMatrixPolynomial.from_product(p, b) + r2
    assert BDL.quotient_representative(f2, p, "y") == r2


def test_reduce_sandwich_matches_companion_product(rng):
    """The closed form of phi(C2 X C1) agrees with the direct product."""
    for _ in range(10):
        p = monic_random(Q, 2, 2, rng)
        x = BlockMatrix(F.random_matrix(Q, rng, 4, 4, 9), 2, Q)
        direct = phi_map(BlockMatrix(BDL.companion_second(p) @ x.data @ BDL.companion_first(p), 2, Q), MONO)
        assert BDL.reduce_sandwich(p, x) == direct


def test_bdl_exclusion_verdicts():
    """v = 1 always linearizes; a shared factor makes the test inconclusive."""
    p = matpoly(Q, MONO, [[-1]], [[0]], [[1]])
    assert BDL.bdl_exclusion_check(p, _scalar(Q, 1)).kind is VerdictKind.LINEARIZATION
    verdict = BDL.bdl_exclusion_check(p, _scalar(Q, -1, 1))
    assert verdict.kind is VerdictKind.INCONCLUSIVE
    assert verdict.witness == _scalar(Q, -1, 1)
    assert scalar_det(p) == _scalar(Q, -1, 0, 1)


def test_bdl_with_literal_through_the_service(rng):
    """The BDL pencil of a high-degree v keeps the DL(P, 1) size."""
    p = monic_random(Q, 2, 2, rng)
    result = BDL.bdl_pencil(p, _scalar(Q, 1, 0, 0, 1))
    assert result.pencil.X.k == 2 and result.quotient.degree == 1


# ---------------------------------------------------------------------------
# Structured pencils
# ---------------------------------------------------------------------------

STRUCTURED_TRIALS = 20


def _g(re, im=0):
    return GaussianRational(re, im)


def _hermitian(rng):
    a = F.random_matrix(G, rng, 2, 2, 5)
    return a + F.conj_matrix(G, a.T)


def _skew_hermitian(rng):
    a = F.random_matrix(G, rng, 2, 2, 5)
    return a - F.conj_matrix(G, a.T)


def _symmetric(rng):
    a = F.random_matrix(Q, rng, 2, 2, 5)
    return a + a.T


def _skew_symmetric(rng):
    a = F.random_matrix(Q, rng, 2, 2, 5)
    return a - a.T


def _nonzero(rng) -> int:
    return rng.choice([-3, -2, -1, 1, 2, 3])


def _check(p, v, structure):
    assert BDL.has_structure(p, structure)
    pencil = BDL.structured_pencil(p, v, structure)
    assert BDL.pencil_has_structure(pencil, structure)


def test_hermitian_pencils(rng):
    """Hermitian P and real v give a Hermitian pencil."""
    for trial in range(STRUCTURED_TRIALS):
        p = MatrixPolynomial((_hermitian(rng), _hermitian(rng), F.identity(G, 2)), MONO, G)
        _check(p, _random_v(rng, trial % 4, G), Structure.HERMITIAN)


def test_symmetric_pencils(rng):
    """Symmetric P gives a symmetric pencil for any v."""
    for trial in range(STRUCTURED_TRIALS):
        p = MatrixPolynomial((_symmetric(rng), _symmetric(rng), F.identity(Q, 2)), MONO, Q)
        _check(p, _random_v(rng, trial % 4), Structure.SYMMETRIC)


def test_star_even_pencils(rng):
    """*-even P with v real in even and imaginary in odd powers gives a *-even Sigma BDL(P, v)."""
    for trial in range(STRUCTURED_TRIALS):
        p = MatrixPolynomial((_hermitian(rng), _skew_hermitian(rng), F.identity(G, 2)), MONO, G)
        coeffs = [_g(rng.randint(-4, 4)) if i % 2 == 0 else _g(0, rng.randint(-4, 4)) for i in range(trial % 4)]
        top = len(coeffs)
        coeffs.append(_g(_nonzero(rng)) if top % 2 == 0 else _g(0, _nonzero(rng)))
        _check(p, _scalar(G, *coeffs), Structure.STAR_EVEN)


def test_t_even_pencils(rng):
    """T-even P with an even v gives a T-even Sigma BDL(P, v)."""
    for trial in range(STRUCTURED_TRIALS):
        p = MatrixPolynomial((_symmetric(rng), _skew_symmetric(rng), F.identity(Q, 2)), MONO, Q)
        v = _scalar(Q, rng.randint(-4, 4), 0, _nonzero(rng)) if trial % 2 else _scalar(Q, _nonzero(rng))
        _check(p, v, Structure.T_EVEN)


def test_star_palindromic_pencils(rng):
    """*-palindromic P with v = a + conj(a) x gives a *-palindromic R BDL(P, v)."""
    for _ in range(STRUCTURED_TRIALS):
        lead = F.random_matrix(G, rng, 2, 2, 5)
        while F.determinant(G, lead) == 0:
            lead = F.random_matrix(G, rng, 2, 2, 5)
        p = MatrixPolynomial((F.conj_matrix(G, lead.T), _hermitian(rng), lead), MONO, G)
        a = _g(_nonzero(rng), rng.randint(-4, 4))
        _check(p, _scalar(G, a, G.conj(a)), Structure.STAR_PALINDROMIC)


def test_t_palindromic_pencils(rng):
    """T-palindromic P with v = a + a x gives a T-palindromic R BDL(P, v)."""
    for _ in range(STRUCTURED_TRIALS):
        lead = F.random_matrix(Q, rng, 2, 2, 5)
        while F.determinant(Q, lead) == 0:
            lead = F.random_matrix(Q, rng, 2, 2, 5)
        p = MatrixPolynomial((lead.T.copy(), _symmetric(rng), lead), MONO, Q)
        a = _nonzero(rng)
        _check(p, _scalar(Q, a, a), Structure.T_PALINDROMIC)


def test_structure_preconditions(rng):
    """Unstructured P or an inadmissible v is refused."""
    p = MatrixPolynomial((_symmetric(rng), _skew_symmetric(rng), F.identity(Q, 2)), MONO, Q)
    with pytest.raises(PreconditionError):
        BDL.structured_pencil(p, _scalar(Q, 1, 1), Structure.T_EVEN)
    with pytest.raises(PreconditionError):
        BDL.structured_pencil(p, _scalar(Q, 1), Structure.T_PALINDROMIC)
