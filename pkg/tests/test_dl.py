"""
Test suite for DL(P) pencils.

Covers:
- Golden cubic Chebyshev pencils for the three unit ansatz vectors.
- Agreement of the recurrence, Bezout and monomial closed-form routes.
- Block symmetry, shifted sums and linearity in the ansatz.
- Ansatz recovery and rejection of pencils outside DL(P).
- The eigenvalue exclusion verdict against the singularity of the pencil.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from app.core.errors import FieldError, InputError, NotRegularError, PreconditionError, RejectionError
from app.services import bases as B
from app.services import dl as DL
from app.services import fields as F
from app.services.bases import Basis
from app.services.blockpoly import BlockMatrix, Pencil
from app.services.dl import Ansatz, VerdictKind
from app.services.polynomials import ScalarPoly
from conftest import matpoly

Q = F.RATIONAL
CHEB = Basis.chebyshev_t()


def _cubic_expected(p, row: int) -> Pencil:
    p0, p1, p2, p3 = p.coeffs
    z = F.zeros(Q, 2, 2)
    if row == 0:
        x = [[2 * p3, z, z], [z, 2 * p3 - 2 * p1, -2 * p0], [z, -2 * p0, p3 - p1]]
        y = [[p2, p1 - p3, p0], [p1 - p3, 2 * p0, p1 - p3], [p0, p1 - p3, p0]]
    elif row == 1:
        x = [[z, 2 * p3, z], [2 * p3, 2 * p2, 2 * p3], [z, 2 * p3, p2 - p0]]
        y = [[-p3, z, -p3], [z, p1 - 3 * p3, p0 - p2], [-p3, p0 - p2, -p3]]
    else:
        x = [[z, z, 2 * p3], [z, 4 * p3, 2 * p2], [2 * p3, 2 * p2, p1 + p3]]
        y = [[z, -2 * p3, z], [-2 * p3, -2 * p2, -2 * p3], [z, -2 * p3, p0 - p2]]
    return Pencil(BlockMatrix.from_blocks(Q, x), BlockMatrix.from_blocks(Q, y), CHEB)


@pytest.mark.parametrize("row", [0, 1, 2])
def test_cubic_chebyshev_unit_pencils(cubic_cheb, row):
    """DL(P, v) for v = T_2, T_1, T_0 matches the closed-form block entries."""
    descending = [1 if i == row else 0 for i in range(3)]
    v = Ansatz.from_descending(Q, CHEB, descending)
    expected = _cubic_expected(cubic_cheb, row)
    assert DL.dl_pencil(cubic_cheb, v) == expected
    assert DL.dl_pencil_bezout(cubic_cheb, v) == expected


def test_quadratic_monomial_pencils():
    """The two unit ansatz pencils of a monomial quadratic."""
    p0, p1, p2 = [[1, 2], [3, 4]], [[0, 1], [-1, 5]], [[2, 0], [1, 1]]
    p = matpoly(Q, Basis.monomial(), p0, p1, p2)
    a0, a1, a2 = p.coeffs
    z = F.zeros(Q, 2, 2)

    first = DL.dl_pencil(p, Ansatz.from_descending(Q, p.basis, [1, 0]))
    assert first.X == BlockMatrix.from_blocks(Q, [[a2, z], [z, -a0]])
    assert first.Y == BlockMatrix.from_blocks(Q, [[a1, a0], [a0, z]])

    second = DL.dl_pencil(p, Ansatz.from_descending(Q, p.basis, [0, 1]))
    assert second.X == BlockMatrix.from_blocks(Q, [[z, a2], [a2, a1]])
    assert second.Y == BlockMatrix.from_blocks(Q, [[-a2, z], [z, a0]])


@pytest.mark.parametrize("basis,trials", [(Basis.monomial(), 100), (CHEB, 100), (Basis.legendre(8), 20)])
def test_routes_agree_on_random_instances(basis, trials, random_matpoly, rng):
    """Recurrence and Bezout routes agree; the pencils are block symmetric with the right shifted sums."""
    for trial in range(trials):
        n, k = 1 + trial % 3, 2 + (trial // 3) % 3
        p = random_matpoly(n, k, basis)
        v = Ansatz.from_ascending(Q, basis, [Q.random(rng, 9) for _ in range(k)])
        pencil = DL.dl_pencil(p, v)
        assert pencil == DL.dl_pencil_bezout(p, v)
        if basis == Basis.monomial():
            assert pencil == DL.dl_pencil_monomial(p, v)
        assert pencil.X.block_transpose() == pencil.X
        assert pencil.Y.block_transpose() == pencil.Y
        assert DL.shifted_sums_hold(pencil, p, v)


def test_pencil_is_linear_in_the_ansatz(random_matpoly, rng):
    """DL(P, a v + b w) = a DL(P, v) + b DL(P, w)."""
    p = random_matpoly(2, 3, CHEB)
    v = Ansatz.from_ascending(Q, CHEB, [Q.random(rng, 9) for _ in range(3)])
    w = Ansatz.from_ascending(Q, CHEB, [Q.random(rng, 9) for _ in range(3)])
    a, b = Fraction(3, 4), Fraction(-2)
    lhs = DL.dl_pencil(p, v.combine(w, a, b))
    rhs = DL.dl_pencil(p, v).scale(a) + DL.dl_pencil(p, w).scale(b)
    assert lhs == rhs


def test_recover_ansatz_from_cubic_pencil(cubic_cheb):
    """The T_1 pencil gives back the ascending ansatz [0, 1, 0]."""
    pencil = _cubic_expected(cubic_cheb, 1)
    v = DL.recover_ansatz(pencil, cubic_cheb)
    assert list(v.coeffs) == [0, 1, 0]


def test_recover_ansatz_rejects_perturbed_pencil(cubic_cheb):
    """Changing one entry leaves DL(P) and the rejection names a block row."""
    pencil = _cubic_expected(cubic_cheb, 0)
    data = pencil.X.data.copy()
    data[3, 2] = data[3, 2] + 1
    bad = Pencil(BlockMatrix(data, 2, Q), pencil.Y, CHEB)
    with pytest.raises(RejectionError) as info:
        DL.recover_ansatz(bad, cubic_cheb)
    assert "block_row" in info.value.detail or info.value.detail.get("space") == "DL"


def test_recover_ansatz_rejects_l1_only_pencils(random_matpoly, rng):
    """An L1(P) pencil that is not block symmetric is rejected."""
    p = random_matpoly(1, 2)
    pencil = DL.dl_pencil(p, Ansatz.from_descending(Q, p.basis, [1, 0]))
    # E M + [0 F] = 0 keeps the column shift sum; E is not symmetric
    extra_x = BlockMatrix(F.as_matrix(Q, [[0, 1], [0, 0]]), 1, Q)
    m = B.mult_matrix(p.basis, 2, 1, Q)
    extra_y = BlockMatrix(-(extra_x.data @ m)[:, 1:], 1, Q)
    shifted = Pencil(pencil.X + extra_x, pencil.Y + extra_y, p.basis)
    with pytest.raises(RejectionError):
        DL.recover_ansatz(shifted, p)


def _singular_at(p, r):
    """Replace P_0 so that P(r) has a zero first column."""
    field = p.field
    pr = p.evaluate(r)
    e = F.zeros(field, p.n, p.n)
    e[0, 0] = field.one()
    coeffs = list(p.coeffs)
    coeffs[0] = coeffs[0] - pr @ e
    return type(p)(tuple(coeffs), p.basis, field)


@pytest.mark.parametrize("basis", [Basis.monomial(), CHEB])
def test_exclusion_detects_shared_roots(basis, random_matpoly, rng):
    """When v and det P share a root the verdict says so and the pencil is singular."""
    for trial in range(25):
        k = 2 + trial % 2
        r = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        p = _singular_at(random_matpoly(2, k, basis), r)
        root = ScalarPoly.from_coeffs(Q, [-r, 1])
        other = ScalarPoly.from_coeffs(Q, [rng.randint(-4, 4), 1])
        v_mono = root if k == 2 else root * other
        v = Ansatz.from_ascending(Q, basis, B.from_monomial(basis, v_mono, k - 1, Q))
        verdict = DL.exclusion_check(p, v)
        assert verdict.kind is VerdictKind.SHARED_FINITE_ROOT
        assert verdict.witness(r) == 0
        pencil = DL.dl_pencil(p, v)
        for _ in range(3):
            assert F.determinant(Q, pencil.evaluate(Q.random(rng, 40))) == 0


@pytest.mark.parametrize("basis", [Basis.monomial(), CHEB])
def test_exclusion_verdict_matches_pencil_singularity(basis, random_matpoly, rng):
    """Linearizations vanish exactly where det P does; other verdicts give singular pencils."""
    linearizations = 0
    for trial in range(25):
        k = 2 + trial % 2
        p = random_matpoly(2, k, basis)
        v = Ansatz.from_ascending(Q, basis, [Q.random(rng, 9) for _ in range(k)])
        verdict = DL.exclusion_check(p, v)
        pencil = DL.dl_pencil(p, v)
        for _ in range(3):
            t = Q.random(rng, 40)
            singular = F.determinant(Q, pencil.evaluate(t)) == 0
            if verdict.is_linearization:
                assert singular == (F.determinant(Q, p.evaluate(t)) == 0)
            else:
                assert singular
        linearizations += verdict.is_linearization
    assert linearizations >= 22


def test_exclusion_flags_shared_infinite_eigenvalue():
    """A singular leading coefficient and v of lower degree share infinity."""
    p = matpoly(Q, Basis.monomial(), [[1, 0], [0, 1]], [[0, 1], [1, 0]], [[1, 0], [0, 0]])
    v = Ansatz.from_ascending(Q, p.basis, [1, 0])
    assert DL.exclusion_check(p, v).kind is VerdictKind.SHARED_INFINITE
    zero = Ansatz.from_ascending(Q, p.basis, [0, 0])
    assert DL.exclusion_check(p, zero).kind is VerdictKind.SHARED_INFINITE


def test_exclusion_errors():
    """Singular P, floating fields and wrong ansatz lengths are refused."""
    singular = matpoly(Q, Basis.monomial(), [[1, 1], [1, 1]], [[2, 2], [2, 2]])
    with pytest.raises(NotRegularError):
        DL.exclusion_check(singular, Ansatz.from_ascending(Q, singular.basis, [1]))
    floating = matpoly(F.FLOAT64, Basis.monomial(), [[1.0]], [[2.0]])
    with pytest.raises(FieldError):
        DL.exclusion_check(floating, Ansatz.from_ascending(F.FLOAT64, floating.basis, [1.0]))
    with pytest.raises(InputError):
        DL.dl_pencil(singular, Ansatz.from_ascending(Q, singular.basis, [1, 0]))


def test_closed_form_needs_monomials(cubic_cheb):
    """dl_pencil_monomial refuses other bases."""
    with pytest.raises(PreconditionError):
        DL.dl_pencil_monomial(cubic_cheb, Ansatz.unit(Q, CHEB, 3))


def test_recurrence_over_floats_matches_exact(cubic_cheb):
    """The recurrence also runs in f64 and agrees with the exact pencil."""
    floating = type(cubic_cheb).from_coeffs(
        F.FLOAT64, CHEB, [[[float(x) for x in row] for row in c] for c in cubic_cheb.coeffs]
    )
    exact = DL.dl_pencil(cubic_cheb, Ansatz.unit(Q, CHEB, 3))
    approx = DL.dl_pencil(floating, Ansatz.unit(F.FLOAT64, CHEB, 3))
    for a, b in zip(exact.X.data.flat, approx.X.data.flat):
        assert float(a) == pytest.approx(b, abs=1e-12)
