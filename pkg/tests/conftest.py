"""
Pytest fixtures and configuration for the test suite.

Sets a deterministic test environment before the application is imported and
provides seeded generators, random polynomial factories and document helpers.
"""

from __future__ import annotations

import os
import random
from pathlib import Path

import pytest

# Configure environment variables for test execution
os.environ["ENVIRONMENT"] = "test"
os.environ["DEBUG"] = "false"
os.environ["APP_NAME"] = "bezoutlin (tests)"
os.environ["RANDOM_SEED"] = os.environ.get("RANDOM_SEED", "20160501")
os.environ["MAX_WORKERS"] = os.environ.get("MAX_WORKERS", "2")

# Import the application after environment variables are set
from app.core import config as config_mod
from app.core.dependencies import get_rng
from app.models.schemas import MatPolyDocument
from app.persistence.documents import matpoly_to_document, read_matpoly, write_document
from app.services import fields as F
from app.services.bases import Basis
from app.services.blockpoly import MatrixPolynomial

# Ensure the Settings object reflects the test environment
config_mod.settings.environment = "test"

FIXTURES = Path(__file__).parent / "fixtures"


def matpoly(field, basis, *coeffs) -> MatrixPolynomial:
    """Shorthand: ascending coefficient matrices given as nested lists."""
    return MatrixPolynomial.from_coeffs(field, basis, list(coeffs))


def monic_random(field, n: int, k: int, rng: random.Random, bound: int = 9) -> MatrixPolynomial:
    """Random monomial-basis polynomial with identity leading coefficient."""
    p = MatrixPolynomial.random(field, Basis.monomial(), n, k, rng, bound)
    return MatrixPolynomial(p.coeffs[:-1] + (F.identity(field, n),), p.basis, field)


@pytest.fixture
def rng() -> random.Random:
    """Generator seeded from the configured default seed."""
    return get_rng()


@pytest.fixture
def random_matpoly(rng):
    """Factory for random rational matrix polynomials."""

    def make(n: int, grade: int, basis: Basis = None, field=F.RATIONAL, bound: int = 9) -> MatrixPolynomial:
        return MatrixPolynomial.random(field, basis or Basis.monomial(), n, grade, rng, bound)

    return make


@pytest.fixture
def cubic_cheb_path() -> Path:
    return FIXTURES / "cubic_cheb.json"


@pytest.fixture
def cubic_cheb(cubic_cheb_path) -> MatrixPolynomial:
    return read_matpoly(cubic_cheb_path)


@pytest.fixture
def write_matpoly(tmp_path):
    """Writes a MatrixPolynomial document into the test's tmp dir and returns its path."""
    counter = {"i": 0}

    def write(p: MatrixPolynomial, name: str = None) -> str:
        counter["i"] += 1
        path = tmp_path / (name or f"poly{counter['i']}.json")
        doc: MatPolyDocument = matpoly_to_document(p)
        write_document(path, doc)
        return str(path)

    return write
