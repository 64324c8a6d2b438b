"""
Shared resource providers.

Hands out seeded random generators so every randomized computation is
reproducible from the seed recorded in its report.
"""

from __future__ import annotations

import random
from typing import Optional

import numpy as np

from app.core.config import settings


def resolve_seed(seed: Optional[int] = None) -> int:
    """Return the explicit seed, or the configured default."""
    return settings.random_seed if seed is None else seed


def get_rng(seed: Optional[int] = None) -> random.Random:
    """Exact-arithmetic generator (rationals, prime-field elements)."""
    return random.Random(resolve_seed(seed))


def get_numpy_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Floating-point generator for conditioning trials."""
    return np.random.default_rng(resolve_seed(seed))
