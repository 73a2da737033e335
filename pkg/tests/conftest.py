"""Shared helpers for the shrinkmean test suite."""

import numpy as np
import pytest


def rand_spd(rng: np.random.Generator, p: int, jitter: float = 0.5) -> np.ndarray:
    """Random well-conditioned SPD matrix."""
    a = rng.standard_normal((p, p))
    spd = a @ a.T / p + jitter * np.eye(p)
    return (spd + spd.T) / 2.0


def penrose_errors(a: np.ndarray, pinv: np.ndarray) -> list[float]:
    """Frobenius errors of the four Moore-Penrose conditions."""
    ap = a @ pinv
    pa = pinv @ a
    return [
        float(np.linalg.norm(a @ pa - a)),
        float(np.linalg.norm(pinv @ ap - pinv)),
        float(np.linalg.norm(ap - ap.T)),
        float(np.linalg.norm(pa - pa.T)),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
