from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from jmdecohere.numkit import superop_from_map


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (A + A.conj().T) / 2


def random_kraus(rng: np.random.Generator, d: int, n: int = 3) -> list[np.ndarray]:
    """Kraus operators of a random unital-in-Heisenberg (trace-preserving predual) channel."""
    K = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    S = np.einsum("kba,kbc->ac", K.conj(), K)
    w, V = np.linalg.eigh(S)
    R = (V / np.sqrt(w)) @ V.conj().T
    return [k @ R for k in K]


def heisenberg_channel(kraus):
    """Heisenberg map ``A -> sum K^dag A K``; unital because sum K^dag K = I."""
    return lambda A: sum(k.conj().T @ A @ k for k in kraus)


def random_channel_superop(rng: np.random.Generator, d: int, n: int = 3) -> np.ndarray:
    return superop_from_map(heisenberg_channel(random_kraus(rng, d, n)), d)


def random_multiplier(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random PSD matrix with unit diagonal."""
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    G = A @ A.conj().T
    s = 1 / np.sqrt(np.diag(G).real)
    return s[:, None] * G * s[None, :]


def random_bloch(rng: np.random.Generator, max_norm: float = 1.0) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * max_norm * rng.uniform() ** (1 / 3)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=6)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20241015)
