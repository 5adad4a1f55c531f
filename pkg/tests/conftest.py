"""Shared generators and independent oracles for the test suite."""

import numpy as np
import pytest

from rislink import ScatterMatrix


def random_passive(rng, n, scale=0.95):
    """Random complex n x n matrix rescaled so its largest singular value is `scale`."""
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m * (scale / np.linalg.svd(m, compute_uv=False).max())


def random_reciprocal_passive(rng, n, scale=0.9):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = 0.5 * (m + m.T)
    return m * (scale / np.linalg.svd(m, compute_uv=False).max())


def random_full_link(rng, n_ris, scale=0.95, freq_hz=3.55e9):
    entries = random_passive(rng, n_ris + 2, scale)
    return ScatterMatrix.full_link(entries, freq_hz, range(1, n_ris + 1))


def brute_force_reduce(entries, ext_indices, ris_indices, gammas):
    """Signal-flow oracle: solve b = S a with a_i = gamma_i b_i on loaded ports.

    Unit incident waves are applied at each external port in turn; the
    resulting outgoing waves at the external ports are the reduced matrix.
    Independent of the terminated-port reduction formula.
    """
    p = entries.shape[0]
    gamma_full = np.zeros(p, dtype=complex)
    for i, g in zip(ris_indices, gammas):
        gamma_full[i] = g
    system = np.eye(p, dtype=complex) - entries * gamma_full[np.newaxis, :]
    reduced = np.zeros((2, 2), dtype=complex)
    for col, source in enumerate(ext_indices):
        b = np.linalg.solve(system, entries[:, source])
        for row, sink in enumerate(ext_indices):
            reduced[row, col] = b[sink]
    return reduced


@pytest.fixture
def rng():
    return np.random.default_rng(20240355)
