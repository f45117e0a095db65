import numpy as np
import pytest

from teq.linalg import random_unitary
from teq.measure import MuWeights, TeurParams, max_norm, mu_norm, sum_norm, teur_min_time


def test_weights_validation():
    with pytest.raises(ValueError):
        MuWeights((0.5, 1.0))
    with pytest.raises(ValueError):
        MuWeights((0.0, 0.0))
    with pytest.raises(ValueError):
        MuWeights((1.0, -0.1))
    assert np.array_equal(MuWeights((1.0, 0.5)).fitted(4), [1.0, 0.5, 0, 0])
    assert np.array_equal(MuWeights((1.0, 0.5, 0.2)).fitted(2), [1.0, 0.5])


def test_diagonal_examples():
    u = np.diag(np.exp(1j * np.array([0.4, -1.2, 0.0])))
    assert max_norm(u) == pytest.approx(1.2)
    assert sum_norm(u) == pytest.approx(1.6)
    assert mu_norm(u, [1.0, 0.5]) == pytest.approx(1.2 + 0.2)
    assert max_norm(np.eye(3)) == 0
    assert max_norm(-np.eye(2)) == pytest.approx(np.pi)


def test_specialisations_match_exactly(rng):
    for r in (2, 3, 5):
        u = random_unitary(r, rng)
        assert max_norm(u) == mu_norm(u, MuWeights.max(r))
        assert sum_norm(u) == mu_norm(u, MuWeights.sum(r))


def test_conjugation_and_mu_monotonicity(rng):
    for _ in range(50):
        r = int(rng.integers(2, 6))
        u, v = random_unitary(r, rng), random_unitary(r, rng)
        assert abs(max_norm(v.conj().T @ u @ v) - max_norm(u)) < 1e-9
        assert abs(sum_norm(v.conj().T @ u @ v) - sum_norm(u)) < 1e-9
        small = MuWeights(tuple(np.sort(rng.random(r))[::-1]))
        big = MuWeights(tuple(np.array(small.weights) + 0.1))
        assert mu_norm(u, small) <= mu_norm(u, big) + 1e-12


def test_non_unitary_rejected():
    with pytest.raises(ValueError, match="not unitary"):
        max_norm(np.array([[1, 1], [0, 1]]))


def test_teur_examples():
    assert teur_min_time(TeurParams(1.0), [2.0], [1.0]) == 0
    assert teur_min_time(TeurParams(0.0), [1.0], [1.0]) == pytest.approx(1 / 0.725, abs=1e-12)
    amps = np.array([1, 1]) / np.sqrt(2)
    assert teur_min_time(TeurParams(0.25), [1.0, 3.0], amps) == pytest.approx(0.5 / (0.725 * 2), abs=1e-12)
    with pytest.raises(ValueError):
        TeurParams(1.5)
    with pytest.raises(ValueError):
        teur_min_time(TeurParams(0.1), [1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        teur_min_time(TeurParams(0.1), [0.0], [1.0])
