import numpy as np
import pytest

from teq import channels as ch
from teq.linalg import random_unitary


def test_validate_errors():
    with pytest.raises(ValueError, match="trace-preserving condition violated"):
        ch.validate([np.eye(2), np.eye(2)])
    with pytest.raises(ValueError, match="dimension mismatch"):
        ch.validate([np.eye(2), np.zeros((3, 3))])
    with pytest.raises(ValueError, match="at least 2"):
        ch.validate([np.eye(1)])


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("q", [-0.05, 0.0, 0.3, 1.0])
def test_depolarizing_action(n, q, rng):
    c = ch.depolarizing_quantum(n, q)
    assert c.d == n * n
    rho = ch.random_density_matrix(n, rng)
    expected = q * rho + (1 - q) * np.eye(n) / n
    assert np.allclose(c.apply(rho), expected, atol=1e-12)
    assert ch.classify_class_c(c).p == pytest.approx(q + (1 - q) / n**2)


def test_noise_family_ranges():
    ch.depolarizing_quantum(2, -1 / 3)
    with pytest.raises(ValueError, match="completely positive"):
        ch.depolarizing_quantum(2, -0.34)
    with pytest.raises(ValueError):
        ch.noisy_classical(3, -0.6)
    with pytest.raises(ValueError):
        ch.bitflip(1.2)


def test_classical_noise_action(rng):
    c = ch.noisy_classical(3, 0.4)
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    assert np.allclose(c.apply(rho), 0.4 * rho + 0.6 * np.eye(3) / 3)
    assert ch.classify_class_c(c).p == pytest.approx(0.4 + 0.6 / 3)


def test_weyl_relations():
    n = 3
    omega = np.exp(2j * np.pi / n)
    x, z = ch.weyl(n, 1, 0), ch.weyl(n, 0, 1)
    assert np.allclose(z @ x, omega * x @ z)
    for j in range(n):
        for k in range(n):
            if (j, k) != (0, 0):
                assert abs(np.trace(ch.weyl(n, j, k))) < 1e-12


def test_flip_channels_are_class_c():
    assert ch.classify_class_c(ch.bitflip(0.2)).p == pytest.approx(0.8)
    assert ch.classify_class_c(ch.phaseflip(0.7)).p == pytest.approx(0.3)


def test_class_c_accepts_global_phase_and_rejects_others(rng):
    c = ch.depolarizing_quantum(2, 0.5)
    ops = c.ops.copy()
    ops[0] *= np.exp(0.7j)
    assert ch.classify_class_c(ch.validate(ops)).p == pytest.approx(0.625)
    assert ch.classify_class_c(ch.random_channel(2, 2, rng)) is None


def test_kraus_freedom_preserves_action(rng):
    c = ch.random_channel(3, 2, rng)
    w = random_unitary(4, rng)
    rotated = ch.kraus_rotate(c, w)
    assert rotated.d == 4
    for _ in range(5):
        rho = ch.random_density_matrix(3, rng)
        assert np.allclose(rotated.apply(rho), c.apply(rho), atol=1e-12)


def test_conjugations(rng):
    c = ch.random_channel(2, 3, rng)
    q = random_unitary(2, rng)
    first = ch.conjugate_first(c, q)
    assert np.allclose(first.ops[0], q @ c.ops[0] @ q.conj().T)
    assert np.allclose(first.ops[1], c.ops[1] @ q.conj().T)
    full = ch.conjugate_all(c, q)
    rho = ch.random_density_matrix(2, rng)
    assert np.allclose(full.apply(q @ rho @ q.conj().T), q @ c.apply(rho) @ q.conj().T)


def test_trace_distance_calibration(rng):
    n, q = 3, 0.8
    psi = ch.random_pure_state(n, rng)
    rho = np.outer(psi, psi.conj())
    out = ch.depolarizing_quantum(n, q).apply(rho)
    assert ch.trace_distance(rho, out) == pytest.approx(ch.trace_distance_delta(n, q))
    assert ch.q_from_delta(n, ch.trace_distance_delta(n, q)) == pytest.approx(q)
