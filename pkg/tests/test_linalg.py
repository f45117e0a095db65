import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teq import linalg


def test_schur_orders_diagonal_by_descending_real_part():
    m = np.diag([0.1, 2.0, -1.0, 0.5]).astype(complex)
    sf = linalg.schur(m)
    assert np.allclose(sf.diagonal, [2.0, 0.5, 0.1, -1.0])
    assert np.allclose(sf.reconstruct(), m)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_schur_reconstructs_and_is_triangular(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    sf = linalg.schur(m)
    assert np.allclose(np.tril(sf.t, -1), 0)
    assert np.linalg.norm(sf.reconstruct() - m) < 1e-12 * max(1, np.linalg.norm(m))
    assert linalg.is_unitary(sf.q)
    re = sf.diagonal.real
    assert np.all(np.diff(re) <= 1e-10)


def test_spectrum_order_and_singular_input():
    vals = linalg.spectrum(np.diag([1j, 2, -3, 2 - 1j]))
    assert np.allclose(vals, [2, 2 - 1j, 1j, -3])
    with pytest.raises(ValueError):
        linalg.spectrum(np.ones((2, 3)))
    with pytest.raises(ValueError):
        linalg.spectrum(np.array([[np.nan, 0], [0, 1]]))


def test_principal_angle_branch():
    assert linalg.principal_angle(-1) == pytest.approx(np.pi)
    assert linalg.principal_angle(complex(-1, -1e-15)) == pytest.approx(np.pi)
    assert linalg.principal_angle(1j) == pytest.approx(np.pi / 2)
    with pytest.raises(ValueError):
        linalg.principal_angle(0)


def test_eigenangles_sorted_by_magnitude(rng):
    u = np.diag(np.exp(1j * np.array([0.2, -2.5, 1.0])))
    assert np.allclose(linalg.eigenangles(u), [2.5, 1.0, 0.2])
    with pytest.raises(ValueError, match="not unitary"):
        linalg.eigenangles(2 * u)


def test_random_unitary_and_complement(rng):
    u = linalg.random_unitary(5, rng)
    assert linalg.is_unitary(u)
    g = u[:, :2]
    comp = linalg.orthonormal_complement(g)
    full = np.column_stack([g, comp])
    assert linalg.is_unitary(full)
