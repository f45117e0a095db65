"""Dense complex linear algebra helpers.

Spectra, ordered complex Schur forms and eigenangles of unitaries. The heavy
lifting (Hessenberg reduction + shifted QR) is LAPACK's, reached through
scipy; this module fixes orderings and angle conventions on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

DEFAULT_TOL = 1e-10

# angles this close to -pi are reported as +pi
_BRANCH_EPS = 1e-12
# real parts closer than this count as ties when ordering eigenvalues
_ORDER_EPS = 1e-12


@dataclass(frozen=True)
class SchurForm:
    """Complex Schur form ``m = q @ t @ q^H`` with ``t`` upper triangular."""

    q: np.ndarray
    t: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.t).copy()

    def reconstruct(self) -> np.ndarray:
        return self.q @ self.t @ self.q.conj().T


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def as_square(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def order_key(values: np.ndarray) -> np.ndarray:
    """Permutation sorting by descending real part, then descending imaginary part."""
    values = np.asarray(values, dtype=complex)
    re = np.round(values.real / _ORDER_EPS) * _ORDER_EPS
    return np.lexsort((-values.imag, -re))


def spectrum(m) -> np.ndarray:
    """Eigenvalues of a square complex matrix in deterministic order.

    Ordered by descending real part, ties broken by descending imaginary part.
    """
    a = as_square(m)
    try:
        lam = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue iteration did not converge: {exc}") from exc
    return lam[order_key(lam)]


def eig(m) -> EigenDecomposition:
    a = as_square(m)
    lam, vec = np.linalg.eig(a)
    idx = order_key(lam)
    return EigenDecomposition(lam[idx], vec[:, idx])


def _wants_before(x: complex, y: complex) -> bool:
    """True if ``x`` must precede ``y`` in the Schur diagonal."""
    if x.real > y.real + _ORDER_EPS:
        return True
    if abs(x.real - y.real) <= _ORDER_EPS:
        return x.imag > y.imag
    return False


def schur(m) -> SchurForm:
    """Complex Schur decomposition with the diagonal in descending real-part order.

    LAPACK's ``zgees`` produces the factorization; adjacent diagonal entries are
    then swapped with ``ztrexc`` (bubble sort) until the ordering holds.
    """
    a = as_square(m)
    try:
        t, q = scipy.linalg.schur(a, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ArithmeticError(f"Schur iteration did not converge: {exc}") from exc
    n = a.shape[0]
    t = np.asfortranarray(t)
    q = np.asfortranarray(q)
    for _ in range(n):
        swapped = False
        for k in range(n - 1):
            if _wants_before(t[k + 1, k + 1], t[k, k]):
                # ztrexc uses 1-based indices
                t, q, info = lapack.ztrexc(t, q, k + 2, k + 1)
                if info != 0:
                    raise ArithmeticError(f"ztrexc failed with info={info}")
                swapped = True
        if not swapped:
            break
    t = np.triu(np.asarray(t))
    return SchurForm(q=np.asarray(q), t=t)


def principal_angle(z: complex) -> float:
    """Argument of ``z`` in ``(-pi, pi]``; negative reals map to exactly ``pi``."""
    z = complex(z)
    if z == 0:
        raise ValueError("principal_angle of zero is undefined")
    theta = float(np.arctan2(z.imag, z.real))
    if theta <= -np.pi + _BRANCH_EPS:
        theta = float(np.pi)
    return theta


def principal_angles(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    if np.any(values == 0):
        raise ValueError("principal_angle of zero is undefined")
    theta = np.arctan2(values.imag, values.real)
    theta[theta <= -np.pi + _BRANCH_EPS] = np.pi
    return theta


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(u, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])) <= tol * max(1.0, a.shape[0]))


def require_unitary(u, tol: float = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    a = as_square(u, name)
    if not is_unitary(a, tol):
        resid = np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0]))
        raise ValueError(f"{name} is not unitary (residual {resid:.3e} > tol {tol:.1e})")
    return a


def signed_eigenangles(u, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenangles ``theta_j`` in ``(-pi, pi]`` with ``u`` having eigenvalues ``exp(i theta_j)``."""
    a = require_unitary(u, tol)
    return principal_angles(spectrum(a))


def eigenangles(u, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``|theta_j|`` of a unitary, sorted non-increasingly, each in ``[0, pi]``."""
    return np.sort(np.abs(signed_eigenangles(u, tol)))[::-1]


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def orthonormal_complement(g: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the orthogonal complement of range(g)."""
    g = np.asarray(g, dtype=complex)
    return scipy.linalg.null_space(g.conj().T)
