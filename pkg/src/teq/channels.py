"""Kraus-operator channels, standard noise families and Kraus freedom.

A channel on an ``n``-dimensional system is stored as a ``(d, n, n)`` stack of
Kraus operators ``F_j`` with ``sum_j F_j^H F_j = I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, random_unitary, require_unitary

# slack on the complete-positivity ranges of the noise families
_RANGE_EPS = 1e-12


@dataclass(frozen=True)
class KrausChannel:
    """Validated Kraus representation; build through :func:`validate`."""

    ops: np.ndarray
    residual: float = field(default=0.0, compare=False)

    @property
    def n(self) -> int:
        return self.ops.shape[1]

    @property
    def d(self) -> int:
        return self.ops.shape[0]

    def __iter__(self):
        return iter(self.ops)

    def apply(self, rho) -> np.ndarray:
        """Channel action ``sum_j F_j rho F_j^H``."""
        rho = np.asarray(rho, dtype=complex)
        return np.einsum("jab,bc,jdc->ad", self.ops, rho, self.ops.conj())

    def padded(self, d_prime: int) -> "KrausChannel":
        """Append all-zero Kraus operators up to ``d_prime`` operators."""
        if d_prime < self.d:
            raise ValueError(f"cannot pad {self.d} operators down to {d_prime}")
        extra = np.zeros((d_prime - self.d, self.n, self.n), dtype=complex)
        return KrausChannel(np.concatenate([self.ops, extra]), self.residual)


@dataclass(frozen=True)
class DirectionVector:
    """Coefficients ``v`` in the combination ``sum_j v_j F_j``.

    ``mode`` is ``"ball"`` (``|v| <= 1``) or ``"sphere"`` (``|v| = 1``).
    """

    v: np.ndarray
    mode: str = "ball"

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex).ravel()
        object.__setattr__(self, "v", v)
        norm = float(np.linalg.norm(v))
        if self.mode == "ball":
            if norm > 1 + 1e-12:
                raise ValueError(f"direction vector norm {norm} exceeds 1")
        elif self.mode == "sphere":
            if abs(norm - 1) > 1e-12:
                raise ValueError(f"direction vector norm {norm} is not 1")
        else:
            raise ValueError(f"unknown constraint mode {self.mode!r}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.v))


@dataclass(frozen=True)
class ClassCWitness:
    p: float
    conjugator: np.ndarray | None = None


def validate(ops, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Check dimensions and trace preservation and return a channel."""
    arr = [np.asarray(f, dtype=complex) for f in ops]
    if not arr:
        raise ValueError("at least one Kraus operator is required")
    n = arr[0].shape[0] if arr[0].ndim == 2 else -1
    for f in arr:
        if f.ndim != 2 or f.shape != (n, n):
            raise ValueError(
                f"dimension mismatch: Kraus operators must all be {n}x{n}, got {f.shape}"
            )
    if n < 2:
        raise ValueError("system dimension must be at least 2")
    stacked = np.stack(arr)
    if not np.all(np.isfinite(stacked)):
        raise ValueError("Kraus operators contain non-finite entries")
    gram = np.einsum("jba,jbc->ac", stacked.conj(), stacked)
    residual = float(np.linalg.norm(gram - np.eye(n)))
    if residual > tol:
        raise ValueError(
            f"trace-preserving condition violated: |sum F^H F - I|_F = {residual:.3e} > {tol:.1e}"
        )
    return KrausChannel(stacked, residual)


def stack(c: KrausChannel) -> np.ndarray:
    """The ``dn x n`` isometry with row blocks ``F_1, ..., F_d``."""
    return c.ops.reshape(c.d * c.n, c.n)


def kraus_rotate(c: KrausChannel, w, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Equivalent Kraus set ``F'_i = sum_j w_ij F_j`` (after zero padding to ``w``'s size)."""
    w = require_unitary(w, tol, "Kraus mixing matrix")
    padded = c.padded(w.shape[0])
    ops = np.einsum("ij,jab->iab", w, padded.ops)
    return validate(ops, tol=max(tol, 1e-9))


def conjugate_first(c: KrausChannel, q, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Kraus set ``(q F_1 q^H, F_2 q^H, ..., F_d q^H)``.

    This changes the channel but leaves the measure of the stacked isometry
    unchanged; with ``q`` from the Schur form of ``F_1`` the first operator
    becomes upper triangular.
    """
    q = require_unitary(q, tol, "conjugator")
    qh = q.conj().T
    ops = c.ops @ qh
    ops[0] = q @ ops[0]
    return validate(ops, tol=max(tol, 1e-9))


def conjugate_all(c: KrausChannel, q, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Unitarily rotated channel with operators ``q F_j q^H``."""
    q = require_unitary(q, tol, "conjugator")
    return validate(q @ c.ops @ q.conj().T, tol=max(tol, 1e-9))


def weyl(n: int, j: int, k: int) -> np.ndarray:
    """Weyl operator ``S_jk = sum_s omega^(s k) |s+j><s|`` with ``omega = exp(2 pi i / n)``."""
    if n < 1 or not (0 <= j < n and 0 <= k < n):
        raise ValueError(f"Weyl indices ({j}, {k}) out of range for n={n}")
    s = np.arange(n)
    out = np.zeros((n, n), dtype=complex)
    out[(s + j) % n, s] = np.exp(2j * np.pi * s * k / n)
    return out


def _check_q(q: float, lo: float, what: str) -> None:
    if not (lo - _RANGE_EPS <= q <= 1 + _RANGE_EPS):
        raise ValueError(f"{what}: q={q} outside the completely positive range [{lo:.6g}, 1]")


def depolarizing_quantum(n: int, q: float) -> KrausChannel:
    """``rho -> q rho + (1-q) I/n`` written with the ``n^2`` Weyl operators.

    The two terms proportional to the identity are merged into ``F_1``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    _check_q(q, -1.0 / (n * n - 1), "depolarizing channel")
    q = min(float(q), 1.0)
    ops = [np.sqrt(max(q + (1 - q) / n**2, 0.0)) * np.eye(n, dtype=complex)]
    scale = np.sqrt(max(1 - q, 0.0)) / n
    for j in range(n):
        for k in range(n):
            if (j, k) != (0, 0):
                ops.append(scale * weyl(n, j, k))
    return validate(ops)


def noisy_classical(n: int, q: float) -> KrausChannel:
    """Classical noise channel built from the shifts ``S_j0``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    _check_q(q, -1.0 / (n - 1), "classical noise channel")
    q = min(float(q), 1.0)
    ops = [np.sqrt(max(q + (1 - q) / n, 0.0)) * np.eye(n, dtype=complex)]
    scale = np.sqrt(max((1 - q) / n, 0.0))
    ops += [scale * weyl(n, j, 0) for j in range(1, n)]
    return validate(ops)


def depolarizing_cascade(n: int, q: float, k: int) -> KrausChannel:
    """``k`` sequential uses of the depolarizing channel, as one depolarizing channel."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return depolarizing_quantum(n, q**k)


def bitflip(u: float) -> KrausChannel:
    if not 0 <= u <= 1:
        raise ValueError(f"flip probability u={u} outside [0, 1]")
    return validate([np.sqrt(1 - u) * np.eye(2), np.sqrt(u) * weyl(2, 1, 0)])


def phaseflip(u: float) -> KrausChannel:
    if not 0 <= u <= 1:
        raise ValueError(f"flip probability u={u} outside [0, 1]")
    return validate([np.sqrt(1 - u) * np.eye(2), np.sqrt(u) * weyl(2, 0, 1)])


def classify_class_c(c: KrausChannel, tol: float = 1e-10) -> ClassCWitness | None:
    """Detect the form ``F_1 = sqrt(p) I`` with all other operators traceless.

    A global phase on ``F_1`` is accepted since it is a Kraus freedom; ``p`` is
    then ``|scalar|^2``. Only the presented representation is inspected.
    """
    f1 = c.ops[0]
    scalar = np.trace(f1) / c.n
    if np.linalg.norm(f1 - scalar * np.eye(c.n)) > tol:
        return None
    for f in c.ops[1:]:
        if abs(np.trace(f)) > tol:
            return None
    p = float(min(max(abs(scalar) ** 2, 0.0), 1.0))
    return ClassCWitness(p=p)


def trace_distance_delta(n: int, q: float) -> float:
    """Trace distance ``(1-q)(n-1)/n`` between a pure input and its noisy output."""
    return (1 - q) * (n - 1) / n


def q_from_delta(n: int, delta: float) -> float:
    return 1 - delta * n / (n - 1)


def trace_distance(rho, sigma) -> float:
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    return 0.5 * float(np.sum(np.linalg.svd(diff, compute_uv=False)))


def random_channel(n: int, d: int, rng: np.random.Generator) -> KrausChannel:
    """Channel whose stacked isometry is the first ``n`` columns of a Haar unitary."""
    g = random_unitary(n * d, rng)[:, :n]
    return validate(g.reshape(d, n, n))


def random_density_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return psi / np.linalg.norm(psi)
