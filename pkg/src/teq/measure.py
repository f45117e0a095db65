"""Time-energy measure of unitaries and the minimum-time uncertainty bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, eigenangles


@dataclass(frozen=True)
class MuWeights:
    """Non-increasing, non-negative, not-all-zero weight vector."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise ValueError("weights must be non-empty")
        arr = np.asarray(w)
        if np.any(arr < 0) or not np.any(arr > 0):
            raise ValueError("weights must be non-negative and not all zero")
        if np.any(np.diff(arr) > 0):
            raise ValueError("weights must be non-increasing")

    @classmethod
    def max(cls, r: int = 1) -> "MuWeights":
        return cls((1.0,) + (0.0,) * (r - 1))

    @classmethod
    def sum(cls, r: int) -> "MuWeights":
        return cls((1.0,) * r)

    def fitted(self, r: int) -> np.ndarray:
        """Weights padded with zeros or truncated to length ``r``."""
        arr = np.zeros(r)
        m = min(r, len(self.weights))
        arr[:m] = self.weights[:m]
        return arr


def weighted_angles(angles, mu: MuWeights) -> float:
    """``sum_j mu_j |theta_j|`` for angles already sorted non-increasingly."""
    angles = np.asarray(angles, dtype=float)
    return float(np.dot(mu.fitted(len(angles)), angles))


def mu_norm(u, mu: MuWeights | tuple | list, tol: float = DEFAULT_TOL) -> float:
    """Weighted sum of the sorted absolute eigenangles of ``u``."""
    if not isinstance(mu, MuWeights):
        mu = MuWeights(tuple(mu))
    return weighted_angles(eigenangles(u, tol), mu)


def max_norm(u, tol: float = DEFAULT_TOL) -> float:
    return float(eigenangles(u, tol)[0])


def sum_norm(u, tol: float = DEFAULT_TOL) -> float:
    return float(np.sum(eigenangles(u, tol)))


@dataclass(frozen=True)
class TeurParams:
    epsilon: float
    a_const: float = 0.725
    hbar: float = 1.0

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"fidelity threshold epsilon={self.epsilon} outside [0, 1]")
        if self.a_const <= 0 or self.hbar <= 0:
            raise ValueError("a_const and hbar must be positive")


def teur_min_time(params: TeurParams, energies, amplitudes) -> float:
    """Least time to reach fidelity ``epsilon``: ``(1 - sqrt(eps)) hbar / (A sum |a_j|^2 |E_j|)``."""
    energies = np.asarray(energies, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if energies.shape != amplitudes.shape:
        raise ValueError("energies and amplitudes must have the same length")
    weights = np.abs(amplitudes) ** 2
    if abs(weights.sum() - 1) > 1e-9:
        raise ValueError(f"amplitudes are not normalized (sum |a|^2 = {weights.sum()})")
    mean_energy = float(np.dot(weights, np.abs(energies)))
    if mean_energy <= 0:
        raise ValueError("weighted absolute energy is zero; time bound undefined")
    return (1 - np.sqrt(params.epsilon)) * params.hbar / (params.a_const * mean_energy)
