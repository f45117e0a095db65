"""Optimal unitaries mapping one unit vector onto another.

Everything here depends on the pair ``(a, b)`` only through the overlap
``w = <a|b>``. A unitary with ``U a = b`` whose only non-trivial eigenvalues
are ``exp(i theta1)`` and ``exp(i theta2)`` exists exactly when ``w`` lies on
the chord joining those two points of the unit circle; the chord also fixes
the mixing weight ``z`` with ``w = z e^{i theta1} + (1 - z) e^{i theta2}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import nnls

from .linalg import principal_angle
from .measure import MuWeights, weighted_angles

FEAS_TOL = 1e-9
RECON_TOL = 1e-10
# below this |a_perp| the pair (a, b) is treated as parallel
_PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class Overlap:
    w: complex

    def __post_init__(self):
        w = complex(self.w)
        object.__setattr__(self, "w", w)
        if abs(w) > 1 + 1e-12:
            raise ValueError(f"overlap {w} lies outside the unit disk")

    @property
    def r(self) -> float:
        return min(abs(self.w), 1.0)

    @property
    def gamma(self) -> float:
        return principal_angle(self.w) if self.w != 0 else 0.0


@dataclass(frozen=True)
class ChordSolution:
    """Two eigenangles, the weight ``z`` on the first, and the eigenvector phase."""

    theta1: float
    theta2: float
    z: float
    x: float
    s: int

    @property
    def point(self) -> complex:
        return self.z * np.exp(1j * self.theta1) + (1 - self.z) * np.exp(1j * self.theta2)

    def abs_angles(self) -> np.ndarray:
        return np.sort(np.abs([self.theta1, self.theta2]))[::-1]


def _overlap(w) -> complex:
    if isinstance(w, Overlap):
        return w.w
    return Overlap(w).w


def _acos(x: float) -> float:
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


def f_max(w) -> float:
    """Least largest-eigenangle over unitaries with ``U a = b``: ``acos(Re w)``."""
    return _acos(_overlap(w).real)


def f_sum_lower(w) -> float:
    """Lower bound ``2 acos|w|`` on the least eigenangle sum."""
    return 2 * _acos(abs(_overlap(w)))


def f_sum_upper(w) -> float:
    """Upper bound ``2 acos(Re w)`` on the least eigenangle sum."""
    return 2 * _acos(_overlap(w).real)


def chord_weight(theta1: float, theta2: float, w) -> float | None:
    """Weight ``z`` placing ``w`` on the chord, or ``None`` if ``w`` is off it."""
    w = _overlap(w)
    e1, e2 = np.exp(1j * theta1), np.exp(1j * theta2)
    if abs(e1 - e2) < 1e-14:
        if abs(w - e1) <= FEAS_TOL:
            return 1.0
        raise ValueError("chord endpoints coincide and the point is not on them")
    z = (w - e2) / (e1 - e2)
    if abs(z.imag) > FEAS_TOL or not (-FEAS_TOL <= z.real <= 1 + FEAS_TOL):
        return None
    return float(np.clip(z.real, 0.0, 1.0))


def ansatz_phase(theta1: float, theta2: float) -> tuple[float, int]:
    """Phase ``x`` and sign ``s`` with ``e^{ix} (e^{i theta1} - e^{i theta2}) >= 0``.

    ``e^{ix} = i (-1)^s e^{-i (theta1 + theta2)/2}``.
    """
    s = 0 if np.sin((theta1 - theta2) / 2) <= 0 else 1
    ex = 1j * (-1) ** s * np.exp(-0.5j * (theta1 + theta2))
    return float(np.angle(ex)), s


def chord_solution(theta1: float, theta2: float, w) -> ChordSolution:
    z = chord_weight(theta1, theta2, w)
    if z is None:
        raise ValueError(f"point {complex(_overlap(w))} is not on the chord ({theta1}, {theta2})")
    x, s = ansatz_phase(theta1, theta2)
    return ChordSolution(float(theta1), float(theta2), z, x, s)


def max_chord(w) -> ChordSolution:
    """The vertical chord ``theta = +-acos(Re w)`` through ``w``."""
    w = _overlap(w)
    t = f_max(w)
    if abs(abs(w) - 1) <= _PARALLEL_EPS:
        ang = principal_angle(w)
        x, s = ansatz_phase(ang, ang)
        return ChordSolution(ang, ang, 1.0, x, s)
    return chord_solution(t, -t, w)


def tilde_u_matrix(w: complex, theta1: float, theta2: float, s_perp: float | None = None) -> np.ndarray:
    if s_perp is None:
        s_perp = np.sqrt(max(1 - abs(w) ** 2, 0.0))
    ph = np.exp(1j * (theta1 + theta2))
    return np.array([[w, -ph * s_perp], [s_perp, ph * np.conj(w)]], dtype=complex)


def build_tilde_u(w, theta1: float, theta2: float) -> np.ndarray:
    """The 2x2 block acting on ``span{a, a_perp}`` in that basis."""
    w = _overlap(w)
    if abs(w) >= 1 - _PARALLEL_EPS:
        raise ValueError("|w| = 1: a_perp is undefined, use embed_full")
    if chord_weight(theta1, theta2, w) is None:
        raise ValueError(f"chord ({theta1}, {theta2}) does not pass through {w}")
    return tilde_u_matrix(w, theta1, theta2)


def a_perp(a, b) -> np.ndarray:
    """Unit vector orthogonal to ``a`` in ``span{a, b}``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    w = np.vdot(a, b)
    d = b - w * a
    d = d - np.vdot(a, d) * a
    nd = np.linalg.norm(d)
    if nd < _PARALLEL_EPS:
        raise ValueError("vectors are parallel; a_perp is undefined")
    return d / nd


def embed_full(a, b, theta1: float, theta2: float, r: int | None = None) -> np.ndarray:
    """``r x r`` unitary sending ``a`` to ``b`` with eigenangles ``{theta1, theta2, 0, ...}``."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if r is None:
        r = a.size
    if a.size != r or b.size != r:
        raise ValueError(f"vectors must have length {r}")
    if r < 2:
        raise ValueError("ambient dimension must be at least 2")
    w = np.vdot(a, b)
    d = b - w * a
    d = d - np.vdot(a, d) * a
    s_perp = np.linalg.norm(d)
    eye = np.eye(r, dtype=complex)
    if s_perp < _PARALLEL_EPS:
        phase = w / abs(w)
        return eye + (phase - 1) * np.outer(a, a.conj())
    if chord_weight(theta1, theta2, w) is None:
        raise ValueError(f"chord ({theta1}, {theta2}) does not pass through <a|b> = {w}")
    basis = np.column_stack([a, d / s_perp])
    block = tilde_u_matrix(w, theta1, theta2, s_perp)
    return eye - basis @ basis.conj().T + basis @ block @ basis.conj().T


def optimal_max_unitary(a, b, r: int | None = None) -> np.ndarray:
    """Unitary with ``U a = b`` and largest eigenangle ``acos(Re <a|b>)``."""
    w = np.vdot(np.asarray(a, dtype=complex).ravel(), np.asarray(b, dtype=complex).ravel())
    t = _acos(w.real)
    return embed_full(a, b, t, -t, r)


def chord_min_angle(r: float) -> float:
    """Smallest angle at the origin subtended by a chord through a point at radius ``r``."""
    if not 0 <= r <= 1 + 1e-12:
        raise ValueError(f"radius {r} outside [0, 1]")
    return 2 * _acos(r)


def chord_endpoints(point: complex, direction: float) -> tuple[float, float]:
    """Angles where the line through ``point`` with heading ``direction`` meets the circle."""
    u = np.exp(1j * direction)
    bq = (np.conj(point) * u).real
    disc = np.sqrt(max(bq * bq + 1 - abs(point) ** 2, 0.0))
    p1 = point + (-bq + disc) * u
    p2 = point + (-bq - disc) * u
    return float(np.angle(p1)), float(np.angle(p2))


def subtended_angle(phi1: float, phi2: float) -> float:
    d = abs(phi1 - phi2) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


# --- vertex merging ---------------------------------------------------------


def _in_hull(angles: np.ndarray, target: complex, tol: float = 1e-12) -> bool:
    """Point-in-polygon for vertices on the unit circle (convex position)."""
    angles = np.sort(angles)
    pts = np.exp(1j * angles)
    if pts.size == 1:
        return abs(target - pts[0]) <= tol
    if pts.size == 2:
        seg = pts[1] - pts[0]
        t = np.clip(((target - pts[0]) * np.conj(seg)).real / abs(seg) ** 2, 0, 1)
        return abs(target - (pts[0] + t * seg)) <= tol
    nxt = np.roll(pts, -1)
    edge = nxt - pts
    length = np.abs(edge)
    ok = length > 0
    # signed distance of the target from each edge line, positive inside
    dist = (edge[ok].conj() * (target - pts[ok])).imag / length[ok]
    return bool(np.all(dist >= -tol))


def _solve_weights(angles: np.ndarray, target: complex) -> np.ndarray:
    a = np.vstack([np.cos(angles), np.sin(angles), np.ones_like(angles)])
    rhs = np.array([target.real, target.imag, 1.0])
    wts, resid = nnls(a, rhs)
    if resid > 1e-9:
        raise ValueError(f"target is not a convex combination of the vertices (residual {resid:.2e})")
    return wts / wts.sum()


def _merge_duplicates(angles, weights, tol=1e-12):
    order = np.argsort(angles)
    out_a, out_w = [], []
    for k in order:
        if out_a and abs(angles[k] - out_a[-1]) <= tol:
            out_w[-1] += weights[k]
        else:
            out_a.append(float(angles[k]))
            out_w.append(float(weights[k]))
    return np.array(out_a), np.array(out_w)


def _prune(angles, weights, wtol=1e-14):
    keep = weights > wtol
    return _merge_duplicates(angles[keep], weights[keep] / weights[keep].sum())


def _merge_step(angles: np.ndarray, weights: np.ndarray, target: complex):
    """Replace one adjacent same-sign pair by a single vertex between them."""
    pair = None
    for k in range(angles.size - 1):
        lo, hi = angles[k], angles[k + 1]
        if (lo >= 0 and hi >= 0) or (lo <= 0 and hi <= 0):
            pair = k
            break
    if pair is None:
        raise ValueError("no adjacent pair of vertices with equal sign")
    t_lo, t_hi = angles[pair], angles[pair + 1]
    w_lo, w_hi = weights[pair], weights[pair + 1]
    rest = np.delete(np.arange(angles.size), [pair, pair + 1])
    rest_angles = angles[rest]
    alpha = w_lo + w_hi
    p = (w_lo * np.exp(1j * t_lo) + w_hi * np.exp(1j * t_hi)) / alpha
    # normalise by the rest weights directly: 1 - alpha cancels when they are tiny
    c = np.dot(weights[rest], np.exp(1j * rest_angles)) / weights[rest].sum()
    # extend the ray from c through p until it meets the arc [t_lo, t_hi]
    dvec = p - c
    qa = abs(dvec) ** 2
    qb = 2 * (np.conj(c) * dvec).real
    qc = abs(c) ** 2 - 1
    s_hit = (-qb + np.sqrt(max(qb * qb - 4 * qa * qc, 0.0))) / (2 * qa)
    t_ray = float(np.clip(np.angle(c + s_hit * dvec), t_lo, t_hi))
    # prefer the feasible merge angle closest to the smaller-|angle| endpoint
    t_small = t_lo if abs(t_lo) <= abs(t_hi) else t_hi

    def feasible(t):
        return _in_hull(np.append(rest_angles, t), target, tol=1e-11)

    if feasible(t_small):
        t_new = t_small
    else:
        good, bad = t_ray, t_small
        for _ in range(60):
            mid = 0.5 * (good + bad)
            if feasible(mid):
                good = mid
            else:
                bad = mid
        t_new = good
    new_angles = np.append(rest_angles, t_new)
    new_weights = _solve_weights(new_angles, target)
    return _prune(new_angles, new_weights)


def reduction_steps(vertices: Sequence[float], weights: Sequence[float], target) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield the vertex set after each merge, starting with the input."""
    target = _overlap(target)
    angles = np.array([principal_angle(np.exp(1j * t)) for t in vertices], dtype=float)
    wts = np.asarray(weights, dtype=float)
    if angles.size < 2 or angles.size != wts.size:
        raise ValueError("need at least two vertices with matching weights")
    if np.any(wts < -1e-15) or abs(wts.sum() - 1) > 1e-9:
        raise ValueError("weights must be non-negative and sum to 1")
    if abs(np.dot(wts, np.exp(1j * angles)) - target) > 1e-9:
        raise ValueError("weighted vertices do not reproduce the target point")
    angles, wts = _prune(angles, np.clip(wts, 0, None))
    yield angles, wts
    while angles.size > 2:
        angles, wts = _merge_step(angles, wts, target)
        yield angles, wts


def implied_norm(angles: np.ndarray, mu: MuWeights, r: int | None = None) -> float:
    """Measure of a unitary whose non-trivial eigenangles are ``angles``."""
    mags = np.sort(np.abs(angles))[::-1]
    if r is not None and r > mags.size:
        mags = np.concatenate([mags, np.zeros(r - mags.size)])
    return weighted_angles(mags, mu)


def reduce_to_chord(vertices, weights, target, mu: MuWeights | None = None) -> ChordSolution:
    """Merge vertices until two remain, checking the target and the measure at each step."""
    target = _overlap(target)
    prev = None
    final = None
    for angles, wts in reduction_steps(vertices, weights, target):
        if abs(np.dot(wts, np.exp(1j * angles)) - target) > 1e-9:
            raise ArithmeticError("vertex merge moved the target point")
        if mu is not None:
            cur = implied_norm(angles, mu)
            if prev is not None and cur > prev + 1e-12:
                raise ArithmeticError(f"vertex merge increased the measure ({prev} -> {cur})")
            prev = cur
        final = (angles, wts)
    angles, wts = final
    if angles.size == 1:
        x, s = ansatz_phase(angles[0], angles[0])
        return ChordSolution(float(angles[0]), float(angles[0]), 1.0, x, s)
    t1, t2 = float(angles[1]), float(angles[0])
    x, s = ansatz_phase(t1, t2)
    return ChordSolution(t1, t2, float(wts[1]), x, s)
