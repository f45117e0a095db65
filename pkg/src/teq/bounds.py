"""Channel-level time-energy bounds.

Both bounds are optimisations over a coefficient vector ``v`` (the first row
of the ancilla mixing unitary) of a function of the eigenvalues of
``M(v) = sum_j v_j F_j``:

* upper, max flavor:  ``sum_i acos Re lambda_i(M)``  over ``|v| <= 1``
* upper, sum flavor:  ``sum_i 2 acos Re lambda_i(M)`` over ``|v| <= 1``
* lower, max flavor:  ``max_i acos Re lambda_i(M)``   over ``|v| <= 1``
* lower, sum flavor:  ``max_i 2 acos |lambda_i(M)|``  over ``|v| = 1``

Any feasible ``v`` gives a valid upper bound, and :func:`construct_extension`
builds the unitary dilation that certifies it. The lower bounds are only as
good as the optimiser's global search and are labelled ``heuristic-min``
unless the channel is of the ``sqrt(p) I`` + traceless form, where the max
flavor is known exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import channels as ch
from .channels import DirectionVector, KrausChannel
from .linalg import schur, spectrum
from .measure import max_norm, sum_norm
from .simplex import minimize_batch
from .single_vector import optimal_max_unitary

log = logging.getLogger(__name__)

FLAVORS = ("max", "sum")
NORMAL_TOL = 1e-8
POLISH_RUNS = 4
# fractions of ``max_evals`` granted per successive-halving stage
HALVING_BUDGET = (0.125, 0.125, 0.25, 0.5)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_evals: int = 2000
    seed: int = 0
    tol: float = 1e-9


@dataclass(frozen=True)
class OptimizationResult:
    v: DirectionVector
    value: float
    starts: int
    evals: int
    converged: int


@dataclass(frozen=True)
class UnitaryExtension:
    """Dilation ``u`` on ancilla (``d_prime``) x system (``n``), ancilla index major."""

    u: np.ndarray
    d_prime: int
    w: np.ndarray
    n: int

    def apply(self, rho) -> np.ndarray:
        """``Tr_B[u (|0><0| x rho) u^H]``."""
        cols = self.u[:, : self.n]
        out = cols @ np.asarray(rho, dtype=complex) @ cols.conj().T
        out = out.reshape(self.d_prime, self.n, self.d_prime, self.n)
        return np.einsum("jajb->ab", out)


@dataclass(frozen=True)
class BoundResult:
    value: float
    v: DirectionVector
    tightened: bool = False
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundReport:
    flavor: str
    lower: float
    upper: float
    exact: float | None
    v_lower: DirectionVector
    v_upper: DirectionVector
    extension: UnitaryExtension | None
    lower_kind: str
    diagnostics: dict = field(default_factory=dict)


def _check_flavor(flavor: str) -> None:
    if flavor not in FLAVORS:
        raise ValueError(f"unknown measure flavor {flavor!r}; expected one of {FLAVORS}")


def _acos(x):
    return np.arccos(np.clip(x, -1.0, 1.0))


def combine(c: KrausChannel, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != c.d:
        raise ValueError(f"direction vector has length {v.size}, channel has {c.d} operators")
    return np.tensordot(v, c.ops, axes=1)


def objective_eigenvalues(c: KrausChannel, v) -> np.ndarray:
    """Eigenvalues of ``sum_j v_j F_j`` in deterministic order."""
    if isinstance(v, DirectionVector):
        v = v.v
    return spectrum(combine(c, v))


def upper_value(lam: np.ndarray, flavor: str) -> float:
    total = float(np.sum(_acos(lam.real)))
    return total if flavor == "max" else 2 * total


def lower_value(lam: np.ndarray, flavor: str) -> float:
    if flavor == "max":
        return float(np.max(_acos(lam.real)))
    return float(np.max(2 * _acos(np.abs(lam))))


def is_normal(m: np.ndarray, tol: float = NORMAL_TOL) -> bool:
    scale = np.linalg.norm(m) ** 2
    return bool(np.linalg.norm(m @ m.conj().T - m.conj().T @ m) <= tol * max(scale, 1e-300))


# --- direction optimiser ----------------------------------------------------


def _to_vectors(x: np.ndarray, d: int, constraint: str) -> np.ndarray:
    """Map rows of ``2d`` reals to feasible complex vectors (projection onto the set)."""
    x = np.atleast_2d(x)
    v = x[:, :d] + 1j * x[:, d:]
    nv = np.linalg.norm(v, axis=1)
    if constraint == "sphere":
        tiny = nv < 1e-300
        v[tiny] = 0
        v[tiny, 0] = 1
        nv[tiny] = 1
        return v / nv[:, None]
    scale = np.where(nv > 1, nv, 1.0)
    return v / scale[:, None]


def _to_vector(x: np.ndarray, d: int, constraint: str) -> np.ndarray:
    return _to_vectors(x, d, constraint)[0]


def _start_points(d: int, config: OptimizerConfig) -> np.ndarray:
    starts = [np.eye(2 * d)[j] for j in range(d)]
    if config.restarts > 0:
        sampler = qmc.Halton(d=2 * d, scramble=True, seed=np.random.default_rng(config.seed))
        starts.extend(2 * sampler.random(config.restarts) - 1)
    return np.array(starts)


def optimize_direction(
    objective: Callable[[np.ndarray], np.ndarray],
    d: int,
    constraint: str = "ball",
    config: OptimizerConfig | None = None,
    vectorized: bool = False,
) -> OptimizationResult:
    """Multi-start Nelder-Mead over complex ``v`` of length ``d``.

    ``v`` is carried as ``2d`` reals; the ball is enforced by radial projection
    and the sphere by normalisation. Starts are the basis vectors ``e_j`` plus
    ``config.restarts`` scrambled-Halton points. All starts advance in
    lockstep. After each budget slice in ``HALVING_BUDGET`` only the better
    half of the unconverged runs continues, so a run gets at most
    ``max_evals`` evaluations. The best ``POLISH_RUNS`` are finally restarted
    from a smaller fresh simplex. Ties are broken lexicographically on ``v``.

    With ``vectorized=True`` the objective maps a ``(k, d)`` array of vectors
    to ``k`` values; otherwise it is called once per vector.
    """
    if constraint not in ("ball", "sphere"):
        raise ValueError(f"unknown constraint {constraint!r}")
    config = config or OptimizerConfig()
    if vectorized:
        batch = objective
    else:
        def batch(vs):
            return np.array([objective(v) for v in vs])

    def f(x):
        return batch(_to_vectors(x, d, constraint))

    starts = _start_points(d, config)
    runs = len(starts)
    common = dict(xatol=config.tol, fatol=config.tol, adaptive=d > 2)
    xs = starts.copy()
    fs = np.full(runs, np.inf)
    conv = np.zeros(runs, dtype=bool)
    total_evals = 0
    active = np.arange(runs)
    sim = fsim = None
    for k, frac in enumerate(HALVING_BUDGET):
        budget = max(int(frac * config.max_evals), 1)
        if sim is None:
            res = minimize_batch(f, starts, step=0.1, max_evals=budget, **common)
        else:
            res = minimize_batch(f, None, max_evals=budget, simplex=sim, fsimplex=fsim, **common)
        total_evals += int(res.nfev.sum())
        xs[active], fs[active] = res.x, res.fun
        conv[active] = res.converged
        if k + 1 == len(HALVING_BUDGET):
            break
        # keep the better half of the still-running starts
        keep = max(POLISH_RUNS, (active.size + 1) // 2)
        order = np.lexsort((active, res.fun))[:keep]
        order = order[~res.converged[order]]
        if order.size == 0:
            break
        active = active[order]
        sim, fsim = res.simplex[order], res.fsimplex[order]
    # polish the best few runs from a fresh, smaller simplex
    top = np.lexsort((np.arange(runs), fs))[:POLISH_RUNS]
    polish = minimize_batch(f, xs[top], step=1e-3, max_evals=config.max_evals // 2, **common)
    total_evals += int(polish.nfev.sum())
    better = polish.fun <= fs[top]
    xs[top[better]] = polish.x[better]
    fs[top[better]] = polish.fun[better]
    conv[top[better]] = polish.converged[better]
    vs = _to_vectors(xs, d, constraint)
    keys = [
        (float(fx), tuple(np.round(np.concatenate([v.real, v.imag]), 15)))
        for fx, v in zip(fs, vs)
    ]
    i = min(range(len(keys)), key=keys.__getitem__)
    v = vs[i]
    return OptimizationResult(
        v=DirectionVector(v, constraint),
        value=float(f(xs[i : i + 1])[0]),
        starts=len(starts),
        evals=total_evals,
        converged=int(conv.sum()),
    )


def upper_values(c: KrausChannel, vs: np.ndarray, flavor: str) -> np.ndarray:
    """Upper-bound objective for each row of ``vs``."""
    lam = np.linalg.eigvals(np.einsum("kd,dab->kab", vs, c.ops))
    total = np.sum(_acos(lam.real), axis=1)
    return total if flavor == "max" else 2 * total


def lower_values(c: KrausChannel, vs: np.ndarray, flavor: str) -> np.ndarray:
    """Lower-bound objective for each row of ``vs``."""
    lam = np.linalg.eigvals(np.einsum("kd,dab->kab", vs, c.ops))
    if flavor == "max":
        return np.max(_acos(lam.real), axis=1)
    return np.max(2 * _acos(np.abs(lam)), axis=1)


# --- bounds -----------------------------------------------------------------


def _canonical(d: int, j: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[j] = 1
    return v


def _snap(v: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    out = np.where(np.abs(v) < eps, 0, v)
    nv = np.linalg.norm(out)
    if nv == 0:
        return v
    return out / nv if nv > 1 else out


def upper_bound(c: KrausChannel, flavor: str = "max", opt: OptimizerConfig | None = None) -> BoundResult:
    """Minimise the constructive upper bound over the closed unit ball.

    For the max flavor, any candidate ``v`` with normal ``M(v)`` is evaluated
    with the diagonal-case value ``max_i acos Re lambda_i``; that value is only
    kept after the constructed extension confirms it.
    """
    _check_flavor(flavor)
    res = optimize_direction(
        lambda vs: upper_values(c, vs, flavor), c.d, "ball", opt, vectorized=True
    )
    # the origin and the basis vectors are always checked: padding the Kraus
    # set with zero operators turns the origin into a basis vector
    candidates = [res.v.v, _snap(res.v.v), np.zeros(c.d, dtype=complex)]
    candidates += [_canonical(c.d, j) for j in range(c.d)]
    best = None
    for v in candidates:
        m = combine(c, v)
        lam = spectrum(m)
        value = upper_value(lam, flavor)
        tightened = False
        if flavor == "max" and is_normal(m):
            tight = float(np.max(_acos(lam.real)))
            if tight < value:
                ext_value = max_norm(construct_extension(c, v).u, tol=1e-8)
                if ext_value <= tight + 1e-9:
                    value, tightened = tight, True
                else:
                    value = min(value, ext_value)
        key = (value, tuple(np.round(np.concatenate([v.real, v.imag]), 15)))
        if best is None or key < best[0]:
            best = (key, v, tightened)
    (value, _), v, tightened = best
    return BoundResult(
        value=float(value),
        v=DirectionVector(v, "ball"),
        tightened=tightened,
        diagnostics={"starts": res.starts, "evals": res.evals, "converged": res.converged,
                     "optimizer_value": res.value},
    )


def lower_bound(c: KrausChannel, flavor: str = "max", opt: OptimizerConfig | None = None) -> BoundResult:
    """Minimise the single-column relaxation (ball for max, sphere for sum)."""
    _check_flavor(flavor)
    constraint = "ball" if flavor == "max" else "sphere"
    res = optimize_direction(
        lambda vs: lower_values(c, vs, flavor), c.d, constraint, opt, vectorized=True
    )
    return BoundResult(
        value=res.value,
        v=res.v,
        diagnostics={"starts": res.starts, "evals": res.evals, "converged": res.converged},
    )


def representation_bounds(c: KrausChannel, flavor: str = "max") -> tuple[float, float]:
    """Bounds on the measure of the stacked isometry of this exact Kraus set.

    No Kraus mixing is applied (``v = e_1``), so the values depend only on the
    spectrum of ``F_1``.
    """
    _check_flavor(flavor)
    lam = spectrum(c.ops[0])
    return lower_value(lam, flavor), upper_value(lam, flavor)


def exact_class_c(c: KrausChannel, tol: float = 1e-10) -> float | None:
    """Exact max-flavor measure ``acos(sqrt p)`` for channels of class C(n)."""
    witness = ch.classify_class_c(c, tol)
    if witness is None:
        return None
    p = witness.p
    return float(np.arctan2(np.sqrt(1 - p), np.sqrt(p)))


def complete_to_unitary(v: np.ndarray) -> np.ndarray:
    """Unitary whose first row is the unit vector ``v`` (Gram-Schmidt on the standard basis)."""
    v = np.asarray(v, dtype=complex).ravel()
    d = v.size
    rows = [v / np.linalg.norm(v)]
    for k in range(d):
        e = np.zeros(d, dtype=complex)
        e[k] = 1
        for _ in range(2):
            for r in rows:
                e = e - np.vdot(r, e) * r
        ne = np.linalg.norm(e)
        if ne > 1e-8:
            rows.append(e / ne)
        if len(rows) == d:
            break
    return np.array(rows)


def construct_extension(c: KrausChannel, v) -> UnitaryExtension:
    """Greedy dilation whose measure is at most the upper-bound value at ``v``.

    The Kraus set is mixed so the first operator is ``sum_j v_j F_j``, that
    operator is brought to upper-triangular form by its Schur basis, one
    optimal single-column unitary is built per column, and their product is
    rotated back.
    """
    if isinstance(v, DirectionVector):
        v = v.v
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != c.d:
        raise ValueError(f"direction vector has length {v.size}, channel has {c.d} operators")
    nv = np.linalg.norm(v)
    if nv > 1 + 1e-12:
        raise ValueError(f"direction vector norm {nv} exceeds 1")
    if nv >= 1 - 1e-12:
        d_prime, first = c.d, v / nv
    else:
        d_prime = c.d + 1
        first = np.append(v, np.sqrt(1 - nv**2))
    w = complete_to_unitary(first)
    rotated = ch.kraus_rotate(c, w, tol=1e-9)
    sf = schur(rotated.ops[0])
    z = sf.q
    tri = ch.conjugate_first(rotated, z.conj().T, tol=1e-9)
    n = c.n
    r = d_prime * n
    g = ch.stack(tri)
    u = np.eye(r, dtype=complex)
    for i in range(n):
        e = np.zeros(r, dtype=complex)
        e[i] = 1
        u = optimal_max_unitary(e, g[:, i], r) @ u
    back = np.eye(r, dtype=complex)
    back[:n, :n] = z
    u = back @ u @ back.conj().T
    return UnitaryExtension(u=u, d_prime=d_prime, w=w, n=n)


def channel_bounds(c: KrausChannel, flavor: str = "max", opt: OptimizerConfig | None = None) -> BoundReport:
    _check_flavor(flavor)
    lo = lower_bound(c, flavor, opt)
    up = upper_bound(c, flavor, opt)
    exact = exact_class_c(c) if flavor == "max" else None
    ext = construct_extension(c, up.v)
    ext_measure = max_norm(ext.u, tol=1e-8) if flavor == "max" else sum_norm(ext.u, tol=1e-8)
    lower = lo.value
    lower_kind = "heuristic-min"
    if exact is not None:
        lower_kind = "exact"
        if lower > exact:
            log.info("lower-bound optimiser stopped above the exact value (%g > %g)", lower, exact)
        lower = min(lower, exact)
    if lower > up.value + 1e-6:
        log.warning("lower bound %g exceeds upper bound %g", lower, up.value)
    return BoundReport(
        flavor=flavor,
        lower=float(lower),
        upper=up.value,
        exact=exact,
        v_lower=lo.v,
        v_upper=up.v,
        extension=ext,
        lower_kind=lower_kind,
        diagnostics={
            "lower": lo.diagnostics,
            "upper": up.diagnostics,
            "tightened": up.tightened,
            "extension_measure": ext_measure,
            "extension_dim": ext.d_prime * c.n,
        },
    )


# --- erasure and cascade ----------------------------------------------------


@dataclass(frozen=True)
class ErasureComparison:
    n: int
    delta: float
    quantum: float
    classical: float
    ratio: float
    asymptote: float
    limit: bool


def erasure_compare(n: int, delta: float) -> ErasureComparison:
    """Exact max measure of quantum vs classical noise adding trace distance ``delta``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    hi = n / (n + 1)
    if not (0 <= delta <= hi + 1e-12):
        raise ValueError(f"delta={delta} outside the valid range [0, {hi:.6g}] for n={n}")
    q = ch.q_from_delta(n, delta)
    quantum = exact_class_c(ch.depolarizing_quantum(n, q))
    classical = exact_class_c(ch.noisy_classical(n, q))
    asymptote = float(np.sqrt((n + 1) / n))
    if classical == 0:
        return ErasureComparison(n, delta, quantum, classical, asymptote, asymptote, True)
    return ErasureComparison(n, delta, quantum, classical, quantum / classical, asymptote, False)


@dataclass(frozen=True)
class CascadeAnalysis:
    n: int
    q: float
    k: int
    single: float
    separate: float
    combined: float
    ratio: float
    sqrt_k: float
    small_noise: bool
    limit: bool


def cascade_analysis(n: int, q: float, k: int, small_noise_cut: float = 0.05) -> CascadeAnalysis:
    """Compare ``k`` separate runs of the depolarizing channel with one run of its ``k``-fold power.

    ``small_noise`` flags ``k (1-q)(1 - 1/n^2) <= small_noise_cut``, the regime
    where ``ratio`` approaches ``sqrt(k)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    single = exact_class_c(ch.depolarizing_quantum(n, q))
    combined = exact_class_c(ch.depolarizing_cascade(n, q, k))
    sqrt_k = float(np.sqrt(k))
    small = k * (1 - q) * (1 - 1 / n**2) <= small_noise_cut
    if single == 0:
        return CascadeAnalysis(n, q, k, 0.0, 0.0, combined, sqrt_k, sqrt_k, small, True)
    return CascadeAnalysis(n, q, k, single, k * single, combined, combined / single, sqrt_k, small, False)
