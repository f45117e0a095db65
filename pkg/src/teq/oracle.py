"""Brute-force minimisers and randomized checks used to cross-validate the bounds.

The brute-force routines search directly over unitaries, independently of the
closed forms and bound formulas:

* single vector: ``U = B (1 + exp(iC))`` where ``B`` is a fixed unitary with
  ``B a = b`` and ``exp(iC)`` acts on the orthogonal complement of ``a``;
* channel: ``U = (W x I)[G | G_perp V]`` with ``W = exp(iA)`` mixing the
  ancilla and ``V = exp(iC)`` completing the stacked isometry ``G``.

Both measures are non-smooth at their minimisers, so L-BFGS works on a smooth
surrogate built from the Hermitian part ``H = (U + U^H)/2``, whose
eigenvalues are ``cos theta_j``. The max measure uses a soft minimum of those
eigenvalues and the sum measure replaces ``|theta|`` by
``sqrt(theta^2 + eps^2)``. The sharpness is increased in stages and the exact
measure is reported at the final point. Gradients are analytic, through the
Daleckii-Krein formula for the derivative of the matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize
from scipy.special import logsumexp

from . import channels as ch
from .channels import KrausChannel
from .linalg import principal_angle, random_unitary
from .single_vector import (
    ansatz_phase,
    chord_endpoints,
    chord_min_angle,
    reduction_steps,
    implied_norm,
    subtended_angle,
)
from .measure import MuWeights

FLAVORS = ("max", "sum")
# largest single-vector ambient dimension and channel dilation size searched
MAX_VECTOR_DIM = 4
MAX_DILATION_DIM = 10
# surrogate sharpness schedules (soft-min inverse temperature, |theta| smoothing)
BETA_SCHEDULE = (10.0, 1e2, 1e3, 1e4, 1e5, 1e6)
EPS_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


@dataclass(frozen=True)
class OracleBudget:
    restarts: int = 64
    max_evals: int = 5000


@dataclass(frozen=True)
class OracleResult:
    value: float
    argument: np.ndarray
    evals: int
    seed: int


# --- Hermitian parametrisation ---------------------------------------------


def hermitian_from_params(x: np.ndarray, k: int) -> np.ndarray:
    """``k x k`` Hermitian matrix from ``k^2`` reals (diagonal, then real and imaginary upper parts)."""
    h = np.zeros((k, k), dtype=complex)
    h[np.diag_indices(k)] = x[:k]
    iu = np.triu_indices(k, 1)
    m = len(iu[0])
    upper = x[k : k + m] + 1j * x[k + m : k + 2 * m]
    h[iu] = upper
    h[(iu[1], iu[0])] = upper.conj()
    return h


def expi(x: np.ndarray, k: int):
    """``exp(iC)`` for the Hermitian ``C`` encoded by ``x``, with the data its derivative needs."""
    c = hermitian_from_params(x, k)
    a, q = np.linalg.eigh(c)
    ea = np.exp(1j * a)
    return (q * ea) @ q.conj().T, (a, q, ea)


def expi_param_grad(m: np.ndarray, cache) -> np.ndarray:
    """Gradient of ``Re tr(M exp(iC))`` with respect to the parameters of ``C``."""
    a, q, ea = cache
    k = a.size
    diff = a[:, None] - a[None, :]
    close = np.abs(diff) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(close, 1j * ea[:, None], (ea[:, None] - ea[None, :]) / np.where(close, 1, diff))
    kk = q.conj().T @ m @ q
    z = q @ (kk.T * phi).T @ q.conj().T
    # d phi = Re(i tr(Z dC)); split dC over the parameter directions
    g_diag = np.real(np.diag(z))
    iu = np.triu_indices(k, 1)
    zjk = z[iu]
    zkj = z[(iu[1], iu[0])]
    g_re = np.real(zkj + zjk)
    g_im = -np.imag(zkj - zjk)
    return np.concatenate([g_diag, g_re, g_im])


# --- smooth surrogates -------------------------------------------------------


def _acos(x):
    return np.arccos(np.clip(x, -1.0, 1.0))


def exact_measure(u: np.ndarray, flavor: str) -> float:
    """Measure of a unitary from the spectrum of its Hermitian part."""
    mu = np.linalg.eigvalsh(0.5 * (u + u.conj().T))
    angles = _acos(mu)
    return float(angles.max() if flavor == "max" else angles.sum())


def surrogate(u: np.ndarray, flavor: str, sharp: float):
    """Smooth stand-in for the measure and its gradient ``P`` with ``d f = Re tr(P dU)``."""
    h = 0.5 * (u + u.conj().T)
    mu, vecs = np.linalg.eigh(h)
    if flavor == "max":
        # maximise the soft minimum of cos(theta_j)
        lse = logsumexp(-sharp * mu)
        value = lse / sharp
        weights = np.exp(-sharp * mu - lse)
        dmu = -weights
    else:
        eps = sharp
        theta = _acos(mu)
        smooth = np.sqrt(theta**2 + eps**2)
        value = float(smooth.sum())
        sin = np.sqrt(np.clip(1 - mu**2, 0, None))
        # d theta / d mu = -1/sin theta, and theta/sin theta -> 1 as theta -> 0
        ratio = np.where(theta > 1e-6, theta / np.where(sin > 0, sin, 1), 1.0)
        dmu = -ratio / smooth
    p = (vecs * dmu) @ vecs.conj().T
    return float(value), p


def _run(fun_grad, x0: np.ndarray, schedule, max_evals: int):
    x = x0
    evals = 0
    per_stage = max(max_evals // len(schedule), 1)
    for sharp in schedule:
        res = minimize(
            fun_grad, x, args=(sharp,), jac=True, method="L-BFGS-B",
            options={"maxfun": per_stage, "maxiter": per_stage, "gtol": 1e-12, "ftol": 1e-15},
        )
        evals += res.nfev
        x = res.x
    return x, evals


def _best(candidates):
    """Minimum by value, ties broken lexicographically on the parameters."""
    return min(candidates, key=lambda t: (t[0], tuple(np.round(t[1], 12))))


def _schedule(flavor: str):
    return BETA_SCHEDULE if flavor == "max" else EPS_SCHEDULE


def _check_flavor(flavor: str) -> None:
    if flavor not in FLAVORS:
        raise ValueError(f"unknown measure flavor {flavor!r}; expected one of {FLAVORS}")


def _restart_rngs(seed: int, restarts: int):
    # children of one seed sequence: the first k generators do not depend on ``restarts``
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]


# --- single vector ------------------------------------------------------------


def _completion(a: np.ndarray) -> np.ndarray:
    """Unitary whose first column is ``a``."""
    return np.column_stack([a, null_space(a.conj()[None, :])])


def brute_single_vector(a, b, flavor: str = "max", budget: OracleBudget | None = None,
                        seed: int = 0) -> OracleResult:
    """Least measure over unitaries with ``U a = b``, by direct search."""
    _check_flavor(flavor)
    budget = budget or OracleBudget(restarts=4, max_evals=1500)
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    r = a.size
    if b.size != r:
        raise ValueError("a and b must have the same length")
    if not 2 <= r <= MAX_VECTOR_DIM:
        raise ValueError(f"dimension {r} beyond the brute-force budget (2..{MAX_VECTOR_DIM})")
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    # B maps the basis (a, a_1, ...) to (b, b_1, ...), so B a = b
    frame_a = _completion(a)
    frame_b = _completion(b)
    base = frame_b @ frame_a.conj().T
    k = r - 1

    def build(x):
        e, cache = expi(x, k)
        s = np.eye(r, dtype=complex)
        s[1:, 1:] = e
        return frame_b @ s @ frame_a.conj().T, cache

    def fun_grad(x, sharp):
        e, cache = expi(x, k)
        s = np.eye(r, dtype=complex)
        s[1:, 1:] = e
        u = frame_b @ s @ frame_a.conj().T
        value, p = surrogate(u, flavor, sharp)
        # d U = frame_b (0 + dE) frame_a^H
        m = (frame_a.conj().T @ p @ frame_b)[1:, 1:]
        return value, expi_param_grad(m, cache)

    candidates = []
    evals = 0
    for rng in _restart_rngs(seed, budget.restarts):
        x0 = rng.normal(scale=1.0, size=k * k)
        x, n_ev = _run(fun_grad, x0, _schedule(flavor), budget.max_evals)
        evals += n_ev
        candidates.append((exact_measure(build(x)[0], flavor), x))
    # the zero parameter point is the plain frame map; always consider it
    candidates.append((exact_measure(base, flavor), np.zeros(k * k)))
    value, x = _best(candidates)
    return OracleResult(value=value, argument=x, evals=evals, seed=seed)


# --- channel ------------------------------------------------------------------


def brute_channel(c: KrausChannel, flavor: str = "max", d_prime: int | None = None,
                  budget: OracleBudget | None = None, seed: int = 0,
                  fix_ancilla: bool = False) -> OracleResult:
    """Least measure over dilations ``(W x I)[G | G_perp V]`` of the channel.

    With ``fix_ancilla`` the mixing ``W`` is held at the identity, which
    solves the completion problem for this particular Kraus set.
    """
    _check_flavor(flavor)
    budget = budget or OracleBudget()
    d_prime = c.d if d_prime is None else d_prime
    if d_prime < c.d:
        raise ValueError(f"d_prime={d_prime} is smaller than the number of Kraus operators {c.d}")
    n = c.n
    r = d_prime * n
    if r > MAX_DILATION_DIM:
        raise ValueError(
            f"dilation dimension {r} exceeds the brute-force budget ({MAX_DILATION_DIM})"
        )
    g = ch.stack(c.padded(d_prime))
    base = np.column_stack([g, null_space(g.conj().T)])
    kv = r - n
    na = 0 if fix_ancilla else d_prime * d_prime

    def assemble(x):
        if fix_ancilla:
            w, cache_w = np.eye(d_prime, dtype=complex), None
        else:
            w, cache_w = expi(x[:na], d_prime)
        v, cache_v = expi(x[na:], kv) if kv > 0 else (np.zeros((0, 0)), None)
        right = np.eye(r, dtype=complex)
        right[n:, n:] = v
        x_mat = base @ right
        u = np.kron(w, np.eye(n)) @ x_mat
        return u, w, x_mat, cache_w, cache_v

    def fun_grad(x, sharp):
        u, w, x_mat, cache_w, cache_v = assemble(x)
        value, p = surrogate(u, flavor, sharp)
        grad = []
        if not fix_ancilla:
            # W enters as (dW x I) X: contract the system index of X P
            y = (x_mat @ p).reshape(d_prime, n, d_prime, n)
            grad.append(expi_param_grad(np.einsum("aibi->ab", y), cache_w))
        if kv > 0:
            k_mat = p @ np.kron(w, np.eye(n)) @ base
            grad.append(expi_param_grad(k_mat[n:, n:], cache_v))
        return value, np.concatenate(grad) if grad else np.zeros(0)

    dim = na + kv * kv
    candidates = []
    evals = 0
    for rng in _restart_rngs(seed, budget.restarts):
        x0 = rng.normal(scale=1.0, size=dim)
        x, n_ev = _run(fun_grad, x0, _schedule(flavor), budget.max_evals)
        evals += n_ev
        candidates.append((exact_measure(assemble(x)[0], flavor), x))
    value, x = _best(candidates)
    return OracleResult(value=value, argument=x, evals=evals, seed=seed)


def dilation_from_argument(c: KrausChannel, d_prime: int, x: np.ndarray,
                           fix_ancilla: bool = False) -> np.ndarray:
    """The unitary that :func:`brute_channel` evaluated at parameter point ``x``."""
    n = c.n
    r = d_prime * n
    g = ch.stack(c.padded(d_prime))
    base = np.column_stack([g, null_space(g.conj().T)])
    na = 0 if fix_ancilla else d_prime * d_prime
    w = np.eye(d_prime, dtype=complex) if fix_ancilla else expi(x[:na], d_prime)[0]
    right = np.eye(r, dtype=complex)
    if r > n:
        right[n:, n:] = expi(x[na:], r - n)[0]
    return np.kron(w, np.eye(n)) @ base @ right


# --- randomized lemma checks --------------------------------------------------


@dataclass
class CheckReport:
    name: str
    trials: int
    violations: int = 0
    max_residual: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def vacuous(self) -> bool:
        return self.trials == 0

    def record(self, residual: float, tol: float, instance: dict) -> None:
        residual = float(residual)
        if not np.isfinite(residual):
            residual = np.inf
        self.max_residual = max(self.max_residual, residual)
        if residual > tol:
            self.violations += 1
            if len(self.failures) < 10:
                self.failures.append({**instance, "residual": residual})


def _random_mu(m: int, rng) -> MuWeights:
    w = np.sort(rng.random(m))[::-1]
    return MuWeights(tuple(w))


def check_polygon_reduction(seed: int, trials: int, tol: float = 1e-8) -> CheckReport:
    """Random vertex sets reduced to a chord: each merge must keep the target and not raise the measure."""
    rng = np.random.default_rng(seed)
    report = CheckReport("polygon-reduction", trials)
    for t in range(trials):
        m = int(rng.integers(3, 6))
        angles = rng.uniform(-np.pi, np.pi, m)
        weights = rng.dirichlet(np.ones(m))
        target = complex(np.dot(weights, np.exp(1j * angles)))
        mus = [MuWeights.max(m), MuWeights.sum(m), _random_mu(m, rng)]
        instance = {"trial": t, "angles": angles.tolist(), "weights": weights.tolist()}
        try:
            steps = list(reduction_steps(angles, weights, target))
        except (ValueError, ArithmeticError) as exc:
            report.record(np.inf, tol, {**instance, "error": str(exc)})
            continue
        worst = 0.0
        for k, (ang, wts) in enumerate(steps):
            worst = max(worst, abs(np.dot(wts, np.exp(1j * ang)) - target))
            if k:
                prev = steps[k - 1][0]
                for mu in mus:
                    worst = max(worst, implied_norm(ang, mu) - implied_norm(prev, mu))
        if steps[-1][0].size > 2:
            worst = np.inf
        report.record(worst, tol, instance)
    return report


def check_chord_min_angle(seed: int, trials: int, sweep: int = 360, tol: float = 1e-9) -> CheckReport:
    """Chords through ``r e^{i gamma}`` subtend at least ``2 acos r``; the perpendicular one attains it."""
    rng = np.random.default_rng(seed)
    report = CheckReport("chord-min-angle", trials)
    for t in range(trials):
        r = float(rng.uniform(0, 1))
        gamma = float(rng.uniform(-np.pi, np.pi))
        point = r * np.exp(1j * gamma)
        bound = chord_min_angle(r)
        headings = np.linspace(0, np.pi, sweep, endpoint=False)
        angles = np.array([subtended_angle(*chord_endpoints(point, h)) for h in headings])
        below = max(0.0, float(bound - angles.min()))
        perp = subtended_angle(*chord_endpoints(point, gamma + np.pi / 2))
        report.record(max(below, abs(perp - bound)), tol, {"trial": t, "r": r, "gamma": gamma})
    return report


def appendix_residuals(w: complex, theta1: float, theta2: float, z: float) -> np.ndarray:
    """Residuals of the constraints fixing the 2x2 block for the chord ``(theta1, theta2)`` through ``w``.

    With ``U = sum_k e^{i theta_k} |u_k><u_k|`` and ``u_1 = (sqrt z, e^{ix} sqrt(1-z))``
    up to phase, the first column must be ``(w, sqrt(1 - |w|^2))``. Returned are
    the two entry residuals, the squared-magnitude identity, the closed form
    ``2 (-1)^(s+1) sin((theta1 - theta2)/2)`` of ``e^{ix}(e^{i theta1} - e^{i theta2})``
    and that quantity's sign condition.
    """
    x, sel = ansatz_phase(theta1, theta2)
    ex = np.exp(1j * x)
    e1, e2 = np.exp(1j * theta1), np.exp(1j * theta2)
    first = z * e1 + (1 - z) * e2
    second = ex * np.sqrt(z * (1 - z)) * (e1 - e2)
    s_perp = np.sqrt(max(1 - abs(w) ** 2, 0.0))
    # squared second entry against 1 - r^2 with r^2 expanded through the first entry
    r2 = z**2 + (1 - z) ** 2 + 2 * z * (1 - z) * np.cos(theta1 - theta2)
    magnitude = 2 * z * (1 - z) * (1 - np.cos(theta1 - theta2)) - (1 - r2)
    sign = ex * (e1 - e2)
    closed = 2 * (-1) ** (sel + 1) * np.sin((theta1 - theta2) / 2)
    return np.array([
        abs(first - w),
        abs(second - s_perp),
        abs(magnitude),
        abs(sign - closed),
        abs(sign.imag) + max(0.0, -sign.real),
    ])


def check_appendix_identity(seed: int, trials: int, tol: float = 1e-10) -> CheckReport:
    """Random feasible chords satisfy both entry constraints, the magnitude identity and the sign choice."""
    rng = np.random.default_rng(seed)
    report = CheckReport("appendix-identity", trials)
    for t in range(trials):
        theta1, theta2 = (principal_angle(np.exp(1j * a)) for a in rng.uniform(-np.pi, np.pi, 2))
        z = float(rng.uniform(0, 1))
        w = z * np.exp(1j * theta1) + (1 - z) * np.exp(1j * theta2)
        res = appendix_residuals(w, theta1, theta2, z)
        report.record(res.max(), tol, {"trial": t, "theta1": theta1, "theta2": theta2, "z": z})
    return report


# --- sandwich checks ------------------------------------------------------------


@dataclass(frozen=True)
class SandwichCase:
    label: str
    lower: float
    oracle: float
    upper: float
    slack: float

    @property
    def holds(self) -> bool:
        return self.lower - self.slack <= self.oracle <= self.upper + self.slack


def sandwich_channel(c: KrausChannel, label: str, seed: int = 0, slack: float = 1e-4,
                     budget: OracleBudget | None = None, opt=None) -> SandwichCase:
    """Max-flavor bounds against the brute-force dilation search with one spare ancilla level."""
    from .bounds import lower_bound, upper_bound

    lo = lower_bound(c, "max", opt).value
    up = upper_bound(c, "max", opt).value
    oracle = brute_channel(c, "max", c.d + 1, budget, seed).value
    return SandwichCase(label, lo, oracle, up, slack)


def oracle_suite(seed: int, trials: int = 20, budget: OracleBudget | None = None) -> list[SandwichCase]:
    """Sandwich checks on ``trials`` random qubit channels with two Kraus operators."""
    rng = np.random.default_rng(seed)
    cases = []
    for t in range(trials):
        c = ch.random_channel(2, 2, rng)
        cases.append(sandwich_channel(c, f"random-{t}", seed=seed + t, budget=budget))
    return cases
