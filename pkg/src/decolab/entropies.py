"""Conditional entropies of Z given a quantum system, and guessing probability.

For a state ``rho`` and an InfoType ``Z`` on factor A, measuring Z and
keeping a conditioning system C leaves the classical-quantum state
``sum_j p_j |j><j| x rho_{C,j}``.  This module decomposes that state and
evaluates the von Neumann, quadratic and min-entropy versions of H(Z|C)
together with their certainty counterparts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from . import qmat
from .errors import DimMismatch, InconsistentMarginal
from .infotypes import InfoType, _check_target, coherent_isometry, pinch_matrix
from .states import _rng, as_density

P_CUTOFF = 1e-12
SDP_TOL = 1e-7
SDP_MAX_ITER = 500
VN, QUAD, MIN = "vn", "quad", "min"


@dataclass(frozen=True, eq=False)
class CqDecomposition:
    """Outcome probabilities and conditional states of a measured CQ state.

    ``cond_states[j]`` is ``None`` for outcomes with ``p_j <= 1e-12``; those
    outcomes contribute nothing to any entropy sum.
    """

    probs: np.ndarray
    cond_states: tuple
    unnormalized: tuple

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def support(self) -> np.ndarray:
        return self.probs > P_CUTOFF

    @property
    def rho_c(self) -> np.ndarray:
        return sum(self.unnormalized)

    @property
    def dim_c(self) -> int:
        return self.unnormalized[0].shape[0]


def from_unnormalized(sigmas: Sequence[np.ndarray]) -> CqDecomposition:
    sigmas = tuple(qmat.hermitize(np.atleast_2d(np.asarray(s, dtype=complex))) for s in sigmas)
    probs = np.array([max(float(np.real(np.trace(s))), 0.0) for s in sigmas])
    conds = tuple(s / p if p > P_CUTOFF else None for s, p in zip(sigmas, probs))
    return CqDecomposition(probs, conds, sigmas)


def cq_decompose(rho, z: InfoType, condition_on: int | Sequence[int] = ()) -> CqDecomposition:
    """Measure ``z`` on its factor of ``rho`` and keep the factors in ``condition_on``.

    ``condition_on`` may be a factor index or a sequence of indices; an empty
    sequence conditions on a trivial system (the conditional states are 1x1).
    """
    rho = as_density(rho)
    _check_target(rho, z)
    keep = [condition_on] if isinstance(condition_on, (int, np.integer)) else list(condition_on)
    if z.subsystem in keep:
        raise DimMismatch("cannot condition on the measured factor")
    if any(not 0 <= k < len(rho.dims) for k in keep):
        raise DimMismatch(f"conditioning factors {keep} out of range for dims {list(rho.dims)}")
    sigmas = []
    for p in z.projectors:
        # Tr_{not C}[(Z_j x I) rho]: the measured factor is traced, so sandwiching is equivalent
        m = qmat.local_sandwich(rho.matrix, p, p, rho.dims, z.subsystem)
        if keep:
            sigmas.append(qmat.partial_trace(m, rho.dims, keep))
        else:
            sigmas.append(np.array([[np.trace(m)]]))
    return from_unnormalized(sigmas)


def cond_entropy_vn(decomp: CqDecomposition) -> float:
    """``H(Z|C) = H(p) + sum_j p_j H(rho_{C,j}) - H(rho_C)``."""
    h = qmat.shannon(decomp.probs)
    for p, c in zip(decomp.probs, decomp.cond_states):
        if c is not None:
            h += p * qmat.entropy(c)
    return h - qmat.entropy(decomp.rho_c)


def _marginal(decomp: CqDecomposition, rho_c) -> np.ndarray:
    total = decomp.rho_c
    if rho_c is None:
        return total
    rho_c = np.asarray(getattr(rho_c, "matrix", rho_c), dtype=complex)
    if rho_c.shape != total.shape or np.max(np.abs(rho_c - total)) > 1e-8:
        raise InconsistentMarginal("rho_C does not equal the sum of the unnormalised conditional states")
    return rho_c


def cond_entropy_quad(decomp: CqDecomposition, rho_c=None) -> float:
    """``H_Q(Z|C) = Tr(rho_C^2) - sum_j Tr(sigma_{C,j}^2)``."""
    rc = _marginal(decomp, rho_c)
    return qmat.purity(rc) - sum(qmat.purity(s) for s in decomp.unnormalized)


def cond_entropy_quad_pairwise(decomp: CqDecomposition) -> float:
    """Same quantity as ``cond_entropy_quad`` via ``sum_{j != k} Tr(sigma_j sigma_k)``."""
    s = decomp.unnormalized
    total = 0.0
    for j in range(len(s)):
        for k in range(len(s)):
            if j != k:
                total += float(np.real(np.vdot(s[j], s[k])))
    return total


@dataclass(frozen=True, eq=False)
class GuessResult:
    p_guess: float
    povm: tuple
    residual: float
    dual_gap: float | None = None
    converged: bool = True
    iterations: int = 0
    method: str = ""

    @property
    def h_min(self) -> float:
        return -float(np.log2(self.p_guess))


def _dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _herm(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + _dagger(m))


def helstrom_batch(s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """``(Tr(s0 + s1) + ||s0 - s1||_1) / 2`` for stacks of unnormalised states."""
    w = np.linalg.eigvalsh(_herm(s0 - s1))
    tr = np.real(np.trace(s0 + s1, axis1=-2, axis2=-1))
    return 0.5 * (tr + np.sum(np.abs(w), axis=-1))


def _helstrom(s0: np.ndarray, s1: np.ndarray) -> GuessResult:
    w, v = np.linalg.eigh(qmat.hermitize(s0 - s1))
    pos = v[:, w > 0]
    q0 = pos @ pos.conj().T
    q1 = np.eye(len(w)) - q0
    p = float(helstrom_batch(s0, s1))
    return GuessResult(min(p, 1.0), (q0, q1), 0.0, 0.0, True, 0, "helstrom")


def _step_and_pd(x: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Per-problem largest step ``a <= 1`` keeping ``x + a dx`` positive definite.

    ``x`` and ``dx`` have shape ``(B, n, d, d)``; returns ``(B,)`` with 0 where
    ``x`` itself has left the cone.
    """
    w, v = np.linalg.eigh(x)
    ok = np.all(w > 0, axis=(-1, -2))
    inv_half = (v / np.sqrt(np.where(w > 0, w, 1.0))[..., None, :]) @ _dagger(v)
    lmin = np.min(np.linalg.eigvalsh(_herm(inv_half @ dx @ inv_half)), axis=(-1, -2))
    step = np.where(lmin >= 0, 1.0, -1.0 / np.minimum(lmin, -1e-300))
    return np.where(ok, np.minimum(step, 1.0), 0.0)


def _kkt_direction(x, s, si, target):
    """HKM search direction for the feasible min-error SDP, batched over problems."""
    b, n, d, _ = x.shape
    sit = np.swapaxes(si, -1, -2)
    xt = np.swapaxes(x, -1, -2)
    kmat = 0.5 * (np.einsum("zjab,zjcd->zacbd", x, sit) + np.einsum("zjab,zjcd->zacbd", si, xt))
    rhs = (target[:, None, None, None] * si - x).sum(axis=1)
    dy = np.linalg.solve(kmat.reshape(b, d * d, d * d), rhs.reshape(b, d * d, 1)).reshape(b, d, d)
    dy = _herm(dy)
    sym = x @ dy[:, None] @ si
    dx = _herm(target[:, None, None, None] * si - x - 0.5 * (sym + _dagger(sym)))
    return dx, dy


def min_error_sdp(sigmas: np.ndarray, tol: float = 1e-10, max_iter: int = SDP_MAX_ITER):
    """Batched feasible primal-dual interior-point method (HKM direction).

    Solves ``max sum_j Tr(Q_j s_j)`` over POVMs and its dual ``min Tr Y``,
    ``Y >= s_j``, for every problem in ``sigmas`` of shape ``(B, n, d, d)``.

    Returns:
        ``(primal, dual, povms, iterations)``: primal values at feasible POVMs,
        certified dual bounds, the POVMs ``(B, n, d, d)`` and the number of
        iterations used.
    """
    sigmas = _herm(np.asarray(sigmas, dtype=complex))
    b, n, d, _ = sigmas.shape
    eye = np.eye(d)
    x = np.broadcast_to(eye / n, (b, n, d, d)).astype(complex)
    lmax = np.maximum(np.max(np.linalg.eigvalsh(sigmas), axis=(-1, -2)), 0.0)
    y = ((lmax + 1.0)[:, None, None] * eye).astype(complex)
    active = np.ones(b, dtype=bool)
    # late iterations can lose accuracy on degenerate problems; keep the best feasible pair
    best_x, best_y, best_gap = x.copy(), y.copy(), np.full(b, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, ya, sg = x[idx], y[idx], sigmas[idx]
        sa = ya[:, None] - sg
        gap = np.real(np.einsum("zjab,zjba->z", xa, sa))
        better = gap < best_gap[idx]
        best_x[idx[better]], best_y[idx[better]], best_gap[idx[better]] = xa[better], ya[better], gap[better]
        done = gap <= tol
        try:
            si = np.linalg.inv(sa)
            mu = gap / (n * d)
            dx, dy = _kkt_direction(xa, sa, si, np.zeros(idx.size))
            dyb = np.broadcast_to(dy[:, None], sa.shape)
            ap, ad = _step_and_pd(xa, dx), _step_and_pd(sa, dyb)
            gap_aff = np.real(np.einsum("zjab,zjba->z", xa + ap[:, None, None, None] * dx,
                                        sa + ad[:, None, None, None] * dyb))
            sigma = np.minimum(1.0, np.maximum(gap_aff, 0.0) / np.maximum(gap, 1e-300)) ** 3
            dx, dy = _kkt_direction(xa, sa, si, sigma * mu)
            dyb = np.broadcast_to(dy[:, None], sa.shape)
            ap = 0.95 * _step_and_pd(xa, dx)
            ad = 0.95 * _step_and_pd(sa, dyb)
        except np.linalg.LinAlgError:
            active[idx] = False
            break
        x_new = xa + ap[:, None, None, None] * dx
        # keep sum_j Q_j = I exact against rounding drift
        x_new = x_new + (eye - x_new.sum(axis=1))[:, None] / n
        y_new = ya + ad[:, None, None] * dy
        ok = (np.min(np.linalg.eigvalsh(x_new), axis=(-1, -2)) > 0) & \
             (np.min(np.linalg.eigvalsh(y_new[:, None] - sg), axis=(-1, -2)) > 0) & ~done
        x[idx[ok]] = x_new[ok]
        y[idx[ok]] = y_new[ok]
        active[idx[~ok]] = False
    final_gap = np.real(np.einsum("zjab,zjba->z", x, y[:, None] - sigmas))
    keep = final_gap < best_gap
    best_x[keep], best_y[keep] = x[keep], y[keep]
    x, y = best_x, best_y
    primal = np.real(np.einsum("zjab,zjba->z", x, sigmas))
    shift = np.maximum(np.max(np.linalg.eigvalsh(sigmas - y[:, None]), axis=(-1, -2)), 0.0)
    dual = np.real(np.trace(y, axis1=-2, axis2=-1)) + d * shift
    return primal, dual, x, it


def guess_batch(sigmas: np.ndarray, tol: float = SDP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Guessing probabilities and certified residuals for stacks ``(B, n, d, d)``."""
    sigmas = np.asarray(sigmas, dtype=complex)
    b, n, d, _ = sigmas.shape
    if n == 1:
        return np.real(np.trace(sigmas[:, 0], axis1=-2, axis2=-1)), np.zeros(b)
    if d == 1:
        return np.max(np.real(sigmas[:, :, 0, 0]), axis=1), np.zeros(b)
    if n == 2:
        return helstrom_batch(sigmas[:, 0], sigmas[:, 1]), np.zeros(b)
    primal, dual, _, _ = min_error_sdp(sigmas, tol * 1e-3)
    return primal, np.maximum(dual - primal, 0.0)


def p_guess(decomp: CqDecomposition, tol: float = SDP_TOL, max_iter: int = SDP_MAX_ITER) -> GuessResult:
    """Optimal probability of guessing Z from the conditioning system.

    Two outcomes use the Helstrom closed form.  More outcomes are solved as a
    semidefinite program; ``residual`` is the certified duality gap (dual
    objective minus primal value).  If the gap target is missed the best
    primal value is returned with ``converged=False`` and a warning.
    """
    sig = [np.asarray(s, dtype=complex) for s in decomp.unnormalized]
    d = sig[0].shape[0]
    active = [j for j in range(len(sig)) if decomp.probs[j] > P_CUTOFF]
    zero = np.zeros((d, d), dtype=complex)
    if len(active) <= 1:
        povm = [zero.copy() for _ in sig]
        povm[active[0] if active else 0] = np.eye(d, dtype=complex)
        return GuessResult(1.0, tuple(povm), 0.0, 0.0, True, 0, "trivial")
    if d == 1:
        j = int(np.argmax(decomp.probs))
        povm = [zero.copy() for _ in sig]
        povm[j] = np.eye(1, dtype=complex)
        return GuessResult(float(decomp.probs[j]), tuple(povm), 0.0, 0.0, True, 0, "classical")
    if len(active) == 2:
        r = _helstrom(sig[active[0]], sig[active[1]])
        povm = [zero.copy() for _ in sig]
        povm[active[0]], povm[active[1]] = r.povm
        return GuessResult(r.p_guess, tuple(povm), 0.0, 0.0, True, 0, "helstrom")
    stack = np.stack([sig[j] for j in active])[None]
    primal, dual, x, it = min_error_sdp(stack, tol * 1e-3, max_iter)
    residual = max(float(dual[0] - primal[0]), 0.0)
    povm = [zero.copy() for _ in sig]
    for k, j in enumerate(active):
        povm[j] = qmat.hermitize(x[0, k])
    converged = residual <= tol
    if not converged:
        warnings.warn(f"guessing-probability SDP stopped with gap {residual:.2e} > {tol:.1e}", RuntimeWarning)
    return GuessResult(min(float(primal[0]), 1.0), tuple(povm), residual, residual, converged, it, "ipm")


def h_min(decomp: CqDecomposition) -> float:
    return p_guess(decomp).h_min


def certainty(kind: str, decomp: CqDecomposition, rho_c=None) -> float:
    """Certainty counterpart of the chosen conditional entropy.

    ``vn``: log2 N - H(Z|C); ``quad``: (N-1) Tr(rho_C^2) - N H_Q(Z|C);
    ``min``: log2 N - H_min(Z|C).
    """
    n = decomp.n
    if kind == VN:
        return float(np.log2(n)) - cond_entropy_vn(decomp)
    if kind == QUAD:
        rc = _marginal(decomp, rho_c)
        return (n - 1) * qmat.purity(rc) - n * cond_entropy_quad(decomp, rc)
    if kind == MIN:
        return float(np.log2(n)) - h_min(decomp)
    raise ValueError(f"unknown entropy kind {kind!r}")


def certainty_quad_from_purity(decomp: CqDecomposition) -> float:
    """``C_Q = N Tr(rho_MC^2) - Tr(rho_C^2)``."""
    return decomp.n * sum(qmat.purity(s) for s in decomp.unnormalized) - qmat.purity(decomp.rho_c)


def certainty_quad_pairwise(decomp: CqDecomposition) -> float:
    """``C_Q = sum_{j<k} D_HS(sigma_j, sigma_k)``."""
    s = decomp.unnormalized
    return sum(qmat.hilbert_schmidt(s[j], s[k]) for j in range(len(s)) for k in range(j + 1, len(s)))


def conditional_entropy(kind: str, decomp: CqDecomposition) -> float:
    if kind == VN:
        return cond_entropy_vn(decomp)
    if kind == QUAD:
        return cond_entropy_quad(decomp)
    if kind == MIN:
        return h_min(decomp)
    raise ValueError(f"unknown entropy kind {kind!r}")


# -- fidelity to the nearest Z-decohered state ------------------------------

@dataclass(frozen=True, eq=False)
class FidelityAscent:
    value: float
    sigma: np.ndarray
    restarts: int
    evaluations: int
    spread: float = field(default=0.0)


def _pinched_fidelity_objective(a: np.ndarray, pinch, d: int, lift: np.ndarray | None):
    """Negative root fidelity and gradient in the real coordinates of ``L``."""

    def fun(theta):
        lm = (theta[:d * d] + 1j * theta[d * d:]).reshape(d, d)
        s = lm @ lm.conj().T
        t = float(np.real(np.trace(s)))
        tau = pinch(s) / t
        target = tau if lift is None else lift @ tau @ lift.conj().T
        m = qmat.hermitize(a @ target @ a)
        w, v = np.linalg.eigh(m)
        pos = w > 1e-14 * max(w[-1], 1e-300)
        root = float(np.sum(np.sqrt(w[pos])))
        inv_half = (v[:, pos] / np.sqrt(w[pos])) @ v[:, pos].conj().T
        g = 0.5 * a @ inv_half @ a
        if lift is not None:
            g = lift.conj().T @ g @ lift
        h = (pinch(g) - float(np.real(np.vdot(g, tau))) * np.eye(d)) / t
        hl = 2.0 * (h @ lm)
        grad = np.concatenate([hl.real.ravel(), hl.imag.ravel()])
        return -root, -grad

    return fun


def max_pinched_fidelity(rho, z: InfoType, restarts: int = 10, seed=0, tol: float = 1e-12,
                         lifted: bool = False) -> FidelityAscent:
    """``max_sigma F(rho, E_Z(sigma))`` by quasi-Newton ascent with restarts.

    ``sigma`` is parametrised as ``L L^H / Tr(L L^H)`` with ``L`` a complex square
    matrix.  The first start is ``L = sqrt(E_Z(rho))``; the remaining starts are
    Ginibre draws.  Restarts stop early once two runs agree to 1e-10.

    With ``lifted=True`` the fidelity is evaluated between ``V_Z rho V_Z^H`` and
    ``V_Z E_Z(sigma) V_Z^H`` on the register-extended space instead.
    """
    rho = as_density(rho)
    _check_target(rho, z)
    d = rho.dim
    lift = coherent_isometry(rho.dims, z) if lifted else None
    base = rho.matrix if lift is None else lift @ rho.matrix @ lift.conj().T
    a = qmat.sqrtm_psd(base)

    def pinch(m):
        return pinch_matrix(m, rho.dims, z)

    fun = _pinched_fidelity_objective(a, pinch, d, lift)
    rng = _rng(seed)
    best, best_tau, values, evals = -np.inf, None, [], 0
    runs = 0
    for r in range(max(1, restarts)):
        if r == 0:
            l0 = qmat.sqrtm_psd(pinch(rho.matrix)) + 1e-3 * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        else:
            l0 = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        x0 = np.concatenate([l0.real.ravel(), l0.imag.ravel()])
        res = optimize.minimize(fun, x0, jac=True, method="L-BFGS-B",
                                options={"maxiter": 5000, "ftol": tol, "gtol": 1e-11, "maxcor": 30})
        runs += 1
        evals += int(res.nfev)
        val = -float(res.fun)
        values.append(val)
        if val > best:
            lm = (res.x[:d * d] + 1j * res.x[d * d:]).reshape(d, d)
            s = lm @ lm.conj().T
            best, best_tau = val, pinch(s) / np.real(np.trace(s))
        if len(values) >= 2 and sum(abs(v - best) < 1e-10 for v in values) >= 2:
            break
    spread = float(best - min(values))
    return FidelityAscent(best ** 2, best_tau, runs, evals, spread)
