"""Discord measures as minima of conditional entropies over local bases.

Each one-way measure minimises a function of the rank-one basis ``Z`` on A.
All objectives used here share one structure: for a bipartite operator ``R`` on
``X x Y`` and a unitary ``U`` whose columns ``u_a`` are the basis kets,

    sigma_a = <u_a| R |u_a>        (operators on Y)

and the objective is a sum of spectral functions of the ``sigma_a``.  Choosing
``R`` as ``rho_AB``, the purifier marginal ``rho_AC`` or ``rho_(AB)C`` gives the
pinched-state, missing-information and two-way forms.  Gradients with respect
to the unitary generator are exact (Daleckii-Krein for ``exp(iH)``), and the
min-entropy gradient comes from the optimal POVM by the envelope theorem.

Every value returned is the best local minimum found, hence an upper bound on
the true minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import entropies as en
from . import qmat
from .errors import NotBipartite
from .infotypes import InfoType, basis, infotype_to_json, product_basis
from .states import DensityOperator, _rng, as_density, decode_matrix, encode_matrix, purify, random_unitary

LN2 = math.log(2.0)
_GTOL = 1e-9
MEASURES = ("delta_arrow", "deficit", "geometric", "min_entropy", "eg",
            "complementarity_vn", "complementarity_quad", "complementarity_min",
            "two_way_vn", "two_way_min")


@dataclass(frozen=True)
class BasisOptimizerConfig:
    """Multistart settings for minimisation over orthonormal bases.

    The basis unitary is ``U0 exp(iH)`` with ``H`` built from ``d^2 - d`` real
    off-diagonal parameters and ``d - 1`` diagonal ones (see
    :func:`decolab.qmat.unitary_from_generator`).  Starts are the identity,
    the eigenbasis of the reduced state, any caller-provided seeds and
    ``restarts`` Haar-random unitaries.
    """

    restarts: int = 20
    max_iters: int = 2000
    tolerance: float = 1e-6
    seed: int | None = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class DiscordReport:
    measure: str
    value: float
    argmin_basis: InfoType
    optimizer_diag: dict = field(default_factory=dict)
    is_upper_bound: bool = True

    def to_dict(self) -> dict:
        from .theorems import _jsonable
        return {"measure": self.measure, "value": float(self.value),
                "basis": infotype_to_json(self.argmin_basis),
                "is_upper_bound": self.is_upper_bound,
                "diagnostics": _jsonable(self.optimizer_diag)}


# -- generator parametrisation -------------------------------------------------

_PATHS: dict = {}


def _ein(expr, *ops):
    """``np.einsum`` with the contraction path cached per shape signature."""
    key = (expr,) + tuple(o.shape for o in ops)
    path = _PATHS.get(key)
    if path is None:
        path = np.einsum_path(expr, *ops, optimize="greedy")[0]
        _PATHS[key] = path
    return np.einsum(expr, *ops, optimize=path)


@lru_cache(maxsize=None)
def _generators(d: int) -> np.ndarray:
    """Hermitian basis ``E_k`` with ``H(theta) = sum_k theta_k E_k``."""
    iu = np.triu_indices(d, 1)
    gens = []
    for i, j in zip(*iu):
        e = np.zeros((d, d), dtype=complex)
        e[i, j] = e[j, i] = 1.0
        gens.append(e)
    for i, j in zip(*iu):
        e = np.zeros((d, d), dtype=complex)
        e[i, j], e[j, i] = 1j, -1j
        gens.append(e)
    for i in range(d - 1):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        gens.append(e)
    out = np.array(gens).reshape(-1, d, d)
    out.flags.writeable = False
    return out


def _expi(theta: np.ndarray, d: int):
    h = np.tensordot(theta, _generators(d), axes=1) if d > 1 else np.zeros((1, 1), complex)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T, w, v


def _expi_grad(w: np.ndarray, v: np.ndarray, u0: np.ndarray, k: np.ndarray, d: int) -> np.ndarray:
    """Gradient of ``2 Re <dU, K>`` for ``U = U0 exp(iH(theta))``."""
    if d == 1:
        return np.zeros(0)
    ew = np.exp(1j * w)
    dw = w[:, None] - w[None, :]
    same = np.abs(dw) < 1e-12
    lmat = np.where(same, 1j * ew[:, None], (ew[:, None] - ew[None, :]) / np.where(same, 1.0, dw))
    gt = v.conj().T @ (u0.conj().T @ k) @ v
    et = np.einsum("ia,kab,bj->kij", v.conj().T, _generators(d), v)
    return 2.0 * np.real(np.einsum("kij,ij->k", np.conj(lmat * et), gt))


# -- block-form objectives ----------------------------------------------------

VN, QUAD, MIN = "vn", "quad", "min"


@dataclass(frozen=True, eq=False)
class BlockTerm:
    """``coeff * g(sigma_a)`` summed over outcomes, with ``sigma_a = <u_a|R|u_a>``.

    ``kind`` selects ``g``: ``vn`` gives ``sum_a S(sigma_a)`` (unnormalised von
    Neumann entropy), ``quad`` gives ``-sum_a Tr(sigma_a^2)`` and ``min`` gives
    ``-log2 p_guess({sigma_a})``.
    """

    r: np.ndarray  # (dX, dY, dX, dY)
    kind: str
    coeff: float = 1.0


def _sigmas(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``<u_a|R|u_a>`` for a stack of unitaries ``(S, dX, N)`` -> ``(S, N, dY, dY)``."""
    return _ein("sxa,xbyc,sya->sabc", u.conj(), r, u)


def _term_value_and_q(term: BlockTerm, sig: np.ndarray):
    """Values ``(S,)`` and derivative operators ``Q`` ``(S, N, dY, dY)``."""
    s, n, dy, _ = sig.shape
    if term.kind == VN:
        w, v = np.linalg.eigh(0.5 * (sig + np.conj(np.swapaxes(sig, -1, -2))))
        pos = w > qmat.EIG_CUTOFF
        wl = np.where(pos, w, 1.0)
        val = -np.sum(np.where(pos, wl * np.log2(wl), 0.0), axis=(-1, -2))
        g = np.where(pos, -(np.log2(wl) + 1.0 / LN2), 0.0)
        q = (v * g[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
        return val, q
    if term.kind == QUAD:
        return -np.sum(np.abs(sig) ** 2, axis=(1, 2, 3)), -2.0 * sig
    if term.kind == MIN:
        p, povm = _guess_with_povm(sig)
        p = np.maximum(p, 1e-300)
        return -np.log2(p), -povm / (p[:, None, None, None] * LN2)
    raise ValueError(f"unknown term kind {term.kind!r}")


def _guess_with_povm(sig: np.ndarray):
    s, n, d, _ = sig.shape
    if n == 1:
        return np.real(np.trace(sig[:, 0], axis1=-2, axis2=-1)), np.broadcast_to(np.eye(d), sig.shape).astype(complex)
    if n == 2:
        diff = sig[:, 0] - sig[:, 1]
        w, v = np.linalg.eigh(0.5 * (diff + np.conj(np.swapaxes(diff, -1, -2))))
        proj = (v * (w > 0)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
        povm = np.stack([proj, np.eye(d) - proj], axis=1)
        return en.helstrom_batch(sig[:, 0], sig[:, 1]), povm
    primal, _, x, _ = en.min_error_sdp(sig, 1e-10)
    return primal, x


@dataclass(frozen=True, eq=False)
class BlockObjective:
    terms: tuple
    constant: float = 0.0

    def evaluate(self, u: np.ndarray, grad: bool = True):
        """Values and gradients ``K = dF/d conj(U)`` for unitaries ``(S, dX, dX)``."""
        total = np.full(u.shape[0], self.constant)
        k = np.zeros_like(u) if grad else None
        for t in self.terms:
            sig = _sigmas(t.r, u)
            val, q = _term_value_and_q(t, sig)
            total = total + t.coeff * val
            if grad:
                k = k + t.coeff * _ein("xbyc,sya,sacb->sxa", t.r, u, q)
        return total, k

    def value(self, u: np.ndarray) -> float:
        return float(self.evaluate(u[None], grad=False)[0][0])


def _r_tensor(m: np.ndarray, dx: int, dy: int) -> np.ndarray:
    return np.asarray(m, dtype=complex).reshape(dx, dy, dx, dy)


# -- multistart descent -------------------------------------------------------

@dataclass
class _Run:
    value: float
    unitaries: tuple
    nit: int
    success: bool


def _descend_single(obj: BlockObjective, u0: np.ndarray, cfg: BasisOptimizerConfig) -> _Run:
    d = u0.shape[0]

    def fun(theta):
        e, w, v = _expi(theta, d)
        u = u0 @ e
        val, k = obj.evaluate(u[None])
        return float(val[0]), _expi_grad(w, v, u0, k[0], d)

    res = optimize.minimize(fun, np.zeros(d * d - 1), jac=True, method="BFGS",
                            options={"maxiter": cfg.max_iters, "gtol": _GTOL})
    u = u0 @ _expi(res.x, d)[0]
    return _Run(float(res.fun), (u,), int(res.nit), bool(res.success))


def _descend_product(obj: BlockObjective, ua0: np.ndarray, ub0: np.ndarray, cfg: BasisOptimizerConfig,
                     sweeps: int = 1) -> _Run:
    """Block-coordinate descent over ``U_A x U_B`` followed by a joint polish."""
    da, db = ua0.shape[0], ub0.shape[0]
    pa, pb = da * da - 1, db * db - 1

    def split_grad(k, ua, ub):
        k4 = k.reshape(da, db, da, db)
        ka = np.einsum("xyab,yb->xa", k4, ub.conj())
        kb = np.einsum("xyab,xa->yb", k4, ua.conj())
        return ka, kb

    def make(ua_base, ub_base, which):
        def fun(theta):
            ta = theta[:pa] if which in ("a", "ab") else np.zeros(pa)
            tb = theta[-pb:] if which in ("b", "ab") else np.zeros(pb)
            ea, wa, va = _expi(ta, da)
            eb, wb, vb = _expi(tb, db)
            ua, ub = ua_base @ ea, ub_base @ eb
            val, k = obj.evaluate(np.kron(ua, ub)[None])
            ka, kb = split_grad(k[0], ua, ub)
            parts = []
            if which in ("a", "ab"):
                parts.append(_expi_grad(wa, va, ua_base, ka, da))
            if which in ("b", "ab"):
                parts.append(_expi_grad(wb, vb, ub_base, kb, db))
            return float(val[0]), np.concatenate(parts)
        return fun

    ua, ub = ua0, ub0
    best = obj.value(np.kron(ua, ub))
    nit = 0
    opts = {"maxiter": cfg.max_iters, "gtol": _GTOL}
    for _ in range(sweeps):
        start = best
        res = optimize.minimize(make(ua, ub, "a"), np.zeros(pa), jac=True, method="BFGS", options=opts)
        ua = ua @ _expi(res.x, da)[0]
        nit += res.nit
        res = optimize.minimize(make(ua, ub, "b"), np.zeros(pb), jac=True, method="BFGS", options=opts)
        ub = ub @ _expi(res.x, db)[0]
        nit += res.nit
        best = float(res.fun)
        if start - best < cfg.tolerance * 1e-3:
            break
    res = optimize.minimize(make(ua, ub, "ab"), np.zeros(pa + pb), jac=True, method="BFGS", options=opts)
    ua, ub = ua @ _expi(res.x[:pa], da)[0], ub @ _expi(res.x[pa:], db)[0]
    return _Run(float(res.fun), (ua, ub), nit + int(res.nit), bool(res.success))


def _multistart(obj: BlockObjective | None, dims: tuple, cfg: BasisOptimizerConfig, seeds: Sequence = (),
                runner: Callable | None = None) -> tuple[_Run, dict]:
    rng = _rng(cfg.seed)
    starts = [tuple(np.eye(d, dtype=complex) for d in dims)]
    for s in seeds:
        starts.append(tuple(np.asarray(x, dtype=complex) for x in (s if isinstance(s, tuple) else (s,))))
    for _ in range(cfg.restarts):
        starts.append(tuple(random_unitary(d, rng) for d in dims))
    runs = []
    for st in starts:
        if runner is not None:
            runs.append(runner(*st))
        elif len(dims) == 1:
            runs.append(_descend_single(obj, st[0], cfg))
        else:
            runs.append(_descend_product(obj, st[0], st[1], cfg))
    values = np.array([r.value for r in runs])
    best = runs[int(np.argmin(values))]
    diag = {"starts": len(runs), "best_value": best.value,
            "hits_within_tolerance": int(np.sum(values <= best.value + cfg.tolerance)),
            "failed_runs": int(sum(not r.success for r in runs))}
    return best, diag


def min_over_bases(objective: Callable[[InfoType], float], d: int, cfg: BasisOptimizerConfig | None = None,
                   seeds: Sequence[np.ndarray] = (), subsystem: int = 0) -> tuple[float, InfoType, dict]:
    """Minimise an arbitrary function of a rank-one basis on ``d`` levels.

    The objective is treated as a black box; descent uses BFGS with
    finite-difference gradients in the generator coordinates.
    """
    cfg = cfg or BasisOptimizerConfig()
    rng = _rng(cfg.seed)
    starts = [np.eye(d, dtype=complex)] + [np.asarray(s, dtype=complex) for s in seeds]
    starts += [random_unitary(d, rng) for _ in range(cfg.restarts)]
    best_val, best_u, fails = np.inf, starts[0], 0
    for u0 in starts:
        def fun(theta, u0=u0):
            return float(objective(basis(u0 @ qmat.unitary_from_generator(theta, d), subsystem)))
        res = optimize.minimize(fun, np.zeros(d * d - 1), method="BFGS",
                                options={"maxiter": cfg.max_iters, "gtol": cfg.tolerance * 1e-3})
        fails += not res.success
        if res.fun < best_val:
            best_val, best_u = float(res.fun), u0 @ qmat.unitary_from_generator(res.x, d)
    return best_val, basis(best_u, subsystem), {"starts": len(starts), "failed_runs": fails}


# -- state preparation --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Prepared:
    rho: DensityOperator
    da: int
    db: int
    r_ab: np.ndarray
    r_ac: np.ndarray
    r_abc: np.ndarray
    r_ab_joint: np.ndarray
    r_a: np.ndarray
    rho_c: np.ndarray
    eig_a: np.ndarray
    eig_b: np.ndarray
    amp: np.ndarray


def _prepare(rho_ab) -> _Prepared:
    rho = as_density(rho_ab)
    if len(rho.dims) != 2:
        raise NotBipartite(f"expected a bipartite state, got dims {list(rho.dims)}")
    da, db = rho.dims
    psi = purify(rho)
    r = psi.dims[-1]
    amp = psi.amplitudes.reshape(da, db, r)
    rho_ac = np.einsum("xbc,ybd->xcyd", amp, amp.conj())
    rho_abc = np.einsum("xc,yd->xcyd", amp.reshape(da * db, r), amp.reshape(da * db, r).conj())
    rho_c = np.einsum("xbc,xbd->cd", amp, amp.conj())
    rho_a = rho.reduce([0]).matrix
    rho_b = rho.reduce([1]).matrix
    return _Prepared(rho, da, db, _r_tensor(rho.matrix, da, db), rho_ac, rho_abc,
                     _r_tensor(rho.matrix, da * db, 1), _r_tensor(rho_a, da, 1), rho_c,
                     np.linalg.eigh(rho_a)[1][:, ::-1], np.linalg.eigh(rho_b)[1][:, ::-1],
                     amp.reshape(da * db, r))


def _fidelity_product_run(prep: _Prepared, ua0: np.ndarray, ub0: np.ndarray, cfg: BasisOptimizerConfig) -> _Run:
    """Joint descent of ``-log2 max_c ||Psi^H (U_A x U_B) diag(c)||_1^2`` over bases and ``c``.

    ``Psi`` is the purification amplitude matrix, so for a rank-one basis on
    AB the expression equals ``H_min(Z x Z'|C)`` at the optimal unit vector ``c``.
    """
    da, db = prep.da, prep.db
    pa, pb = da * da - 1, db * db - 1
    s = prep.amp.conj().T

    def fun(params):
        ea, wa, va = _expi(params[:pa], da)
        eb, wb, vb = _expi(params[pa:pa + pb], db)
        x = params[pa + pb:]
        ua, ub = ua0 @ ea, ub0 @ eb
        su = s @ np.kron(ua, ub)
        p, sv, qh = np.linalg.svd(su * x[None, :], full_matrices=False)
        tn, nx2 = float(np.sum(sv)), float(x @ x)
        g = p @ qh
        val = -2.0 * math.log2(tn) + math.log2(nx2)
        k = -(s.conj().T @ g * x[None, :]) / (LN2 * tn)
        k4 = k.reshape(da, db, da, db)
        ka = np.einsum("xyab,yb->xa", k4, ub.conj())
        kb = np.einsum("xyab,xa->yb", k4, ua.conj())
        gx = -2.0 * np.real(np.sum(g.conj() * su, axis=0)) / (LN2 * tn) + 2.0 * x / (LN2 * nx2)
        return val, np.concatenate([_expi_grad(wa, va, ua0, ka, da), _expi_grad(wb, vb, ub0, kb, db), gx])

    x0 = np.concatenate([np.zeros(pa + pb), np.ones(da * db)])
    res = optimize.minimize(fun, x0, jac=True, method="BFGS", options={"maxiter": cfg.max_iters, "gtol": _GTOL})
    ua = ua0 @ _expi(res.x[:pa], da)[0]
    ub = ub0 @ _expi(res.x[pa:pa + pb], db)[0]
    return _Run(float(res.fun), (ua, ub), int(res.nit), bool(res.success))


def _one_way(prep: _Prepared, obj: BlockObjective, cfg, seeds) -> tuple[_Run, dict]:
    return _multistart(obj, (prep.da,), cfg, [prep.eig_a] + list(seeds))


def _polished_pair(prep, primary: BlockObjective, cross: BlockObjective, cfg, seeds):
    """Minimise two objectives that agree pointwise, each seeded by the other's argmin."""
    run1, diag1 = _one_way(prep, primary, cfg, seeds)
    light = BasisOptimizerConfig(max(1, cfg.restarts // 4), cfg.max_iters, cfg.tolerance,
                                 None if cfg.seed is None else cfg.seed + 1)
    run2, _ = _multistart(cross, (prep.da,), light, [run1.unitaries[0]])
    if run2.value < run1.value:
        again, _ = _multistart(primary, (prep.da,), BasisOptimizerConfig(1, cfg.max_iters, cfg.tolerance, cfg.seed),
                               [run2.unitaries[0]])
        if again.value < run1.value:
            run1 = again
    if run1.value < run2.value:
        again, _ = _multistart(cross, (prep.da,), BasisOptimizerConfig(1, cfg.max_iters, cfg.tolerance, cfg.seed),
                               [run1.unitaries[0]])
        if again.value < run2.value:
            run2 = again
    return run1, run2, diag1


# -- one-way measures ---------------------------------------------------------

def deficit(rho_ab, cfg: BasisOptimizerConfig | None = None, seeds: Sequence = ()) -> DiscordReport:
    """One-way information deficit ``min_Z [H(E_Z rho) - H(rho)]``.

    Cross-computed as ``min_Z H(Z|C)`` on a purification.
    """
    cfg = cfg or BasisOptimizerConfig()
    prep = _prepare(rho_ab)
    primary = BlockObjective((BlockTerm(prep.r_ab, VN),), -prep.rho.entropy())
    cross = BlockObjective((BlockTerm(prep.r_ac, VN),), -qmat.entropy(prep.rho_c))
    run1, run2, diag = _polished_pair(prep, primary, cross, cfg, seeds)
    diag.update(missing_information=run2.value, route_gap=abs(run1.value - run2.value))
    return DiscordReport("deficit", run1.value, basis(run1.unitaries[0]), diag)


def geometric(rho_ab, cfg: BasisOptimizerConfig | None = None, seeds: Sequence = ()) -> DiscordReport:
    """Geometric discord ``min_Z D_HS(rho, E_Z rho)``.

    Cross-computed as ``min_Z H_Q(Z|C)`` and through the off-diagonal block sum.
    """
    from .theorems import offdiagonal_sum
    cfg = cfg or BasisOptimizerConfig()
    prep = _prepare(rho_ab)
    primary = BlockObjective((BlockTerm(prep.r_ab, QUAD),), prep.rho.purity())
    cross = BlockObjective((BlockTerm(prep.r_ac, QUAD),), qmat.purity(prep.rho_c))
    run1, run2, diag = _polished_pair(prep, primary, cross, cfg, seeds)
    z = basis(run1.unitaries[0])
    off = offdiagonal_sum(prep.rho, z)
    diag.update(missing_quadratic=run2.value, offdiagonal_sum=off,
                route_gap=max(abs(run1.value - run2.value), abs(run1.value - off)))
    return DiscordReport("geometric", run1.value, z, diag)


def min_entropy_discord(rho_ab, cfg: BasisOptimizerConfig | None = None, seeds: Sequence = (),
                        fidelity_restarts: int = 4) -> DiscordReport:
    """``D_min = min_Z H_min(Z|C)`` with ``Delta_EG = 1 - 2^-D_min``.

    At the optimal basis the guessing probability is re-derived as the largest
    fidelity with a Z-decohered state; ``identity_gap`` compares the two.
    """
    cfg = cfg or BasisOptimizerConfig()
    prep = _prepare(rho_ab)
    obj = BlockObjective((BlockTerm(prep.r_ac, MIN),))
    run, diag = _one_way(prep, obj, cfg, seeds)
    z = basis(run.unitaries[0])
    sig = _sigmas(prep.r_ac, run.unitaries[0][None])[0]
    guess = en.p_guess(en.from_unnormalized(list(sig)))
    fid = en.max_pinched_fidelity(prep.rho, z, restarts=fidelity_restarts, seed=cfg.seed)
    d_min = -math.log2(guess.p_guess)
    eg = 1.0 - fid.value
    diag.update(eg=1.0 - 2.0 ** (-d_min), eg_fidelity_route=eg,
                identity_gap=abs(d_min + math.log2(max(1.0 - eg, 1e-300))),
                sdp_residual=guess.residual, converged=guess.converged)
    return DiscordReport("min_entropy", d_min, z, diag)


def eg_discord(rho_ab, cfg: BasisOptimizerConfig | None = None, seeds: Sequence = ()) -> DiscordReport:
    """Geometric-entanglement measure ``1 - max_Z p_guess(Z|C)``."""
    rep = min_entropy_discord(rho_ab, cfg, seeds)
    return DiscordReport("eg", rep.optimizer_diag["eg"], rep.argmin_basis, rep.optimizer_diag)


def original_discord(rho_ab, cfg: BasisOptimizerConfig | None = None, seeds: Sequence = ()) -> DiscordReport:
    """``min_Z [I(rho) - I(E_Z rho)]`` with ``I`` the mutual information."""
    cfg = cfg or BasisOptimizerConfig()
    prep = _prepare(rho_ab)
    h_a = qmat.entropy(prep.rho.reduce([0]).matrix)
    obj = BlockObjective((BlockTerm(prep.r_ab, VN), BlockTerm(prep.r_a, VN, -1.0)), h_a - prep.rho.entropy())
    run, diag = _one_way(prep, obj, cfg, seeds)
    return DiscordReport("delta_arrow", run.value, basis(run.unitaries[0]), diag)


# -- complementarity measures -------------------------------------------------

@dataclass(frozen=True, eq=False)
class _ClassAverage:
    """``<C_K(W|B)>`` over sampled members ``W = U_Z diag(e^{i phi}) F`` of the class of Z."""

    prep: _Prepared
    kind: str
    frames: np.ndarray  # (S, d, d): diag(e^{i phi_s}) F

    def evaluate(self, u: np.ndarray, grad: bool = True):
        d = self.prep.da
        ws = np.einsum("xa,sab->sxb", u[0], self.frames)
        term = BlockTerm(self.prep.r_ab, {en.VN: VN, en.QUAD: QUAD, en.MIN: MIN}[self.kind])
        sig = _sigmas(self.prep.r_ab, ws)
        val, q = _term_value_and_q(term, sig)
        rho_b = self.prep.rho.reduce([1]).matrix
        if self.kind == en.VN:
            cert = math.log2(d) - (val - qmat.entropy(rho_b))
            sign = -1.0
        elif self.kind == en.QUAD:
            cert = -d * val - qmat.purity(rho_b)
            sign = -float(d)
        else:
            cert = math.log2(d) - val
            sign = -1.0
        mean = np.array([cert.mean()])
        if not grad:
            return mean, None
        ks = sign * _ein("xbyc,sya,sacb->sxa", self.prep.r_ab, ws, q)
        k = np.einsum("sxa,sba->xb", ks, self.frames.conj()) / len(self.frames)
        return mean, k[None]

    def samples(self, u: np.ndarray) -> np.ndarray:
        ws = np.einsum("xa,sab->sxb", u, self.frames)
        out = []
        for w in ws:
            dec = en.from_unnormalized(list(_sigmas(self.prep.r_ab, w[None])[0]))
            out.append(en.certainty(self.kind, dec))
        return np.array(out)

    def value(self, u: np.ndarray) -> float:
        return float(self.evaluate(u[None], grad=False)[0][0])


def complementarity_discord(rho_ab, kind: str = en.VN, samples: int = 2000,
                            cfg: BasisOptimizerConfig | None = None, seeds: Sequence = ()) -> DiscordReport:
    """``min_Z <C_K(W|B)>`` over the Fourier class of each candidate ``Z``.

    One phase sample set is drawn up front and reused for every objective
    evaluation (common random numbers), which keeps the Monte Carlo objective
    smooth in ``Z``.
    """
    cfg = cfg or BasisOptimizerConfig()
    prep = _prepare(rho_ab)
    d = prep.da
    rng = _rng(None if cfg.seed is None else cfg.seed + 7919)
    phases = rng.uniform(0.0, 2 * np.pi, (samples, d))
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    fourier = np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
    frames = np.exp(1j * phases)[:, :, None] * fourier[None]
    obj = _ClassAverage(prep, kind, frames)
    run, diag = _one_way(prep, obj, cfg, seeds)
    z = basis(run.unitaries[0])
    ws = np.einsum("xa,sab->sxb", run.unitaries[0], frames)
    term = BlockTerm(prep.r_ab, {en.VN: VN, en.QUAD: QUAD, en.MIN: MIN}[kind])
    val, _ = _term_value_and_q(term, _sigmas(prep.r_ab, ws))
    rho_b = prep.rho.reduce([1]).matrix
    if kind == en.VN:
        per = math.log2(d) - (val - qmat.entropy(rho_b))
    elif kind == en.QUAD:
        per = -d * val - qmat.purity(rho_b)
    else:
        per = math.log2(d) - val
    se = float(per.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    diag.update(samples=samples, std_error=se)
    return DiscordReport(f"complementarity_{kind}", run.value, z, diag)


# -- two-way measures ---------------------------------------------------------

def two_way_discord(rho_ab, kind: str = en.VN, cfg: BasisOptimizerConfig | None = None,
                    seeds: Sequence = ()) -> DiscordReport:
    """``min_{Z x Z'} H_K(Z x Z'|C)`` over product bases on A and B.

    For ``kind='vn'`` the minimum is cross-computed as the relative entropy to
    the doubly pinched state.  ``seeds`` are ``(U_A, U_B)`` pairs.
    """
    cfg = cfg or BasisOptimizerConfig()
    prep = _prepare(rho_ab)
    dims = (prep.da, prep.db)
    start = [(prep.eig_a, prep.eig_b)] + [tuple(s) for s in seeds]
    if kind == en.VN:
        obj = BlockObjective((BlockTerm(prep.r_abc, VN),), -qmat.entropy(prep.rho_c))
        run, diag = _multistart(obj, dims, cfg, start)
        cross = BlockObjective((BlockTerm(prep.r_ab_joint, VN),), -prep.rho.entropy())
        light = BasisOptimizerConfig(max(1, cfg.restarts // 4), cfg.max_iters, cfg.tolerance,
                                     None if cfg.seed is None else cfg.seed + 1)
        run2, _ = _multistart(cross, dims, light, [run.unitaries])
        if run2.value < run.value:
            again, _ = _multistart(obj, dims, BasisOptimizerConfig(1, cfg.max_iters, cfg.tolerance, cfg.seed),
                                   [run2.unitaries])
            run = again if again.value < run.value else run
        diag.update(relative_entropy_route=run2.value, route_gap=abs(run.value - run2.value))
    elif kind == en.MIN:
        run, diag = _multistart(None, dims, cfg, start,
                                runner=lambda ua, ub: _fidelity_product_run(prep, ua, ub, cfg))
        fid = run.value
        run = _Run(BlockObjective((BlockTerm(prep.r_abc, MIN),)).value(np.kron(*run.unitaries)),
                   run.unitaries, run.nit, run.success)
        diag.update(fidelity_route=fid, route_gap=abs(fid - run.value))
    else:
        raise ValueError(f"two-way discord supports kinds 'vn' and 'min', not {kind!r}")
    za, zb = basis(run.unitaries[0]), basis(run.unitaries[1])
    diag.update(basis_a=encode_matrix(run.unitaries[0]), basis_b=encode_matrix(run.unitaries[1]))
    return DiscordReport(f"two_way_{kind}", run.value, product_basis(za, zb), diag)


def measure(rho_ab, name: str, cfg: BasisOptimizerConfig | None = None, samples: int = 2000) -> DiscordReport:
    """Dispatch on a measure id from :data:`MEASURES`."""
    if name == "deficit":
        return deficit(rho_ab, cfg)
    if name == "geometric":
        return geometric(rho_ab, cfg)
    if name == "min_entropy":
        return min_entropy_discord(rho_ab, cfg)
    if name == "eg":
        return eg_discord(rho_ab, cfg)
    if name == "delta_arrow":
        return original_discord(rho_ab, cfg)
    if name.startswith("complementarity_"):
        return complementarity_discord(rho_ab, name.split("_", 1)[1], samples, cfg)
    if name.startswith("two_way_"):
        return two_way_discord(rho_ab, name.split("_", 2)[2], cfg)
    raise ValueError(f"unknown measure {name!r}; choose from {', '.join(MEASURES)}")


def discord_profile(rho_ab, cfg: BasisOptimizerConfig | None = None,
                    names: Sequence[str] = ("two_way_vn", "two_way_min", "deficit", "delta_arrow",
                                            "geometric", "min_entropy")) -> dict[str, DiscordReport]:
    """Several measures on one state, each one-way search seeded by a related argmin.

    The seeding makes the pointwise orderings carry over to the reported minima:
    the deficit starts from the A part of the two-way relative-entropy argmin,
    the original discord and geometric discord from the deficit argmin, and
    the min-entropy discord from the A part of the two-way min-entropy argmin.
    """
    cfg = cfg or BasisOptimizerConfig()
    unknown = [n for n in names if n not in MEASURES]
    if unknown:
        raise ValueError(f"unknown measures {unknown}; choose from {', '.join(MEASURES)}")
    out: dict[str, DiscordReport] = {}

    def a_part(name):
        rep = out.get(name)
        if rep is None or "basis_a" not in rep.optimizer_diag:
            return []
        return [decode_matrix(rep.optimizer_diag["basis_a"])]

    def argmin(name):
        rep = out.get(name)
        return [] if rep is None else [rep.argmin_basis.vectors()]

    order = [n for n in ("two_way_vn", "two_way_min") if n in names]
    for n in order:
        out[n] = two_way_discord(rho_ab, n.rsplit("_", 1)[1], cfg)
    if "deficit" in names:
        out["deficit"] = deficit(rho_ab, cfg, a_part("two_way_vn"))
    if "delta_arrow" in names:
        out["delta_arrow"] = original_discord(rho_ab, cfg, argmin("deficit"))
    if "geometric" in names:
        out["geometric"] = geometric(rho_ab, cfg, argmin("deficit"))
    if "min_entropy" in names or "eg" in names:
        rep = min_entropy_discord(rho_ab, cfg, a_part("two_way_min"))
        if "min_entropy" in names:
            out["min_entropy"] = rep
        if "eg" in names:
            out["eg"] = DiscordReport("eg", rep.optimizer_diag["eg"], rep.argmin_basis, rep.optimizer_diag)
    for n in names:
        if n not in out:
            out[n] = measure(rho_ab, n, cfg)
    return {n: out[n] for n in names}
