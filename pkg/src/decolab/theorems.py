"""Numerical verification of the decoherence identities.

Every check takes a pure tripartite state ``rho_ABC`` (factors ordered A, B, C;
use a factor of dimension 1 for a trivial system) and an InfoType on A, and
returns :class:`VerificationReport` objects comparing two independently
computed sides of an identity or inequality.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import entropies as en
from . import qmat
from .errors import DimMismatch, NotPure, NotRankOne
from .infotypes import (InfoType, basis, class_unitaries, coarse_grain, fourier_mu_basis,
                        measure_coherently, pinch, pinch_matrix, sample_equivalence_class)
from .states import DensityOperator, _rng, as_density, purify, random_state, random_unitary

PURITY_TOL = 1e-9


@dataclass
class VerificationReport:
    """Outcome of one identity or inequality check.

    For equalities ``abs_gap = |lhs - rhs|``.  For inequalities ``lhs >= rhs``
    the gap is the size of the violation, ``max(0, rhs - lhs)``.
    """

    claim: str
    lhs: float
    rhs: float
    abs_gap: float
    tolerance: float
    passed: bool = field(init=False)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs, self.rhs, self.abs_gap = float(self.lhs), float(self.rhs), float(self.abs_gap)
        self.passed = bool(self.abs_gap <= self.tolerance)

    def to_dict(self) -> dict:
        return {"claim": self.claim, "lhs": self.lhs, "rhs": self.rhs, "gap": self.abs_gap,
                "tolerance": self.tolerance, "passed": self.passed,
                "diagnostics": _jsonable(self.diagnostics)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def equality(claim, lhs, rhs, tol, **diag) -> VerificationReport:
    return VerificationReport(claim, lhs, rhs, abs(lhs - rhs), tol, diagnostics=diag)


def inequality(claim, lhs, rhs, slack, **diag) -> VerificationReport:
    """Report for ``lhs >= rhs - slack``."""
    return VerificationReport(claim, lhs, rhs, max(0.0, rhs - lhs), slack, diagnostics=diag)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


# -- input handling ----------------------------------------------------------

def require_pure_tripartite(rho) -> DensityOperator:
    rho = as_density(rho)
    if len(rho.dims) != 3:
        raise DimMismatch(f"expected factors (A, B, C), got dims {list(rho.dims)}")
    top = float(np.linalg.eigvalsh(rho.matrix)[-1])
    if top < 1 - PURITY_TOL:
        raise NotPure(f"largest eigenvalue {top:.12f} is below 1 - {PURITY_TOL:g}")
    return rho


def tripartite_from(rho_ab) -> DensityOperator:
    """Purify a bipartite ``rho_AB`` into a pure ``rho_ABC``."""
    return purify(as_density(rho_ab)).density()


def random_pure_tripartite(dims: Sequence[int], seed=None) -> DensityOperator:
    return random_state("haar_pure", tuple(dims), seed=seed)


def decohered_tripartite(dims: Sequence[int], z: InfoType, seed=None) -> DensityOperator:
    """Random ``rho_AB`` pinched by ``z`` and purified again (Z-classical by construction)."""
    rho_ab = random_pure_tripartite(dims, seed).reduce([0, 1])
    return purify(pinch(rho_ab, z)).density()


def random_basis(d: int, seed=None, subsystem: int = 0) -> InfoType:
    return basis(random_unitary(d, seed=seed), subsystem)


def random_coarse(d: int, seed=None) -> InfoType:
    """Random basis on ``d`` levels merged into ``max(1, d - 1)`` groups.

    A qubit has no nontrivial coarse-graining, so ``d = 2`` yields ``{I}``.
    """
    rng = _rng(seed)
    z = random_basis(d, rng)
    if d <= 2:
        return coarse_grain(z, [list(range(d))])
    perm = [int(i) for i in rng.permutation(d)]
    return coarse_grain(z, [perm[:2]] + [[i] for i in perm[2:]])


# -- Theorem 1 ----------------------------------------------------------------

def offdiagonal_sum(rho_ab: DensityOperator, z: InfoType) -> float:
    """``sum_{j != k} ||Z_j rho Z_k||^2`` in the Hilbert-Schmidt norm."""
    total = 0.0
    for j, pj in enumerate(z.projectors):
        left = qmat.local_sandwich(rho_ab.matrix, pj, np.eye(z.dim), rho_ab.dims, z.subsystem)
        for k, pk in enumerate(z.projectors):
            if j != k:
                total += qmat.hs_norm_sq(qmat.local_sandwich(left, np.eye(z.dim), pk, rho_ab.dims, z.subsystem))
    return total


def verify_thm1(rho_abc, z: InfoType, *, restarts: int = 10, seed=0) -> list[VerificationReport]:
    """Distance to the Z-decohered state equals Z information missing from C.

    Checks ``H(Z|C) = D(rho_AB || E_Z rho_AB)`` (tol 1e-8),
    ``H_Q(Z|C) = D_HS(rho_AB, E_Z rho_AB) = sum ||Z_j rho Z_k||^2`` (tol 1e-9) and
    ``p_guess(Z|C) = max_sigma F(rho_AB, E_Z sigma)`` (tol 1e-5).
    """
    rho = require_pure_tripartite(rho_abc)
    rho_ab = rho.reduce([0, 1])
    pinched = pinch(rho_ab, z)
    dec = en.cq_decompose(rho, z, 2)

    h = en.cond_entropy_vn(dec)
    d_rel = qmat.relative_entropy(rho_ab.matrix, pinched.matrix)
    r1 = equality("thm1.vn", h, d_rel, 1e-8)

    hq = en.cond_entropy_quad(dec)
    d_hs = qmat.hilbert_schmidt(rho_ab.matrix, pinched.matrix)
    off = offdiagonal_sum(rho_ab, z)
    r2 = VerificationReport("thm1.quad", hq, d_hs, max(abs(hq - d_hs), abs(hq - off)), 1e-9,
                            diagnostics={"offdiagonal_sum": off})

    guess = en.p_guess(dec)
    fid = en.max_pinched_fidelity(rho_ab, z, restarts=restarts, seed=seed)
    r3 = equality("thm1.min", guess.p_guess, fid.value, 1e-5,
                  sdp_residual=guess.residual, sdp_converged=guess.converged, sdp_method=guess.method,
                  fidelity_restarts=fid.restarts, h_min=guess.h_min)
    return [r1, r2, r3]


# -- Theorem 2 ----------------------------------------------------------------

def verify_thm2(rho_abc, z: InfoType, *, restarts: int = 10, seed=0) -> list[VerificationReport]:
    """Entanglement created by a coherent Z measurement.

    (i) ``H(Z|C) = -H(M_Z|AB)`` and the separable bound
    ``D(V rho_AB V^H || V E_Z(rho_AB) V^H)`` closes the chain (tol 1e-8);
    (ii) geometric entanglement ``1 - max F(V rho V^H, V E_Z(sigma) V^H)``
    equals ``1 - p_guess(Z|C)`` (tol 1e-5).
    """
    rho = require_pure_tripartite(rho_abc)
    rho_ab = rho.reduce([0, 1])
    dec = en.cq_decompose(rho, z, 2)
    h = en.cond_entropy_vn(dec)

    lifted = measure_coherently(rho_ab, z)
    neg_cond = qmat.entropy(lifted.reduce([1, 2]).matrix) - qmat.entropy(lifted.matrix)
    sep = measure_coherently(pinch(rho_ab, z), z)
    bound = qmat.relative_entropy(lifted.matrix, sep.matrix)
    r1 = VerificationReport("thm2.distillable", h, neg_cond, max(abs(h - neg_cond), abs(h - bound)), 1e-8,
                            diagnostics={"separable_bound": bound})

    guess = en.p_guess(dec)
    fid = en.max_pinched_fidelity(rho_ab, z, restarts=restarts, seed=seed, lifted=True)
    r2 = equality("thm2.geometric", 1.0 - fid.value, 1.0 - guess.p_guess, 1e-5,
                  sdp_residual=guess.residual, sdp_converged=guess.converged, fidelity_restarts=fid.restarts)
    return [r1, r2]


# -- Theorem 3 ----------------------------------------------------------------

def _ab_tensor(rho_abc: DensityOperator) -> tuple[np.ndarray, int, int]:
    da, db = rho_abc.dims[0], rho_abc.dims[1]
    return rho_abc.reduce([0, 1]).matrix.reshape(da, db, da, db), da, db


def transfer_map(rho_abc, x: np.ndarray, target: str = "B") -> np.ndarray:
    """``T(X) = Tr_A[(X x I) rho_AT]`` for ``T`` in {B, C}."""
    rho = as_density(rho_abc)
    keep = [0, 1] if target == "B" else [0, 2]
    da, dt = rho.dims[0], rho.dims[keep[1]]
    r = rho.reduce(keep).matrix.reshape(da, dt, da, dt)
    return np.einsum("ab,bxay->xy", np.asarray(x, dtype=complex), r)


def _transfer_all(rho: DensityOperator, u: np.ndarray, target: str) -> np.ndarray:
    """``T(|u_j><u_k|)`` for all ``j, k`` as an array ``(d, d, dT, dT)``."""
    keep = [0, 1] if target == "B" else [0, 2]
    da, dt = rho.dims[0], rho.dims[keep[1]]
    r = rho.reduce(keep).matrix.reshape(da, dt, da, dt)
    return np.einsum("aj,bk,bxay->jkxy", u, u.conj(), r)


def transfer_gap(rho_abc, kets: Sequence[np.ndarray]) -> float:
    """``|Tr[T_B(|j><k|) T_B(|l><m|)] - Tr[T_C(|j><m|) T_C(|l><k|)]|``."""
    j, k, l, m = (np.asarray(v, dtype=complex) for v in kets)
    lhs = np.trace(transfer_map(rho_abc, np.outer(j, k.conj()), "B") @ transfer_map(rho_abc, np.outer(l, m.conj()), "B"))
    rhs = np.trace(transfer_map(rho_abc, np.outer(j, m.conj()), "C") @ transfer_map(rho_abc, np.outer(l, k.conj()), "C"))
    return float(abs(lhs - rhs))


def lemma_terms(rho_abc, z: InfoType) -> dict:
    """Exact phase average ``d_A^2 <Tr T_B(psi)^2>`` over Z-unbiased ``psi``.

    Only pairings with real phase products survive the average, each with
    weight ``1/d_A^2``.  ``direct`` keeps the exchange term in T_B form,
    ``exchanged`` rewrites it through T_C.
    """
    rho = as_density(rho_abc)
    u = z.vectors()
    tb = _transfer_all(rho, u, "B")
    tc = _transfer_all(rho, u, "C")
    d = z.dim
    gram_b = np.einsum("jxy,kyx->jk", tb[np.arange(d), np.arange(d)], tb[np.arange(d), np.arange(d)]).real
    diag_c = tc[np.arange(d), np.arange(d)]
    gram_c = np.einsum("jxy,kyx->jk", diag_c, diag_c).real
    exch_b = np.einsum("jkxy,kjyx->jk", tb, tb).real
    off = ~np.eye(d, dtype=bool)
    same = float(np.trace(gram_b))
    direct = float(gram_b[off].sum() + exch_b[off].sum() + same)
    exchanged = float(gram_b[off].sum() + gram_c[off].sum() + same)
    return {"direct": direct, "exchanged": exchanged}


def certainty_quad_samples(rho_abc, unitaries: np.ndarray) -> np.ndarray:
    """``C_Q(W|B)`` for every basis in a stack ``(S, d, d)`` (columns are kets)."""
    rho = as_density(rho_abc)
    r, da, db = _ab_tensor(rho)
    sig = np.einsum("saj,axby,sbj->sjxy", unitaries.conj(), r, unitaries, optimize=True)
    pur_b = qmat.purity(rho.reduce([1]).matrix)
    return da * np.sum(np.abs(sig) ** 2, axis=(1, 2, 3)) - pur_b


def sample_phases(d: int, samples: int, seed=None) -> np.ndarray:
    return _rng(seed).uniform(0.0, 2 * np.pi, (samples, d))


def verify_thm3(rho_abc, z: InfoType, samples: int = 10_000, seed=0,
                base: InfoType | None = None) -> list[VerificationReport]:
    """Uncertainty equation ``H_Q(Z|C) = <C_Q(W|B)>`` over an MU class.

    The Monte Carlo report passes when ``|gap| <= 3 SE + 1e-9``.  The second
    report evaluates the exact phase average through ``T_B``/``T_C`` and must
    match ``Tr(rho_B^2) + H_Q(Z|C)`` within 1e-9.  ``base`` selects the class
    (default: the Fourier partner of ``z``).
    """
    rho = require_pure_tripartite(rho_abc)
    if not z.is_basis:
        raise NotRankOne("the uncertainty equation needs an orthonormal basis Z")
    dec = en.cq_decompose(rho, z, 2)
    hq = en.cond_entropy_quad(dec)

    phases = sample_phases(z.dim, samples, seed)
    cq = certainty_quad_samples(rho, class_unitaries(z, phases, base))
    mean = float(cq.mean())
    se = float(cq.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    r1 = VerificationReport("thm3.average", mean, hq, abs(mean - hq), 3 * se + 1e-9,
                            diagnostics={"samples": samples, "std_error": se})

    terms = lemma_terms(rho, z)
    target = qmat.purity(rho.reduce([1]).matrix) + hq
    r2 = VerificationReport("thm3.lemma", terms["exchanged"], target,
                            max(abs(terms["exchanged"] - target), abs(terms["direct"] - target)), 1e-9,
                            diagnostics={"direct_form": terms["direct"]})
    return [r1, r2]


# -- Corollary ---------------------------------------------------------------

COROLLARY_THRESHOLD = 1e-6


def corollary_residuals(rho_abc, z: InfoType, samples: int = 50, seed=0) -> dict:
    rho = require_pure_tripartite(rho_abc)
    rho_ab = rho.reduce([0, 1])
    pinched = pinch(rho_ab, z)
    dec = en.cq_decompose(rho, z, 2)
    hs = math.sqrt(qmat.hilbert_schmidt(rho_ab.matrix, pinched.matrix))
    lifted = measure_coherently(rho_ab, z).matrix
    rel = qmat.relative_entropy(lifted, measure_coherently(pinched, z).matrix)
    cq = certainty_quad_samples(rho, class_unitaries(z, sample_phases(z.dim, samples, seed)))
    return {"decohered_distance": hs, "missing_information": max(float(en.cond_entropy_vn(dec)), 0.0),
            "entanglement_bound": max(rel, 0.0), "mu_certainty": max(float(cq.mean()), 0.0)}


def verify_corollary(rho_abc, z: InfoType, samples: int = 50, seed=0,
                     threshold: float = COROLLARY_THRESHOLD) -> VerificationReport:
    """The four classicality conditions must be jointly zero or jointly nonzero.

    ``lhs`` counts residuals at or below ``threshold``; ``rhs`` is the nearest
    consistent count (0 or 4).
    """
    res = corollary_residuals(rho_abc, z, samples, seed)
    zeros = sum(v <= threshold for v in res.values())
    consistent = 4 if zeros >= 2 else 0
    return VerificationReport("corollary.joint_zero", zeros, consistent, abs(zeros - consistent), 0.0,
                              diagnostics={**res, "classical": bool(zeros == 4)})


# -- inequalities ------------------------------------------------------------

def verify_inequalities(rho_abc, z: InfoType, samples: int = 20, seed=0) -> list[VerificationReport]:
    """``H(Z|C) >= C(W|B)`` for MU partners, and ``(ln 2) D >= 2 D_T^2 >= D_HS``."""
    rho = require_pure_tripartite(rho_abc)
    if not z.is_basis:
        raise NotRankOne("the uncertainty relation is checked for orthonormal bases")
    h = en.cond_entropy_vn(en.cq_decompose(rho, z, 2))
    rng = _rng(seed)
    ws = [fourier_mu_basis(z)] + [sample_equivalence_class(z, rng).basis() for _ in range(samples)]
    cert = [en.certainty(en.VN, en.cq_decompose(rho, w, 1)) for w in ws]
    r1 = inequality("uncertainty.vn", h, max(cert), 1e-8, bases=len(ws))

    rho_ab = rho.reduce([0, 1]).matrix
    pinched = pinch_matrix(rho_ab, rho.dims[:2], z)
    rel = qmat.relative_entropy(rho_ab, pinched)
    dt = qmat.trace_distance(rho_ab, pinched)
    dhs = qmat.hilbert_schmidt(rho_ab, pinched)
    r2 = inequality("chain.pinsker", math.log(2) * rel, 2 * dt ** 2, 1e-8)
    r3 = inequality("chain.trace_hs", 2 * dt ** 2, dhs, 1e-8)
    return [r1, r2, r3]


# -- single-time decoherence example ----------------------------------------

def interferometer_state(v: float) -> DensityOperator:
    """Which-path qubit with off-diagonal ``v/2``."""
    return DensityOperator(np.array([[0.5, v / 2], [v / 2, 0.5]], dtype=complex), (2,))


def interferometer_profile(v: float, samples: int = 10_000, seed=0) -> dict:
    """Path coherence, leaked quadratic information and MU-class certainty of the path qubit."""
    rho_s = interferometer_state(v)
    psi = purify(rho_s)
    rho = DensityOperator(psi.density().matrix, (2, 1, psi.dims[1]), validate=False)
    z = basis(np.eye(2))
    cq = certainty_quad_samples(rho, class_unitaries(z, sample_phases(2, samples, seed)))
    se = float(cq.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return {"coherence_sq": float(abs(rho_s.matrix[0, 1]) ** 2),
            "missing_quad": en.cond_entropy_quad(en.cq_decompose(rho, z, 2)),
            "mu_certainty": float(cq.mean()), "std_error": se, "samples": samples}


def verify_interferometer(v: float, samples: int = 10_000, seed=0) -> list[VerificationReport]:
    """``|<0|rho_S|1>|^2 = H_Q(Z|E)/2 = <C_Q(W)>/2`` for the path qubit."""
    prof = interferometer_profile(v, samples, seed)
    coh, se = prof["coherence_sq"], prof["std_error"]
    r1 = equality("interferometer.exact", coh, prof["missing_quad"] / 2, 1e-10)
    half = prof["mu_certainty"] / 2
    r2 = VerificationReport("interferometer.average", coh, half, abs(coh - half), 3 * se / 2 + 1e-9,
                            diagnostics={"samples": samples, "std_error": se / 2})
    return [r1, r2]
