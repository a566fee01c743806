"""Dense Hermitian linear algebra used throughout the package.

Everything here operates on plain ``numpy`` arrays.  Eigenvalues below
``EIG_CUTOFF`` are treated as exact zeros whenever a logarithm, square root
or support is taken, and ``0 log 0`` is read as 0.  All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimMismatch, EmptyKeep, NonHermitian, NonSquare, NotAState

EIG_CUTOFF = 1e-12
HERM_ATOL = 1e-10
STATE_ATOL = 1e-8

DIVERGENCES = ("relative_entropy", "hilbert_schmidt", "fidelity", "trace_distance")


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues (descending) and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")


def is_hermitian(m: np.ndarray, atol: float = HERM_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= atol


def herm_eig(m, atol: float = HERM_ATOL) -> HermitianSpectrum:
    """Spectral decomposition of a Hermitian matrix, eigenvalues sorted descending.

    Raises:
        NonSquare: if ``m`` is not square.
        NonHermitian: if ``max|m - m^H| > atol``.
    """
    m = np.asarray(m, dtype=complex)
    _check_square(m)
    dev = np.max(np.abs(m - m.conj().T), initial=0.0)
    if dev > atol:
        raise NonHermitian(f"matrix deviates from its adjoint by {dev:.3e} > {atol:.1e}")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return HermitianSpectrum(w[::-1].copy(), v[:, ::-1].copy())


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def tensor(*ops) -> np.ndarray:
    """Kronecker product of the given operators (or vectors), left to right."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` gives the subsystem dimensions in tensor order.  The kept factors
    stay in their original order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimMismatch(f"matrix shape {m.shape} does not match dims {dims} (product {total})")
    if not keep:
        raise EmptyKeep("at least one subsystem must be kept")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimMismatch(f"keep indices {keep} out of range for {n} subsystems")
    if len(keep) == n:
        return m.copy()
    t = m.reshape(dims + dims)
    # trace pairs from the highest axis down so lower axis numbers stay valid
    cur = n
    for i in reversed(range(n)):
        if i in keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + cur)
        cur -= 1
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def apply_local(op: np.ndarray, dims: Sequence[int], index: int) -> np.ndarray:
    """Embed ``op`` acting on factor ``index`` as ``I x op x I`` on the full space."""
    dims = list(dims)
    left = int(np.prod(dims[:index]))
    right = int(np.prod(dims[index + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def local_sandwich(m: np.ndarray, left: np.ndarray, right: np.ndarray, dims: Sequence[int], index: int) -> np.ndarray:
    """Compute ``(L x I) m (R x I)`` with ``L``/``R`` acting on factor ``index``.

    Avoids building the full Kronecker products.
    """
    dims = [int(d) for d in dims]
    pre = int(np.prod(dims[:index]))
    post = int(np.prod(dims[index + 1:]))
    d = dims[index]
    t = m.reshape(pre, d, post, pre, d, post)
    t = np.einsum("ab,ibjklm->iajklm", left, t)
    t = np.einsum("ijklbm,ba->ijklam", t, right)
    return t.reshape(m.shape)


def herm_func(m: np.ndarray, f: Callable[[np.ndarray], np.ndarray], cutoff: float = EIG_CUTOFF) -> np.ndarray:
    """Apply ``f`` to the eigenvalues above ``cutoff``; the rest map to 0."""
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    mask = w > cutoff
    fw = np.zeros_like(w)
    fw[mask] = f(w[mask])
    return (v * fw) @ v.conj().T


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    return herm_func(m, np.sqrt)


def log2m_support(m: np.ndarray) -> np.ndarray:
    """Base-2 matrix logarithm restricted to the support of ``m``."""
    return herm_func(m, np.log2)


def support_projector(m: np.ndarray, cutoff: float = EIG_CUTOFF) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    vs = v[:, w > cutoff]
    return vs @ vs.conj().T


def eigvals_psd(m: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(hermitize(np.asarray(m, dtype=complex)))
    return np.where(w > EIG_CUTOFF, w, 0.0)


def shannon(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > EIG_CUTOFF]
    return float(-np.sum(p * np.log2(p)))


def entropy(rho) -> float:
    """Von Neumann entropy ``-Tr(rho log2 rho)``."""
    return shannon(eigvals_psd(rho))


def entropies_batched(mats: np.ndarray) -> np.ndarray:
    """Von Neumann entropies of a stack of Hermitian matrices ``(..., d, d)``."""
    w = np.linalg.eigvalsh(mats)
    w = np.where(w > EIG_CUTOFF, w, 1.0)
    return -np.sum(w * np.log2(w), axis=-1)


def purity(rho) -> float:
    return hs_norm_sq(rho)


def trace_norm(m) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(np.asarray(m, dtype=complex))))))


def hs_norm_sq(m) -> float:
    """Squared Hilbert-Schmidt norm ``Tr(M^H M)``."""
    m = np.asarray(m)
    return float(np.real(np.vdot(m, m)))


def relative_entropy(rho, sigma) -> float:
    """``D(rho||sigma)`` in bits; ``inf`` when supp(rho) is not inside supp(sigma)."""
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(hermitize(np.asarray(sigma, dtype=complex)))
    weights = np.real(np.einsum("ji,jk,ki->i", v.conj(), rho, v))
    inside = w > EIG_CUTOFF
    if np.any(weights[~inside] > EIG_CUTOFF):
        return float("inf")
    cross = float(np.sum(weights[inside] * np.log2(w[inside])))
    return -entropy(rho) - cross


def hilbert_schmidt(rho, sigma) -> float:
    """``Tr[(rho - sigma)^2]``."""
    return hs_norm_sq(np.asarray(rho) - np.asarray(sigma))


def fidelity(rho, sigma) -> float:
    """Squared Uhlmann fidelity ``(Tr|sqrt(rho) sqrt(sigma)|)^2``."""
    s = np.linalg.svd(sqrtm_psd(rho) @ sqrtm_psd(sigma), compute_uv=False)
    return float(np.sum(s) ** 2)


def trace_distance(rho, sigma) -> float:
    return 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))


def check_state(m, atol: float = STATE_ATOL, name: str = "state") -> np.ndarray:
    """Return ``m`` as a complex array after checking it is a density matrix."""
    m = np.asarray(m, dtype=complex)
    _check_square(m)
    dev = np.max(np.abs(m - m.conj().T), initial=0.0)
    if dev > atol:
        raise NotAState(f"{name} is not Hermitian (deviation {dev:.3e})")
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1.0) > atol:
        raise NotAState(f"{name} violates the unit-trace invariant: trace = {tr:.12g}")
    lmin = float(np.min(np.linalg.eigvalsh(hermitize(m))))
    if lmin < -atol:
        raise NotAState(f"{name} is not positive semidefinite: min eigenvalue {lmin:.3e}")
    return m


def divergence(kind: str, rho, sigma) -> float:
    """Distinguishability of two density matrices.

    Args:
        kind: one of ``relative_entropy``, ``hilbert_schmidt``, ``fidelity``,
            ``trace_distance``.
        rho, sigma: density matrices (arrays or objects with a ``matrix``
            attribute) of equal dimension.

    Returns:
        The requested value.  ``relative_entropy`` is in bits and may be
        ``inf``.
    """
    rho = check_state(getattr(rho, "matrix", rho), name="rho")
    sigma = check_state(getattr(sigma, "matrix", sigma), name="sigma")
    if rho.shape != sigma.shape:
        raise DimMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    try:
        fn = {
            "relative_entropy": relative_entropy,
            "hilbert_schmidt": hilbert_schmidt,
            "fidelity": fidelity,
            "trace_distance": trace_distance,
        }[kind]
    except KeyError:
        raise ValueError(f"unknown divergence {kind!r}; choose from {DIVERGENCES}") from None
    return fn(rho, sigma)


def unitary_from_generator(params: np.ndarray, d: int) -> np.ndarray:
    """Unitary ``exp(iH)`` from ``d^2 - 1`` real parameters.

    The first ``d^2 - d`` entries fill the real and imaginary parts of the strict
    upper triangle of ``H``; the last ``d - 1`` set its diagonal, with the final
    diagonal entry pinned to 0 (global phase removed).
    """
    params = np.asarray(params, dtype=float)
    h = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = params[:m] + 1j * params[m:2 * m]
    h = h + h.conj().T
    h[np.arange(d - 1), np.arange(d - 1)] = params[2 * m:2 * m + d - 1]
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T
