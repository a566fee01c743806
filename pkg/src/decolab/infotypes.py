"""Types of information: decompositions of a subsystem identity into orthogonal projectors.

Provides pinching, the coherent measurement isometry, coarse-graining and the
mutually-unbiased machinery (Fourier partner basis and random members of its
equivalence class under Z-diagonal unitaries).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qmat
from .errors import BadPartition, DimMismatch, NotRankOne
from .states import DensityOperator, _rng, as_density, decode_matrix, encode_matrix

_PROJ_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class InfoType:
    """Ordered orthogonal projectors ``{Z_j}`` summing to the identity on one factor."""

    projectors: tuple[np.ndarray, ...]
    subsystem: int = 0

    def __post_init__(self):
        ps = tuple(qmat.hermitize(np.asarray(p, dtype=complex)) for p in self.projectors)
        object.__setattr__(self, "projectors", ps)
        if not ps:
            raise BadPartition("an InfoType needs at least one projector")
        d = ps[0].shape[0]
        for j, p in enumerate(ps):
            if p.shape != (d, d):
                raise DimMismatch(f"projector {j} has shape {p.shape}, expected {(d, d)}")
            if np.max(np.abs(p @ p - p)) > _PROJ_ATOL:
                raise BadPartition(f"Z_{j} is not idempotent")
            for k in range(j):
                if np.max(np.abs(p @ ps[k])) > _PROJ_ATOL:
                    raise BadPartition(f"Z_{j} and Z_{k} are not orthogonal")
        if np.max(np.abs(sum(ps) - np.eye(d))) > _PROJ_ATOL:
            raise BadPartition("projectors do not sum to the identity")

    @property
    def n(self) -> int:
        return len(self.projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(int(round(np.real(np.trace(p)))) for p in self.projectors)

    @property
    def is_basis(self) -> bool:
        return all(r == 1 for r in self.ranks)

    def vectors(self) -> np.ndarray:
        """Unitary whose columns are the basis kets (rank-one types only)."""
        if not self.is_basis:
            raise NotRankOne("InfoType is not an orthonormal basis")
        cols = []
        for p in self.projectors:
            w, v = np.linalg.eigh(p)
            cols.append(v[:, -1])
        return np.column_stack(cols)

    def on(self, subsystem: int) -> "InfoType":
        return InfoType(self.projectors, subsystem)


def basis(unitary, subsystem: int = 0) -> InfoType:
    """Rank-one InfoType from the columns of a unitary."""
    u = np.asarray(unitary, dtype=complex)
    return InfoType(tuple(np.outer(u[:, j], u[:, j].conj()) for j in range(u.shape[1])), subsystem)


def standard_basis(d: int, subsystem: int = 0) -> InfoType:
    return basis(np.eye(d), subsystem)


def product_basis(za: InfoType, zb: InfoType, subsystem: int = 0) -> InfoType:
    """``Z x Z'`` on the joint factor, outcomes ordered ``(j, k)`` lexicographically."""
    return InfoType(tuple(np.kron(p, q) for p in za.projectors for q in zb.projectors), subsystem)


def _check_target(rho: DensityOperator, z: InfoType) -> None:
    if not 0 <= z.subsystem < len(rho.dims) or rho.dims[z.subsystem] != z.dim:
        raise DimMismatch(f"InfoType of dimension {z.dim} on factor {z.subsystem} does not fit dims {list(rho.dims)}")


def pinch_matrix(m: np.ndarray, dims: Sequence[int], z: InfoType) -> np.ndarray:
    out = np.zeros_like(m, dtype=complex)
    for p in z.projectors:
        out += qmat.local_sandwich(m, p, p, dims, z.subsystem)
    return out


def pinch(rho, z: InfoType) -> DensityOperator:
    """``sum_j (Z_j x I) rho (Z_j x I)``."""
    rho = as_density(rho)
    _check_target(rho, z)
    return DensityOperator(pinch_matrix(rho.matrix, rho.dims, z), rho.dims, validate=False)


def measurement_isometry(z: InfoType) -> np.ndarray:
    """``V_Z = sum_j |j>_M x Z_j`` as an ``(N d) x d`` matrix (register factor first)."""
    return np.vstack(list(z.projectors))


def coherent_isometry(dims: Sequence[int], z: InfoType) -> np.ndarray:
    """``V_Z`` on the full space, mapping ``dims`` to ``(N,) + dims`` with the register first."""
    dims = [int(d) for d in dims]
    v = qmat.apply_local(measurement_isometry(z), dims, z.subsystem)
    ext = dims[:z.subsystem] + [z.n, z.dim] + dims[z.subsystem + 1:]
    order = [z.subsystem] + [k for k in range(len(ext)) if k != z.subsystem]
    v = v.reshape(ext + [v.shape[1]]).transpose(order + [len(ext)])
    return v.reshape(-1, v.shape[-1])


def measure_coherently(rho, z: InfoType) -> DensityOperator:
    """Post-measurement state ``V_Z rho V_Z^H`` with the register ``M_Z`` as new factor 0."""
    rho = as_density(rho)
    _check_target(rho, z)
    v = coherent_isometry(rho.dims, z)
    return DensityOperator(v @ rho.matrix @ v.conj().T, (z.n,) + tuple(rho.dims), validate=False)


def coarse_grain(z: InfoType, grouping: Sequence[Sequence[int]]) -> InfoType:
    """Merge projectors by ``grouping`` (a partition of ``range(z.n)``).

    Groups are ordered by their smallest original index.
    """
    groups = [sorted(int(i) for i in g) for g in grouping]
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(z.n)) or any(not g for g in groups):
        raise BadPartition(f"grouping {grouping} is not a partition of 0..{z.n - 1}")
    groups.sort(key=lambda g: g[0])
    return InfoType(tuple(sum(z.projectors[i] for i in g) for g in groups), z.subsystem)


def fourier_mu_basis(z: InfoType) -> InfoType:
    """Discrete-Fourier partner ``|W_k> = d^-1/2 sum_j e^{2 pi i jk/d} |Z_j>``."""
    u = z.vectors()
    d = z.dim
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    f = np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
    return basis(u @ f, z.subsystem)


def max_unbiasedness_error(z: InfoType, w: InfoType) -> float:
    overlaps = np.abs(z.vectors().conj().T @ w.vectors()) ** 2
    return float(np.max(np.abs(overlaps - 1.0 / z.dim)))


@dataclass(frozen=True, eq=False)
class MUBasisSample:
    """A member of the equivalence class of a reference MU basis.

    The sampled basis is ``diag(e^{i theta}) W`` in the Z frame, optionally
    with its kets permuted.
    """

    base_basis: InfoType
    z: InfoType
    phases: np.ndarray
    permutation: tuple[int, ...] | None = None

    def unitary(self) -> np.ndarray:
        """Columns are the sampled basis kets."""
        uz = self.z.vectors()
        diag = uz @ np.diag(np.exp(1j * np.asarray(self.phases))) @ uz.conj().T
        w = diag @ self.base_basis.vectors()
        if self.permutation is not None:
            w = w[:, list(self.permutation)]
        return w

    def basis(self) -> InfoType:
        return basis(self.unitary(), self.base_basis.subsystem)


def sample_equivalence_class(z: InfoType, seed=None, *, permute: bool = False,
                             phases: Sequence[float] | None = None) -> MUBasisSample:
    """Random member of the Fourier class of ``z``; ``phases`` overrides the draw."""
    if not z.is_basis:
        raise NotRankOne("equivalence classes are defined for orthonormal bases")
    rng = _rng(seed)
    th = rng.uniform(0.0, 2 * np.pi, z.dim) if phases is None else np.asarray(phases, dtype=float)
    perm = tuple(int(i) for i in rng.permutation(z.dim)) if permute else None
    return MUBasisSample(fourier_mu_basis(z), z, th, perm)


def class_unitaries(z: InfoType, phases: np.ndarray, base: InfoType | None = None) -> np.ndarray:
    """Stack of basis unitaries ``(S, d, d)`` for a batch of phase vectors ``(S, d)``."""
    uz = z.vectors()
    w0 = uz.conj().T @ (fourier_mu_basis(z) if base is None else base).vectors()
    # in the Z frame the class member is diag(e^{i th}) w0; rotate back
    batch = np.exp(1j * np.asarray(phases))[:, :, None] * w0[None, :, :]
    return np.einsum("ab,sbc->sac", uz, batch)


def infotype_to_json(z: InfoType) -> dict:
    return {"subsystem": z.subsystem, "projectors": [encode_matrix(p) for p in z.projectors]}


def infotype_from_json(obj, where: str = "infotype") -> InfoType:
    try:
        projs = tuple(decode_matrix(p, where=f"{where}.projectors[{i}]") for i, p in enumerate(obj["projectors"]))
        return InfoType(projs, int(obj.get("subsystem", 0)))
    except (KeyError, TypeError) as exc:
        raise BadPartition(f"{where}: malformed InfoType ({exc})") from None
