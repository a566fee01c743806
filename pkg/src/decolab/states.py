"""Density operators on tensor-factored spaces.

Includes purification, seeded random ensembles, the classical-state
classifier (CC / CQ) and the JSON state format used by the CLI::

    {"dims": [2, 2], "matrix": {"re": [[...]], "im": [[...]]}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import qmat
from .errors import BadRank, DimMismatch, NotAState, NotBipartite

HAAR_PURE = "haar_pure"
GINIBRE_MIXED = "ginibre_mixed"

CC = "CC"
CQ = "CQ"
UNKNOWN = "unknown-beyond-CQ"

CLASSIFY_ATOL = 1e-9
COMMUTE_ATOL = 1e-8
_DEGENERACY_ATOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A positive unit-trace matrix together with its subsystem dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        total = int(np.prod(dims)) if dims else 1
        if m.shape != (total, total):
            raise DimMismatch(f"matrix shape {m.shape} does not match dims {list(dims)}")
        if self.validate:
            qmat.check_state(m, atol=qmat.HERM_ATOL, name="density operator")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reduce(self, keep) -> "DensityOperator":
        keep = sorted(set(keep))
        m = qmat.partial_trace(self.matrix, self.dims, keep)
        return DensityOperator(m, tuple(self.dims[k] for k in keep), validate=False)

    def permute(self, order: Sequence[int]) -> "DensityOperator":
        """Reorder the tensor factors; ``order[i]`` is the old index of new factor ``i``."""
        n = len(self.dims)
        t = self.matrix.reshape(self.dims + self.dims)
        t = np.transpose(t, list(order) + [n + k for k in order])
        dims = tuple(self.dims[k] for k in order)
        return DensityOperator(t.reshape(self.dim, self.dim), dims, validate=False)

    def group(self, split: int) -> "DensityOperator":
        """View the factors as a bipartition ``[:split] | [split:]``."""
        da = int(np.prod(self.dims[:split]))
        db = int(np.prod(self.dims[split:]))
        return DensityOperator(self.matrix, (da, db), validate=False)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return float(np.max(np.linalg.eigvalsh(qmat.hermitize(self.matrix)))) >= 1.0 - tol

    def purity(self) -> float:
        return qmat.purity(self.matrix)

    def entropy(self) -> float:
        return qmat.entropy(self.matrix)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", dims)
        if v.size != int(np.prod(dims)):
            raise DimMismatch(f"{v.size} amplitudes do not match dims {list(dims)}")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > 1e-10:
            raise NotAState(f"pure state is not normalised: norm = {norm:.12g}")

    def density(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims, validate=False)


def as_density(rho, dims: Sequence[int] | None = None) -> DensityOperator:
    """Coerce an array, ``PureState`` or ``DensityOperator`` into a ``DensityOperator``."""
    if isinstance(rho, DensityOperator):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    m = np.asarray(rho, dtype=complex)
    if m.ndim == 1:
        m = np.outer(m, m.conj())
    if dims is None:
        dims = (m.shape[0],)
    return DensityOperator(m, tuple(dims))


def product(*states) -> DensityOperator:
    mats = [as_density(s) for s in states]
    dims = tuple(d for s in mats for d in s.dims)
    return DensityOperator(qmat.tensor(*(s.matrix for s in mats)), dims, validate=False)


def bell_state() -> DensityOperator:
    v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return DensityOperator(np.outer(v, v.conj()), (2, 2))


def maximally_mixed(dims: Sequence[int]) -> DensityOperator:
    d = int(np.prod(dims))
    return DensityOperator(np.eye(d, dtype=complex) / d, tuple(dims))


def purify(rho) -> PureState:
    """Purification ``sum_k sqrt(l_k) |v_k>|k>`` with purifier dimension ``rank(rho)``."""
    rho = as_density(rho)
    w, v = np.linalg.eigh(qmat.hermitize(rho.matrix))
    keep = w > qmat.EIG_CUTOFF
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    r = len(w)
    psi = (v * np.sqrt(w)).reshape(-1)  # psi[i*r + k] = sqrt(l_k) v_k[i]
    psi = psi / np.linalg.norm(psi)
    return PureState(psi, rho.dims + (r,))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_state(kind: str = GINIBRE_MIXED, dims: Sequence[int] = (2, 2), rank: int | None = None,
                 seed=None) -> DensityOperator:
    """Draw a random density operator.

    ``haar_pure`` returns a projector onto a Haar-random unit vector.
    ``ginibre_mixed`` returns ``G G^H / Tr(G G^H)`` with ``G`` a ``d x rank``
    complex Gaussian matrix (``rank`` defaults to ``d``).  ``seed`` may be an
    int or a ``numpy.random.Generator``; passing a Generator advances it.
    """
    rng = _rng(seed)
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    if kind == HAAR_PURE:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v /= np.linalg.norm(v)
        return DensityOperator(np.outer(v, v.conj()), dims, validate=False)
    if kind != GINIBRE_MIXED:
        raise ValueError(f"unknown random state kind {kind!r}")
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise BadRank(f"rank must lie in [1, {d}], got {rank}")
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    m = qmat.hermitize(m / np.real(np.trace(m)))
    return DensityOperator(m, dims, validate=False)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    return random_unitary(d_out, seed)[:, :d_in]


# -- classification --------------------------------------------------------

def _candidate_basis(rho_ab: np.ndarray, da: int, db: int, rng: np.random.Generator):
    """Guess the CQ basis on A, or ``None`` if the conditional operators do not commute."""
    t = rho_ab.reshape(da, db, da, db)
    rho_a = np.einsum("ibjb->ij", t)
    # conditional operators X_M = Tr_B[(I x M) rho] for a Hermitian basis M of B
    conds = []
    for i in range(db):
        for j in range(i, db):
            m = np.zeros((db, db), dtype=complex)
            if i == j:
                m[i, i] = 1
                conds.append(np.einsum("iajb,ba->ij", t, m))
            else:
                m[i, j] = m[j, i] = 1
                conds.append(np.einsum("iajb,ba->ij", t, m))
                m = np.zeros((db, db), dtype=complex)
                m[i, j], m[j, i] = -1j, 1j
                conds.append(np.einsum("iajb,ba->ij", t, m))
    w, v = np.linalg.eigh(qmat.hermitize(rho_a))
    basis = []
    start = 0
    while start < da:
        stop = start + 1
        while stop < da and abs(w[stop] - w[start]) < _DEGENERACY_ATOL:
            stop += 1
        block = v[:, start:stop]
        if stop - start == 1:
            basis.append(block)
        else:
            # refine a degenerate eigenspace by simultaneous diagonalisation
            comp = [block.conj().T @ x @ block for x in conds]
            for a in range(len(comp)):
                for b in range(a + 1, len(comp)):
                    if np.linalg.norm(comp[a] @ comp[b] - comp[b] @ comp[a]) > COMMUTE_ATOL:
                        return None
            mix = sum(rng.standard_normal() * c for c in comp)
            _, u = np.linalg.eigh(qmat.hermitize(mix))
            basis.append(block @ u)
        start = stop
    return np.hstack(basis)


def _pinch_in(rho_ab: np.ndarray, basis: np.ndarray, da: int, db: int) -> np.ndarray:
    out = np.zeros_like(rho_ab)
    for j in range(da):
        p = np.kron(np.outer(basis[:, j], basis[:, j].conj()), np.eye(db))
        out += p @ rho_ab @ p
    return out


def _is_cq(rho_ab: np.ndarray, da: int, db: int, rng) -> bool:
    basis = _candidate_basis(rho_ab, da, db, rng)
    if basis is None:
        return False
    return float(np.max(np.abs(rho_ab - _pinch_in(rho_ab, basis, da, db)))) <= CLASSIFY_ATOL


def classify(rho, cut: int | None = None) -> str:
    """Place a bipartite state in the CC / CQ hierarchy.

    Args:
        rho: state whose factors split as ``dims[:cut] | dims[cut:]``.
        cut: split position; required only when there are more than two factors.

    Returns:
        ``"CC"``, ``"CQ"`` (classical on the first party) or
        ``"unknown-beyond-CQ"``.  Separability is never decided.
    """
    rho = as_density(rho)
    if cut is None:
        if len(rho.dims) != 2:
            raise NotBipartite(f"state has {len(rho.dims)} factors; pass cut= to choose a bipartition")
        cut = 1
    if not 0 < cut < len(rho.dims):
        raise NotBipartite(f"cut {cut} does not split dims {list(rho.dims)}")
    ab = rho.group(cut)
    da, db = ab.dims
    rng = np.random.default_rng(20240611)
    if not _is_cq(ab.matrix, da, db, rng):
        return UNKNOWN
    swapped = ab.permute((1, 0))
    if _is_cq(swapped.matrix, db, da, rng):
        return CC
    return CQ


# -- JSON ------------------------------------------------------------------

def encode_matrix(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def decode_matrix(obj, where: str = "matrix") -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise NotAState(f"{where}: expected {{'re': [[...]], 'im': [[...]]}} ({exc})") from None
    if re.shape != im.shape or re.ndim != 2:
        raise DimMismatch(f"{where}: re/im must be equal-shape 2-d arrays, got {re.shape} and {im.shape}")
    return re + 1j * im


def state_to_json(rho) -> dict:
    rho = as_density(rho)
    return {"dims": list(rho.dims), "matrix": encode_matrix(rho.matrix)}


def state_from_json(obj, where: str = "state") -> DensityOperator:
    if not isinstance(obj, dict) or "dims" not in obj or "matrix" not in obj:
        raise NotAState(f"{where}: expected an object with 'dims' and 'matrix'")
    m = decode_matrix(obj["matrix"], where=f"{where}.matrix")
    try:
        return DensityOperator(m, tuple(obj["dims"]))
    except (NotAState, DimMismatch) as exc:
        raise type(exc)(f"{where}: {exc}") from None


def load_state(path) -> DensityOperator:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NotAState(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    return state_from_json(obj, where=str(path))


def save_state(rho, path) -> None:
    Path(path).write_text(json.dumps(state_to_json(rho)) + "\n")
