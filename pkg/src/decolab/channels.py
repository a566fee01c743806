"""Channels in the two-time picture.

A channel acting on ``S0`` is dilated to an isometry into ``S1 x E1``; feeding
half of a maximally entangled state through it gives the tripartite pure
state ``|Omega>`` on ``S0 x S1 x E1``.  Information-type quantities of the
channel are then conditional entropies of that state with ``A = S0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import entropies as en
from . import qmat
from .errors import DimMismatch, NotTracePreserving
from .infotypes import InfoType, class_unitaries, fourier_mu_basis, sample_equivalence_class
from .states import (DensityOperator, PureState, _rng, decode_matrix, encode_matrix, random_isometry,
                     random_state)
from .theorems import certainty_quad_samples, equality, inequality, sample_phases, verify_thm1

TP_ATOL = 1e-9
KEPT_BY_OUTPUT = "kept_by_output"
LEAKED_TO_ENV = "leaked_to_env"


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map ``rho -> sum_k K_k rho K_k^H`` with Kraus operators ``d_out x d_in``."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(np.atleast_2d(np.asarray(k, dtype=complex)) for k in self.kraus)
        if not ks:
            raise NotTracePreserving("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        for i, k in enumerate(ks):
            if k.shape != shape:
                raise DimMismatch(f"Kraus operator {i} has shape {k.shape}, expected {shape}")
        object.__setattr__(self, "kraus", ks)
        err = np.max(np.abs(sum(k.conj().T @ k for k in ks) - np.eye(shape[1])))
        if err > TP_ATOL:
            raise NotTracePreserving(f"sum_k K_k^H K_k deviates from the identity by {err:.2e}")

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def d_env(self) -> int:
        return len(self.kraus)

    def isometry(self) -> np.ndarray:
        """Stinespring ``V = sum_k K_k x |k>_E``, shape ``(d_out * d_env, d_in)``."""
        return np.stack(self.kraus, axis=1).reshape(self.d_out * self.d_env, self.d_in)

    def _check_input(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.d_in, self.d_in):
            raise DimMismatch(f"channel expects a {self.d_in}x{self.d_in} input, got {rho.shape}")
        return rho

    def apply(self, rho) -> np.ndarray:
        rho = self._check_input(rho)
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def complementary(self, rho) -> np.ndarray:
        """Environment output ``F(rho) = Tr_S1[V rho V^H]``; entries ``Tr(K_j rho K_k^H)``."""
        rho = self._check_input(rho)
        return np.array([[np.trace(kj @ rho @ kk.conj().T) for kk in self.kraus] for kj in self.kraus])

    def __call__(self, rho) -> np.ndarray:
        return self.apply(rho)


def identity(d: int) -> QuantumChannel:
    return QuantumChannel((np.eye(d),))


def phase_flip(p: float) -> QuantumChannel:
    """``rho -> (1 - p) rho + p sigma_z rho sigma_z``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return QuantumChannel((np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * np.diag([1.0, -1.0])))


def depolarizing(d: int, p: float) -> QuantumChannel:
    """``rho -> (1 - p) rho + p Tr(rho) I/d`` via the Weyl (clock-and-shift) operators."""
    if not 0.0 <= p <= 1.0 + 1.0 / (d * d - 1):
        raise ValueError(f"depolarizing parameter {p} outside the CPTP range")
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    ks = []
    for a in range(d):
        for b in range(d):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            weight = 1 - p + p / (d * d) if a == b == 0 else p / (d * d)
            if weight > 0:
                ks.append(np.sqrt(weight) * w)
    return QuantumChannel(tuple(ks))


def dephasing(z: InfoType) -> QuantumChannel:
    """Completely dephasing channel ``rho -> sum_j Z_j rho Z_j``."""
    return QuantumChannel(z.projectors)


def random_channel(d_in: int, d_out: int, n_kraus: int, seed=None) -> QuantumChannel:
    v = random_isometry(d_in, d_out * n_kraus, seed).reshape(d_out, n_kraus, d_in)
    return QuantumChannel(tuple(v[:, k, :] for k in range(n_kraus)))


# -- Choi picture -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChoiTriple:
    """``|Omega> = (I x V)|Phi>`` on ``S0 x S1 x E1``."""

    omega: PureState
    channel: QuantumChannel

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(self.omega.dims)

    def density(self) -> DensityOperator:
        return self.omega.density()

    def marginal(self) -> DensityOperator:
        """``rho_S0S1 = (I x E)(|Phi><Phi|)``."""
        return self.density().reduce([0, 1])


def choi_triple(ch: QuantumChannel) -> ChoiTriple:
    d = ch.d_in
    v = ch.isometry()
    # amplitude of |j>_S0 |s>_S1 |k>_E1 is <s,k|V|j> / sqrt(d)
    amp = v.T.reshape(d, ch.d_out, ch.d_env) / np.sqrt(d)
    return ChoiTriple(PureState(amp.reshape(-1), (d, ch.d_out, ch.d_env)), ch)


def choi_marginal_direct(ch: QuantumChannel) -> np.ndarray:
    """``sum_{jk} |j><k| x E(|j><k|) / d`` from the Kraus form."""
    d = ch.d_in
    out = np.zeros((d * ch.d_out, d * ch.d_out), dtype=complex)
    for j in range(d):
        for k in range(d):
            out += np.kron(np.outer(np.eye(d)[j], np.eye(d)[k]), ch.apply(np.outer(np.eye(d)[j], np.eye(d)[k])))
    return out / d


def _check_z(ch: QuantumChannel, z: InfoType) -> None:
    if z.dim != ch.d_in or z.subsystem != 0:
        raise DimMismatch(f"InfoType must act on the {ch.d_in}-dimensional input (factor 0), "
                          f"got dimension {z.dim} on factor {z.subsystem}")


def channel_info(ch: QuantumChannel, z: InfoType, which: str = LEAKED_TO_ENV, kind: str = en.VN) -> float:
    """``H_K(Z|S1)`` (``kept_by_output``) or ``H_K(Z|E1)`` (``leaked_to_env``).

    ``H(Z|E1)`` is the relative-entropy distance of the channel from one that
    erases Z off-diagonals.
    """
    _check_z(ch, z)
    target = {KEPT_BY_OUTPUT: 1, LEAKED_TO_ENV: 2}.get(which)
    if target is None:
        raise ValueError(f"which must be {KEPT_BY_OUTPUT!r} or {LEAKED_TO_ENV!r}, got {which!r}")
    dec = en.cq_decompose(choi_triple(ch).density(), z, target)
    return en.conditional_entropy(kind, dec)


def channel_certainty(ch: QuantumChannel, w: InfoType, kind: str = en.VN) -> float:
    """Certainty ``C_K(W|S1)`` about input basis ``W`` at the channel output."""
    _check_z(ch, w)
    dec = en.cq_decompose(choi_triple(ch).density(), w, 1)
    return en.certainty(kind, dec)


@dataclass
class DecoherenceProfile:
    offdiagonal_sum: float
    env_missing_quad: float
    mu_certainty_mean: float
    mu_certainty_se: float
    samples: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def exact_gap(self) -> float:
        return abs(self.offdiagonal_sum - self.env_missing_quad)

    @property
    def average_gap(self) -> float:
        return abs(self.env_missing_quad - self.mu_certainty_mean)

    @property
    def consistent(self) -> bool:
        return self.exact_gap <= 1e-9 and self.average_gap <= 3 * self.mu_certainty_se + 1e-9

    def to_dict(self) -> dict:
        return {"offdiagonal_sum": self.offdiagonal_sum, "env_missing_quad": self.env_missing_quad,
                "mu_certainty_mean": self.mu_certainty_mean, "mu_certainty_se": self.mu_certainty_se,
                "samples": self.samples, "exact_gap": self.exact_gap, "average_gap": self.average_gap,
                "consistent": self.consistent}


def decoherence_profile(ch: QuantumChannel, z: InfoType, samples: int = 10_000, seed=0) -> DecoherenceProfile:
    """Off-diagonal preservation, leaked quadratic information and MU-class certainty.

    The first number comes from the Kraus form, the other two from the Choi
    state; all three coincide.
    """
    _check_z(ch, z)
    # Z on the reference pairs with the conjugate kets at the channel input
    u = z.vectors().conj()
    d = ch.d_in
    off = 0.0
    for j in range(d):
        for k in range(d):
            if j != k:
                off += qmat.hs_norm_sq(ch.apply(np.outer(u[:, j], u[:, k].conj())))
    off /= d * d
    omega = choi_triple(ch).density()
    hq_env = en.cond_entropy_quad(en.cq_decompose(omega, z, 2))
    us = class_unitaries(z, sample_phases(d, samples, seed))
    cq = certainty_quad_samples(omega, us)
    se = float(np.std(cq, ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return DecoherenceProfile(off, hq_env, float(np.mean(cq)), se, samples)


def verify_channel(ch: QuantumChannel, z: InfoType, samples: int = 10_000, seed=0, mu_samples: int = 5):
    """Consistency reports for one channel and one input basis."""
    rng = _rng(seed)
    reports = []
    v = ch.isometry()
    rho = random_state("ginibre_mixed", (ch.d_in,), seed=rng).matrix
    out = (v @ rho @ v.conj().T)
    dims = [ch.d_out, ch.d_env]
    stine = max(np.max(np.abs(qmat.partial_trace(out, dims, [0]) - ch.apply(rho))),
                np.max(np.abs(qmat.partial_trace(out, dims, [1]) - ch.complementary(rho))))
    reports.append(equality("channel.stinespring", float(stine), 0.0, 1e-10))
    tri = choi_triple(ch)
    ref = np.max(np.abs(tri.density().reduce([0]).matrix - np.eye(ch.d_in) / ch.d_in))
    reports.append(equality("channel.reference_marginal", float(ref), 0.0, 1e-9))
    marg = np.max(np.abs(tri.marginal().matrix - choi_marginal_direct(ch)))
    reports.append(equality("channel.choi_marginal", float(marg), 0.0, 1e-10))
    if z.is_basis:
        prof = decoherence_profile(ch, z, samples, rng)
        reports.append(equality("channel.offdiagonal", prof.offdiagonal_sum, prof.env_missing_quad, 1e-9))
        reports.append(equality("channel.mu_average", prof.env_missing_quad, prof.mu_certainty_mean,
                                3 * prof.mu_certainty_se + 1e-9, se=prof.mu_certainty_se, samples=samples))
        leaked = channel_info(ch, z, LEAKED_TO_ENV)
        ws = [fourier_mu_basis(z)] + [sample_equivalence_class(z, rng).basis() for _ in range(mu_samples)]
        kept = max(channel_certainty(ch, w) for w in ws)
        reports.append(inequality("channel.tradeoff", leaked, kept, 1e-8, bases=len(ws)))
    reports.extend(verify_thm1(tri.density(), z, seed=seed if isinstance(seed, int) else 0))
    return reports


# -- serialisation --------------------------------------------------------------

def channel_to_json(ch: QuantumChannel) -> dict:
    return {"d_in": ch.d_in, "d_out": ch.d_out, "kraus": [encode_matrix(k) for k in ch.kraus]}


def channel_from_json(obj, where: str = "channel") -> QuantumChannel:
    try:
        ks = tuple(decode_matrix(k, where=f"{where}.kraus[{i}]") for i, k in enumerate(obj["kraus"]))
        d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
    except (KeyError, TypeError) as exc:
        raise DimMismatch(f"{where}: malformed channel ({exc})") from None
    for i, k in enumerate(ks):
        if k.shape != (d_out, d_in):
            raise DimMismatch(f"{where}.kraus[{i}] has shape {k.shape}, expected {(d_out, d_in)}")
    return QuantumChannel(ks)


def load_channel(path) -> QuantumChannel:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DimMismatch(f"{path}: invalid JSON ({exc})") from None
    return channel_from_json(obj, where=str(path))


def save_channel(ch: QuantumChannel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_json(ch), fh, indent=2, sort_keys=True)
        fh.write("\n")


def phase_flip_grid(ps: Sequence[float] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)) -> list[QuantumChannel]:
    return [phase_flip(p) for p in ps]
