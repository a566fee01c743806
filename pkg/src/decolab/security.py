"""Secure-bit rates and single-shot key lengths from conditional entropies.

The purifier ``C`` of ``rho_AB`` plays the eavesdropper.  Bits from measuring
Z on A are secure against C at rate ``H(Z|C)``; an adversary who picks the
measured basis drives the rate down to a discord-type minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import discord as dc
from . import entropies as en
from . import qmat
from .errors import BadDelta, NotBipartite, NotPure
from .infotypes import InfoType, measure_coherently, pinch
from .states import DensityOperator, as_density, purify
from .theorems import PURITY_TOL, VerificationReport, inequality

FIXED_BASIS = "fixed_basis"
ADVERSARIAL_ONE_WAY = "adversarial_one_way"
ADVERSARIAL_TWO_WAY = "adversarial_two_way"
MODES = (FIXED_BASIS, ADVERSARIAL_ONE_WAY, ADVERSARIAL_TWO_WAY)

# slack used when flooring a key length computed from an optimised entropy
FLOOR_GUARD = 1e-9


@dataclass
class SecurityReport:
    mode: str
    asymptotic_rate: float | None
    single_shot_length: int | None = None
    distance_param: float | None = None
    adversarial_basis: InfoType | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .infotypes import infotype_to_json
        from .theorems import _jsonable
        return {"mode": self.mode, "rate": self.asymptotic_rate, "length": self.single_shot_length,
                "delta": self.distance_param,
                "basis": None if self.adversarial_basis is None else infotype_to_json(self.adversarial_basis),
                "diagnostics": _jsonable(self.diagnostics)}


def _check_mode(mode: str, z: InfoType | None) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    if mode == FIXED_BASIS and z is None:
        raise ValueError("fixed_basis mode needs an InfoType z on A")


def _with_purifier(rho_ab) -> DensityOperator:
    """``|psi><psi|`` on ``A x B x C`` after checking the purification is pure."""
    rho = as_density(rho_ab)
    if len(rho.dims) != 2:
        raise NotBipartite(f"expected a bipartite state, got dims {list(rho.dims)}")
    full = purify(rho).density()
    top = float(np.max(np.linalg.eigvalsh(full.matrix)))
    if top < 1.0 - PURITY_TOL:
        raise NotPure(f"purification has largest eigenvalue {top:.12g}")
    return full


def _fixed(rho_ab, z: InfoType, kind: str) -> float:
    dec = en.cq_decompose(_with_purifier(rho_ab), z, 2)
    return en.conditional_entropy(kind, dec)


def secure_rate(rho_ab, mode: str = ADVERSARIAL_ONE_WAY, z: InfoType | None = None,
                cfg: dc.BasisOptimizerConfig | None = None) -> SecurityReport:
    """Asymptotic secure-bit rate against the purifying system.

    ``fixed_basis`` gives ``H(Z|C)``; ``adversarial_one_way`` minimises over
    bases on A (the one-way deficit); ``adversarial_two_way`` over product
    bases (the relative entropy of quantumness).  Rates are clamped at 0 to
    absorb rounding.
    """
    _check_mode(mode, z)
    if mode == FIXED_BASIS:
        return SecurityReport(mode, max(_fixed(rho_ab, z, en.VN), 0.0), adversarial_basis=z)
    if mode == ADVERSARIAL_ONE_WAY:
        rep = dc.deficit(rho_ab, cfg)
    else:
        rep = dc.two_way_discord(rho_ab, en.VN, cfg)
    return SecurityReport(mode, max(rep.value, 0.0), adversarial_basis=rep.argmin_basis,
                          diagnostics={"optimizer": rep.optimizer_diag})


def hash_penalty(delta: float) -> float:
    """``2 log2(1 / (2 delta))``, the length lost to privacy amplification."""
    if not (0.0 < delta <= 0.5) or not math.isfinite(delta):
        raise BadDelta(f"distance parameter must lie in (0, 1/2], got {delta}")
    return 2.0 * math.log2(1.0 / (2.0 * delta))


def single_shot_length(rho_ab, target_delta: float, mode: str = ADVERSARIAL_ONE_WAY, z: InfoType | None = None,
                       cfg: dc.BasisOptimizerConfig | None = None) -> SecurityReport:
    """Key length extractable by two-universal hashing at distance ``target_delta``.

    ``l_exact = H_min - 2 log2(1/(2 delta))`` and ``l = max(0, floor(l_exact))``.
    """
    penalty = hash_penalty(target_delta)
    _check_mode(mode, z)
    if mode == FIXED_BASIS:
        hmin, basis, diag = _fixed(rho_ab, z, en.MIN), z, {}
    elif mode == ADVERSARIAL_ONE_WAY:
        rep = dc.min_entropy_discord(rho_ab, cfg)
        hmin, basis, diag = rep.value, rep.argmin_basis, {"optimizer": rep.optimizer_diag}
    else:
        rep = dc.two_way_discord(rho_ab, en.MIN, cfg)
        hmin, basis, diag = rep.value, rep.argmin_basis, {"optimizer": rep.optimizer_diag}
    hmin = max(hmin, 0.0)
    exact = hmin - penalty
    length = max(0, math.floor(exact + FLOOR_GUARD))
    identity = exact + penalty
    diag.update(h_min=hmin, length_exact=exact, penalty=penalty, identity_value=identity,
                identity_gap=abs(identity - hmin))
    return SecurityReport(mode, None, length, target_delta, basis, diag)


@dataclass
class TaskTriangle:
    """Exponents of three tasks that share one rate, in bits."""

    decoherence_test: float
    entanglement_rate: float
    secure_bits: float
    copies: int

    @property
    def exponents(self) -> tuple[float, float, float]:
        return (self.decoherence_test, self.entanglement_rate, self.secure_bits)

    @property
    def rate(self) -> float:
        return float(np.mean(self.exponents))

    @property
    def max_gap(self) -> float:
        e = self.exponents
        return max(e) - min(e)

    @property
    def probability(self) -> float:
        """``2^(-n rate)`` (base 2, matching the entropies)."""
        return 2.0 ** (-self.copies * self.rate)

    @property
    def consistent(self) -> bool:
        return self.max_gap <= 1e-8

    def to_dict(self) -> dict:
        return {"relative_entropy": self.decoherence_test, "epr_rate": self.entanglement_rate,
                "secure_rate": self.secure_bits, "copies": self.copies, "rate": self.rate,
                "probability": self.probability, "max_gap": self.max_gap, "consistent": self.consistent}


def task_triangle(rho_ab, z: InfoType, n: int = 1) -> TaskTriangle:
    """Relative entropy to the pinched state, ``-H(M_Z|AB)`` and ``H(Z|C)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"copy count must be a positive integer, got {n}")
    rho = as_density(rho_ab)
    full = _with_purifier(rho)
    rel = qmat.relative_entropy(rho.matrix, pinch(rho, z).matrix)
    lifted = measure_coherently(rho, z)
    # -H(M|AB) = H(AB) - H(M AB) on the post-measurement state
    epr = lifted.reduce(list(range(1, len(lifted.dims)))).entropy() - lifted.entropy()
    sec = en.cond_entropy_vn(en.cq_decompose(full, z, 2))
    return TaskTriangle(float(rel), float(epr), float(sec), int(n))


def mixed_strategies(rho_ab, mixtures: Sequence[tuple[Sequence[InfoType], Sequence[float]]],
                     cfg: dc.BasisOptimizerConfig | None = None) -> list[VerificationReport]:
    """An adversary mixing bases cannot push the rate below the best single basis.

    For each ``(bases, weights)`` pair checks
    ``sum_i p_i H(X_i|C) >= min_Z H(Z|C) - 1e-8``.  One minimisation serves
    all mixtures; it is seeded with every supplied basis, so the reported
    minimum never exceeds any of them.
    """
    full = _with_purifier(rho_ab)
    parsed = []
    for bases, weights in mixtures:
        w = np.asarray(weights, dtype=float)
        if len(bases) == 0 or len(bases) != len(w):
            raise ValueError("need one weight per basis and at least one basis")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")
        rates = np.array([en.cond_entropy_vn(en.cq_decompose(full, b, 2)) for b in bases])
        parsed.append((w, rates))
    seeds = [b.vectors() for bases, _ in mixtures for b in bases]
    best = dc.deficit(rho_ab, cfg, seeds=seeds)
    return [inequality("security.mixed_strategy", float(w @ rates), best.value, 1e-8,
                       bases=len(rates), best_single=float(rates.min()))
            for w, rates in parsed]


def mixed_strategy(rho_ab, bases: Sequence[InfoType], weights: Sequence[float],
                   cfg: dc.BasisOptimizerConfig | None = None) -> VerificationReport:
    """Single-mixture form of :func:`mixed_strategies`."""
    return mixed_strategies(rho_ab, [(bases, weights)], cfg)[0]
