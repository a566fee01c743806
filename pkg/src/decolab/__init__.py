"""Decoherence as missing information: entropies, identities and discord measures.

Submodules:
    qmat: Hermitian linear algebra and divergences.
    states: density operators, purification, random ensembles and JSON I/O.
    infotypes: projective decompositions, pinching and mutually unbiased bases.
    entropies: conditional entropies and guessing probability.
    theorems: executable checks of the decoherence identities.
    discord: basis-optimised discord measures.
    channels: Kraus channels and their Choi states.
    security: secure-bit rates and single-shot key lengths.
    cli: the ``decolab`` command.
"""

from .errors import (BadDelta, BadPartition, BadRank, DecolabError, DimMismatch, EmptyKeep, InconsistentMarginal,
                     NoConvergence, NonHermitian, NonSquare, NotAState, NotBipartite, NotPure, NotRankOne,
                     NotTracePreserving)
from .states import DensityOperator, PureState, bell_state, purify, random_state
from .infotypes import InfoType, basis, coarse_grain, fourier_mu_basis, pinch, standard_basis
from .entropies import cond_entropy_quad, cond_entropy_vn, cq_decompose, h_min, p_guess
from .theorems import VerificationReport
from .discord import BasisOptimizerConfig, DiscordReport, measure
from .channels import QuantumChannel, choi_triple
from .security import SecurityReport

__version__ = "0.1.0"

__all__ = [
    "BadDelta", "BadPartition", "BadRank", "DecolabError", "DimMismatch", "EmptyKeep", "InconsistentMarginal",
    "NoConvergence", "NonHermitian", "NonSquare", "NotAState", "NotBipartite", "NotPure", "NotRankOne",
    "NotTracePreserving",
    "DensityOperator", "PureState", "bell_state", "purify", "random_state",
    "InfoType", "basis", "coarse_grain", "fourier_mu_basis", "pinch", "standard_basis",
    "cond_entropy_quad", "cond_entropy_vn", "cq_decompose", "h_min", "p_guess",
    "VerificationReport", "BasisOptimizerConfig", "DiscordReport", "measure",
    "QuantumChannel", "choi_triple", "SecurityReport",
]
