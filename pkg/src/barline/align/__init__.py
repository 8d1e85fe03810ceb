"""Score alignment: observation models, transitions, Viterbi, results."""

from .audio import (GmmBank, HmmModel, align_audio, build_hmm,
                    sounding_mask_from_energy, train_gmm_bank)
from .gmm import GmmParams, fit_gmm, gmm_log_densities, gmm_log_density
from .result import AlignmentResult, result_from_json, result_to_json
from .symbolic import align_symbolic, extract_correspondences
from .transitions import TransitionParams, initial_distribution, \
    transition_matrix
from .viterbi import viterbi

__all__ = [
    "AlignmentResult",
    "GmmBank",
    "GmmParams",
    "HmmModel",
    "TransitionParams",
    "align_audio",
    "align_symbolic",
    "build_hmm",
    "extract_correspondences",
    "fit_gmm",
    "gmm_log_densities",
    "gmm_log_density",
    "initial_distribution",
    "result_from_json",
    "result_to_json",
    "sounding_mask_from_energy",
    "train_gmm_bank",
    "transition_matrix",
    "viterbi",
]
