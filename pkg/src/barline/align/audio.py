"""Frame-clocked dual-layer HMM alignment of audio features to a score.

Top layer walks score events through the structured transition model;
inside each event a two-state onset/sustain chain models dwell, with one
shared silence state covering gaps, lead-in and tail.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..audio.cqt import CqtConfig
from ..audio.pca import PcaModel, pca_fit, pca_transform
from ..errors import DegenerateData, DimensionMismatch
from ..events import ReferenceEvents
from .gmm import VARIANCE_FLOOR, GmmParams, fit_gmm, gmm_log_densities
from .result import AlignmentResult
from .transitions import TransitionParams, initial_distribution, \
    transition_matrix
from .viterbi import viterbi

_ONSET_SELF = float(np.exp(-1.0))  # expected onset dwell: one frame
_P_GAP = 0.1          # sustain exit mass routed through silence
_SILENCE_DWELL_SEC = 0.5
_P_INIT_SILENCE = 0.5
_COS_FLOOR = 1e-3

KIND_ONSET = 0
KIND_SUSTAIN = 1
KIND_SILENCE = 2


@dataclass(frozen=True)
class GmmBank:
    """Observation model: one mixture per coarse class plus the PCA map.

    The sounding-class density is modulated downstream by each event's
    pitch-template cosine match, which restores pitch specificity
    without training one mixture per event.
    """

    sounding: GmmParams
    silence: GmmParams
    pca: PcaModel

    @property
    def n_bins(self) -> int:
        return len(self.pca.mean)


def _single_component(vector: np.ndarray) -> GmmParams:
    vector = np.asarray(vector, dtype=np.float64)
    return GmmParams(
        weights=np.ones(1),
        means=vector[None, :],
        variances=np.full((1, len(vector)), max(VARIANCE_FLOOR, 1e-2)))


def sounding_mask_from_energy(features: np.ndarray,
                              fraction: float = 0.3) -> np.ndarray:
    """Label frames sounding when their peak rises above the floor.

    The cut sits a fraction of the global dynamic range over the
    quietest value, so silent recordings label nothing.
    """
    features = np.asarray(features, dtype=np.float64)
    floor = features.min()
    cut = floor + fraction * (features.max() - floor)
    return features.max(axis=1) > cut


def train_gmm_bank(features: np.ndarray, sounding_mask: np.ndarray,
                   dims: int = 30, components: int = 8,
                   seed: int = 0) -> GmmBank:
    """Fit the two-class observation model from labeled log-CQT frames.

    sounding_mask flags frames where any note is sounding; the rest
    train the silence class.  An empty class degrades to a warned
    single-component mixture so alignment stays runnable.
    """
    features = np.asarray(features, dtype=np.float64)
    mask = np.asarray(sounding_mask, dtype=bool)
    if features.ndim != 2 or mask.shape != (len(features),):
        raise DimensionMismatch(
            f"features {features.shape} vs mask {mask.shape}")
    pca = pca_fit(features, dims)
    reduced = pca_transform(pca, features)

    def fit_class(rows: np.ndarray, fallback: np.ndarray,
                  label: str) -> GmmParams:
        if len(rows) == 0:
            warnings.warn(f"no {label} frames", DegenerateData)
            return _single_component(fallback)
        k = min(components, len(rows))
        return fit_gmm(rows, k, seed)

    global_mean = reduced.mean(axis=0)
    floor_frame = np.full((1, features.shape[1]), np.log10(1e-5))
    silence_proxy = pca_transform(pca, floor_frame)[0]
    sounding = fit_class(reduced[mask], global_mean, "sounding")
    silence = fit_class(reduced[~mask], silence_proxy, "silence")
    return GmmBank(sounding=sounding, silence=silence, pca=pca)


def _pitch_templates(reference: ReferenceEvents, n_bins: int,
                     pitch_offset: int = 21) -> np.ndarray:
    templates = np.zeros((len(reference), n_bins))
    for i, event in enumerate(reference):
        for pitch in event.pitches:
            b = pitch - pitch_offset
            if 0 <= b < n_bins:
                templates[i, b] = 1.0
    norms = np.linalg.norm(templates, axis=1, keepdims=True)
    return np.where(norms > 0, templates / np.where(norms > 0, norms, 1.0),
                    0.0)


def _seconds_per_beat(reference: ReferenceEvents) -> float:
    for event in reference:
        if event.onset_beats > 0:
            return event.onset_sec / float(event.onset_beats)
    return 0.5


@dataclass(frozen=True)
class HmmModel:
    """Flattened dual-layer chain over 2N+1 states.

    State 2i is event i's onset, 2i+1 its sustain, state 2N the shared
    silence.  scorer maps a feature matrix to per-state observation
    log-densities when an observation model was attached.
    """

    n_events: int
    top: np.ndarray
    log_init: np.ndarray
    log_trans: np.ndarray
    state_event: np.ndarray
    state_kind: np.ndarray
    scorer: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def n_states(self) -> int:
        return 2 * self.n_events + 1


def _bank_scorer(bank: GmmBank, reference: ReferenceEvents
                 ) -> Callable[[np.ndarray], np.ndarray]:
    templates = _pitch_templates(reference, bank.n_bins)

    def score(features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2:
            raise DimensionMismatch(f"features {features.shape}")
        if features.shape[1] == bank.n_bins:
            raw = features
            reduced = pca_transform(bank.pca, features)
        elif features.shape[1] == bank.pca.dims:
            reduced = features
            raw = bank.pca.mean + reduced @ bank.pca.components
        else:
            raise DimensionMismatch(
                f"features {features.shape} match neither {bank.n_bins} "
                f"bins nor {bank.pca.dims} dims")

        sounding = gmm_log_densities(bank.sounding, reduced)
        silence = gmm_log_densities(bank.silence, reduced)
        # cosine match on linear magnitudes; log compression flattens
        # the contrast between a sounding bin and its leakage
        linear = 10.0 ** raw
        norms = np.linalg.norm(linear, axis=1, keepdims=True)
        unit = linear / np.where(norms > 0, norms, 1.0)
        cosine = np.clip(unit @ templates.T, _COS_FLOOR, 1.0)

        n = len(reference)
        log_obs = np.empty((len(features), 2 * n + 1))
        per_event = sounding[:, None] + np.log(cosine)
        log_obs[:, 0:2 * n:2] = per_event
        log_obs[:, 1:2 * n:2] = per_event
        log_obs[:, 2 * n] = silence
        return log_obs

    return score


def build_hmm(reference: ReferenceEvents,
              params: TransitionParams = TransitionParams(),
              frame_period: float = CqtConfig().frame_period,
              bank: Optional[GmmBank] = None) -> HmmModel:
    """Assemble the flattened dual-layer model for a reference.

    Sustain self-loops follow exp(-frame_period / expected_dwell) with
    the dwell taken from each event's nominal duration, so the chain's
    expected residence matches the score's rhythm.
    """
    n = len(reference)
    if n < 1:
        raise ValueError("empty reference")
    top = transition_matrix(n, params)
    init_top = initial_distribution(n, params)
    spb = _seconds_per_beat(reference)

    n_states = 2 * n + 1
    silence = 2 * n
    trans = np.zeros((n_states, n_states))
    for i, event in enumerate(reference):
        onset, sustain = 2 * i, 2 * i + 1
        trans[onset, onset] = _ONSET_SELF
        trans[onset, sustain] = 1.0 - _ONSET_SELF

        dwell = max(float(event.duration_beats) * spb, frame_period)
        stay = float(np.exp(-frame_period / dwell))
        trans[sustain, sustain] = stay
        exit_mass = 1.0 - stay
        trans[sustain, silence] = exit_mass * _P_GAP
        trans[sustain, 0:2 * n:2] = exit_mass * (1.0 - _P_GAP) * top[i]

    trans[silence, silence] = float(
        np.exp(-frame_period / _SILENCE_DWELL_SEC))
    # silence is shared and positionless, so re-entry is uniform and
    # the observations arbitrate where the music resumes
    trans[silence, 0:2 * n:2] = (1.0 - trans[silence, silence]) / n

    init = np.zeros(n_states)
    init[silence] = _P_INIT_SILENCE
    init[0:2 * n:2] = (1.0 - _P_INIT_SILENCE) * init_top

    state_event = np.repeat(np.arange(n), 2)
    state_event = np.append(state_event, -1)
    state_kind = np.tile([KIND_ONSET, KIND_SUSTAIN], n)
    state_kind = np.append(state_kind, KIND_SILENCE)

    with np.errstate(divide="ignore"):
        log_init = np.log(init)
        log_trans = np.log(trans)
    return HmmModel(
        n_events=n, top=top, log_init=log_init, log_trans=log_trans,
        state_event=state_event, state_kind=state_kind,
        scorer=_bank_scorer(bank, reference) if bank is not None else None)


def align_audio(features: np.ndarray, reference: ReferenceEvents,
                gmm_bank: GmmBank,
                params: TransitionParams = TransitionParams(),
                frame_period: float = CqtConfig().frame_period
                ) -> AlignmentResult:
    """Frame-level Viterbi alignment of log-CQT features to a reference.

    features may be raw T x 88 log-CQT (reduced internally through the
    bank's PCA) or already PCA-reduced rows.  Each event's aligned onset
    is the first frame entering its onset state; events never entered
    report as missing.
    """
    if not reference:
        raise ValueError("empty reference")
    model = build_hmm(reference, params, frame_period, bank=gmm_bank)
    log_obs = model.scorer(np.asarray(features, dtype=np.float64))
    state_path, log_prob = viterbi(log_obs, model.log_init, model.log_trans)

    onsets: Dict[int, float] = {}
    for t, state in enumerate(state_path):
        if model.state_kind[state] == KIND_ONSET:
            event = int(model.state_event[state])
            onsets.setdefault(event, t * frame_period)

    matched: Tuple = tuple((None, s) for s in sorted(onsets))
    missing = tuple(s for s in range(len(reference)) if s not in onsets)
    top_path = tuple(int(model.state_event[s]) for s in state_path)
    return AlignmentResult(
        path=top_path, matched=matched, missing=missing, extra=(),
        onsets_sec=onsets, log_prob=log_prob)
