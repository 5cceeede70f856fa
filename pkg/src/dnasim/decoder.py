"""Three-stage threshold decoder.

Stage 1 groups reads by index. Stage 2 resolves each sub-code: the winner must
reach the count threshold AND strictly exceed every competitor in its sub-code;
count ties erase. Stage 3 picks the codeword minimizing the mismatch distance
(erased positions contribute zero), ties to the smallest codeword id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dnasim import kernels
from dnasim.channel import ReadSet, SampleOutcome
from dnasim.model import ChannelParams, CodedIndexCodebook, payload_matrix


@dataclass(frozen=True)
class DecoderParams:
    """Threshold policy. threshold = (N/M) * (1 - sqrt(2*tau)), tau in (0, 1/2)."""

    tau: float
    threshold: float

    def __post_init__(self):
        if not 0.0 < self.tau < 0.5:
            raise ValueError(f"tau={self.tau} invalid: tau must lie in (0, 1/2)")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")


def make_decoder_params(params: ChannelParams, tau: float) -> DecoderParams:
    if not 0.0 < tau < 0.5:
        raise ValueError(f"tau={tau} invalid: tau must lie in (0, 1/2)")
    t = params.coverage * (1.0 - math.sqrt(2.0 * tau))
    return DecoderParams(tau, t)


def tau_for_threshold(params: ChannelParams, threshold: float) -> float:
    """Inverse of the threshold map, for tests that pin an effective T."""
    if not 0 < threshold < params.coverage:
        raise ValueError("threshold must lie in (0, N/M)")
    return 0.5 * (1.0 - threshold / params.coverage) ** 2


@dataclass
class IndexResolution:
    """Per-index outcome: decided[m] is the winning payload or -1 for erasure."""

    decided: np.ndarray

    def is_decided(self, m: int) -> bool:
        return bool(self.decided[m] >= 0)

    @property
    def num_erased(self) -> int:
        return int((self.decided < 0).sum())

    @property
    def erased_mask(self) -> np.ndarray:
        return self.decided < 0


def resolve_indices(
    reads: ReadSet, num_indices: int, payload_space: int, dp: DecoderParams
) -> IndexResolution:
    flat = reads.index * payload_space + reads.payload
    decided = kernels.resolve_batch(
        flat[None, :], num_indices, payload_space, dp.threshold
    )[0]
    return IndexResolution(decided)


def mismatch_distance(res: IndexResolution, payloads: np.ndarray) -> int:
    """Number of decided positions disagreeing with the candidate payload vector."""
    active = res.decided >= 0
    return int((active & (res.decided != payloads)).sum())


@dataclass
class DecodeResult:
    chosen: int
    distance: int


def outer_decode(res: IndexResolution, cb: CodedIndexCodebook) -> DecodeResult:
    book = payload_matrix(cb)
    chosen, dist, _ = kernels.decode_batch(
        res.decided[None, :], book, np.zeros(1, dtype=np.int64)
    )
    return DecodeResult(int(chosen[0]), int(dist[0]))


@dataclass
class EventCounts:
    """Cardinalities of the per-trial index event sets.

    undersampled: duplicate count below threshold.
    correct_below_threshold: sampled enough, but surviving true copies fell
        below threshold through inner errors.
    wrong_above_threshold: reads mis-decoded INTO this index from elsewhere
        reached the threshold.
    erased / undetected: decoder output vs truth.
    inner_errors: K, total mis-decoded reads.
    """

    undersampled: int
    correct_below_threshold: int
    wrong_above_threshold: int
    erased: int
    undetected: int
    inner_errors: int
    lemma_ok: bool

    def erasure_bound_holds(self, threshold: float) -> bool:
        """|erased| <= |undersampled| + (1 + 1/T) K, deterministic per trial."""
        return self.erased <= self.undersampled + (1.0 + 1.0 / threshold) * (
            self.inner_errors
        ) + 1e-9

    def undetected_bound_holds(self, threshold: float) -> bool:
        """|undetected| <= K / T, deterministic per trial."""
        return self.undetected <= self.inner_errors / threshold + 1e-9


def classify_events(
    outcome: SampleOutcome,
    reads: ReadSet,
    res: IndexResolution,
    truth_payloads: np.ndarray,
    dp: DecoderParams,
) -> EventCounts:
    table = kernels.classify_batch(
        outcome.draws[None, :],
        reads.errors[None, :],
        reads.index[None, :],
        res.decided[None, :],
        np.asarray(truth_payloads, dtype=np.int64)[None, :],
        dp.threshold,
    )[0]
    return EventCounts(
        undersampled=int(table[0]),
        correct_below_threshold=int(table[1]),
        wrong_above_threshold=int(table[2]),
        erased=int(table[3]),
        undetected=int(table[4]),
        inner_errors=int(table[5]),
        lemma_ok=bool(table[6]),
    )
