"""Sampling-channel simulation and reliability bounds for coded-index storage.

The package models M stored molecules read N times with replacement, an inner
per-molecule code that mis-decodes each read independently, a three-stage
threshold decoder (resolve indexed sub-codes, erase unreliable ones, pick the
nearest outer codeword), and the analytic machinery that predicts how often
each stage fails.
"""

from dnasim.bounds import (
    ExponentCurve,
    ExponentValue,
    MinimizationResult,
    MinimizationSpec,
    TailBounds,
    achievable_exponent,
    binary_entropy,
    binary_kl,
    binary_kl_exp,
    capacity_gap,
    expurgated_exponent,
    exponent_curve,
    kl_expansion_ratio,
    lemma_tail_bounds,
    multidraw_mutual_info,
    poisson_tail_exponent,
    random_coding_exponent,
    solve_clipped_min,
)
from dnasim.channel import (
    ReadSet,
    SampleOutcome,
    corrupt_reads,
    run_bit_demo,
    sample_multinomial,
    sample_poisson_iid,
    sequence_reads,
    trial_generator,
)
from dnasim.config import ConfigError, RunConfig
from dnasim.decoder import (
    DecodeResult,
    DecoderParams,
    EventCounts,
    IndexResolution,
    classify_events,
    make_decoder_params,
    mismatch_distance,
    outer_decode,
    resolve_indices,
    tau_for_threshold,
)
from dnasim.harness import (
    TRIAL_COLUMNS,
    CampaignResult,
    ExpurgationResult,
    SpectrumResult,
    distance_spectrum,
    exact_small_instance,
    expurgate_codebook,
    run_campaign,
    tail_comparison,
    wilson_interval,
)
from dnasim.kernels import BACKEND
from dnasim.model import (
    ChannelParams,
    CodedIndexCodebook,
    ErrorTarget,
    InnerCodeModel,
    VirtualMolecule,
    build_codebook,
    build_inner_model,
    codeword,
    codeword_payloads,
    flat_id,
    make_channel_params,
    payload_matrix,
    payload_space_for,
    round_half_up,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CampaignResult",
    "ChannelParams",
    "CodedIndexCodebook",
    "ConfigError",
    "DecodeResult",
    "DecoderParams",
    "ErrorTarget",
    "EventCounts",
    "ExponentCurve",
    "ExponentValue",
    "ExpurgationResult",
    "IndexResolution",
    "InnerCodeModel",
    "MinimizationResult",
    "MinimizationSpec",
    "ReadSet",
    "RunConfig",
    "SampleOutcome",
    "SpectrumResult",
    "TRIAL_COLUMNS",
    "TailBounds",
    "VirtualMolecule",
    "achievable_exponent",
    "binary_entropy",
    "binary_kl",
    "binary_kl_exp",
    "build_codebook",
    "build_inner_model",
    "capacity_gap",
    "classify_events",
    "codeword",
    "codeword_payloads",
    "corrupt_reads",
    "distance_spectrum",
    "exact_small_instance",
    "expurgate_codebook",
    "expurgated_exponent",
    "exponent_curve",
    "flat_id",
    "kl_expansion_ratio",
    "lemma_tail_bounds",
    "make_channel_params",
    "make_decoder_params",
    "mismatch_distance",
    "multidraw_mutual_info",
    "outer_decode",
    "payload_matrix",
    "payload_space_for",
    "poisson_tail_exponent",
    "random_coding_exponent",
    "resolve_indices",
    "round_half_up",
    "run_bit_demo",
    "run_campaign",
    "sample_multinomial",
    "sample_poisson_iid",
    "sequence_reads",
    "solve_clipped_min",
    "tail_comparison",
    "tau_for_threshold",
    "trial_generator",
    "wilson_interval",
]
