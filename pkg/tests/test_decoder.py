"""Threshold policy and the three decoding stages."""

import math

import numpy as np
import pytest

from dnasim import (
    DecodeResult,
    DecoderParams,
    EventCounts,
    IndexResolution,
    ReadSet,
    SampleOutcome,
    build_codebook,
    build_inner_model,
    classify_events,
    codeword_payloads,
    corrupt_reads,
    make_channel_params,
    make_decoder_params,
    mismatch_distance,
    outer_decode,
    resolve_indices,
    sample_multinomial,
    sequence_reads,
    tau_for_threshold,
    trial_generator,
)


def test_threshold_formula():
    p = make_channel_params(64, 4.0, 2.0)
    dp = make_decoder_params(p, 0.125)
    assert dp.threshold == pytest.approx(4.0 * (1 - math.sqrt(0.25)))
    assert dp.threshold == pytest.approx(2.0)
    assert dp.tau == 0.125


@pytest.mark.parametrize("tau", [0.0, 0.5, -0.1, 0.7])
def test_tau_domain(tau):
    p = make_channel_params(64, 4.0, 2.0)
    with pytest.raises(ValueError, match=r"\(0, 1/2\)"):
        make_decoder_params(p, tau)


def test_tau_threshold_round_trip():
    p = make_channel_params(64, 4.0, 2.0)
    for tau in (0.01, 0.125, 0.3, 0.49):
        dp = make_decoder_params(p, tau)
        assert tau_for_threshold(p, dp.threshold) == pytest.approx(tau)
    with pytest.raises(ValueError, match="threshold"):
        tau_for_threshold(p, 4.0)
    with pytest.raises(ValueError, match="threshold"):
        tau_for_threshold(p, 0.0)


def test_direct_decoder_params_validation():
    with pytest.raises(ValueError, match=r"\(0, 1/2\)"):
        DecoderParams(tau=0.6, threshold=1.0)
    with pytest.raises(ValueError, match="positive"):
        DecoderParams(tau=0.1, threshold=0.0)


def _reads(index, payload):
    index = np.asarray(index, dtype=np.int64)
    payload = np.asarray(payload, dtype=np.int64)
    return ReadSet(index, payload, np.zeros(index.size, dtype=bool))


def test_resolve_hand_cases():
    dp = DecoderParams(tau=0.125, threshold=2.0)
    # index 0: payload 1 seen 3 times (decided); index 1: 1-1 tie (erased);
    # index 2: single read below threshold (erased)
    rs = _reads([0, 0, 0, 1, 1, 2], [1, 1, 1, 0, 1, 0])
    res = resolve_indices(rs, 3, 2, dp)
    assert res.decided.tolist() == [1, -1, -1]
    assert res.is_decided(0) and not res.is_decided(1)
    assert res.num_erased == 2
    assert res.erased_mask.tolist() == [False, True, True]


def test_resolve_true_wrong_tie_erases():
    # 2 copies of the true payload vs 2 mis-decodes agreeing on another payload:
    # strict-max rule erases rather than guessing
    dp = DecoderParams(tau=0.125, threshold=2.0)
    rs = _reads([0, 0, 0, 0], [0, 0, 1, 1])
    res = resolve_indices(rs, 1, 2, dp)
    assert res.decided.tolist() == [-1]


def test_threshold_monotonicity_decided_sets_nest():
    """Raising T can only lose winners, never create them."""
    rng = np.random.default_rng(10)
    for _ in range(50):
        n = int(rng.integers(4, 40))
        idx = rng.integers(0, 5, size=n)
        pay = rng.integers(0, 3, size=n)
        rs = _reads(idx, pay)
        lo = resolve_indices(rs, 5, 3, DecoderParams(tau=0.2, threshold=1.0))
        hi = resolve_indices(rs, 5, 3, DecoderParams(tau=0.2, threshold=3.0))
        decided_hi = hi.decided >= 0
        assert (lo.decided[decided_hi] == hi.decided[decided_hi]).all()


def test_mismatch_distance_and_outer_decode():
    p = make_channel_params(8, 2.0, 2.0)
    inner = build_inner_model(p, rate_b=1.25, error_prob=0.0)
    cb = build_codebook(p, inner, seed=21, num_codewords=8)
    truth = codeword_payloads(cb, 5)

    res = IndexResolution(truth.copy())
    assert mismatch_distance(res, truth) == 0
    out = outer_decode(res, cb)
    assert isinstance(out, DecodeResult)
    assert out.chosen == 5 and out.distance == 0

    # flip one position: distance 1 to the truth
    bent = truth.copy()
    bent[3] = (bent[3] + 1) % cb.payload_space
    assert mismatch_distance(IndexResolution(bent), truth) == 1

    # erased positions cost nothing
    half = truth.copy()
    half[:4] = -1
    assert mismatch_distance(IndexResolution(half), truth) == 0
    assert outer_decode(IndexResolution(half), cb).distance == 0


def test_undetected_equals_mismatch_to_truth():
    """The undetected count is exactly the mismatch distance to the truth."""
    p = make_channel_params(16, 4.0, 2.0)
    inner = build_inner_model(p, rate_b=1.25, error_prob=0.15)
    cb = build_codebook(p, inner, seed=4, num_codewords=32)
    dp = make_decoder_params(p, 0.125)
    for t in range(30):
        rng = trial_generator(88, t)
        j = int(rng.integers(0, cb.num_codewords))
        truth = codeword_payloads(cb, j)
        out = sample_multinomial(p, rng)
        rs = sequence_reads(truth, out, inner, cb.payload_space, rng)
        res = resolve_indices(rs, p.num_molecules, cb.payload_space, dp)
        ev = classify_events(out, rs, res, truth, dp)
        assert ev.undetected == mismatch_distance(res, truth)
        assert ev.erased == res.num_erased


def test_classify_events_manual_case():
    # M=3, P=2, T=2. Draws hit index 0 three times, index 1 once, index 2 twice.
    # One inner error sends a read from index 2 into index 1 (payload 0).
    dp = DecoderParams(tau=0.125, threshold=2.0)
    draws = np.array([0, 0, 0, 1, 2, 2], dtype=np.int64)
    errors = np.array([False, False, False, False, True, False])
    read_index = np.array([0, 0, 0, 1, 1, 2], dtype=np.int64)
    read_payload = np.array([1, 1, 1, 0, 0, 0], dtype=np.int64)
    rs = ReadSet(read_index, read_payload, errors)
    out = SampleOutcome(draws, np.bincount(draws, minlength=3))
    res = resolve_indices(rs, 3, 2, dp)
    truth = np.array([1, 0, 0], dtype=np.int64)
    ev = classify_events(out, rs, res, truth, dp)

    # index 1 sampled once: undersampled. index 2 sampled twice but lost one
    # copy to the error: correct-below-threshold. no index collects 2 wrong.
    assert ev.undersampled == 1
    assert ev.correct_below_threshold == 1
    assert ev.wrong_above_threshold == 0
    # resolutions: idx0 decided (3 copies of payload 1), idx1 gets two reads of
    # payload 0 (one real, one wrong) -> decided 0 which matches the truth,
    # idx2 has one read left -> erased
    assert res.decided.tolist() == [1, 0, -1]
    assert ev.erased == 1
    assert ev.undetected == 0
    assert ev.inner_errors == 1
    assert ev.lemma_ok
    assert ev.erasure_bound_holds(dp.threshold)
    assert ev.undetected_bound_holds(dp.threshold)


def test_event_counts_bound_methods():
    good = EventCounts(2, 0, 0, 3, 0, 1, True)
    assert good.erasure_bound_holds(2.0)  # 3 <= 2 + 1.5*1
    bad = EventCounts(0, 0, 0, 3, 0, 1, False)
    assert not bad.erasure_bound_holds(2.0)  # 3 > 0 + 1.5
    assert EventCounts(0, 0, 0, 0, 1, 2, True).undetected_bound_holds(2.0)
    assert not EventCounts(0, 0, 0, 0, 2, 2, True).undetected_bound_holds(2.0)


def test_counting_bounds_hold_across_random_trials():
    """Deterministic per-trial inequalities on a small battery."""
    p = make_channel_params(12, 3.0, 2.0)
    inner = build_inner_model(p, rate_b=1.25, error_prob=0.2)
    cb = build_codebook(p, inner, seed=9, num_codewords=16)
    for tau in (0.05, 0.125, 0.3):
        dp = make_decoder_params(p, tau)
        for t in range(60):
            rng = trial_generator(5150, t)
            j = int(rng.integers(0, cb.num_codewords))
            truth = codeword_payloads(cb, j)
            out = sample_multinomial(p, rng)
            rs = sequence_reads(truth, out, inner, cb.payload_space, rng)
            res = resolve_indices(rs, p.num_molecules, cb.payload_space, dp)
            ev = classify_events(out, rs, res, truth, dp)
            assert ev.lemma_ok
            assert ev.erasure_bound_holds(dp.threshold)
            assert ev.undetected_bound_holds(dp.threshold)
