"""Sample-with-replacement channel and the abstracted sequencing stage.

A trial draws N molecule indices uniformly with replacement (multinomial
duplicate counts), then corrupts each read independently with probability
error_prob. Corruption is modeled at the inner-decoder output: the read is
replaced by a wrong (index, payload) molecule chosen per the error target.

All randomness flows through explicit seeds. A trial inside a campaign uses a
Philox stream keyed (master_seed, trial_id), so any single trial replays
bit-identically regardless of batching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dnasim.model import (
    ChannelParams,
    CodedIndexCodebook,
    ErrorTarget,
    InnerCodeModel,
    VirtualMolecule,
)

_MASK64 = (1 << 64) - 1


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_generator(master_seed: int, trial_id: int) -> np.random.Generator:
    """Counter-keyed per-trial stream; independent of batch layout."""
    key = np.array([master_seed & _MASK64, trial_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class SampleOutcome:
    """Draw vector plus its duplicate counts.

    duplicates[m] = #{n: draws[n] = m}. The multinomial sampler guarantees
    len(draws) == params.num_reads; the i.i.d.-Poisson surrogate's total
    intentionally differs from N.
    """

    draws: np.ndarray
    duplicates: np.ndarray

    def __post_init__(self):
        if self.duplicates.sum() != self.draws.size:
            raise ValueError("duplicates must be the histogram of draws")


def sample_multinomial(params: ChannelParams, seed) -> SampleOutcome:
    """N uniform draws with replacement; duplicates ~ Multinomial(N, 1/M)."""
    rng = as_generator(seed)
    draws = rng.integers(0, params.num_molecules, size=params.num_reads, dtype=np.int64)
    dup = np.bincount(draws, minlength=params.num_molecules)
    return SampleOutcome(draws, dup)


def sample_poisson_iid(params: ChannelParams, seed) -> SampleOutcome:
    """Poissonized surrogate: duplicates i.i.d. Poisson(N/M), draws synthesized."""
    rng = as_generator(seed)
    dup = rng.poisson(params.coverage, size=params.num_molecules)
    draws = np.repeat(np.arange(params.num_molecules, dtype=np.int64), dup)
    rng.shuffle(draws)
    return SampleOutcome(draws, dup)


@dataclass
class ReadSet:
    """Inner-decoder outputs for one trial, as parallel arrays."""

    index: np.ndarray
    payload: np.ndarray
    errors: np.ndarray  # bool mask; True where the read was mis-decoded

    @property
    def total_inner_errors(self) -> int:
        return int(self.errors.sum())

    def molecules(self) -> list[VirtualMolecule]:
        return [
            VirtualMolecule(int(i), int(p)) for i, p in zip(self.index, self.payload)
        ]


def corrupt_reads(
    true_flat: np.ndarray,
    inner: InnerCodeModel,
    num_molecules: int,
    payload_space: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Apply per-read corruption to flat molecule ids.

    Returns (reads_flat, error_mask). Stream layout is fixed: one uniform block
    for the error mask, one integer block for the wrong-target choice, so all
    error targets consume the same number of variates.
    """
    n = true_flat.size
    span = num_molecules * payload_space
    err = rng.random(n) < inner.error_prob
    u = rng.integers(0, span - 1, size=n, dtype=np.int64)
    if inner.error_target is ErrorTarget.UNIFORM_WRONG:
        wrong = u + (u >= true_flat)
    else:
        victim = inner.victim_index * payload_space + inner.victim_payload
        if not 0 <= victim < span:
            raise ValueError("victim molecule outside the codebook geometry")
        # self-target fallback keeps the corrupted read wrong and in-sub-code
        fallback = inner.victim_index * payload_space + (
            (inner.victim_payload + 1) % payload_space
        )
        wrong = np.where(true_flat == victim, fallback, victim)
    reads = np.where(err, wrong, true_flat)
    return reads, err


def sequence_reads(
    stored,
    outcome: SampleOutcome,
    inner: InnerCodeModel,
    payload_space: int,
    seed,
) -> ReadSet:
    """Sequence-and-inner-decode the sampled molecules of one stored codeword.

    stored is the codeword's payload vector (entry m = payload at index m) or a
    list of VirtualMolecule.
    """
    if isinstance(stored, (list, tuple)):
        stored = np.array([p for (_i, p) in stored], dtype=np.int64)
    stored = np.asarray(stored, dtype=np.int64)
    rng = as_generator(seed)
    m = stored.size
    true_flat = outcome.draws * payload_space + stored[outcome.draws]
    reads, err = corrupt_reads(true_flat, inner, m, payload_space, rng)
    return ReadSet(reads // payload_space, reads % payload_space, err)


# --- optional bit-level demo -------------------------------------------------
#
# End-to-end realism check with an explicit binary inner code and exhaustive
# maximum-likelihood inner decoding over a BSC(w). Desk scale only (L <= 16);
# not part of the acceptance surface.


def run_bit_demo(
    cb: CodedIndexCodebook,
    params: ChannelParams,
    crossover: float,
    trials: int,
    seed: int,
    tau: float = 0.45,
) -> dict:
    """Simulate bit-level reads through a BSC and report Pe plus the realized
    inner error rate. The inner code is a random set of distinct L-bit strings,
    one per (index, payload) molecule; ML decoding is nearest-in-Hamming with
    ties to the lowest molecule id."""
    from dnasim import kernels
    from dnasim.decoder import make_decoder_params
    from dnasim.model import payload_matrix

    L = params.molecule_len
    if L > 16:
        raise ValueError("bit demo caps molecule_len at 16")
    span = params.num_molecules * cb.payload_space
    if span > (1 << L):
        raise ValueError("inner code needs 2**L >= M * payload_space")
    rng = np.random.default_rng(seed)
    table = rng.choice(1 << L, size=span, replace=False).astype(np.int64)

    # Hamming distance between every possible received word and every codeword
    # of the inner code, via popcount on the XOR table.
    words = np.arange(1 << L, dtype=np.int64)
    xor = words[:, None] ^ table[None, :]
    pop = np.zeros_like(xor)
    for b in range(L):
        pop += (xor >> b) & 1
    nearest = pop.argmin(axis=1)  # received word -> decoded molecule id

    book = payload_matrix(cb)
    dp = make_decoder_params(params, tau)
    n_err = 0
    n_reads = 0
    n_fail = 0
    for t in range(trials):
        trng = trial_generator(seed, t)
        j = int(trng.integers(0, cb.num_codewords))
        stored = book[j]
        draws = trng.integers(0, params.num_molecules, size=params.num_reads)
        sent = table[draws * cb.payload_space + stored[draws]]
        flips = trng.random((params.num_reads, L)) < crossover
        noise = (flips.astype(np.int64) << np.arange(L, dtype=np.int64)).sum(axis=1)
        decoded = nearest[sent ^ noise]
        n_err += int((decoded != draws * cb.payload_space + stored[draws]).sum())
        n_reads += params.num_reads
        resolved = kernels.resolve_batch(
            decoded[None, :], params.num_molecules, cb.payload_space, dp.threshold
        )
        chosen, _, _ = kernels.decode_batch(
            resolved, book, np.array([j], dtype=np.int64)
        )
        n_fail += int(chosen[0] != j)
    return {
        "trials": trials,
        "pe": n_fail / trials,
        "inner_error_rate": n_err / n_reads,
        "crossover": crossover,
    }
