"""Domain model: channel geometry, inner-code abstraction, coded-index codebooks.

A stored object is a length-M vector of "virtual molecules". Molecule m of
codeword j carries index m plus a payload in [0, payload_space); the payload is
a keyed counter-mode hash of (seed, j, m), so codebooks are random-accessible
and never materialized unless asked for. Sub-codes are disjoint by
construction: the index is part of the molecule.

All rates are in nats. Derived integers use round-half-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from dnasim import kernels

# int64 id space for flat molecule/codeword ids
_LOG_ID_CAP = 43.0


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


class VirtualMolecule(NamedTuple):
    index: int
    payload: int


class ErrorTarget(Enum):
    """Where a corrupted read lands.

    UNIFORM_WRONG draws uniformly over all wrong molecules. FIXED_ADVERSARIAL
    maps every corruption onto one designated molecule, concentrating hits in a
    single sub-code (the worst case for wrong-above-threshold events).
    """

    UNIFORM_WRONG = "uniform-wrong"
    FIXED_ADVERSARIAL = "fixed-adversarial"


@dataclass(frozen=True)
class ChannelParams:
    """Sampling geometry: N reads drawn uniformly with replacement from M molecules."""

    num_molecules: int
    alpha: float
    beta: float
    num_reads: int
    molecule_len: int

    @property
    def coverage(self) -> float:
        """Mean reads per molecule, N/M."""
        return self.num_reads / self.num_molecules

    def __post_init__(self):
        if self.num_molecules < 1:
            raise ValueError("num_molecules must be >= 1")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1 (N >= M)")
        if self.beta <= 1:
            raise ValueError("beta must be > 1")
        if self.num_reads < self.num_molecules:
            raise ValueError("num_reads must be >= num_molecules")
        if self.molecule_len < 1:
            raise ValueError("molecule_len must be >= 1")


def make_channel_params(num_molecules: int, alpha: float, beta: float) -> ChannelParams:
    """Derive N = round(alpha*M) and L = max(1, round(beta*ln M))."""
    if num_molecules < 1:
        raise ValueError("num_molecules must be >= 1")
    if alpha < 1:
        raise ValueError("alpha must be >= 1 (N >= M)")
    if beta <= 1:
        raise ValueError("beta must be > 1")
    n = round_half_up(alpha * num_molecules)
    length = max(1, round_half_up(beta * math.log(num_molecules)))
    return ChannelParams(num_molecules, alpha, beta, n, length)


@dataclass(frozen=True)
class InnerCodeModel:
    """Inner decoding abstracted to its output statistics.

    Each read is independently mis-decoded with probability error_prob; the
    wrong output is chosen per error_target. When error_prob is derived from
    the decay law exp(-c * L**zeta), zeta and c record the law.
    """

    rate_b: float
    error_prob: float
    error_target: ErrorTarget = ErrorTarget.UNIFORM_WRONG
    victim_index: int = 0
    victim_payload: int = 0
    zeta: float | None = None
    c: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.error_prob <= 1.0:
            raise ValueError("error_prob must lie in [0, 1]")
        if self.rate_b <= 0:
            raise ValueError("rate_b must be positive")
        if self.victim_index < 0 or self.victim_payload < 0:
            raise ValueError("victim molecule coordinates must be nonnegative")


def build_inner_model(
    params: ChannelParams,
    rate_b: float,
    error_prob: float | None = None,
    zeta: float | None = None,
    c: float | None = None,
    error_target: ErrorTarget = ErrorTarget.UNIFORM_WRONG,
    victim_index: int = 0,
    victim_payload: int = 0,
) -> InnerCodeModel:
    """Validate rate_b against the length scaling and resolve error_prob.

    rate_b * beta must exceed 1, otherwise the index alone exhausts the
    molecule and no payload space is left. error_prob is either given directly
    or derived as exp(-c * L**zeta) with zeta in (0, 1], c > 0.
    """
    if rate_b * params.beta <= 1.0:
        raise ValueError(
            f"rate_b*beta = {rate_b * params.beta:.4f} <= 1: payload space would "
            "be empty; require rate_b > 1/beta"
        )
    if error_prob is None:
        if zeta is None or c is None:
            raise ValueError("give error_prob directly or both zeta and c")
        if not 0.0 < zeta <= 1.0:
            raise ValueError("zeta must lie in (0, 1]")
        if c <= 0:
            raise ValueError("c must be positive")
        error_prob = math.exp(-c * params.molecule_len**zeta)
    return InnerCodeModel(
        rate_b, error_prob, error_target, victim_index, victim_payload, zeta, c
    )


def payload_space_for(params: ChannelParams, inner: InnerCodeModel) -> int:
    """Sub-code size floor(ish): max(2, round(exp(rate_b*L)/M))."""
    log_total = inner.rate_b * params.molecule_len
    if log_total > _LOG_ID_CAP:
        raise ValueError("rate_b * L too large for the int64 molecule id space")
    return max(2, round_half_up(math.exp(log_total) / params.num_molecules))


@dataclass(frozen=True)
class CodedIndexCodebook:
    """Keyed random codebook over (index, payload) molecule vectors."""

    seed: int
    rate: float
    num_codewords: int
    num_indices: int
    molecule_len: int
    payload_space: int

    def __post_init__(self):
        if self.num_codewords < 2:
            raise ValueError("num_codewords must be >= 2")
        if self.payload_space < 1:
            raise ValueError("payload_space must be >= 1")
        if self.num_indices < 1:
            raise ValueError("num_indices must be >= 1")

    @property
    def block_nats(self) -> float:
        """M * L, the denominator normalizing ln|C| into a rate."""
        return self.num_indices * self.molecule_len


def build_codebook(
    params: ChannelParams,
    inner: InnerCodeModel,
    seed: int,
    rate: float | None = None,
    num_codewords: int | None = None,
) -> CodedIndexCodebook:
    """Construct the codebook from a target rate or an explicit size.

    num_codewords = max(2, round(exp(M*L*rate))); when the size is given the
    stored rate is ln(size)/(M*L).
    """
    ml = params.num_molecules * params.molecule_len
    if (rate is None) == (num_codewords is None):
        raise ValueError("give exactly one of rate, num_codewords")
    if rate is not None:
        if rate < 0:
            raise ValueError("rate must be nonnegative")
        if ml * rate > _LOG_ID_CAP:
            raise ValueError("M*L*rate too large for the int64 codeword id space")
        num_codewords = max(2, round_half_up(math.exp(ml * rate)))
    else:
        if num_codewords < 2:
            raise ValueError("num_codewords must be >= 2")
    stored_rate = math.log(num_codewords) / ml
    return CodedIndexCodebook(
        seed=int(seed) & ((1 << 64) - 1),
        rate=stored_rate,
        num_codewords=int(num_codewords),
        num_indices=params.num_molecules,
        molecule_len=params.molecule_len,
        payload_space=payload_space_for(params, inner),
    )


def codeword_payloads(cb: CodedIndexCodebook, j: int) -> np.ndarray:
    """Payload vector of codeword j, shape (M,). Entry m belongs to sub-code m."""
    if not 0 <= j < cb.num_codewords:
        raise ValueError(f"codeword id {j} out of range [0, {cb.num_codewords})")
    return kernels.payload_block(cb.seed, j, j + 1, cb.num_indices, cb.payload_space)[0]


def codeword(cb: CodedIndexCodebook, j: int) -> list[VirtualMolecule]:
    """Codeword j as explicit molecules; molecule m has index m."""
    pay = codeword_payloads(cb, j)
    return [VirtualMolecule(m, int(p)) for m, p in enumerate(pay)]


def payload_matrix(cb: CodedIndexCodebook, limit: int = 1 << 20) -> np.ndarray:
    """Materialize all codewords as a (|C|, M) payload array (desk scale only)."""
    if cb.num_codewords > limit:
        raise ValueError(
            f"refusing to materialize {cb.num_codewords} codewords (limit {limit})"
        )
    return kernels.payload_block(
        cb.seed, 0, cb.num_codewords, cb.num_indices, cb.payload_space
    )


def flat_id(cb: CodedIndexCodebook, index: int, pay: int) -> int:
    """Flat molecule id used by the kernels: index * payload_space + payload."""
    return index * cb.payload_space + pay
