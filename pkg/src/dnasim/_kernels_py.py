"""NumPy implementations of the simulation hot kernels.

This is the fallback backend; dnasim._ckernels is the compiled twin. The two
must stay bit-identical: every function here defines the reference semantics,
and tests/test_kernels.py enforces equality on random inputs.

Molecules are addressed by flat id = index * payload_space + payload.
"""

from __future__ import annotations

import numpy as np

BACKEND = "py"

# splitmix64 finalizer constants; the counter-based payload generator below
# must match the C backend bit for bit.
_GOLD1 = np.uint64(0x9E3779B97F4A7C15)
_GOLD2 = np.uint64(0xC2B2AE3D27D4EB4F)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


_M64 = (1 << 64) - 1


def _mix64(z):
    # array path; scalar wrap-around is done in Python ints to avoid numpy
    # scalar-overflow warnings
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _mix64_int(z):
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def payload_block(seed, j_lo, j_hi, num_indices, payload_space):
    """Payloads of codewords j_lo..j_hi-1 as an (j_hi-j_lo, num_indices) int64 array.

    Entry [i, m] is a deterministic hash of (seed, j_lo + i, m) reduced modulo
    payload_space, so any codeword is random-accessible without storing the book.
    """
    state = np.uint64(_mix64_int((seed & _M64) + 0x9E3779B97F4A7C15))
    j = np.arange(j_lo, j_hi, dtype=np.uint64) * _GOLD1
    m = np.arange(num_indices, dtype=np.uint64) * _GOLD2
    h = _mix64(state ^ j)[:, None]
    out = _mix64(h ^ m[None, :]) % np.uint64(payload_space)
    return out.astype(np.int64)


def resolve_batch(reads, num_indices, payload_space, threshold):
    """Per-trial index resolution on a (B, N) block of flat read ids.

    Returns a (B, num_indices) int64 array: the winning payload where one
    molecule's count reaches the threshold and strictly exceeds every other
    count in its sub-code, -1 (erased) otherwise.
    """
    reads = np.ascontiguousarray(reads, dtype=np.int64)
    B, N = reads.shape
    span = num_indices * payload_space
    flat = reads + np.arange(B, dtype=np.int64)[:, None] * span
    flat = np.sort(flat, axis=None)

    edge = np.empty(flat.size, dtype=bool)
    edge[0] = True
    np.not_equal(flat[1:], flat[:-1], out=edge[1:])
    starts = np.flatnonzero(edge)
    counts = np.diff(np.append(starts, flat.size))
    vals = flat[starts]

    row = vals // span
    mol = vals - row * span
    idx = mol // payload_space
    pay = mol - idx * payload_space
    key = row * num_indices + idx

    top = np.zeros(B * num_indices, dtype=np.int64)
    np.maximum.at(top, key, counts)
    is_top = counts == top[key]
    ties = np.zeros(B * num_indices, dtype=np.int64)
    np.add.at(ties, key[is_top], 1)
    winner = np.zeros(B * num_indices, dtype=np.int64)
    np.add.at(winner, key[is_top], pay[is_top])

    decided = np.where((top >= threshold) & (ties == 1), winner, -1)
    return decided.reshape(B, num_indices)


def decode_batch(decided, codebook, transmitted):
    """Nearest-codeword decoding of a (B, M) block of resolutions.

    Distance counts decided positions that disagree; erased positions are free.
    Ties break toward the smallest codeword id. Returns (chosen, chosen_dist,
    transmitted_dist).
    """
    decided = np.ascontiguousarray(decided, dtype=np.int64)
    codebook = np.ascontiguousarray(codebook, dtype=np.int64)
    B, M = decided.shape
    C = codebook.shape[0]
    active = decided >= 0

    best = np.zeros(B, dtype=np.int64)
    best_d = np.full(B, M + 1, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(B * M, 1))
    rows = np.arange(B)
    for c0 in range(0, C, chunk):
        sub = codebook[c0 : c0 + chunk]
        d = (active[:, None, :] & (decided[:, None, :] != sub[None, :, :])).sum(axis=2)
        local = d.argmin(axis=1)
        local_d = d[rows, local]
        upd = local_d < best_d
        best[upd] = local[upd] + c0
        best_d[upd] = local_d[upd]

    truth_d = (active & (decided != codebook[transmitted])).sum(axis=1)
    return best, best_d, truth_d.astype(np.int64)


def classify_batch(draws, errors, read_index, decided, truth_payload, threshold):
    """Per-trial event counts on a (B, N) block.

    Returns a (B, 7) int64 table with columns: undersampled indices (duplicate
    count below threshold), correct-below-threshold, wrong-above-threshold,
    erased, undetected, inner errors K, and a 0/1 flag for the deterministic
    erasure/undetected inequalities.
    """
    draws = np.ascontiguousarray(draws, dtype=np.int64)
    errors = np.ascontiguousarray(errors, dtype=bool)
    read_index = np.ascontiguousarray(read_index, dtype=np.int64)
    B, N = draws.shape
    M = decided.shape[1]
    base = np.arange(B, dtype=np.int64)[:, None] * M

    dup = np.bincount((draws + base).ravel(), minlength=B * M).reshape(B, M)
    k_m = np.bincount((draws + base)[errors], minlength=B * M).reshape(B, M)
    cross = errors & (read_index != draws)
    v_m = np.bincount((read_index + base)[cross], minlength=B * M).reshape(B, M)

    n_sam = (dup < threshold).sum(axis=1)
    n_cbt = ((dup >= threshold) & (dup - k_m < threshold)).sum(axis=1)
    n_eat = (v_m >= threshold).sum(axis=1)
    erased = decided < 0
    truth_payload = np.ascontiguousarray(truth_payload, dtype=np.int64)
    n_e = erased.sum(axis=1)
    n_u = (~erased & (decided != truth_payload)).sum(axis=1)
    K = errors.sum(axis=1)

    # float epsilon only guards rounding in (1 + 1/T) * K; the inequalities are exact
    ok = (n_e <= n_sam + (1.0 + 1.0 / threshold) * K + 1e-9) & (
        n_u <= K / threshold + 1e-9
    )

    out = np.empty((B, 7), dtype=np.int64)
    out[:, 0] = n_sam
    out[:, 1] = n_cbt
    out[:, 2] = n_eat
    out[:, 3] = n_e
    out[:, 4] = n_u
    out[:, 5] = K
    out[:, 6] = ok
    return out


def pair_histogram(payloads):
    """Per-codeword histogram of pairwise mismatch distances.

    Entry [j, d] counts codewords j' != j with exactly d differing payloads.
    """
    payloads = np.ascontiguousarray(payloads, dtype=np.int64)
    C, M = payloads.shape
    hist = np.zeros((C, M + 1), dtype=np.int64)
    for i in range(C):
        d = (payloads[i] != payloads).sum(axis=1)
        d[i] = -1
        hist[i] = np.bincount(d[d >= 0], minlength=M + 1)
    return hist
