"""Monte Carlo campaigns and exact desk-scale cross-checks.

A campaign replays many independent trials of store -> sample -> corrupt ->
resolve -> decode, classifying every trial's event counts. Trials are keyed by
(master_seed, trial_id) counter streams, so results are bit-identical for any
batch size or worker count.

Also here: an exact enumerator for tiny instances (the read vector is i.i.d.
given the stored codeword, so outcome probabilities reduce to a multinomial
over read histograms, accumulated in rationals), greedy expurgation of
codebooks against pairwise-overlap counts, and distance spectrum summaries.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from dnasim import kernels
from dnasim.bounds import binary_kl, lemma_tail_bounds
from dnasim.channel import corrupt_reads, trial_generator
from dnasim.decoder import DecoderParams
from dnasim.model import (
    ChannelParams,
    CodedIndexCodebook,
    ErrorTarget,
    InnerCodeModel,
    payload_matrix,
)

TRIAL_COLUMNS = (
    "undersampled",
    "correct_below_threshold",
    "wrong_above_threshold",
    "erased",
    "undetected",
    "inner_errors",
    "lemma_ok",
    "decode_error",
    "truth_distance",
    "transmitted",
    "chosen",
)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes out of range")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class CampaignResult:
    """Raw per-trial table plus the headline error estimate."""

    config: dict
    table: np.ndarray  # (trials, len(TRIAL_COLUMNS)) int64
    columns: tuple = TRIAL_COLUMNS

    @property
    def trials(self) -> int:
        return self.table.shape[0]

    @property
    def errors(self) -> int:
        return int(self.table[:, self.columns.index("decode_error")].sum())

    @property
    def pe(self) -> float:
        return self.errors / self.trials

    @property
    def wilson(self):
        return wilson_interval(self.errors, self.trials)

    def column(self, name: str) -> np.ndarray:
        return self.table[:, self.columns.index(name)]

    def exceed_fraction(self, name: str, count: float) -> float:
        """Fraction of trials whose `name` count is >= count."""
        return float((self.column(name) >= count).mean())

    def to_summary(self) -> dict:
        lo, hi = self.wilson
        means = {
            f"mean_{c}": float(self.column(c).mean())
            for c in self.columns[:6]
        }
        return {
            "config": self.config,
            "trials": self.trials,
            "errors": self.errors,
            "pe": self.pe,
            "wilson_low": lo,
            "wilson_high": hi,
            "erasure_rate": float(self.column("erased").mean())
            / self.config["num_molecules"],
            "counting_bounds_held": bool(self.column("lemma_ok").all()),
            **means,
        }


def _simulate_block(
    codebook: CodedIndexCodebook,
    params: ChannelParams,
    inner: InnerCodeModel,
    dp: DecoderParams,
    master_seed: int,
    trial_lo: int,
    trial_hi: int,
    payload_mat: np.ndarray,
) -> np.ndarray:
    m = params.num_molecules
    n = params.num_reads
    p = codebook.payload_space
    b = trial_hi - trial_lo
    idx = np.arange(m, dtype=np.int64)

    transmitted = np.empty(b, dtype=np.int64)
    reads = np.empty((b, n), dtype=np.int64)
    draws = np.empty((b, n), dtype=np.int64)
    errs = np.empty((b, n), dtype=bool)
    for k in range(b):
        rng = trial_generator(master_seed, trial_lo + k)
        j = int(rng.integers(0, codebook.num_codewords))
        transmitted[k] = j
        d = rng.integers(0, m, size=n).astype(np.int64)
        stored_flat = idx * p + payload_mat[j]
        r, e = corrupt_reads(stored_flat[d], inner, m, p, rng)
        draws[k] = d
        reads[k] = r
        errs[k] = e

    decided = kernels.resolve_batch(reads, m, p, dp.threshold)
    best, _, truth_d = kernels.decode_batch(decided, payload_mat, transmitted)
    read_idx = reads // p
    truth_pay = payload_mat[transmitted]
    ev = kernels.classify_batch(draws, errs, read_idx, decided, truth_pay, dp.threshold)

    out = np.empty((b, len(TRIAL_COLUMNS)), dtype=np.int64)
    out[:, :7] = ev
    out[:, 7] = best != transmitted
    out[:, 8] = truth_d
    out[:, 9] = transmitted
    out[:, 10] = best
    return out


def _block_star(args):
    return _simulate_block(*args)


def run_campaign(
    codebook: CodedIndexCodebook,
    params: ChannelParams,
    inner: InnerCodeModel,
    dp: DecoderParams,
    *,
    trials: int,
    master_seed: int,
    batch_size: int = 512,
    n_workers: int | None = None,
) -> CampaignResult:
    """Run `trials` independent trials; deterministic in master_seed alone.

    Reads are N i.i.d. uniform molecule draws per trial. Batch size and worker
    count only control scheduling; the (master_seed, trial_id) keyed streams
    pin every trial's randomness regardless.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if codebook.num_indices != params.num_molecules:
        raise ValueError("codebook and channel disagree on molecule count")
    # keep each block's read matrix around 32 MB
    cap = max(1, (1 << 22) // max(1, params.num_reads))
    bs = max(1, min(batch_size, cap))
    spans = [(lo, min(lo + bs, trials)) for lo in range(0, trials, bs)]
    payload_mat = payload_matrix(codebook)
    jobs = [
        (codebook, params, inner, dp, master_seed, lo, hi, payload_mat)
        for lo, hi in spans
    ]
    if n_workers is not None and n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            blocks = list(pool.map(_block_star, jobs))
    else:
        blocks = [_simulate_block(*j) for j in jobs]
    table = np.concatenate(blocks, axis=0)

    if not table[:, TRIAL_COLUMNS.index("lemma_ok")].all():
        bad = int(np.flatnonzero(~table[:, 6].astype(bool))[0])
        raise AssertionError(
            f"erasure/undetected counting bounds violated at trial {bad}; "
            "the decoder or classifier is inconsistent"
        )

    config = {
        "num_molecules": params.num_molecules,
        "alpha": params.alpha,
        "beta": params.beta,
        "num_reads": params.num_reads,
        "molecule_len": params.molecule_len,
        "payload_space": codebook.payload_space,
        "num_codewords": codebook.num_codewords,
        "rate": codebook.rate,
        "rate_b": inner.rate_b,
        "error_prob": inner.error_prob,
        "error_target": inner.error_target.value,
        "tau": dp.tau,
        "threshold": dp.threshold,
        "master_seed": master_seed,
        "trials": trials,
        "backend": kernels.BACKEND,
    }
    return CampaignResult(config=config, table=table)


def tail_comparison(
    result: CampaignResult,
    params: ChannelParams,
    inner: InnerCodeModel,
    dp: DecoderParams,
    sigma_grid: Sequence[float] = (),
    kappa_grid: Sequence[float] = (),
    theta_grid: Sequence[float] = (),
) -> list[dict]:
    """Empirical tail frequencies next to their analytic bounds, one row per level."""
    m = params.num_molecules
    n = params.num_reads
    rows = []
    for sigma in sigma_grid:
        tb = lemma_tail_bounds(params, inner, dp, sigma, 0.5, 0.5)
        rows.append(
            {
                "event": "undersampled",
                "level": sigma,
                "empirical": result.exceed_fraction("undersampled", sigma * m),
                "bound_theta": tb.sampling_theta,
                "theta_in_domain": tb.sampling_theta_in_domain,
                "bound_omega": tb.sampling_omega,
                "omega_in_domain": tb.sampling_omega_in_domain,
            }
        )
    for kappa in kappa_grid:
        tb = lemma_tail_bounds(params, inner, dp, 0.5, kappa, 0.5)
        rows.append(
            {
                "event": "inner_errors",
                "level": kappa,
                "empirical": result.exceed_fraction("inner_errors", kappa * n),
                "bound_theta": tb.sequencing,
                "theta_in_domain": tb.sequencing_in_domain,
                "bound_omega": tb.sequencing,
                "omega_in_domain": tb.sequencing_in_domain,
            }
        )
    for theta in theta_grid:
        tb = lemma_tail_bounds(params, inner, dp, 0.5, 0.5, theta)
        rows.append(
            {
                "event": "erased",
                "level": theta,
                "empirical": result.exceed_fraction("erased", theta * m),
                "bound_theta": tb.erasure_theta,
                "theta_in_domain": tb.erasure_theta_in_domain,
                "bound_omega": tb.erasure_omega,
                "omega_in_domain": tb.erasure_omega_in_domain,
            }
        )
    return rows


# --- exact enumeration at desk scale -------------------------------------------

_EXACT_CAPS = {"num_molecules": 4, "num_reads": 6, "payload_space": 2, "num_codewords": 8}


def _compositions(total: int, cells: int) -> Iterator[tuple]:
    if cells == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, cells - 1):
            yield (first,) + rest


def _resolve_counts(counts, m: int, p: int, threshold: float) -> list[int]:
    decided = []
    for i in range(m):
        seg = counts[i * p : (i + 1) * p]
        top = max(seg)
        if top >= threshold and seg.count(top) == 1:
            decided.append(seg.index(top))
        else:
            decided.append(-1)
    return decided


def exact_small_instance(
    codebook: CodedIndexCodebook,
    params: ChannelParams,
    inner: InnerCodeModel,
    dp: DecoderParams,
) -> dict:
    """Exact error and erasure probabilities by enumerating read histograms.

    Given the stored codeword the N reads are i.i.d., so only the histogram
    over the M*P cells matters; each gets an exact rational weight. Instances
    are capped (M <= 4, N <= 6, P <= 2, codewords <= 8) and the read error
    probability must be one of {0, 1/2, 1} to stay in rationals.
    """
    m, n = params.num_molecules, params.num_reads
    p, c = codebook.payload_space, codebook.num_codewords
    for name, cap in _EXACT_CAPS.items():
        have = {
            "num_molecules": m,
            "num_reads": n,
            "payload_space": p,
            "num_codewords": c,
        }[name]
        if have > cap:
            raise ValueError(f"exact enumeration capped at {name} <= {cap}, got {have}")
    pb_map = {0.0: Fraction(0), 0.5: Fraction(1, 2), 1.0: Fraction(1)}
    if inner.error_prob not in pb_map:
        raise ValueError("exact enumeration needs error_prob in {0, 0.5, 1}")
    pb = pb_map[inner.error_prob]
    space = m * p
    pay = payload_matrix(codebook)

    per_codeword_pe = []
    pe = Fraction(0)
    erased_mass = Fraction(0)
    outcomes = 0
    for j in range(c):
        flats = [i * p + int(pay[j, i]) for i in range(m)]
        q = [Fraction(0)] * space
        for i in range(m):
            tf = flats[i]
            q[tf] += Fraction(1, m) * (1 - pb)
            if pb > 0:
                if inner.error_target is ErrorTarget.UNIFORM_WRONG:
                    w = Fraction(1, m) * pb / (space - 1)
                    for cell in range(space):
                        if cell != tf:
                            q[cell] += w
                else:
                    victim = inner.victim_index * p + inner.victim_payload
                    if victim >= space:
                        raise ValueError("victim molecule outside the id space")
                    tgt = victim
                    if tf == victim:
                        tgt = inner.victim_index * p + (inner.victim_payload + 1) % p
                    q[tgt] += Fraction(1, m) * pb

        pe_j = Fraction(0)
        for counts in _compositions(n, space):
            weight = Fraction(math.factorial(n))
            dead = False
            for cell, cnt in enumerate(counts):
                if cnt:
                    if q[cell] == 0:
                        dead = True
                        break
                    weight = weight * q[cell] ** cnt / math.factorial(cnt)
            if dead or weight == 0:
                continue
            outcomes += 1
            decided = _resolve_counts(counts, m, p, dp.threshold)
            erased_mass += weight * sum(1 for d in decided if d < 0) / Fraction(c)
            best, best_d = 0, m + 1
            for cand in range(c):
                d = sum(
                    1 for i in range(m) if decided[i] >= 0 and decided[i] != pay[cand, i]
                )
                if d < best_d:
                    best, best_d = cand, d
            if best != j:
                pe_j += weight
        per_codeword_pe.append(pe_j)
        pe += pe_j / c
    return {
        "pe": pe,
        "pe_float": float(pe),
        "per_codeword_pe": per_codeword_pe,
        "mean_erased": erased_mass / m,
        "outcomes_visited": outcomes,
    }


# --- expurgation and distance spectra ------------------------------------------


@dataclass
class SpectrumResult:
    """Pairwise payload-disagreement histogram of a codebook.

    hist[j, d] counts codewords at distance exactly d from codeword j (self
    excluded), so each row sums to |C| - 1. gamma[d] = d/M is the normalized
    distance; small gamma means dangerously similar pairs. mean_counts is the
    per-bin empirical mean over j; ensemble_mean is the exact i.i.d.-uniform
    ensemble expectation (positions agree independently w.p. 1/P) and chernoff
    its pointwise relaxation |C| exp(-M d_b(1-gamma || 1/P)).
    """

    hist: np.ndarray
    pooled: np.ndarray
    gamma: np.ndarray
    mean_counts: np.ndarray
    ensemble_mean: np.ndarray
    chernoff: np.ndarray


def distance_spectrum(codebook: CodedIndexCodebook) -> SpectrumResult:
    pay = payload_matrix(codebook)
    hist = kernels.pair_histogram(pay)
    c, mp1 = hist.shape
    m = mp1 - 1
    q = 1.0 / codebook.payload_space
    gamma = np.arange(m + 1) / m

    # distance d <=> M - d agreeing positions
    pmf = np.array(
        [math.comb(m, m - d) * q ** (m - d) * (1 - q) ** d for d in range(m + 1)]
    )
    chern = np.array(
        [c * math.exp(-m * binary_kl((m - d) / m, q)) for d in range(m + 1)]
    )
    return SpectrumResult(
        hist=hist,
        pooled=hist.sum(axis=0),
        gamma=gamma,
        mean_counts=hist.mean(axis=0).astype(float),
        ensemble_mean=(c - 1) * pmf,
        chernoff=chern,
    )


@dataclass
class ExpurgationResult:
    kept: np.ndarray
    removed: list[int] = field(default_factory=list)
    eta: float = 0.0
    log_thresholds: np.ndarray | None = None  # by distance d
    max_log_slack: float = -math.inf  # max over kept (j, d) of ln N_j - ln threshold

    @property
    def num_kept(self) -> int:
        return int(self.kept.size)


def expurgate_codebook(
    codebook: CodedIndexCodebook,
    params: ChannelParams,
    inner: InnerCodeModel,
    eta: float | None = None,
    max_codewords: int = 4096,
) -> ExpurgationResult:
    """Greedily drop codewords whose distance spectrum exceeds the design budget.

    Codeword j violates the budget at normalized distance gamma = d/M when its
    bin count hist[j, d] exceeds exp[ML(R - (1-gamma)(rate_b - 1/beta) + eta)].
    Bins at small d get budgets below one, so near-duplicate pairs are banned
    outright. The worst offender (largest log excess over its budget) goes
    first; survivors' counts are updated and the scan repeats until every
    (j, d) sits within budget. eta defaults to 4 / (beta * M).
    """
    c = codebook.num_codewords
    m = codebook.num_indices
    ell = codebook.molecule_len
    if c > max_codewords:
        raise ValueError(f"expurgation capped at {max_codewords} codewords")
    if eta is None:
        eta = 4.0 / (params.beta * m)
    gap = inner.rate_b - 1.0 / params.beta
    pay = payload_matrix(codebook)
    # pairwise distance matrix, chunked to bound the boolean intermediate
    dist = np.empty((c, c), dtype=np.int32)
    step = max(1, (1 << 24) // max(1, c * m))
    for lo in range(0, c, step):
        hi = min(c, lo + step)
        dist[lo:hi] = (pay[lo:hi, None, :] != pay[None, :, :]).sum(axis=2)

    ml = m * ell
    thr = np.array(
        [ml * (codebook.rate + eta) - (m - d) * ell * gap for d in range(m + 1)]
    )

    alive = np.ones(c, dtype=bool)
    removed: list[int] = []
    hist = kernels.pair_histogram(pay).astype(np.float64)

    def _excess() -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(hist) - thr  # log(0) = -inf: empty bins never violate

    while True:
        excess = _excess()
        excess[~alive] = -math.inf
        worst = excess.max(axis=1)
        j = int(worst.argmax())
        if worst[j] <= 0:
            break
        alive[j] = False
        removed.append(j)
        live = np.flatnonzero(alive)
        np.subtract.at(hist, (live, dist[live, j]), 1)
        hist[j] = 0

    kept = np.flatnonzero(alive)
    if kept.size == 0:
        raise ValueError("expurgation removed every codeword; budget infeasible")
    slack = float(_excess()[kept].max())
    return ExpurgationResult(
        kept=kept,
        removed=removed,
        eta=eta,
        log_thresholds=thr,
        max_log_slack=slack,
    )
