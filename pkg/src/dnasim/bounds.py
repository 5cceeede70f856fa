"""Analytic reliability bounds for the sampled coded-index channel.

Everything is in nats. The family of results:

* binary KL machinery and its small-argument expansion ratio;
* the Poisson low-coverage tail exponent phi_tau;
* large-deviation tail bounds for the three per-trial event families
  (undersampled indices, inner errors, erasures), each with a constant-coverage
  ("theta") and a growing-coverage ("omega") form;
* random-coding and expurgated error exponents plus their pointwise maximum;
* exact mutual information of a uniform bit through d independent BSC uses and
  the coverage-capacity gap it induces;
* a solver for min over [0,1] of f(theta) + [g(theta) - R]_+ with f increasing
  convex and g decreasing convex, the shape every exponent optimization here
  reduces to.

Exponent normalization is explicit: "per-M" values multiply the number of
stored molecules, "per-N" values multiply the number of reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dnasim.decoder import DecoderParams
from dnasim.model import ChannelParams, InnerCodeModel

PER_M = "per-M"
PER_N = "per-N"


def binary_entropy(a: float) -> float:
    """h_b(a) = -a ln a - (1-a) ln(1-a), with 0 ln 0 = 0."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("binary_entropy needs a in [0, 1]")
    out = 0.0
    if a > 0.0:
        out -= a * math.log(a)
    if a < 1.0:
        out -= (1.0 - a) * math.log1p(-a)
    return out


def binary_kl(a: float, b: float) -> float:
    """d_b(a||b) = a ln(a/b) + (1-a) ln((1-a)/(1-b)); infinite off the support."""
    if not 0.0 <= a <= 1.0 or not 0.0 <= b <= 1.0:
        raise ValueError("binary_kl needs a, b in [0, 1]")
    out = 0.0
    if a > 0.0:
        if b == 0.0:
            return math.inf
        out += a * math.log(a / b)
    if a < 1.0:
        if b == 1.0:
            return math.inf
        out += (1.0 - a) * (math.log1p(-a) - math.log1p(-b))
    return out


def binary_kl_exp(a: float, neg_log_b: float) -> float:
    """d_b(a || e^{-neg_log_b}), stable for tiny reference probabilities.

    Passing the log directly keeps d_b(1 || e^{-x}) == x exact and avoids
    underflow when x is large.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError("binary_kl_exp needs a in [0, 1]")
    if neg_log_b < 0:
        raise ValueError("neg_log_b must be nonnegative")
    b = math.exp(-neg_log_b)
    out = 0.0
    if a > 0.0:
        out += a * math.log(a) + a * neg_log_b
    if a < 1.0:
        if b == 1.0:
            return math.inf
        out += (1.0 - a) * (math.log1p(-a) - math.log1p(-b))
    return out


def kl_expansion_ratio(a: float, b: float) -> float:
    """d_b(a||b) / (-a ln b): tends to 1 as b -> 0 at fixed a.

    Convergence is slow for small a; the deficit is h_b(a)/(-a ln b) + O(b).
    """
    if not 0.0 < a <= 1.0:
        raise ValueError("kl_expansion_ratio needs a in (0, 1]")
    if not 0.0 < b < 0.5:
        raise ValueError("kl_expansion_ratio needs b in (0, 0.5)")
    return binary_kl(a, b) / (-a * math.log(b))


def _log_poisson_cdf(k: int, lam: float) -> float:
    """ln P[Poisson(lam) <= k] by direct log-sum; exact tail, no asymptotics."""
    if k < 0:
        return -math.inf
    terms = [i * math.log(lam) - math.lgamma(i + 1) for i in range(k + 1)]
    peak = max(terms)
    return peak + math.log(sum(math.exp(t - peak) for t in terms)) - lam


def poisson_tail_exponent(alpha: float, tau: float) -> float:
    """phi_tau = -(M/N) ln P[Poisson(N/M) <= T_tau]; always >= tau.

    With the threshold T_tau = (N/M)(1 - sqrt(2 tau)), this is the per-read
    exponent of the low-coverage event for one molecule.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not 0.0 < tau < 0.5:
        raise ValueError(f"tau={tau} invalid: tau must lie in (0, 1/2)")
    t = alpha * (1.0 - math.sqrt(2.0 * tau))
    return -_log_poisson_cdf(math.floor(t), alpha) / alpha


@dataclass(frozen=True)
class ExponentValue:
    value: float
    normalization: str
    branch: str
    rate_ceiling: float
    regime: str


def _rate_margin(rate: float, rate_b: float, beta: float) -> float:
    gap = rate_b - 1.0 / beta
    if gap <= 0:
        raise ValueError("need rate_b > 1/beta")
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    return gap


def random_coding_exponent(
    rate: float,
    rate_b: float,
    beta: float,
    *,
    regime: str,
    alpha: float | None = None,
    ratio: float | None = None,
    tau: float | None = None,
) -> ExponentValue:
    """Random-coding achievability exponent.

    theta regime (alpha = N/M fixed): per-M exponent
        d_b(1 - R/(Rb - 1/beta) || e^{-phi alpha}),
    positive below the ceiling (Rb - 1/beta)(1 - e^{-phi alpha}); phi is 1 for
    the limiting threshold (tau -> 1/2, T < 1) or phi_tau when tau is given.

    omega regime (ratio = N/(ML) growing): per-N exponent
        (1/2)(1 - R/(Rb - 1/beta))          if ratio <= 2(Rb - 1/beta)
        (1/ratio)(Rb - 1/beta - R)          otherwise,
    clipped at zero for R >= Rb - 1/beta.
    """
    gap = _rate_margin(rate, rate_b, beta)
    if regime == "theta":
        if alpha is None:
            raise ValueError("theta regime needs alpha")
        phi = 1.0 if tau is None else poisson_tail_exponent(alpha, tau)
        ceiling = gap * (1.0 - math.exp(-phi * alpha))
        if rate >= ceiling:
            return ExponentValue(0.0, PER_M, "theta", ceiling, "theta")
        a = 1.0 - rate / gap
        return ExponentValue(
            binary_kl_exp(a, phi * alpha), PER_M, "theta", ceiling, "theta"
        )
    if regime == "omega":
        if ratio is None:
            raise ValueError("omega regime needs ratio = N/(M*L)")
        if ratio <= 0:
            raise ValueError("ratio must be positive")
        if rate >= gap:
            value = 0.0
            branch = "omega-low" if ratio <= 2.0 * gap else "omega-mid"
        elif ratio <= 2.0 * gap:
            value = 0.5 * (1.0 - rate / gap)
            branch = "omega-low"
        else:
            value = (gap - rate) / ratio
            branch = "omega-mid"
        return ExponentValue(value, PER_N, branch, gap, "omega")
    raise ValueError("regime must be 'theta' or 'omega'")


def expurgated_exponent(
    rate: float, rate_b: float, beta: float, *, ratio: float
) -> ExponentValue:
    """Expurgated per-N exponent (1/4)(1 - R/(Rb - 1/beta)).

    Valid only when ratio = N/(ML) >= 4(Rb - 1/beta); the boundary is accepted
    since the mid branch meets this one there.
    """
    gap = _rate_margin(rate, rate_b, beta)
    if ratio < 4.0 * gap:
        raise ValueError(
            f"expurgated exponent needs N/(M*L) >= 4*(rate_b - 1/beta) = {4 * gap:.6g}; "
            f"got {ratio:.6g}"
        )
    value = 0.25 * max(0.0, 1.0 - rate / gap)
    return ExponentValue(value, PER_N, "omega-high", gap, "omega")


def achievable_exponent(
    rate: float,
    rate_b: float,
    beta: float,
    *,
    regime: str,
    alpha: float | None = None,
    ratio: float | None = None,
) -> ExponentValue:
    """Best of random-coding and expurgated exponents in the stated regime.

    omega regime branches on ratio = N/(ML): below 2(Rb-1/beta) the linear
    random-coding branch, between 2 and 4 times the gap the curved one, above
    4 times the expurgated branch; the branches agree at both boundaries.
    """
    if regime == "theta":
        return random_coding_exponent(
            rate, rate_b, beta, regime="theta", alpha=alpha
        )
    if regime != "omega":
        raise ValueError("regime must be 'theta' or 'omega'")
    gap = _rate_margin(rate, rate_b, beta)
    if ratio is None:
        raise ValueError("omega regime needs ratio = N/(M*L)")
    if ratio >= 4.0 * gap:
        return expurgated_exponent(rate, rate_b, beta, ratio=ratio)
    return random_coding_exponent(rate, rate_b, beta, regime="omega", ratio=ratio)


@dataclass
class ExponentCurve:
    """Exponent values over a rate grid, validated monotone nonnegative."""

    rates: np.ndarray
    values: np.ndarray
    branches: list[str]
    regime: str
    normalization: str
    rate_ceiling: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if (v < -1e-15).any():
            raise ValueError("exponent curve must be nonnegative")
        if (np.diff(v) > 1e-12).any():
            raise ValueError("exponent curve must be non-increasing in rate")
        above = np.asarray(self.rates) >= self.rate_ceiling - 1e-15
        if (v[above] != 0.0).any():
            raise ValueError("exponent curve must vanish at and above the ceiling")


def exponent_curve(
    rates: Sequence[float],
    rate_b: float,
    beta: float,
    *,
    regime: str,
    alpha: float | None = None,
    ratio: float | None = None,
    family: str = "achievable",
) -> ExponentCurve:
    pick: Callable[[float], ExponentValue]
    if family == "achievable":
        pick = lambda r: achievable_exponent(
            r, rate_b, beta, regime=regime, alpha=alpha, ratio=ratio
        )
    elif family == "random-coding":
        pick = lambda r: random_coding_exponent(
            r, rate_b, beta, regime=regime, alpha=alpha, ratio=ratio
        )
    elif family == "expurgated":
        pick = lambda r: expurgated_exponent(r, rate_b, beta, ratio=ratio)
    else:
        raise ValueError("family must be achievable, random-coding, or expurgated")
    vals = [pick(float(r)) for r in rates]
    return ExponentCurve(
        rates=np.asarray(rates, dtype=float),
        values=np.array([v.value for v in vals]),
        branches=[v.branch for v in vals],
        regime=vals[0].regime,
        normalization=vals[0].normalization,
        rate_ceiling=vals[0].rate_ceiling,
    )


# --- per-event tail bounds ----------------------------------------------------


@dataclass(frozen=True)
class TailBounds:
    """Large-deviation bounds on the three per-trial tail events.

    Each *_theta/_omega pair gives the constant-coverage and growing-coverage
    forms; in_domain flags mark where the corresponding derivation applies.
    The sequencing bound exp(-N d_b(kappa || p_b)) is exact Chernoff for
    K ~ Binomial(N, p_b), vacuous at kappa = p_b.
    """

    sampling_theta: float
    sampling_theta_in_domain: bool
    sampling_omega: float
    sampling_omega_in_domain: bool
    sequencing: float
    sequencing_in_domain: bool
    erasure_theta: float
    erasure_theta_in_domain: bool
    erasure_omega: float
    erasure_omega_in_domain: bool
    phi: float


def lemma_tail_bounds(
    params: ChannelParams,
    inner: InnerCodeModel,
    dp: DecoderParams,
    sigma: float,
    kappa: float,
    theta: float,
) -> TailBounds:
    """Bounds on P[undersampled >= sigma M], P[K >= kappa N], P[erased >= theta M]."""
    for name, val in (("sigma", sigma), ("kappa", kappa), ("theta", theta)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    m = params.num_molecules
    n = params.num_reads
    alpha = params.coverage
    phi = poisson_tail_exponent(alpha, dp.tau)
    low_cov = math.exp(-phi * alpha)

    samp_theta = 2.0 * math.exp(-m * binary_kl_exp(sigma, phi * alpha))
    samp_omega = 4.0 * math.exp(-sigma * dp.tau * n)
    seq = math.exp(-n * binary_kl(kappa, inner.error_prob))
    eras_theta = math.exp(-m * binary_kl_exp(theta, phi * alpha))
    eras_omega = math.exp(-theta * dp.tau * n)

    omega_floor = math.exp(-dp.tau * alpha)
    return TailBounds(
        sampling_theta=samp_theta,
        sampling_theta_in_domain=sigma > low_cov,
        sampling_omega=samp_omega,
        sampling_omega_in_domain=sigma > omega_floor,
        sequencing=seq,
        sequencing_in_domain=kappa >= inner.error_prob,
        erasure_theta=eras_theta,
        erasure_theta_in_domain=theta > low_cov,
        erasure_omega=eras_omega,
        erasure_omega_in_domain=theta > omega_floor,
        phi=phi,
    )


# --- multi-draw mutual information and the coverage-capacity gap ---------------


def _log_binom_pmf(d: int, w: float) -> np.ndarray:
    k = np.arange(d + 1, dtype=float)
    if w == 0.0:
        out = np.full(d + 1, -np.inf)
        out[0] = 0.0
        return out
    if w == 1.0:
        out = np.full(d + 1, -np.inf)
        out[d] = 0.0
        return out
    logc = (
        math.lgamma(d + 1)
        - np.array([math.lgamma(i + 1) + math.lgamma(d - i + 1) for i in range(d + 1)])
    )
    return logc + k * math.log(w) + (d - k) * math.log1p(-w)


def _entropy_from_log(logp: np.ndarray) -> float:
    p = np.exp(logp)
    mask = p > 0
    return float(-(p[mask] * logp[mask]).sum())


def multidraw_mutual_info(w: float, d: int) -> float:
    """I(uniform bit; d independent BSC(w) outputs), in nats.

    The count of flipped-looking outputs is a sufficient statistic, so the
    information is H(mixture of two binomials) - H(Binomial(d, w)); exact, no
    sampling.
    """
    if not 0.0 <= w <= 0.5:
        raise ValueError("crossover w must lie in [0, 1/2]")
    if d < 1:
        raise ValueError("d must be >= 1")
    log_p0 = _log_binom_pmf(d, w)
    log_p1 = log_p0[::-1]
    log_mix = np.logaddexp(log_p0, log_p1) - math.log(2.0)
    return _entropy_from_log(log_mix) - _entropy_from_log(log_p0)


def capacity_gap(alpha: float, w: float, tail_tol: float = 1e-12) -> float:
    """Rate loss (nats/read) of ignoring duplicates at Poisson(alpha) coverage.

    gap = sum_{d>=1} pi_alpha(d) I_d - I_1 (1 - pi_alpha(0)), truncated once the
    Poisson tail mass drops below tail_tol (capped at 10*alpha + 50 terms).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    d_cap = int(10.0 * alpha + 50.0)
    i1 = multidraw_mutual_info(w, 1)
    pmf = math.exp(-alpha)
    covered = pmf
    total = 0.0
    d = 0
    while d < d_cap and 1.0 - covered > tail_tol:
        d += 1
        pmf *= alpha / d
        covered += pmf
        total += pmf * multidraw_mutual_info(w, d)
    return total - i1 * (1.0 - math.exp(-alpha))


# --- clipped-penalty minimization ----------------------------------------------


@dataclass
class MinimizationSpec:
    """Objective pieces for min_{theta in [0,1]} f(theta) + [g(theta) - R]_+.

    f must be nonnegative, nondecreasing and convex; g nonnegative,
    nonincreasing and convex. Shapes are verified numerically on a 1000-point
    grid at construction.
    """

    f: Callable[[float], float]
    g: Callable[[float], float]

    def __post_init__(self):
        grid = np.linspace(0.0, 1.0, 1001)
        fv = np.array([self.f(t) for t in grid])
        gv = np.array([self.g(t) for t in grid])
        scale_f = max(1.0, float(np.abs(fv).max()))
        scale_g = max(1.0, float(np.abs(gv).max()))
        if (fv < -1e-12 * scale_f).any():
            raise ValueError("f must be nonnegative on [0, 1]")
        if (gv < -1e-12 * scale_g).any():
            raise ValueError("g must be nonnegative on [0, 1]")
        if (np.diff(fv) < -1e-9 * scale_f).any():
            raise ValueError("f must be nondecreasing on [0, 1]")
        if (np.diff(gv) > 1e-9 * scale_g).any():
            raise ValueError("g must be nonincreasing on [0, 1]")
        if (np.diff(fv, 2) < -1e-7 * scale_f).any():
            raise ValueError("f must be convex on [0, 1]")
        if (np.diff(gv, 2) < -1e-7 * scale_g).any():
            raise ValueError("g must be convex on [0, 1]")


@dataclass(frozen=True)
class MinimizationResult:
    theta: float
    value: float
    branch: str  # "linear" below the critical rate, "curved" above
    critical_rate: float


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def solve_clipped_min(
    spec: MinimizationSpec, rate: float, theta_tol: float = 1e-10
) -> MinimizationResult:
    """Minimize f(theta) + [g(theta) - R]_+ over theta in [0, 1].

    Below the critical rate R_cr = g(theta_0), with theta_0 the minimizer of
    f + g, the optimum sits at theta_0 and the value falls with unit slope in
    R. Above it the clip binds: theta solves g(theta) = R and the value is
    f(theta). For R above g(0) the penalty vanishes everywhere and the minimum
    of f alone (at theta = 0) is returned, flagged curved.
    """
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    f, g = spec.f, spec.g
    theta0 = _golden_min(lambda t: f(t) + g(t), 0.0, 1.0, theta_tol)
    r_cr = g(theta0)
    if rate <= r_cr:
        return MinimizationResult(
            theta0, f(theta0) + g(theta0) - rate, "linear", r_cr
        )
    if rate >= g(0.0):
        return MinimizationResult(0.0, f(0.0), "curved", r_cr)
    lo, hi = 0.0, theta0
    while hi - lo > theta_tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > rate:
            lo = mid
        else:
            hi = mid
    theta_r = 0.5 * (lo + hi)
    return MinimizationResult(theta_r, f(theta_r), "curved", r_cr)
