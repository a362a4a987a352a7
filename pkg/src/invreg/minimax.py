"""Minimax lower-bound laboratory.

Builds a verified Varshamov-Gilbert style packing over binary bump
patterns, measures the exact L2 separation of the induced regression
maps, evaluates the Gaussian Kullback-Leibler divergence in closed form,
and assembles the resulting probability lower bound for the inverse
estimation problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .maps import BumpParams, PlanarMap, chi_theta, default_amplitude, family_map
from .synth import UNIFORM, CovariateLaw

ATTEMPT_CAP = 1_000_000
MAX_WORDS = 512


@dataclass(frozen=True)
class PackingCode:
    """Binary packing code on N bits.

    ``verified`` certifies (by an exhaustive pairwise re-check) that all
    pairwise Hamming distances are >= ceil(N/8); ``complete`` records
    whether the word-count quota min(2^ceil(N/8), word cap) was reached
    before the attempt cap.
    """

    N: int
    codewords: np.ndarray  # (count, N) uint8
    min_hamming: int
    verified: bool
    complete: bool

    @property
    def count(self) -> int:
        return self.codewords.shape[0]

    def hex_lines(self) -> list[str]:
        out = []
        for w in self.codewords:
            bits = "".join(str(int(b)) for b in w)
            out.append(f"{int(bits, 2):0{(self.N + 3) // 4}x}")
        return out


def _pairwise_min_hamming(words: np.ndarray) -> int:
    best = words.shape[1]
    for i in range(words.shape[0] - 1):
        d = (words[i + 1 :] ^ words[i]).sum(axis=1).min()
        best = min(best, int(d))
    return best


def vg_code(N: int, seed: int = 0, max_words: int = MAX_WORDS) -> PackingCode:
    """Randomized greedy packing with the all-zeros word included.

    Targets 2^ceil(N/8) words (capped at ``max_words``) at pairwise
    Hamming distance >= ceil(N/8), rejecting candidates until the quota
    or the attempt cap is hit; the final code is re-verified
    exhaustively regardless of how construction went.
    """
    if N < 8:
        raise ValueError("N must be at least 8")
    dmin = math.ceil(N / 8)
    quota = min(2 ** math.ceil(N / 8), max_words)
    rng = np.random.default_rng(seed)
    words = [np.zeros(N, dtype=np.uint8)]
    attempts = 0
    while len(words) < quota and attempts < ATTEMPT_CAP:
        attempts += 1
        w = rng.integers(0, 2, size=N, dtype=np.uint8)
        arr = np.asarray(words)
        if int((arr ^ w).sum(axis=1).min()) >= dmin:
            words.append(w)
    arr = np.asarray(words)
    observed = _pairwise_min_hamming(arr) if arr.shape[0] > 1 else 0
    return PackingCode(
        N=N,
        codewords=arr,
        min_hamming=observed,
        verified=arr.shape[0] > 1 and observed >= dmin,
        complete=arr.shape[0] >= quota,
    )


def single_bump_mass(m: int, M: int) -> float:
    """Exact L2 mass contributed by one active bump: (2/3) / (m*M)^2."""
    return 2.0 / 3.0 / (m * M) ** 2


def separation_l2(p: BumpParams, p2: BumpParams, resolution: int | None = None) -> float:
    """Midpoint-rule quadrature of the squared bump-sum difference.

    Because the bumps have disjoint supports this equals
    Hamming(theta, theta') times the single-bump mass; the quadrature
    keeps the measurement independent of that algebra.
    """
    if (p.m, p.M) != (p2.m, p2.M):
        raise ValueError("bump parameters must share (m, M)")
    res = resolution if resolution is not None else 100 * p.m
    if res < 100 * p.m:
        raise ValueError("resolution must be at least 100 per cell axis unit")
    step = 2.0 / res
    mid = np.linspace(-1.0 + step / 2.0, 1.0 - step / 2.0, res)
    g1, g2 = np.meshgrid(mid, mid, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    diff = chi_theta(pts, p) - chi_theta(pts, p2)
    return float((diff**2).sum() * step * step)


def kl_gaussian_model(
    f: PlanarMap,
    f2: PlanarMap,
    n: int,
    sigma2: float,
    law: CovariateLaw = UNIFORM,
    n_mc: int = 100_000,
    seed: int = 0,
) -> float:
    """KL divergence between the two n-sample Gaussian regression laws.

    Closed form n / (2 sigma^2) * E_X ||f(X) - f'(X)||^2 with the
    expectation by Monte Carlo; symmetric in the two maps.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive (KL infinite at zero noise)")
    if n < 1 or n_mc < 1:
        raise ValueError("n and n_mc must be positive")
    rng = np.random.default_rng(seed)
    x = law.sample(n_mc, rng)
    mean_sq = float(((f(x) - f2(x)) ** 2).sum(axis=1).mean())
    return n / (2.0 * sigma2) * mean_sq


def hypothesis_map(word: np.ndarray, m: int, M: int) -> PlanarMap:
    """Family member indexed by a codeword: both components perturbed by
    the same bump pattern."""
    p = BumpParams(m=m, M=M, theta=np.asarray(word, dtype=np.int8).reshape(m, m))
    return family_map(p, p)


@dataclass(frozen=True)
class BoundReport:
    m: int
    M_amp: int
    n: int
    sigma2: float
    code_size: int
    min_hamming: int
    alpha_sep: float
    beta_kl: float
    bound_value: float
    rate_reference: float
    flagged: bool

    def text(self) -> str:
        return "\n".join(
            f"{k}={getattr(self, k)!r}"
            for k in (
                "m",
                "M_amp",
                "n",
                "sigma2",
                "code_size",
                "min_hamming",
                "alpha_sep",
                "beta_kl",
                "bound_value",
                "rate_reference",
                "flagged",
            )
        )


BOUND_CSV_HEADER = (
    "m,M_amp,n,sigma2,code_size,min_hamming,"
    "alpha_sep,beta_kl,bound_value,rate_reference,flagged"
)


def bound_csv_row(r: BoundReport) -> str:
    return (
        f"{r.m},{r.M_amp},{r.n},{r.sigma2:.17g},{r.code_size},{r.min_hamming},"
        f"{r.alpha_sep:.17g},{r.beta_kl:.17g},{r.bound_value:.17g},"
        f"{r.rate_reference:.17g},{int(r.flagged)}"
    )


def lower_bound_report(
    n: int, sigma2: float, seed: int = 0, amplitude: int | None = None
) -> BoundReport:
    """Assemble the two-point-test probability bound for sample size n.

    Uses m = round(n^(1/4)) bump cells per axis, the default amplitude
    divisor unless one is given, a verified packing code over N = m^2
    bits, the exact per-bump separation algebra (both components are
    perturbed, uniform covariates with density 1/4), and the bound
    sqrt(Mh)/(1+sqrt(Mh)) * (1 - 2 beta - sqrt(2 beta / log Mh)) over
    the Mh = code_size - 1 alternatives.  Reports needing beta outside
    (0, 1/8) or a degenerate code come back flagged.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    m = round(n ** 0.25)
    if m < 2:
        raise ValueError("n too small: round(n^(1/4)) must be at least 2")
    M_amp = amplitude if amplitude is not None else default_amplitude(m)
    code = vg_code(m * m, seed=seed)
    mass = single_bump_mass(m, M_amp)
    # each differing bit perturbs both components, uniform density is 1/4
    per_bit = 2.0 * mass
    alpha_sep = code.min_hamming * 0.25 * per_bit / 2.0
    mh = code.count - 1
    flagged = not code.verified or mh < 2
    if mh >= 2:
        kl = n / (2.0 * sigma2) * 0.25 * per_bit * float(
            code.codewords.sum(axis=1)[1:].mean()
        )
        beta = kl / math.log(mh)
        bound = (
            math.sqrt(mh)
            / (1.0 + math.sqrt(mh))
            * (1.0 - 2.0 * beta - math.sqrt(2.0 * beta / math.log(mh)))
        )
        if not 0.0 < beta < 0.125:
            flagged = True
    else:
        beta, bound = math.inf, 0.0
    return BoundReport(
        m=m,
        M_amp=M_amp,
        n=n,
        sigma2=sigma2,
        code_size=code.count,
        min_hamming=code.min_hamming,
        alpha_sep=alpha_sep,
        beta_kl=beta,
        bound_value=bound,
        rate_reference=n ** -0.5,
        flagged=flagged,
    )
