"""Risk functionals: forward L2 risk, the inverse risk with the quartic
penalty psi(z) = z^4 applied to the inverse-error norm, sup-norm error on
a grid, and a level-set Lipschitz diagnostic.

Monte Carlo is used throughout because the piecewise-defined inverse has
a measure-zero discontinuity set that defeats smooth quadrature; every
routine is deterministic given its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import hausdorff
from .maps import PlanarMap, level_set
from .synth import UNIFORM, CovariateLaw

DEFAULT_MC_SAMPLES = 100_000


@dataclass(frozen=True)
class RiskReport:
    """Risk summary.  ``inverse_l2`` is the squared L2(P_X) norm of the
    inverse error, ``inverse_l2_norm`` its square root, and
    ``psi_term = inverse_l2_norm ** 4 = inverse_l2 ** 2``."""

    forward_l2: float
    inverse_l2: float
    inverse_l2_norm: float
    psi_term: float
    total_inverse_risk: float
    sup_error: float
    nonminv_area: float
    mc_samples: int
    mc_std_error: float

    def text(self) -> str:
        return "\n".join(
            f"{k}={getattr(self, k)!r}"
            for k in (
                "forward_l2",
                "inverse_l2",
                "inverse_l2_norm",
                "psi_term",
                "total_inverse_risk",
                "sup_error",
                "nonminv_area",
                "mc_samples",
                "mc_std_error",
            )
        )


REPORT_CSV_HEADER = (
    "forward_l2,inverse_l2,psi_term,total_inverse_risk,"
    "sup_error,nonminv_area,mc_samples,mc_std_error"
)


def report_csv_row(r: RiskReport) -> str:
    return (
        f"{r.forward_l2:.17g},{r.inverse_l2:.17g},{r.psi_term:.17g},"
        f"{r.total_inverse_risk:.17g},{r.sup_error:.17g},{r.nonminv_area:.17g},"
        f"{r.mc_samples},{r.mc_std_error:.17g}"
    )


def forward_l2_risk(
    f_hat: PlanarMap,
    f_star: PlanarMap,
    law: CovariateLaw = UNIFORM,
    n_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
) -> float:
    """Monte Carlo estimate of E ||f_hat(X) - f_star(X)||^2, X ~ law."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    x = law.sample(n_samples, rng)
    diff = f_hat(x) - f_star(x)
    return float((diff**2).sum(axis=1).mean())


def inverse_risk(
    f_hat: PlanarMap,
    f_star: PlanarMap,
    law: CovariateLaw = UNIFORM,
    n_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    pushforward: bool = False,
    sup_error: float = 0.0,
    nonminv_area: float = 0.0,
) -> RiskReport:
    """Forward risk plus the quartic inverse penalty, as one report.

    The inverse term integrates ||f_hat^-1(y) - f_star^-1(y)||^2 with
    y ~ law directly, or y ~ law of f_star(X) when ``pushforward`` is
    set.  f_hat's inverse may return its out-of-square fallback constant
    where no unique preimage exists; those values enter the integral as
    is.  ``mc_std_error`` is the standard error of the inverse-term
    mean.  ``sup_error`` and ``nonminv_area`` are recorded verbatim for
    callers that computed them separately.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if not f_hat.has_inverse:
        raise ValueError("f_hat carries no inverse")
    if not f_star.has_inverse:
        raise ValueError("inverse risk needs an exact inverse of the truth")
    rng = np.random.default_rng(seed)
    x = law.sample(n_samples, rng)
    fdiff = f_hat(x) - f_star(x)
    forward = float((fdiff**2).sum(axis=1).mean())

    y = f_star(x) if pushforward else x
    idiff = f_hat.inverse(y) - f_star.inverse(y)
    sq = (idiff**2).sum(axis=1)
    inv_sq = float(sq.mean())
    stderr = float(sq.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    inv_norm = math.sqrt(inv_sq)
    psi = inv_sq**2
    return RiskReport(
        forward_l2=forward,
        inverse_l2=inv_sq,
        inverse_l2_norm=inv_norm,
        psi_term=psi,
        total_inverse_risk=forward + psi,
        sup_error=sup_error,
        nonminv_area=nonminv_area,
        mc_samples=n_samples,
        mc_std_error=stderr,
    )


def sup_norm_error(
    f_hat: PlanarMap, f_star: PlanarMap, resolution: int = 101
) -> float:
    """Max componentwise absolute error over a resolution^2 grid."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lin = np.linspace(-1.0, 1.0, resolution)
    g1, g2 = np.meshgrid(lin, lin, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    return float(np.abs(f_hat(pts) - f_star(pts)).max())


def levelset_lipschitz_diag(
    f: PlanarMap,
    component: int,
    level_pairs,
    resolution: int = 401,
) -> float:
    """Max Hausdorff-distance-to-level-gap ratio over the given pairs.

    An interior level with an empty extracted level set contradicts an
    invertibility certificate, so it raises instead of being skipped.
    Level pairs closer than 0.05 are rejected: the ratio degenerates as
    the gap shrinks.
    """
    pairs = list(level_pairs)
    if not pairs:
        raise ValueError("need at least one level pair")
    worst = 0.0
    for y, yp in pairs:
        gap = abs(y - yp)
        if gap < 0.05:
            raise ValueError(f"level pair ({y}, {yp}) closer than 0.05")
        ls, lsp = level_set(f, component, y, resolution), level_set(
            f, component, yp, resolution
        )
        if ls.is_empty or lsp.is_empty:
            raise ValueError(
                f"empty level set at interior level for component {component}; "
                "inconsistent with an invertibility certificate"
            )
        worst = max(worst, hausdorff(ls.points, lsp.points) / gap)
    return worst
