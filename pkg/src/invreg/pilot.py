"""Stage-one (pilot) estimators.

The workhorse is clipped k-nearest-neighbor regression.  The sawtooth
estimator is the classic counterexample: it converges to the identity in
sup-norm at any prescribed speed while being non-injective everywhere.
"""

from __future__ import annotations

import numpy as np

from .maps import PlanarMap
from .synth import Dataset


def clip_to_square(y) -> np.ndarray:
    """Componentwise clamp to [-1, 1]."""
    return np.clip(np.asarray(y, dtype=float), -1.0, 1.0)


def _knn_indices(d2_row: np.ndarray, k: int) -> np.ndarray:
    # exact k smallest with deterministic lowest-index tie-breaking
    n = d2_row.shape[0]
    if k >= n:
        return np.arange(n)
    part = np.argpartition(d2_row, k - 1)[:k]
    dmax = d2_row[part].max()
    cand = np.flatnonzero(d2_row <= dmax)
    order = np.lexsort((cand, d2_row[cand]))
    return cand[order[:k]]


def knn_fit(dataset: Dataset, k: int) -> PlanarMap:
    """Clipped k-NN regression map fitted to the dataset.

    At a query point the k nearest covariates (Euclidean distance, ties
    broken by lowest sample index) contribute the mean of their
    responses, clamped componentwise to [-1,1].
    """
    if dataset.n == 0:
        raise ValueError("cannot fit k-NN on an empty dataset")
    if not 1 <= k <= dataset.n:
        raise ValueError(f"k must satisfy 1 <= k <= n (got k={k}, n={dataset.n})")
    x = np.ascontiguousarray(dataset.x)
    y = np.ascontiguousarray(dataset.y)
    x_sq = (x**2).sum(axis=1)

    def fn(queries: np.ndarray) -> np.ndarray:
        out = np.empty_like(queries)
        chunk = max(1, int(4e7) // max(x.shape[0], 1))
        for lo in range(0, queries.shape[0], chunk):
            q = queries[lo : lo + chunk]
            d2 = (q**2).sum(axis=1)[:, None] + x_sq[None, :] - 2.0 * (q @ x.T)
            for i in range(q.shape[0]):
                idx = _knn_indices(d2[i], k)
                out[lo + i] = y[idx].mean(axis=0)
        return clip_to_square(out)

    return PlanarMap(fn=fn, name=f"knn[k={k},n={dataset.n}]")


def sawtooth_estimator(teeth: int) -> PlanarMap:
    """Sawtooth perturbation of the identity with `teeth` teeth.

    Component 1 is x1.  Component 2 oscillates with slope +-3 inside each
    tooth of width 2/teeth, so its sup-distance to x2 is at most 2/teeth,
    yet every interior level is hit three times per tooth: the map is
    nowhere injective.
    """
    if teeth < 1:
        raise ValueError("teeth must be a positive integer")
    delta = 2.0 / teeth

    def fn(p: np.ndarray) -> np.ndarray:
        x2 = p[:, 1]
        m = np.clip(np.floor((x2 + 1.0) / delta), 0, teeth - 1)
        d = -1.0 + m * delta
        u = x2 - d
        third = delta / 3.0
        up1 = d + 3.0 * u
        down = d + delta - 3.0 * (u - third)
        up2 = d + 3.0 * (u - 2.0 * third)
        f2 = np.where(u < third, up1, np.where(u < 2.0 * third, down, up2))
        f2 = np.where(x2 >= 1.0, 1.0, f2)
        return np.stack([p[:, 0], f2], axis=1)

    return PlanarMap(fn=fn, lipschitz_bound=3.0, name=f"sawtooth[D={teeth}]")
