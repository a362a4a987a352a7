"""Planar map library: polar helpers, the swirl truth, the bump family,
level-set extraction and a grid-based invertibility certifier.

All map evaluation is vectorized: a map takes an (n, 2) array (or a single
(2,) point) and returns an array of the same shape.  Maps are pure, so a
constructed :class:`PlanarMap` is safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage
from skimage import measure

TWO_PI = 2.0 * math.pi


def _as_points(x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        return a[None, :], True
    return a, False


@dataclass(frozen=True)
class PlanarMap:
    """An evaluatable map from [-1,1]^2 to R^2.

    ``fn`` (and ``inverse_fn``, when present) operate on (n, 2) arrays.
    ``lipschitz_bound`` is an upper bound on the forward Lipschitz
    constant when one is known analytically.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    inverse_fn: Callable[[np.ndarray], np.ndarray] | None = None
    lipschitz_bound: float | None = None
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        pts, single = _as_points(x)
        out = self.fn(pts)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"map {self.name or '<anonymous>'} produced non-finite output")
        return out[0] if single else out

    @property
    def has_inverse(self) -> bool:
        return self.inverse_fn is not None

    def inverse(self, y) -> np.ndarray:
        if self.inverse_fn is None:
            raise ValueError(f"map {self.name or '<anonymous>'} carries no exact inverse")
        pts, single = _as_points(y)
        out = self.inverse_fn(pts)
        return out[0] if single else out


# ---------------------------------------------------------------------------
# polar helpers (square <-> disk, angles)
# ---------------------------------------------------------------------------

def omega(x) -> np.ndarray:
    """Square-to-disk map (||x||_inf / ||x||_2) * x, with omega(0) = 0."""
    pts, single = _as_points(x)
    n2 = np.hypot(pts[:, 0], pts[:, 1])
    ninf = np.maximum(np.abs(pts[:, 0]), np.abs(pts[:, 1]))
    scale = np.divide(ninf, n2, out=np.zeros_like(n2), where=n2 > 0)
    out = pts * scale[:, None]
    return out[0] if single else out


def omega_inv(y) -> np.ndarray:
    """Disk-to-square map (||y||_2 / ||y||_inf) * y, with 0 mapped to 0."""
    pts, single = _as_points(y)
    n2 = np.hypot(pts[:, 0], pts[:, 1])
    ninf = np.maximum(np.abs(pts[:, 0]), np.abs(pts[:, 1]))
    scale = np.divide(n2, ninf, out=np.zeros_like(n2), where=ninf > 0)
    out = pts * scale[:, None]
    return out[0] if single else out


def wrap(z):
    """Reduce an angle to [0, 2*pi) modulo 2*pi."""
    out = np.mod(z, TWO_PI)
    # mod can return 2*pi itself for inputs a hair below a multiple of 2*pi
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def theta_angle(z):
    """Clockwise-from-(0,1) angle: the theta in [0,2*pi) with (sin t, cos t) = z/||z||."""
    pts, single = _as_points(z)
    n = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(n == 0):
        raise ValueError("theta_angle is undefined at the origin")
    out = wrap(np.arctan2(pts[:, 0], pts[:, 1]))
    return float(out[0]) if single else out


def polar_v(r, theta) -> np.ndarray:
    """v(r, theta) = (r sin theta, r cos theta)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    out = np.stack([r * np.sin(theta), r * np.cos(theta)], axis=-1)
    return out


# ---------------------------------------------------------------------------
# concrete truths
# ---------------------------------------------------------------------------

def identity_map() -> PlanarMap:
    return PlanarMap(
        fn=lambda p: p.copy(),
        inverse_fn=lambda p: p.copy(),
        lipschitz_bound=1.0,
        name="identity",
    )


def _swirl_radial(r: np.ndarray, exponent: np.ndarray, invert: bool) -> np.ndarray:
    """Radius map r -> r**e, with the bijective convention r**0 := r.

    The literal r**0 = 1 would collapse whole rays onto the disk boundary;
    treating a zero exponent as the identity keeps the map a bijection
    while agreeing with the formula everywhere else.
    """
    out = np.empty_like(r)
    degenerate = exponent <= 1e-12
    out[degenerate] = r[degenerate]
    e = exponent[~degenerate]
    if invert:
        e = 1.0 / e
    with np.errstate(divide="ignore"):
        out[~degenerate] = np.power(r[~degenerate], e)
    return out


def swirl_truth() -> PlanarMap:
    """The swirl bijection of [-1,1]^2 used as the experiment ground truth.

    Composition: square -> disk, warp the radius by r**|sin(angle)| at a
    fixed angle, then disk -> square.  The trailing disk-to-square step
    makes the range the full square (the raw polar form lands in the
    disk).
    """

    def fwd(p: np.ndarray) -> np.ndarray:
        z = omega(p)
        r = np.hypot(z[:, 0], z[:, 1])
        out = np.zeros_like(p)
        nz = r > 0
        theta = wrap(np.arctan2(z[nz, 0], z[nz, 1]))
        r_out = _swirl_radial(r[nz], np.abs(np.sin(theta)), invert=False)
        out[nz] = omega_inv(polar_v(r_out, theta))
        return out

    def inv(p: np.ndarray) -> np.ndarray:
        z = omega(p)
        r = np.hypot(z[:, 0], z[:, 1])
        out = np.zeros_like(p)
        nz = r > 0
        theta = wrap(np.arctan2(z[nz, 0], z[nz, 1]))
        r_in = _swirl_radial(r[nz], np.abs(np.sin(theta)), invert=True)
        out[nz] = omega_inv(polar_v(r_in, theta))
        return out

    return PlanarMap(fn=fwd, inverse_fn=inv, name="swirl")


def scaled_identity(factor: float) -> PlanarMap:
    """f(x) = factor * x; handy linear test map (not square-onto-square)."""
    return PlanarMap(
        fn=lambda p: factor * p,
        inverse_fn=(lambda p: p / factor) if factor != 0 else None,
        lipschitz_bound=abs(factor),
        name=f"scale[{factor}]",
    )


# ---------------------------------------------------------------------------
# the bump family behind the lower bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpParams:
    """Bump perturbation parameters: m x m binary pattern, amplitude 1/M.

    The strict constraint M > 2m keeps every perturbed coordinate map
    strictly increasing (slopes of the bump stay in (-m/M, m/M) with
    m/M < 1/2).
    """

    m: int
    M: int
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.M <= 2 * self.m:
            raise ValueError(f"M must exceed 2m (got M={self.M}, m={self.m})")
        th = np.asarray(self.theta, dtype=np.int8)
        if th.shape != (self.m, self.m) or not np.isin(th, (0, 1)).all():
            raise ValueError("theta must be a binary m x m matrix")
        object.__setattr__(self, "theta", th)

    @property
    def grid_points(self) -> np.ndarray:
        j = np.arange(1, self.m + 1)
        return -1.0 + (2.0 * j - 1.0) / self.m


def default_amplitude(m: int) -> int:
    """Smallest admissible amplitude divisor, M = 2m + 1."""
    return 2 * m + 1


def random_bump_params(m: int, M: int, rng: np.random.Generator) -> BumpParams:
    return BumpParams(m=m, M=M, theta=rng.integers(0, 2, size=(m, m)))


def pyramid_phi(x) -> np.ndarray:
    """Pyramid basis: distance to the square's boundary inside, 0 outside."""
    pts, single = _as_points(x)
    inside = (np.abs(pts) <= 1.0).all(axis=1)
    val = np.minimum(1.0 - np.abs(pts[:, 0]), 1.0 - np.abs(pts[:, 1]))
    out = np.where(inside, np.maximum(val, 0.0), 0.0)
    return float(out[0]) if single else out


def chi_theta(x, p: BumpParams) -> np.ndarray:
    """Sum of scaled pyramid bumps on the active m x m cells; range [0, 1/M]."""
    pts, single = _as_points(x)
    t = p.grid_points
    # bumps have disjoint supports: only the cell containing x contributes
    j1 = np.clip(np.floor((pts[:, 0] + 1.0) * p.m / 2.0).astype(int), 0, p.m - 1)
    j2 = np.clip(np.floor((pts[:, 1] + 1.0) * p.m / 2.0).astype(int), 0, p.m - 1)
    local = np.stack(
        [p.m * (pts[:, 0] - t[j1]), p.m * (pts[:, 1] - t[j2])], axis=1
    )
    out = p.theta[j1, j2] / p.M * pyramid_phi(local)
    return float(out[0]) if single else out


def xi_theta(k: int, p: BumpParams) -> Callable[[np.ndarray], np.ndarray]:
    """Scalar map x -> x_k + chi_theta(x); strictly increasing along axis k."""
    if k not in (1, 2):
        raise ValueError("component k must be 1 or 2")

    def f(x):
        pts, single = _as_points(x)
        out = pts[:, k - 1] + chi_theta(pts, p)
        return float(out[0]) if single else out

    return f


def family_map(p1: BumpParams, p2: BumpParams) -> PlanarMap:
    """The invertible perturbation of the identity (xi_{theta1}, xi_{theta2})."""
    if (p1.m, p1.M) != (p2.m, p2.M):
        raise ValueError("both components must share (m, M)")
    f1, f2 = xi_theta(1, p1), xi_theta(2, p2)

    def fwd(p: np.ndarray) -> np.ndarray:
        return np.stack([f1(p), f2(p)], axis=1)

    slope = p1.m / p1.M
    return PlanarMap(
        fn=fwd,
        lipschitz_bound=1.0 + slope,
        name=f"family[m={p1.m},M={p1.M}]",
    )


# ---------------------------------------------------------------------------
# level sets and the invertibility certifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSet:
    component: int
    level: float
    polylines: tuple[np.ndarray, ...]

    @property
    def points(self) -> np.ndarray:
        if not self.polylines:
            return np.empty((0, 2))
        return np.concatenate(self.polylines, axis=0)

    @property
    def is_empty(self) -> bool:
        return all(len(p) == 0 for p in self.polylines)


def component_grid(f: PlanarMap, component: int, resolution: int) -> np.ndarray:
    """Values of f's component on a resolution^2 grid; axis 0 is x1."""
    lin = np.linspace(-1.0, 1.0, resolution)
    g1, g2 = np.meshgrid(lin, lin, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    vals = f(pts)[:, component - 1]
    return vals.reshape(resolution, resolution)


def level_set(
    f: PlanarMap, component: int, level: float, resolution: int = 401
) -> LevelSet:
    """Marching-squares extraction of {x : f_component(x) = level}.

    Levels exactly on the range endpoints are nudged inward so that the
    boundary-hugging contour is still produced; an empty level set is a
    legal result for a level outside the component's range.
    """
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    vals = component_grid(f, component, resolution)
    lo, hi = vals.min(), vals.max()
    nudge = 1e-9 * max(1.0, hi - lo)
    lev = min(max(level, lo + nudge), hi - nudge)
    if level < lo - nudge or level > hi + nudge:
        return LevelSet(component=component, level=level, polylines=())
    contours = measure.find_contours(vals, lev)
    h = 2.0 / (resolution - 1)
    polylines = tuple(np.asarray(c) * h - 1.0 for c in contours)
    return LevelSet(component=component, level=level, polylines=polylines)


@dataclass(frozen=True)
class InvertibilityReport:
    grid_resolution: int
    tested_outputs: int
    unique_count: int
    missing_count: int
    multiple_count: int

    @property
    def certified(self) -> bool:
        return self.unique_count == self.tested_outputs


def check_invertible_on_grid(
    f: PlanarMap,
    resolution: int = 401,
    samples: int = 100,
    output_box: float = 0.95,
    lipschitz: float | None = None,
) -> InvertibilityReport:
    """Classify sampled outputs by the number of preimage clusters.

    For each output y on a uniform grid strictly inside
    (-output_box, output_box)^2, the set of domain grid points with
    ||f(x) - y||_inf below the cell Lipschitz slack is clustered by
    8-connectivity; one cluster means a unique preimage, zero means y was
    missed (non-surjective), two or more means multiple preimages.
    """
    if resolution < 2 or samples < 1:
        raise ValueError("resolution >= 2 and samples >= 1 required")
    lin = np.linspace(-1.0, 1.0, resolution)
    g1, g2 = np.meshgrid(lin, lin, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    vals = f(pts).reshape(resolution, resolution, 2)

    h = 2.0 / (resolution - 1)
    if lipschitz is None:
        lipschitz = f.lipschitz_bound
    if lipschitz is None:
        d1 = np.abs(np.diff(vals, axis=0)).max()
        d2 = np.abs(np.diff(vals, axis=1)).max()
        lipschitz = max(d1, d2) / h
    slack = 2.0 * max(lipschitz, 1e-9) * h

    side = max(2, math.ceil(math.sqrt(samples)))
    ys = np.linspace(-output_box, output_box, side + 2)[1:-1]
    y1, y2 = np.meshgrid(ys, ys, indexing="ij")
    outputs = np.stack([y1.ravel(), y2.ravel()], axis=1)[:samples]

    unique = missing = multiple = 0
    # 8-connectivity: a diagonal grid step is still the same preimage blob
    structure = np.ones((3, 3), dtype=int)
    for y in outputs:
        mask = (np.abs(vals - y[None, None, :]) <= slack).all(axis=2)
        _, n_clusters = ndimage.label(mask, structure=structure)
        if n_clusters == 0:
            missing += 1
        elif n_clusters == 1:
            unique += 1
        else:
            multiple += 1
    return InvertibilityReport(
        grid_resolution=resolution,
        tested_outputs=len(outputs),
        unique_count=unique,
        missing_count=missing,
        multiple_count=multiple,
    )


def lipschitz_estimate(
    f: PlanarMap, samples: np.ndarray
) -> tuple[float, float]:
    """Lower bounds (L_forward, L_inverse) from pairwise sample ratios.

    L_forward is the max of ||f(x)-f(x')|| / ||x-x'|| over all sampled
    pairs, L_inverse the max reciprocal ratio; both underestimate the
    true constants.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    img = f(pts)
    dx = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    dy = np.sqrt(((img[:, None, :] - img[None, :, :]) ** 2).sum(axis=2))
    iu = np.triu_indices(pts.shape[0], k=1)
    dx, dy = dx[iu], dy[iu]
    ok = dx > 0
    fwd = float(np.max(dy[ok] / dx[ok]))
    ok_inv = ok & (dy > 0)
    inv = float(np.max(dx[ok_inv] / dy[ok_inv])) if ok_inv.any() else math.inf
    return fwd, inv
