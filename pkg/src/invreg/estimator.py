"""The invertible estimator.

Pipeline: pilot regression -> coherent rotation -> boundary-projected
g-hat on a 2t x 2t square grid -> per-cell triangle interpolation
(g-dagger, bijective square <-> image quadrilateral) -> composition
with the inverse rotation.  Inversion is exact piecewise-affine algebra
on the image triangles; outputs with zero or ambiguous preimages get the
fixed out-of-square constant ``FALLBACK``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geom
from .maps import PlanarMap
from .pilot import knn_fit
from .rotation import CoherentRotation, estimate_rotation
from .synth import Dataset

FALLBACK = np.array([2.0, 2.0])

# per-cell edges in clockwise path order: right, bottom, left, top;
# each row is the (di, dj) grid offsets of the edge's two vertices
_EDGE_V1 = np.array([[1, 1], [1, 0], [0, 0], [0, 1]])
_EDGE_V2 = np.array([[1, 0], [0, 0], [0, 1], [1, 1]])

_INSIDE_EPS = 1e-10
_DOMAIN_TOL = 1e-12
_DEDUP_TOL = 1e-9


def grid_resolution(n: int, alpha_plus_beta: float) -> int:
    """Largest power of two not above sqrt(n) * (log n)^-(alpha+beta), min 1."""
    if n < 2:
        raise ValueError("n must be at least 2")
    bound = math.sqrt(n) * math.log(n) ** (-alpha_plus_beta)
    if bound < 1.0:
        return 1
    return 2 ** int(math.floor(math.log2(bound)))


def boundary_project(x, ytilde) -> np.ndarray:
    """Force output coordinates onto the edges the input sits on.

    Coordinate j of ytilde is replaced by +-1 whenever x_j = +-1;
    interior inputs pass through unchanged.
    """
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    ys = np.atleast_2d(np.asarray(ytilde, dtype=float)).copy()
    on_edge = np.abs(xs) == 1.0
    ys[on_edge] = xs[on_edge]
    return ys[0] if np.ndim(x) == 1 else ys


def g_hat(pilot: PlanarMap, rotation: CoherentRotation) -> PlanarMap:
    """Boundary-projected rotated pilot x -> P(rho(pilot(x)), x)."""
    if rotation.degenerate:
        raise ValueError("g_hat needs a non-degenerate rotation")

    def fn(pts: np.ndarray) -> np.ndarray:
        return boundary_project(pts, rotation.forward(pilot(pts)))

    return PlanarMap(fn=fn, name="g_hat")


@dataclass(frozen=True)
class SquareGrid:
    """Uniform grid on [-1,1]^2 with t cells per half-axis (2t x 2t cells).

    Cells are indexed by (i, j) in {0..2t-1}^2 with i along x1; vertex
    (i, j) sits at (-1 + i/t, -1 + j/t).  Within a cell the vertex path
    starts at the corner closest to (1,1) and runs clockwise.
    """

    t: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be a positive integer")

    @property
    def cells(self) -> int:
        return 2 * self.t

    @property
    def h(self) -> float:
        return 1.0 / self.t

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, 2 * self.t + 1)

    def cell_index(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        i = np.clip(np.floor((pts[:, 0] + 1.0) * self.t).astype(int), 0, self.cells - 1)
        j = np.clip(np.floor((pts[:, 1] + 1.0) * self.t).astype(int), 0, self.cells - 1)
        return i, j

    def cell_vertices(self, i: int, j: int) -> np.ndarray:
        """The four vertices in path order (closest-to-(1,1) first, clockwise)."""
        c = self.coords
        order = [(i + 1, j + 1), (i + 1, j), (i, j), (i, j + 1)]
        return np.array([[c[a], c[b]] for a, b in order])


@dataclass(frozen=True)
class QuadMesh:
    """Image mesh of the square grid under g-hat.

    ``vertex_images[i, j]`` is g-hat at grid vertex (i, j),
    ``center_images[i, j]`` is g-hat at the center of cell (i, j), and
    ``twisted[i, j]`` flags cells whose image quadrilateral's boundary
    path self-crosses.
    """

    grid: SquareGrid
    vertex_images: np.ndarray
    center_images: np.ndarray
    twisted: np.ndarray

    def quad(self, i: int, j: int) -> geom.Quad:
        v = self.vertex_images
        order = [(i + 1, j + 1), (i + 1, j), (i, j), (i, j + 1)]
        pts = [tuple(v[a, b]) for a, b in order]
        return geom.Quad(*pts)


def build_mesh(g: PlanarMap, t: int) -> QuadMesh:
    grid = SquareGrid(t=t)
    c = grid.coords
    g1, g2 = np.meshgrid(c, c, indexing="ij")
    vpts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    vimg = g(vpts).reshape(2 * t + 1, 2 * t + 1, 2)

    mid = (c[:-1] + c[1:]) / 2.0
    m1, m2 = np.meshgrid(mid, mid, indexing="ij")
    cpts = np.stack([m1.ravel(), m2.ravel()], axis=1)
    cimg = g(cpts).reshape(2 * t, 2 * t, 2)

    twisted = np.zeros((2 * t, 2 * t), dtype=bool)
    mesh = QuadMesh(grid=grid, vertex_images=vimg, center_images=cimg, twisted=twisted)
    for i in range(2 * t):
        for j in range(2 * t):
            twisted[i, j] = geom.quad_is_twisted(mesh.quad(i, j))
    return mesh


def _check_in_square(pts: np.ndarray, what: str) -> None:
    if np.any(np.abs(pts) > 1.0 + _DOMAIN_TOL):
        raise ValueError(f"{what} must lie in [-1,1]^2")


def _local_coords(mesh: QuadMesh, pts: np.ndarray):
    t = mesh.grid.t
    i, j = mesh.grid.cell_index(pts)
    u = (pts[:, 0] + 1.0) * t - i
    v = (pts[:, 1] + 1.0) * t - j
    return i, j, np.clip(u, 0.0, 1.0), np.clip(v, 0.0, 1.0)


def g_dagger(mesh: QuadMesh, x) -> np.ndarray:
    """Center-fan triangle interpolation of g-hat; exact at grid vertices.

    In the cell containing x the triangle is picked by the nearest edge
    (ties go to the first edge in clockwise path order: right, bottom,
    left, top), and the interpolation runs through the cell center and
    the edge's two vertices.  Twisted cells fall back to the image of
    the nearest cell vertex.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    _check_in_square(pts, "g_dagger input")
    i, j, u, v = _local_coords(mesh, pts)

    dist = np.stack([1.0 - u, v, u, 1.0 - v], axis=0)
    e = np.argmin(dist, axis=0)
    p1, p2 = u - 0.5, v - 0.5
    a, b = p1 + p2, p1 - p2
    alpha1 = np.choose(e, [a, b, -a, -b])
    alpha2 = np.choose(e, [b, -a, -b, a])

    i1, j1 = i + _EDGE_V1[e, 0], j + _EDGE_V1[e, 1]
    i2, j2 = i + _EDGE_V2[e, 0], j + _EDGE_V2[e, 1]
    gs = mesh.center_images[i, j]
    gv1 = mesh.vertex_images[i1, j1]
    gv2 = mesh.vertex_images[i2, j2]
    out = gs + alpha1[:, None] * (gv1 - gs) + alpha2[:, None] * (gv2 - gs)

    tw = mesh.twisted[i, j]
    if tw.any():
        iv = np.where(u >= 0.5, i + 1, i)
        jv = np.where(v >= 0.5, j + 1, j)
        out[tw] = mesh.vertex_images[iv[tw], jv[tw]]
    return out[0] if np.ndim(x) == 1 else out


def _affine_pieces(mesh: QuadMesh):
    """Per (cell, edge) domain/image triangle data, shape (2t, 2t, 4, 2)."""
    t = mesh.grid.t
    c = mesh.grid.coords
    mid = (c[:-1] + c[1:]) / 2.0
    m1, m2 = np.meshgrid(mid, mid, indexing="ij")
    s_dom = np.stack([m1, m2], axis=-1)[:, :, None, :]  # (2t,2t,1,2)

    idx = np.arange(2 * t)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    v1 = np.stack(
        [c[ii[..., None] + _EDGE_V1[:, 0]], c[jj[..., None] + _EDGE_V1[:, 1]]], axis=-1
    )
    v2 = np.stack(
        [c[ii[..., None] + _EDGE_V2[:, 0]], c[jj[..., None] + _EDGE_V2[:, 1]]], axis=-1
    )
    g1 = mesh.vertex_images[ii[..., None] + _EDGE_V1[:, 0], jj[..., None] + _EDGE_V1[:, 1]]
    g2 = mesh.vertex_images[ii[..., None] + _EDGE_V2[:, 0], jj[..., None] + _EDGE_V2[:, 1]]
    gs = mesh.center_images[:, :, None, :]
    return s_dom, v1, v2, np.broadcast_to(gs, g1.shape), g1, g2


@dataclass(frozen=True)
class InvertibleEstimator:
    """Immutable fitted estimator rho^-1 . g-dagger (constant 0 when the
    rotation estimate is degenerate)."""

    rotation: CoherentRotation
    mesh: QuadMesh | None

    @property
    def degenerate(self) -> bool:
        return self.mesh is None

    @property
    def t(self) -> int:
        return 0 if self.mesh is None else self.mesh.grid.t

    def as_planar_map(self) -> PlanarMap:
        return PlanarMap(
            fn=lambda p: evaluate(self, p),
            inverse_fn=lambda p: invert(self, p),
            name=f"invertible[t={self.t}]",
        )


def fit_from_pilot(
    pilot: PlanarMap,
    n: int,
    alpha_plus_beta: float = 1.0,
    t_override: int | None = None,
) -> InvertibleEstimator:
    rotation = estimate_rotation(pilot)
    if rotation.degenerate:
        return InvertibleEstimator(rotation=rotation, mesh=None)
    t = t_override if t_override is not None else grid_resolution(n, alpha_plus_beta)
    if t < 1:
        raise ValueError("grid resolution must be at least 1")
    mesh = build_mesh(g_hat(pilot, rotation), t)
    return InvertibleEstimator(rotation=rotation, mesh=mesh)


def fit(
    dataset: Dataset,
    k: int,
    alpha_plus_beta: float = 1.0,
    t_override: int | None = None,
) -> InvertibleEstimator:
    """End-to-end fit: k-NN pilot, rotation estimate, interpolation mesh."""
    pilot = knn_fit(dataset, k)
    return fit_from_pilot(pilot, dataset.n, alpha_plus_beta, t_override)


def evaluate(e: InvertibleEstimator, x) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    _check_in_square(pts, "evaluate input")
    if e.degenerate:
        out = np.zeros_like(pts)
    else:
        out = e.rotation.inverse(g_dagger(e.mesh, pts))
    return out[0] if np.ndim(x) == 1 else out


def invert(e: InvertibleEstimator, y) -> np.ndarray:
    """Exact preimage under the estimator, or the constant ``FALLBACK``.

    The rotated query is located in the image triangles of the mesh.  A
    unique preimage (all covering pieces agreeing within 1e-9, which
    absorbs shared-edge duplicates) is returned; no coverage, coverage
    by a twisted cell's quad, or genuinely distinct preimages give the
    fallback.
    """
    pts = np.atleast_2d(np.asarray(y, dtype=float))
    _check_in_square(pts, "invert input")
    nq = pts.shape[0]
    if e.degenerate:
        out = np.broadcast_to(FALLBACK, (nq, 2)).copy()
        return out[0] if np.ndim(y) == 1 else out

    mesh = e.mesh
    z = np.atleast_2d(e.rotation.forward(pts))
    s_dom, v1d, v2d, gs, g1, g2 = _affine_pieces(mesh)

    ok = ~mesh.twisted
    u = (g1 - gs)[ok].reshape(-1, 4, 2)
    w = (g2 - gs)[ok].reshape(-1, 4, 2)
    base = gs[ok].reshape(-1, 4, 2)
    det = u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]
    sd = np.broadcast_to(s_dom, v1d.shape)[ok].reshape(-1, 4, 2)
    v1d_ok = v1d[ok].reshape(-1, 4, 2)
    v2d_ok = v2d[ok].reshape(-1, 4, 2)
    nondeg = np.abs(det) > geom.TOL
    safe_det = np.where(nondeg, det, 1.0)

    tw_tris: list[np.ndarray] = []
    for i, j in zip(*np.nonzero(mesh.twisted)):
        q = mesh.quad(i, j)
        tw_tris.append(np.array([q.v1, q.v2, q.v3]))
        tw_tris.append(np.array([q.v1, q.v3, q.v4]))
    tw = np.array(tw_tris) if tw_tris else np.empty((0, 3, 2))

    # collapsed pieces (clipped pilots can flatten boundary cells onto an
    # edge): their image is a segment with a continuum of preimages, so
    # queries on it are ambiguous
    deg_segs: list[np.ndarray] = []
    for ci, ei in zip(*np.nonzero(~nondeg)):
        tri = np.array([base[ci, ei], base[ci, ei] + u[ci, ei], base[ci, ei] + w[ci, ei]])
        d01 = np.linalg.norm(tri[0] - tri[1])
        d02 = np.linalg.norm(tri[0] - tri[2])
        d12 = np.linalg.norm(tri[1] - tri[2])
        pair = [(d01, 0, 1), (d02, 0, 2), (d12, 1, 2)][int(np.argmax([d01, d02, d12]))]
        deg_segs.append(tri[[pair[1], pair[2]]])
    segs = np.array(deg_segs) if deg_segs else np.empty((0, 2, 2))

    out = np.broadcast_to(FALLBACK, (nq, 2)).copy()
    chunk = max(1, int(2e6) // max(base.shape[0] * 4, 1))
    for lo in range(0, nq, chunk):
        q = z[lo : lo + chunk]  # (m, 2)
        p = q[:, None, None, :] - base[None, :, :, :]
        a1 = (p[..., 0] * w[None, ..., 1] - p[..., 1] * w[None, ..., 0]) / safe_det
        a2 = (u[None, ..., 0] * p[..., 1] - u[None, ..., 1] * p[..., 0]) / safe_det
        inside = (
            nondeg[None]
            & (a1 >= -_INSIDE_EPS)
            & (a2 >= -_INSIDE_EPS)
            & (a1 + a2 <= 1.0 + _INSIDE_EPS)
        )
        pre = (
            sd[None]
            + a1[..., None] * (v1d_ok[None] - sd[None])
            + a2[..., None] * (v2d_ok[None] - sd[None])
        )  # (m, ncell, 4, 2)

        m = q.shape[0]
        flat_in = inside.reshape(m, -1)
        flat_pre = pre.reshape(m, -1, 2)
        counts = flat_in.sum(axis=1)
        has = counts > 0
        lob = np.where(flat_in[..., None], flat_pre, np.inf).min(axis=1)
        hib = np.where(flat_in[..., None], flat_pre, -np.inf).max(axis=1)
        spread = np.where(has, (hib - lob).max(axis=1), np.inf)
        unique = has & (spread <= _DEDUP_TOL)

        if segs.shape[0]:
            on_seg = np.zeros(m, dtype=bool)
            for a, bpt in segs:
                ab = bpt - a
                denom = float(ab @ ab)
                qa = q - a
                if denom <= geom.TOL**2:
                    dist = np.hypot(qa[:, 0], qa[:, 1])
                else:
                    tpar = np.clip((qa @ ab) / denom, 0.0, 1.0)
                    proj = a + tpar[:, None] * ab
                    dist = np.hypot(q[:, 0] - proj[:, 0], q[:, 1] - proj[:, 1])
                on_seg |= dist <= _INSIDE_EPS
            unique &= ~on_seg

        if tw.shape[0]:
            in_tw = np.zeros(m, dtype=bool)
            for tri in tw:
                sx, sy = tri[2]
                ux, uy = tri[0, 0] - sx, tri[0, 1] - sy
                vx, vy = tri[1, 0] - sx, tri[1, 1] - sy
                d = ux * vy - uy * vx
                if abs(d) <= geom.TOL:
                    continue
                px, py = q[:, 0] - sx, q[:, 1] - sy
                b1 = (px * vy - py * vx) / d
                b2 = (ux * py - uy * px) / d
                in_tw |= (
                    (b1 >= -_INSIDE_EPS)
                    & (b2 >= -_INSIDE_EPS)
                    & (b1 + b2 <= 1.0 + _INSIDE_EPS)
                )
            unique &= ~in_tw

        first = np.argmax(flat_in, axis=1)
        picked = flat_pre[np.arange(m), first]
        out[lo : lo + chunk][unique] = np.clip(picked[unique], -1.0, 1.0)
    return out[0] if np.ndim(y) == 1 else out


@dataclass(frozen=True)
class MeasureReport:
    measure: float
    stderr: float
    n_samples: int
    seed: int


def non_invertible_measure(
    e: InvertibleEstimator, n_samples: int = 100_000, seed: int = 0
) -> MeasureReport:
    """Monte Carlo area of the outputs without a unique preimage.

    Uniform samples on the square; the fraction mapped to the fallback
    constant, scaled by the square's area 4, with its binomial standard
    error.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    ys = rng.uniform(-1.0, 1.0, size=(n_samples, 2))
    inv = invert(e, ys)
    frac = float(np.all(inv == FALLBACK, axis=1).mean())
    stderr = 4.0 * math.sqrt(frac * (1.0 - frac) / n_samples)
    return MeasureReport(
        measure=4.0 * frac, stderr=stderr, n_samples=n_samples, seed=seed
    )


def dump_mesh_csv(mesh: QuadMesh, path) -> None:
    """Debug dump: vertex images then per-cell twist flags."""
    lines = ["kind,i,j,a,b"]
    side = mesh.vertex_images.shape[0]
    for i in range(side):
        for j in range(side):
            a, b = mesh.vertex_images[i, j]
            lines.append(f"vertex,{i},{j},{a:.17g},{b:.17g}")
    for i in range(mesh.twisted.shape[0]):
        for j in range(mesh.twisted.shape[1]):
            lines.append(f"twist,{i},{j},{int(mesh.twisted[i, j])},0")
    Path(path).write_text("\n".join(lines) + "\n")
