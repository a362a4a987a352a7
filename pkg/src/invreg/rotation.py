"""Coherent rotation: the angular re-parameterization that sends each
corner image of the square back onto its corner.

The rotation factors through the disk: square -> disk (omega), rotate
angles by theta_dagger, warp them with a strictly increasing piecewise
linear tau that pins the four corner angles to (2j-1)*pi/4, then disk ->
square.  Radii pass through untouched, so the disk stage is an exact
isometry on every circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .maps import TWO_PI, PlanarMap, omega, omega_inv, polar_v, theta_angle, wrap

# square corners, clockwise from (1,1)
CORNERS = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]])

_CORNER_TARGETS = np.array([1.0, 3.0, 5.0, 7.0]) * math.pi / 4.0


@dataclass(frozen=True)
class RotationParams:
    theta_dagger: float
    thetas: tuple[float, float, float, float]
    valid: bool

    def dump(self) -> str:
        lines = [f"theta_dagger={self.theta_dagger!r}"]
        lines += [f"theta{j + 1}={t!r}" for j, t in enumerate(self.thetas)]
        lines.append(f"valid={self.valid}")
        return "\n".join(lines)


def corner_angles(corner_images: np.ndarray) -> RotationParams:
    """Rotation parameters from the images of the four square corners.

    ``corner_images`` holds f((1,1)), f((1,-1)), f((-1,-1)), f((-1,1)) in
    that order.  Raises if any image collapses to the origin (its angle
    is undefined); a violated strict ordering of the four shifted angles
    only clears the ``valid`` flag.
    """
    imgs = np.asarray(corner_images, dtype=float)
    if imgs.shape != (4, 2):
        raise ValueError("corner_images must be a 4 x 2 array")
    zetas = omega(imgs)
    if np.any(np.hypot(zetas[:, 0], zetas[:, 1]) == 0):
        raise ValueError("a corner image maps to the origin; angle undefined")
    ang = theta_angle(zetas)
    theta_dagger = wrap(wrap(TWO_PI - ang[0]) + 0.5 * wrap(ang[0] - ang[3]))
    thetas = wrap(ang + theta_dagger)
    valid = bool(
        0.0 < thetas[0] < thetas[1] < thetas[2] < thetas[3] < TWO_PI
    )
    return RotationParams(
        theta_dagger=float(theta_dagger),
        thetas=tuple(float(t) for t in thetas),
        valid=valid,
    )


def _knots(p: RotationParams) -> tuple[np.ndarray, np.ndarray]:
    xs = np.concatenate(([0.0], np.asarray(p.thetas), [TWO_PI]))
    ys = np.concatenate(([0.0], _CORNER_TARGETS, [TWO_PI]))
    return xs, ys


def tau(theta, p: RotationParams):
    """Piecewise-linear angle warp through (theta_j, (2j-1)pi/4) on [0, 2pi]."""
    if not p.valid:
        raise ValueError("tau is undefined for invalid rotation parameters")
    xs, ys = _knots(p)
    out = np.interp(np.asarray(theta, dtype=float), xs, ys)
    return float(out) if np.ndim(theta) == 0 else out


def tau_inv(theta, p: RotationParams):
    if not p.valid:
        raise ValueError("tau_inv is undefined for invalid rotation parameters")
    xs, ys = _knots(p)
    out = np.interp(np.asarray(theta, dtype=float), ys, xs)
    return float(out) if np.ndim(theta) == 0 else out


def _angle_map(z: np.ndarray, p: RotationParams, remap) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(z, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    out = np.zeros_like(pts)
    nz = r > 0
    if nz.any():
        ang = theta_angle(pts[nz])
        out[nz] = polar_v(r[nz], remap(ang, p))
    return out[0] if np.ndim(z) == 1 else out


def rotation_R(z, p: RotationParams) -> np.ndarray:
    """Radius-preserving disk rotation: angle -> tau(angle + theta_dagger)."""
    if not p.valid:
        raise ValueError("rotation is undefined for invalid parameters")
    return _angle_map(z, p, lambda a, pp: tau(wrap(a + pp.theta_dagger), pp))


def rotation_R_inv(z, p: RotationParams) -> np.ndarray:
    if not p.valid:
        raise ValueError("rotation is undefined for invalid parameters")
    return _angle_map(z, p, lambda a, pp: wrap(tau_inv(a, pp) - pp.theta_dagger))


def rho(x, p: RotationParams) -> np.ndarray:
    """The square-to-square coherent rotation omega^-1 . R . omega."""
    return omega_inv(rotation_R(omega(x), p))


def rho_inv(y, p: RotationParams) -> np.ndarray:
    return omega_inv(rotation_R_inv(omega(y), p))


@dataclass(frozen=True)
class CoherentRotation:
    """Immutable forward/inverse pair; degenerate when the estimated
    corner angles violate the strict ordering (then the inverse is the
    constant 0, which forces the downstream estimator to 0 as well)."""

    params: RotationParams | None

    @property
    def degenerate(self) -> bool:
        return self.params is None or not self.params.valid

    def forward(self, x) -> np.ndarray:
        if self.degenerate:
            return np.zeros_like(np.asarray(x, dtype=float))
        return rho(x, self.params)

    def inverse(self, y) -> np.ndarray:
        if self.degenerate:
            return np.zeros_like(np.asarray(y, dtype=float))
        return rho_inv(y, self.params)

    @property
    def forward_map(self) -> PlanarMap:
        return PlanarMap(fn=self.forward, inverse_fn=self.inverse, name="rho")

    @property
    def inverse_map(self) -> PlanarMap:
        return PlanarMap(fn=self.inverse, inverse_fn=self.forward, name="rho_inv")


def exact_rotation(truth: PlanarMap) -> CoherentRotation:
    """Rotation from the true corner images (the population-level rho)."""
    return CoherentRotation(params=corner_angles(truth(CORNERS)))


def estimate_rotation(pilot: PlanarMap) -> CoherentRotation:
    """Rotation from pilot corner predictions; failures fall back to the
    degenerate rotation instead of raising."""
    imgs = pilot(CORNERS)
    try:
        params = corner_angles(imgs)
    except ValueError:
        return CoherentRotation(params=None)
    return CoherentRotation(params=params)
