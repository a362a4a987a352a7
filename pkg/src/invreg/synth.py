"""Regression dataset generation and CSV persistence.

The model is y_i = f(x_i) + eps_i with isotropic Gaussian noise of
variance sigma2 per component.  Generation is deterministic given the
seed; the random stream is numpy's default PCG64 generator, which is a
documented constant of this repo so that golden files stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .maps import PlanarMap

CSV_HEADER = "x1,x2,y1,y2"


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class CovariateLaw:
    """Covariate distribution on [-1,1]^2.

    ``uniform`` needs no extra fields.  ``rejection`` samples from an
    unnormalized density (supported on the whole square) via rejection
    with the given bound.
    """

    kind: str = "uniform"
    density: Callable[[np.ndarray], np.ndarray] | None = None
    density_bound: float = 1.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(-1.0, 1.0, size=(n, 2))
        if self.kind == "rejection":
            if self.density is None or self.density_bound <= 0:
                raise ValueError("rejection law needs a density and a positive bound")
            out = np.empty((n, 2))
            filled = 0
            while filled < n:
                cand = rng.uniform(-1.0, 1.0, size=(2 * (n - filled), 2))
                u = rng.uniform(0.0, self.density_bound, size=cand.shape[0])
                acc = cand[u < self.density(cand)]
                take = min(len(acc), n - filled)
                out[filled : filled + take] = acc[:take]
                filled += take
            return out
        raise ValueError(f"unknown covariate law kind {self.kind!r}")


UNIFORM = CovariateLaw(kind="uniform")


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray  # (n, 2) covariates in the square
    y: np.ndarray  # (n, 2) responses
    sigma2: float
    seed: int

    def __post_init__(self):
        if self.x.shape != self.y.shape or self.x.ndim != 2 or self.x.shape[1] != 2:
            raise ValueError("x and y must both have shape (n, 2)")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")

    @property
    def n(self) -> int:
        return self.x.shape[0]


def sample_dataset(
    truth: PlanarMap,
    n: int,
    sigma2: float,
    seed: int,
    law: CovariateLaw = UNIFORM,
) -> Dataset:
    if n < 1:
        raise ValueError("n must be at least 1")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    rng = np.random.default_rng(seed)
    x = law.sample(n, rng)
    y = truth(x)
    if sigma2 > 0:
        y = y + rng.normal(0.0, np.sqrt(sigma2), size=(n, 2))
    return Dataset(x=x, y=y, sigma2=sigma2, seed=seed)


def write_csv(d: Dataset, path, extra_comments: list[str] | None = None) -> None:
    """Full-precision (17 significant digits) round-trippable CSV dump."""
    lines = [f"# {c}" for c in (extra_comments or [])]
    lines += [f"# sigma2={d.sigma2!r} seed={d.seed}", CSV_HEADER]
    for xi, yi in zip(d.x, d.y):
        lines.append(f"{xi[0]:.17g},{xi[1]:.17g},{yi[0]:.17g},{yi[1]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> Dataset:
    text = Path(path).read_text().splitlines()
    sigma2, seed = 0.0, 0
    rows: list[list[float]] = []
    header_seen = False
    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("sigma2="):
                    sigma2 = float(token[len("sigma2="):])
                elif token.startswith("seed="):
                    seed = int(token[len("seed="):])
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise DatasetFormatError(
                    f"expected header {CSV_HEADER!r}, got {line!r}", lineno
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DatasetFormatError(f"expected 4 columns, got {len(parts)}", lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DatasetFormatError(str(exc), lineno) from None
    if not header_seen:
        raise DatasetFormatError("missing header row", len(text) + 1)
    if not rows:
        raise DatasetFormatError("no data rows", len(text) + 1)
    arr = np.asarray(rows)
    return Dataset(x=arr[:, :2], y=arr[:, 2:], sigma2=sigma2, seed=seed)
