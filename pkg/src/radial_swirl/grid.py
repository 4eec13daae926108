"""Radial mesh on [0, R] with disk-measure quadrature and discrete norms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FluidParams:
    """Physical constants. Pressure and bulk-viscosity prefactors are fixed to 1."""

    mu: float
    beta: float
    gamma: float
    R: float = 1.0

    def __post_init__(self):
        for name, ok in (("mu", self.mu > 0), ("beta", self.beta > 0),
                         ("gamma", self.gamma > 1), ("R", self.R > 0)):
            if not ok:
                raise ValueError(f"invalid {name}={getattr(self, name)!r}")

    @property
    def cap(self) -> float:
        """Density cap (7 mu)^(1/beta) of the small-data regime."""
        return (7.0 * self.mu) ** (1.0 / self.beta)


@dataclass(frozen=True)
class RadialGrid:
    N: int
    R: float
    h: float = field(init=False)
    centers: np.ndarray = field(init=False, repr=False)
    faces: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = self.R / self.N
        faces = np.arange(self.N + 1) * h
        faces[-1] = self.R
        centers = (np.arange(self.N) + 0.5) * h
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "centers", centers)
        # exact: the r dr measure of cell i is r_i * h
        object.__setattr__(self, "weights", 2.0 * np.pi * centers * h)
        for a in (faces, centers, self.weights):
            a.setflags(write=False)

    @property
    def area(self) -> float:
        return np.pi * self.R ** 2


def build_grid(N: int, R: float) -> RadialGrid:
    if int(N) != N or N < 4:
        raise ValueError(f"need N >= 4 cells, got {N!r}")
    if not R > 0:
        raise ValueError(f"need R > 0, got {R!r}")
    return RadialGrid(int(N), float(R))


def _check(grid: RadialGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.N,):
        raise ValueError(f"field has shape {f.shape}, grid expects ({grid.N},)")
    return f


def integrate_disk(grid: RadialGrid, f) -> float:
    """Midpoint approximation of the integral of f over the disk."""
    return float(np.dot(_check(grid, f), grid.weights))


def mean_disk(grid: RadialGrid, f) -> float:
    return integrate_disk(grid, f) / float(np.sum(grid.weights))


def lp_norm(grid: RadialGrid, f, p: float) -> float:
    """L^p norm over the disk; ``p=np.inf`` gives the max over cell centers."""
    f = _check(grid, f)
    if p == np.inf:
        return float(np.max(np.abs(f)))
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p!r}")
    # scale by the max so powers neither underflow nor overflow
    scale = float(np.max(np.abs(f)))
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    g = f / scale
    if p == 2:
        return scale * float(np.sqrt(np.dot(g * g, grid.weights)))
    return scale * float(np.dot(np.abs(g) ** p, grid.weights) ** (1.0 / p))
