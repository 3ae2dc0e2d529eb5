"""Diffusion coefficients: constants and gridded log-permeability fields."""

from __future__ import annotations

import numpy as np


class Constant:
    """Spatially constant positive coefficient."""

    def __init__(self, value: float) -> None:
        if not value > 0:
            raise ValueError("coefficient must be positive")
        self.value = float(value)

    def __call__(self, xs, ys):
        return np.full(np.broadcast(xs, ys).shape, self.value)

    def __repr__(self) -> str:
        return f"Constant({self.value})"


class GriddedLogField:
    """exp of a bilinearly interpolated log-value grid on the unit square.

    ``grid[r, c]`` holds the log-value at y = r/(n-1), x = c/(m-1): row 0 is
    the bottom of the domain.
    """

    def __init__(self, grid: np.ndarray) -> None:
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] < 2:
            raise ValueError("grid must be 2D with at least 2x2 points")
        if not np.isfinite(grid).all():
            raise ValueError("grid values must be finite")
        self.grid = grid

    def log_interp(self, xs, ys):
        n, m = self.grid.shape
        xs = np.clip(np.asarray(xs, dtype=float), 0.0, 1.0)
        ys = np.clip(np.asarray(ys, dtype=float), 0.0, 1.0)
        gx = xs * (m - 1)
        gy = ys * (n - 1)
        c0 = np.clip(gx.astype(int), 0, m - 2)
        r0 = np.clip(gy.astype(int), 0, n - 2)
        tx = gx - c0
        ty = gy - r0
        g = self.grid
        return ((1 - tx) * (1 - ty) * g[r0, c0] + tx * (1 - ty) * g[r0, c0 + 1]
                + (1 - tx) * ty * g[r0 + 1, c0] + tx * ty * g[r0 + 1, c0 + 1])

    def __call__(self, xs, ys):
        return np.exp(self.log_interp(xs, ys))

    def save(self, path) -> None:
        n, m = self.grid.shape
        with open(path, "w") as fh:
            fh.write(f"{n} {m}\n")
            for row in self.grid:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")

    @staticmethod
    def load(path) -> "GriddedLogField":
        with open(path) as fh:
            tokens = fh.read().split()
        if len(tokens) < 2:
            raise ValueError("malformed grid file: missing header")
        n, m = int(tokens[0]), int(tokens[1])
        vals = np.array([float(t) for t in tokens[2:]])
        if len(vals) != n * m:
            raise ValueError(
                f"grid file holds {len(vals)} values, expected {n * m}")
        return GriddedLogField(vals.reshape(n, m))


Coefficient = Constant | GriddedLogField
