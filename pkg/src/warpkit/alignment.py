"""Transportation plan machinery: warping paths, bands, brute-force enumeration.

A warping path over a ``tau x tau_prime`` grid starts at cell (0, 0), ends at
(tau-1, tau_prime-1) and moves by steps from {(0,+1), (+1,0), (+1,+1)}.  The
number of such paths is the Delannoy number of the grid.  Exhaustive
enumeration is the correctness oracle for everything the dynamic programs
compute; it is never used on large instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._dp import hard_dtw_table

__all__ = [
    "PlanShape",
    "BandInfeasibleError",
    "PathCapacityError",
    "delannoy",
    "enumerate_paths",
    "path_cost",
    "path_indicator",
    "dtw_hard",
]

DEFAULT_PATH_CAP = 10**6

# Backtrack tie preference: diagonal, then vertical (m-1, n), then horizontal.
_STEPS_BACK = ((-1, -1), (-1, 0), (0, -1))
# Enumeration emits steps in lexicographic order: (0,1) < (1,0) < (1,1).
_STEPS_FWD = ((0, 1), (1, 0), (1, 1))


class BandInfeasibleError(ValueError):
    """The warping window leaves no admissible path to the terminal cell."""


class PathCapacityError(ValueError):
    """Path enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class PlanShape:
    """Grid dimensions plus an optional Sakoe-Chiba style warping window.

    ``band`` is the half-width of the corridor around the slope-corrected
    diagonal.  In ``"absolute"`` mode (default) it is measured in cells; in
    ``"fraction"`` mode the width is ``band * tau_prime``.  Corner cells are
    always admissible.
    """

    tau: int
    tau_prime: int
    band: float | None = None
    band_mode: str = "absolute"

    def __post_init__(self):
        if self.tau < 1 or self.tau_prime < 1:
            raise ValueError(f"grid dims must be >= 1, got {self.tau}x{self.tau_prime}")
        if self.band is not None and self.band < 0:
            raise ValueError(f"band must be >= 0, got {self.band}")
        if self.band_mode not in ("absolute", "fraction"):
            raise ValueError(f"unknown band_mode {self.band_mode!r}")

    def mask(self) -> np.ndarray:
        """Boolean admissibility mask, True = inside the window."""
        m, n = self.tau, self.tau_prime
        if self.band is None:
            return np.ones((m, n), dtype=bool)
        rows = np.arange(m, dtype=np.float64)[:, None]
        cols = np.arange(n, dtype=np.float64)[None, :]
        slope = (n - 1) / (m - 1) if m > 1 else 0.0
        center = rows * slope
        width = self.band if self.band_mode == "absolute" else self.band * n
        ok = np.abs(cols - center) <= width + 1e-12
        ok[0, 0] = ok[m - 1, n - 1] = True
        return ok


def _shape_of(grid: np.ndarray, shape: PlanShape | None) -> PlanShape:
    if shape is None:
        return PlanShape(grid.shape[0], grid.shape[1])
    if (shape.tau, shape.tau_prime) != grid.shape:
        raise ValueError(f"grid shape {grid.shape} does not match plan {shape.tau}x{shape.tau_prime}")
    return shape


def delannoy(tau: int, tau_prime: int) -> int:
    """Number of monotone warping paths over a tau x tau_prime grid (exact int)."""
    if tau < 1 or tau_prime < 1:
        raise ValueError("dims must be >= 1")
    row = [1] * tau_prime
    for _ in range(1, tau):
        new = [1] * tau_prime
        for j in range(1, tau_prime):
            new[j] = new[j - 1] + row[j] + row[j - 1]
        row = new
    return row[-1]


def enumerate_paths(shape: PlanShape, cap: int = DEFAULT_PATH_CAP) -> list[tuple[tuple[int, int], ...]]:
    """All admissible monotone paths, duplicate-free, in lexicographic step order.

    Raises PathCapacityError when the unbanded Delannoy count exceeds ``cap``.
    """
    count = delannoy(shape.tau, shape.tau_prime)
    if count > cap:
        raise PathCapacityError(
            f"Delannoy path count {count} for {shape.tau}x{shape.tau_prime} exceeds cap {cap}"
        )
    mask = shape.mask()
    m, n = shape.tau, shape.tau_prime
    goal = (m - 1, n - 1)
    out: list[tuple[tuple[int, int], ...]] = []
    stack: list[tuple[int, int]] = [(0, 0)]

    def walk():
        cell = stack[-1]
        if cell == goal:
            out.append(tuple(stack))
            return
        for di, dj in _STEPS_FWD:
            i, j = cell[0] + di, cell[1] + dj
            if i < m and j < n and mask[i, j]:
                stack.append((i, j))
                walk()
                stack.pop()

    walk()
    if not out:
        raise BandInfeasibleError(f"band leaves no path to the terminal cell of {m}x{n}")
    return out


def path_cost(path, grid: np.ndarray) -> float:
    """Sum of grid entries along the path cells (<Pi, grid>)."""
    g = np.asarray(grid, dtype=np.float64)
    total = 0.0
    for i, j in path:
        if not (0 <= i < g.shape[0] and 0 <= j < g.shape[1]):
            raise ValueError(f"path cell ({i},{j}) outside grid {g.shape}")
        total += g[i, j]
    return total


def path_indicator(path, shape: PlanShape) -> np.ndarray:
    """0/1 membership matrix of a path."""
    out = np.zeros((shape.tau, shape.tau_prime))
    for i, j in path:
        out[i, j] = 1.0
    return out


def dtw_hard(grid: np.ndarray, shape: PlanShape | None = None) -> tuple[float, tuple[tuple[int, int], ...]]:
    """Classic DTW: minimal path cost plus the argmin path from backtracking.

    Ties during backtracking prefer the diagonal step, then the vertical one.
    Raises BandInfeasibleError when the window makes the terminal unreachable.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError("grid must be 2-D")
    shape = _shape_of(g, shape)
    mask = shape.mask()
    R = hard_dtw_table(g, mask)
    m, n = g.shape
    if R[m, n] >= 1e299:
        raise BandInfeasibleError(f"band leaves no path to the terminal cell of {m}x{n}")
    cells = [(m - 1, n - 1)]
    i, j = m, n
    while (i, j) != (1, 1):
        best = None
        for di, dj in _STEPS_BACK:
            pi, pj = i + di, j + dj
            if pi >= 1 and pj >= 1 and R[pi, pj] < 1e299:
                if best is None or R[pi, pj] < R[best]:
                    best = (pi, pj)
        i, j = best
        cells.append((i - 1, j - 1))
    cells.reverse()
    return float(R[m, n]), tuple(cells)
