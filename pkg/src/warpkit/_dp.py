"""Numba dynamic-programming kernels for the alignment lattice.

Tables use a one-cell padded border; ``BIG`` marks unreachable/inadmissible
cells (kept finite so the kernels never produce NaN from inf - inf).  All
arithmetic is float64 without fastmath so results are bit-reproducible.
"""

import math

import numpy as np
from numba import njit

BIG = 1e300
_UNREACHED = 1e299  # threshold: anything above this is treated as "no path"


@njit(cache=True)
def hard_dtw_table(grid, mask):
    m, n = grid.shape
    R = np.full((m + 1, n + 1), BIG)
    R[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if not mask[i - 1, j - 1]:
                continue
            best = R[i - 1, j]
            if R[i, j - 1] < best:
                best = R[i, j - 1]
            if R[i - 1, j - 1] < best:
                best = R[i - 1, j - 1]
            if best < _UNREACHED:
                R[i, j] = grid[i - 1, j - 1] + best
    return R


@njit(cache=True)
def sdtw_forward_table(grid, gamma, mask):
    m, n = grid.shape
    R = np.full((m + 1, n + 1), BIG)
    R[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if not mask[i - 1, j - 1]:
                continue
            a = R[i - 1, j]
            b = R[i, j - 1]
            c = R[i - 1, j - 1]
            lo = a
            if b < lo:
                lo = b
            if c < lo:
                lo = c
            if lo >= _UNREACHED:
                continue
            if gamma == 0.0:
                soft = lo
            else:
                s = math.exp(-(a - lo) / gamma) + math.exp(-(b - lo) / gamma) + math.exp(-(c - lo) / gamma)
                soft = lo - gamma * math.log(s)
            R[i, j] = grid[i - 1, j - 1] + soft
    return R


@njit(cache=True)
def sdtw_backward_table(grid, R, gamma, mask):
    # E[i, j] = d(R[m, n]) / d(grid[i-1, j-1]): the Gibbs probability that a
    # path visits the cell.  Each transition factor exp((R[u]-G[u]-R[p])/gamma)
    # is mathematically <= 1; the exponent is clamped at 0 against rounding.
    m, n = grid.shape
    E = np.zeros((m + 2, n + 2))
    E[m, n] = 1.0
    for i in range(m, 0, -1):
        for j in range(n, 0, -1):
            if i == m and j == n:
                continue
            if R[i, j] >= _UNREACHED:
                continue
            acc = 0.0
            # successor (i+1, j)
            if i + 1 <= m and R[i + 1, j] < _UNREACHED and E[i + 1, j] != 0.0:
                arg = (R[i + 1, j] - grid[i, j - 1] - R[i, j]) / gamma
                if arg > 0.0:
                    arg = 0.0
                acc += E[i + 1, j] * math.exp(arg)
            # successor (i, j+1)
            if j + 1 <= n and R[i, j + 1] < _UNREACHED and E[i, j + 1] != 0.0:
                arg = (R[i, j + 1] - grid[i - 1, j] - R[i, j]) / gamma
                if arg > 0.0:
                    arg = 0.0
                acc += E[i, j + 1] * math.exp(arg)
            # successor (i+1, j+1)
            if i + 1 <= m and j + 1 <= n and R[i + 1, j + 1] < _UNREACHED and E[i + 1, j + 1] != 0.0:
                arg = (R[i + 1, j + 1] - grid[i, j] - R[i, j]) / gamma
                if arg > 0.0:
                    arg = 0.0
                acc += E[i + 1, j + 1] * math.exp(arg)
            E[i, j] = acc
    return E[1 : m + 1, 1 : n + 1]
