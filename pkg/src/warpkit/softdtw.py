"""Log-sum-exp soft-DTW: forward dynamic program and the soft-alignment backward pass.

``sdtw_forward`` computes the softmin over all admissible path costs exactly
(the recursion distributes the log-sum-exp over the lattice).  The backward
pass returns the matrix of Gibbs path-membership probabilities, which is also
the exact gradient of the forward value with respect to the cost grid.
"""

from __future__ import annotations

import numpy as np

from ._dp import _UNREACHED, sdtw_backward_table, sdtw_forward_table
from .alignment import BandInfeasibleError, PlanShape, dtw_hard, path_indicator

__all__ = ["sdtw_forward", "sdtw_backward", "sdtw_value", "soft_alignment"]


def _prep(grid, shape: PlanShape | None):
    g = np.ascontiguousarray(np.asarray(grid, dtype=np.float64))
    if g.ndim != 2:
        raise ValueError("grid must be 2-D")
    if not np.all(np.isfinite(g)):
        raise ValueError("grid must be finite")
    if shape is None:
        shape = PlanShape(g.shape[0], g.shape[1])
    elif (shape.tau, shape.tau_prime) != g.shape:
        raise ValueError(f"grid shape {g.shape} does not match plan {shape.tau}x{shape.tau_prime}")
    return g, shape


def sdtw_forward(grid, gamma: float, shape: PlanShape | None = None) -> tuple[float, np.ndarray]:
    """Soft-DTW value and the DP table (retained for the backward pass).

    gamma=0 degenerates to the hard DTW distance.  Raises BandInfeasibleError
    when the warping window disconnects the terminal cell.
    """
    g, shape = _prep(grid, shape)
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    R = sdtw_forward_table(g, float(gamma), shape.mask())
    value = R[g.shape[0], g.shape[1]]
    if value >= _UNREACHED:
        raise BandInfeasibleError(f"band leaves no path to the terminal cell of {g.shape[0]}x{g.shape[1]}")
    return float(value), R


def sdtw_backward(grid, gamma: float, dp_table: np.ndarray, shape: PlanShape | None = None) -> np.ndarray:
    """Soft alignment E[Pi]: per-cell Gibbs probability that a path visits the cell.

    Equals d(sdtw_forward)/d(grid).  Requires the dp_table produced by
    ``sdtw_forward`` on the same inputs.  For gamma=0 the Gibbs distribution
    collapses; the hard argmin path indicator is returned instead.
    """
    g, shape = _prep(grid, shape)
    if gamma == 0:
        _, path = dtw_hard(g, shape)
        return path_indicator(path, shape)
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    E = sdtw_backward_table(g, dp_table, float(gamma), shape.mask())
    # Corners are visited by every path, so their probability is exactly 1;
    # snap away the accumulated rounding and clip stragglers into [0, 1].
    E[0, 0] = 1.0
    E[-1, -1] = 1.0
    np.clip(E, 0.0, 1.0, out=E)
    return E


def sdtw_value(grid, gamma: float, shape: PlanShape | None = None) -> float:
    """Forward value only (drops the DP table)."""
    value, _ = sdtw_forward(grid, gamma, shape)
    return value


def soft_alignment(grid, gamma: float, shape: PlanShape | None = None) -> np.ndarray:
    """Convenience: forward + backward in one call."""
    if gamma == 0:
        g, shape = _prep(grid, shape)
        _, path = dtw_hard(g, shape)
        return path_indicator(path, shape)
    value, R = sdtw_forward(grid, gamma, shape)
    return sdtw_backward(grid, gamma, R, shape)
