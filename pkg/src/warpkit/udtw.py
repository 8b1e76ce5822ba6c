"""Uncertainty-weighted soft DTW: distance, log-variance penalty, gradients.

The reported quantities are Gibbs expectations over all warping paths: the
distance is the expectation of the variance-reweighted path cost, the penalty
the expectation of the log-sigma aggregate, both under softmax weights of the
weighted path costs.  Naively these are sums over exponentially many paths;
because both are linear in the path indicator they equal ``<A, grid>`` and
``<A, log_sigma>`` where ``A`` is the soft alignment from the dynamic
program's backward pass.  ``udtw_eval_brute`` keeps the literal enumeration
around as the test oracle.

Gradients follow the log-sum-exp convention: the surrogate
``sdtw_forward(grid + beta * log_sigma)`` is differentiated exactly through
its own alignment matrix.  That surrogate is the soft version of the per-path
maximum-likelihood objective (weighted distance plus beta log sigma summed
along the path), so beta=0 recovers plain soft-DTW on the weighted grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .alignment import PlanShape, dtw_hard, enumerate_paths, path_cost, path_indicator
from .numerics import gibbs_weights
from .sigma import SIGMA_MAX, SIGMA_MIN
from .softdtw import sdtw_backward, sdtw_forward

__all__ = [
    "BASE_DISTANCE_KINDS",
    "UdtwResult",
    "UdtwGrads",
    "as_frames",
    "weighted_cost",
    "udtw_eval",
    "udtw_eval_brute",
    "udtw_pair",
    "udtw_grad",
    "similarity_loss",
    "free_sigma_mle",
]

BASE_DISTANCE_KINDS = ("normal", "laplace", "cauchy")

# Above this many (cells x parameters) the finite-difference mode is painful.
_FD_COST_WARN = 20_000


def as_frames(x) -> np.ndarray:
    """Canonicalize a series to a (d, tau) float64 frame matrix (1-D input = d=1)."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] < 1:
        raise ValueError(f"expected a (d, tau) series, got shape {np.shape(x)}")
    return a


@dataclass
class UdtwResult:
    """Distance/penalty expectations plus the soft alignment behind them."""

    distance: float
    penalty: float
    alignment: np.ndarray
    lse_value: float  # the log-sum-exp softmin of the same weighted costs


@dataclass
class UdtwGrads:
    value: float
    d_psi: np.ndarray
    d_psi_prime: np.ndarray
    d_sigma_sq: np.ndarray


def _check_sigma(sigma_sq, rows: int, cols: int) -> np.ndarray:
    s = np.asarray(sigma_sq, dtype=np.float64)
    if s.shape != (rows, cols):
        raise ValueError(f"variance matrix shape {s.shape}, expected {(rows, cols)}")
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise ValueError("variances must be strictly positive and finite")
    return s


def weighted_cost(psi, psi_prime, sigma_sq, kind: str = "normal",
                  log_scale: str = "sigma") -> tuple[np.ndarray, np.ndarray]:
    """Variance-reweighted cost grid and the per-cell log-sigma grid.

    Per-cell costs by kind:
      normal   |psi_m - psi'_n|_2^2 / sigma^2_mn
      laplace  |psi_m - psi'_n|_1   / sigma_mn
      cauchy   log(1 + |psi_m - psi'_n|_2^2 / sigma^2_mn)

    ``log_scale="sigma"`` (default) returns log(sigma_mn), i.e. half of
    log(sigma^2_mn); ``"sigma-sq"`` switches to the full log-variance for
    sensitivity experiments.
    """
    a = as_frames(psi)
    b = as_frames(psi_prime)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"feature dims differ: {a.shape[0]} vs {b.shape[0]}")
    s = _check_sigma(sigma_sq, a.shape[1], b.shape[1])
    diff = a[:, :, None] - b[:, None, :]
    if kind == "normal":
        grid = (diff**2).sum(axis=0) / s
    elif kind == "laplace":
        grid = np.abs(diff).sum(axis=0) / np.sqrt(s)
    elif kind == "cauchy":
        grid = np.log1p((diff**2).sum(axis=0) / s)
    else:
        raise ValueError(f"unknown base distance kind {kind!r}")
    log_sigma = 0.5 * np.log(s) if log_scale == "sigma" else np.log(s)
    if log_scale not in ("sigma", "sigma-sq"):
        raise ValueError(f"unknown log_scale {log_scale!r}")
    return grid, log_sigma


def udtw_eval(grid, log_sigma, gamma: float, shape: PlanShape | None = None) -> UdtwResult:
    """Expectation-form distance and penalty, computed in O(tau*tau') via the DP.

    gamma=0 returns the hard-min path's cost and its aggregated log-sigmas.
    """
    g = np.asarray(grid, dtype=np.float64)
    ls = np.asarray(log_sigma, dtype=np.float64)
    if ls.shape != g.shape:
        raise ValueError(f"log_sigma shape {ls.shape} does not match grid {g.shape}")
    if shape is None:
        shape = PlanShape(g.shape[0], g.shape[1])
    if gamma == 0:
        dist, path = dtw_hard(g, shape)
        ind = path_indicator(path, shape)
        return UdtwResult(float(dist), float((ind * ls).sum()), ind, float(dist))
    lse, R = sdtw_forward(g, gamma, shape)
    A = sdtw_backward(g, gamma, R, shape)
    return UdtwResult(float((A * g).sum()), float((A * ls).sum()), A, lse)


def udtw_eval_brute(grid, log_sigma, gamma: float, shape: PlanShape | None = None,
                    cap: int = 10**6) -> tuple[float, float]:
    """Literal path enumeration of the expectation distance and penalty (test oracle)."""
    g = np.asarray(grid, dtype=np.float64)
    ls = np.asarray(log_sigma, dtype=np.float64)
    if shape is None:
        shape = PlanShape(g.shape[0], g.shape[1])
    paths = enumerate_paths(shape, cap)
    w = np.array([path_cost(p, g) for p in paths])
    pen = np.array([path_cost(p, ls) for p in paths])
    probs = gibbs_weights(w, gamma)
    return float(probs @ w), float(probs @ pen)


def udtw_pair(psi, psi_prime, sigma_sq=None, kind: str = "normal", gamma: float = 1.0,
              shape: PlanShape | None = None, log_scale: str = "sigma") -> UdtwResult:
    """Convenience wrapper: series in, UdtwResult out (unit variances by default)."""
    a = as_frames(psi)
    b = as_frames(psi_prime)
    if sigma_sq is None:
        sigma_sq = np.ones((a.shape[1], b.shape[1]))
    grid, log_sigma = weighted_cost(a, b, sigma_sq, kind, log_scale)
    return udtw_eval(grid, log_sigma, gamma, shape)


def _chain_grads(A, psi, psi_prime, sigma_sq, kind, beta, log_scale):
    """Pull an alignment-shaped cotangent back to (psi, psi', sigma^2).

    Computes <A, dG/d.> for G = grid + beta * log_sigma, with grid/log_sigma
    as in `weighted_cost`.
    """
    diff = psi[:, :, None] - psi_prime[:, None, :]  # (d, m, n)
    sq = (diff**2).sum(axis=0)
    if kind == "normal":
        d_cell = 2.0 * diff / sigma_sq[None]
        d_sig = -sq / sigma_sq**2
    elif kind == "laplace":
        root = np.sqrt(sigma_sq)
        d_cell = np.sign(diff) / root[None]
        d_sig = -np.abs(diff).sum(axis=0) / (2.0 * sigma_sq * root)
    elif kind == "cauchy":
        denom = sigma_sq + sq
        d_cell = 2.0 * diff / denom[None]
        d_sig = -sq / (sigma_sq * denom)
    else:
        raise ValueError(f"unknown base distance kind {kind!r}")
    if beta != 0.0:
        d_sig = d_sig + (0.5 * beta if log_scale == "sigma" else beta) / sigma_sq
    d_psi = (A[None] * d_cell).sum(axis=2)
    d_psi_prime = -(A[None] * d_cell).sum(axis=1)
    return d_psi, d_psi_prime, A * d_sig


def udtw_grad(psi, psi_prime, sigma_sq, kind: str = "normal", gamma: float = 1.0,
              mode: str = "lse-exact", beta: float = 0.0, shape: PlanShape | None = None,
              log_scale: str = "sigma", fd_step: float = 1e-6) -> UdtwGrads:
    """Gradients of a pairwise objective w.r.t. the series and the variances.

    Modes:
      lse-exact        exact gradient of sdtw_forward(grid + beta*log_sigma);
                       beta=0 is the plain soft-DTW surrogate on the weighted grid.
      alignment-fixed  gradient of <A, grid> + beta*<A, log_sigma> treating the
                       alignment A (computed on the unpenalized grid) as a
                       constant; approximates the expectation-form gradient.
      finite-diff      central differences on the exact expectation-form
                       objective distance + beta*penalty (test oracle only).
    """
    if gamma <= 0:
        raise ValueError("gradients need gamma > 0")
    a = as_frames(psi)
    b = as_frames(psi_prime)
    s = _check_sigma(sigma_sq, a.shape[1], b.shape[1])
    grid, log_sigma = weighted_cost(a, b, s, kind, log_scale)

    if mode == "lse-exact":
        G = grid + beta * log_sigma if beta != 0.0 else grid
        value, R = sdtw_forward(G, gamma, shape)
        A = sdtw_backward(G, gamma, R, shape)
        return UdtwGrads(value, *_chain_grads(A, a, b, s, kind, beta, log_scale))

    if mode == "alignment-fixed":
        res = udtw_eval(grid, log_sigma, gamma, shape)
        value = res.distance + beta * res.penalty
        return UdtwGrads(value, *_chain_grads(res.alignment, a, b, s, kind, beta, log_scale))

    if mode == "finite-diff":
        n_params = a.size + b.size + s.size
        if grid.size * n_params > _FD_COST_WARN:
            warnings.warn(
                f"finite-diff gradient over {n_params} parameters on a {grid.shape} grid is slow",
                RuntimeWarning,
                stacklevel=2,
            )

        def objective(aa, bb, ss):
            gg, ll = weighted_cost(aa, bb, ss, kind, log_scale)
            r = udtw_eval(gg, ll, gamma, shape)
            return r.distance + beta * r.penalty

        value = objective(a, b, s)
        grads = []
        for which in range(3):
            arrs = [a.copy(), b.copy(), s.copy()]
            target = arrs[which]
            g_out = np.zeros_like(target)
            flat, gflat = target.ravel(), g_out.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + fd_step
                fp = objective(*arrs)
                flat[i] = orig - fd_step
                fm = objective(*arrs)
                flat[i] = orig
                gflat[i] = (fp - fm) / (2.0 * fd_step)
            grads.append(g_out)
        return UdtwGrads(value, *grads)

    raise ValueError(f"unknown gradient mode {mode!r}")


@dataclass
class SimilarityLossResult:
    """Reported loss (expectation convention) plus the differentiated surrogate."""

    value: float
    surrogate: float
    d_sigma_weights: np.ndarray | None
    d_sigma_bias: float | None
    d_series: list[tuple[np.ndarray, np.ndarray]] | None


def similarity_loss(pairs, beta: float = 0.0, gamma: float = 1.0, sigma_model=None,
                    kind: str = "normal", series_grads: bool = False) -> SimilarityLossResult:
    """Generic similarity learning loss over labelled pairs.

    Each pair is (psi, psi_prime, delta) with delta=0 for same-class pairs and
    1 otherwise; the per-pair term is (d^2 - delta)^2 + beta * penalty.
    ``value`` uses the expectation-form distance/penalty; gradients are exact
    for the log-sum-exp surrogate (squared error on the lse distance plus the
    folded-penalty increment) and flow into the SigmaNet parameters and,
    optionally, the series.
    """
    from .sigma import combine_sigma, combine_sigma_vjp, sigmanet_forward, sigmanet_vjp

    if not pairs:
        raise ValueError("need at least one pair")
    value = 0.0
    surrogate = 0.0
    d_w = None
    d_b = 0.0
    d_series: list[tuple[np.ndarray, np.ndarray]] = []
    for psi, psi_prime, delta in pairs:
        a = as_frames(psi)
        b = as_frames(psi_prime)
        if sigma_model is not None:
            sig_q = sigmanet_forward(a, sigma_model)
            sig_s = sigmanet_forward(b, sigma_model)
        else:
            sig_q = np.ones(a.shape[1])
            sig_s = np.ones(b.shape[1])
        s = combine_sigma(sig_q, sig_s, "add-sq")
        grid, log_sigma = weighted_cost(a, b, s, kind)

        res = udtw_eval(grid, log_sigma, gamma)
        value += (res.distance - delta) ** 2 + beta * res.penalty

        # surrogate: (d_lse - delta)^2 + (F_beta - F_0) where F_beta is the
        # soft minimum of per-path costs with beta*log sigma folded in
        f0 = res.lse_value
        A0 = res.alignment
        coeff0 = 2.0 * (f0 - delta)
        if beta != 0.0:
            G = grid + beta * log_sigma
            f_b, Rb = sdtw_forward(G, gamma)
            Ab = sdtw_backward(G, gamma, Rb)
            surrogate += (f0 - delta) ** 2 + (f_b - f0)
        else:
            f_b, Ab = f0, A0
            surrogate += (f0 - delta) ** 2

        # d surrogate = coeff0 * dF0 + (dF_beta - dF0)
        dp0, dq0, ds0 = _chain_grads(A0, a, b, s, kind, 0.0, "sigma")
        if beta != 0.0:
            dpb, dqb, dsb = _chain_grads(Ab, a, b, s, kind, beta, "sigma")
            dp = coeff0 * dp0 + (dpb - dp0)
            dq = coeff0 * dq0 + (dqb - dq0)
            ds = coeff0 * ds0 + (dsb - ds0)
        else:
            dp, dq, ds = coeff0 * dp0, coeff0 * dq0, coeff0 * ds0

        if sigma_model is not None:
            g_q, g_s = combine_sigma_vjp(sig_q, sig_s, "add-sq", ds)
            wq, bq, fq = sigmanet_vjp(a, sigma_model, g_q)
            ws, bs, fs = sigmanet_vjp(b, sigma_model, g_s)
            d_w = wq + ws if d_w is None else d_w + wq + ws
            d_b += bq + bs
            dp = dp + fq
            dq = dq + fs
        if series_grads:
            d_series.append((dp, dq))
    return SimilarityLossResult(
        value=value,
        surrogate=surrogate,
        d_sigma_weights=d_w,
        d_sigma_bias=d_b if sigma_model is not None else None,
        d_series=d_series if series_grads else None,
    )


def free_sigma_mle(cell_error: float, beta: float) -> float:
    """Optimal per-cell sigma for beta*log(sigma) + e/sigma^2: sigma^2 = 2e/beta.

    Degenerate e=0 returns the global sigma floor.  Output is clamped to
    [SIGMA_MIN, SIGMA_MAX].
    """
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if cell_error < 0:
        raise ValueError("cell error must be >= 0")
    if cell_error == 0.0:
        return SIGMA_MIN
    return float(np.clip(np.sqrt(2.0 * cell_error / beta), SIGMA_MIN, SIGMA_MAX))
