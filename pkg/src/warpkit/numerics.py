"""Stable scalar/array kernels shared by every module.

Two softmin flavors are provided because they answer different questions:

* ``softmin_lse`` is the free-energy form ``-gamma * log(sum(exp(-a/gamma)))``.
  It lower-bounds ``min(a)`` and is the quantity the dynamic program
  accumulates cell by cell.
* ``softmin_exp`` is the Gibbs expectation ``sum(a_i * w_i)`` with softmax
  weights ``w = softmax(-(a - mean(a)) / gamma)``.  It lives inside
  ``[min(a), max(a)]`` and is what the uncertainty-weighted distance reports.

``softsel`` reuses the ``softmin_exp`` weights of one vector to average a
second one (the penalty aggregation).  ``gamma == 0`` is implemented as an
exact hard min / hard argmin everywhere, never as a tiny-gamma evaluation.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["softmin_lse", "softmin_exp", "softsel", "gibbs_weights", "grad_check"]


def _as_vector(alpha, name: str) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


def _check_gamma(gamma: float) -> float:
    g = float(gamma)
    if math.isnan(g) or g < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return g


def softmin_lse(alpha, gamma: float) -> float:
    """Log-sum-exp soft minimum, ``-gamma*log(sum_i exp(-alpha_i/gamma))``.

    Computed with max-shift stabilization; ``gamma == 0`` returns the exact
    hard minimum.  For gamma > 0 the result is <= min(alpha).
    """
    a = _as_vector(alpha, "alpha")
    g = _check_gamma(gamma)
    lo = float(a.min())
    if g == 0.0:
        return lo
    return lo - g * math.log(np.exp(-(a - lo) / g).sum())


def gibbs_weights(alpha, gamma: float) -> np.ndarray:
    """Mean-subtracted softmax of ``-alpha/gamma``; hard argmin at gamma=0.

    Ties at gamma=0 resolve to the smallest index (deterministic, matches
    left-to-right path enumeration order).
    """
    a = _as_vector(alpha, "alpha")
    g = _check_gamma(gamma)
    w = np.zeros_like(a)
    if g == 0.0:
        w[int(np.argmin(a))] = 1.0
        return w
    if math.isinf(g):
        w[:] = 1.0 / a.size
        return w
    z = -(a - a.mean()) / g
    z -= z.max()  # second shift keeps exp() in range for extreme gamma
    e = np.exp(z)
    return e / e.sum()


def softmin_exp(alpha, gamma: float) -> float:
    """Gibbs-expectation soft minimum: weights from `gibbs_weights` applied to alpha.

    Lies in [min(alpha), max(alpha)]; gamma -> 0 gives min(alpha), gamma -> inf
    gives mean(alpha).
    """
    a = _as_vector(alpha, "alpha")
    return float(gibbs_weights(a, gamma) @ a)


def softsel(alpha, beta, gamma: float) -> float:
    """Soft selector: ``sum_i beta_i * w_i`` with ``w = gibbs_weights(alpha)``.

    At gamma=0 returns beta at the argmin of alpha (smallest index on ties).
    """
    a = _as_vector(alpha, "alpha")
    b = _as_vector(beta, "beta")
    if a.size != b.size:
        raise ValueError(f"alpha and beta length mismatch: {a.size} vs {b.size}")
    return float(gibbs_weights(a, gamma) @ b)


def grad_check(f, x, analytic_grad, step: float = 1e-6) -> float:
    """Max relative error between central differences of ``f`` and ``analytic_grad``.

    ``f`` maps an array shaped like ``x`` to a scalar.  The relative error per
    coordinate uses denominator ``max(|analytic|, |fd|, 1e-8)``.
    """
    if step <= 0.0:
        raise ValueError("step must be > 0")
    x = np.array(x, dtype=np.float64)
    g = np.asarray(analytic_grad, dtype=np.float64)
    if g.shape != x.shape:
        raise ValueError(f"gradient shape {g.shape} does not match x shape {x.shape}")
    worst = 0.0
    flat = x.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        fp = float(f(x))
        flat[i] = orig - step
        fm = float(f(x))
        flat[i] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise FloatingPointError(f"f is not finite at perturbation of coordinate {i}")
        fd = (fp - fm) / (2.0 * step)
        err = abs(gflat[i] - fd) / max(abs(gflat[i]), abs(fd), 1e-8)
        worst = max(worst, err)
    return worst
