"""Exact t-SNE for small point sets.

Dense O(n^2) implementation: per-point bandwidths found by binary search
on the Shannon entropy, symmetrized affinities, and gradient descent with
momentum and per-parameter gains.  The final 10% of iterations switch to
plain descent with step backtracking so the KL objective is
non-increasing over that stretch.  Everything is driven by a single
seeded generator, so results are reproducible.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def _entropy_and_probs(dist_row: np.ndarray, beta: float):
    # dist_row: squared distances to the other points (self excluded)
    p = np.exp(-dist_row * beta)
    sum_p = p.sum()
    if sum_p <= 0:
        return 0.0, np.zeros_like(p)
    # H = log(sum_p) + beta * <d, p>/sum_p  (Shannon entropy in nats)
    h = np.log(sum_p) + beta * float(np.dot(dist_row, p)) / sum_p
    return h, p / sum_p


def conditional_probabilities(sq_dists: np.ndarray, perplexity: float,
                              tol: float = 1e-5, max_iter: int = 64) -> np.ndarray:
    """Row-conditional affinities p_{j|i} matching the target perplexity."""
    n = sq_dists.shape[0]
    target = np.log(perplexity)
    cond = np.zeros((n, n))
    for i in range(n):
        row = np.delete(sq_dists[i], i)
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        h, p = _entropy_and_probs(row, beta)
        for _ in range(max_iter):
            if abs(h - target) < tol:
                break
            if h > target:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
            h, p = _entropy_and_probs(row, beta)
        cond[i, np.arange(n) != i] = p
    return cond


def _kl_and_grad(p: np.ndarray, y: np.ndarray):
    n = y.shape[0]
    diff = y[:, None, :] - y[None, :, :]
    sq = (diff ** 2).sum(-1)
    num = 1.0 / (1.0 + sq)
    np.fill_diagonal(num, 0.0)
    q = np.maximum(num / num.sum(), _EPS)
    kl = float((p * np.log(p / q)).sum())
    pq = (p - q) * num
    grad = 4.0 * (pq[:, :, None] * diff).sum(axis=1)
    return kl, grad


def tsne(x: np.ndarray, perplexity: float = 5.0, iters: int = 1000,
         seed: int = 0, learning_rate: float = 100.0,
         trace: list | None = None) -> np.ndarray:
    """Project rows of ``x`` to 2D, minimizing the t-SNE KL objective.

    ``iters == 0`` returns the seeded random initialization unchanged.
    When ``trace`` is a list, the KL divergence after every iteration is
    appended to it (the plain objective, without early exaggeration).
    Raises ``ValueError`` when there are fewer than 4 points or the
    perplexity is infeasible for the point count (guideline
    ``1 <= perplexity <= (n - 1) / 3``).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    if not (1.0 <= perplexity and 3.0 * perplexity <= n - 1):
        raise ValueError(
            f"perplexity {perplexity} infeasible for {n} points "
            f"(need 1 <= perplexity <= (n-1)/3)")
    if iters < 0:
        raise ValueError("iters must be >= 0")

    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    if iters == 0:
        return y

    sq_dists = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    cond = conditional_probabilities(sq_dists, perplexity)
    p = (cond + cond.T) / (2.0 * n)
    p = np.maximum(p, _EPS)

    exaggeration_until = min(int(iters * 0.25), 100)
    strict_from = iters - max(1, int(np.ceil(iters * 0.1)))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    step = learning_rate
    kl = None

    for it in range(iters):
        boosted = 4.0 if it < exaggeration_until else 1.0
        if it < strict_from:
            _, grad = _kl_and_grad(p * boosted if boosted != 1.0 else p, y)
            momentum = 0.5 if it < exaggeration_until else 0.8
            gains = np.where(np.sign(grad) != np.sign(velocity),
                             gains + 0.2, gains * 0.8)
            gains = np.maximum(gains, 0.01)
            velocity = momentum * velocity - step * gains * grad
            y = y + velocity
            y = y - y.mean(axis=0)
            if trace is not None:
                trace.append(_kl_and_grad(p, y)[0])
        else:
            # backtracked plain descent: KL never increases in this phase
            if kl is None:
                kl, grad = _kl_and_grad(p, y)
            else:
                _, grad = _kl_and_grad(p, y)
            trial_step = step
            for _ in range(30):
                y_new = y - trial_step * grad
                kl_new, _ = _kl_and_grad(p, y_new)
                if kl_new <= kl:
                    break
                trial_step *= 0.5
            else:
                y_new, kl_new = y, kl
            y, kl = y_new, kl_new
            if trace is not None:
                trace.append(kl)
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("t-SNE produced non-finite coordinates")
    return y


def kl_divergence(x: np.ndarray, y: np.ndarray, perplexity: float) -> float:
    """KL objective of an embedding ``y`` against affinities of ``x``."""
    x = np.asarray(x, dtype=float)
    sq_dists = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    cond = conditional_probabilities(sq_dists, perplexity)
    p = np.maximum((cond + cond.T) / (2.0 * x.shape[0]), _EPS)
    kl, _ = _kl_and_grad(p, np.asarray(y, dtype=float))
    return kl
