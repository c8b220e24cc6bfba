"""Independent brute-force implementations used as test oracles.

Everything here is deliberately naive: explicit matrix inverses, double
loops, exhaustive enumeration. These stay independent of the library code
paths they check.
"""

from __future__ import annotations

import math

import numpy as np


def covariance_brute(pixels, centered: bool, ddof: int) -> tuple[np.ndarray, np.ndarray]:
    """(mean, matrix) via an explicit double loop."""
    x = np.asarray(pixels, dtype=np.float64)
    n, p = x.shape
    mean = np.zeros(p)
    for i in range(n):
        mean += x[i]
    mean /= n
    matrix = np.zeros((p, p))
    for i in range(n):
        d = x[i] - mean if centered else x[i]
        matrix += np.outer(d, d)
    matrix /= n - ddof
    return mean, matrix


def mf_direct(pixels, target) -> np.ndarray:
    """Matched filter with an explicit inverse and per-pixel loops."""
    x = np.asarray(pixels, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    mean, cov = covariance_brute(x, centered=True, ddof=1)
    inv = np.linalg.inv(cov)
    d = t - mean
    denom = d @ inv @ d
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = (x[i] - mean) @ inv @ d / denom
    return out


def cem_direct(pixels, target) -> np.ndarray:
    x = np.asarray(pixels, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _, corr = covariance_brute(x, centered=False, ddof=1)
    inv = np.linalg.inv(corr)
    denom = t @ inv @ t
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = x[i] @ inv @ t / denom
    return out


def ace_direct(pixels, target) -> np.ndarray:
    x = np.asarray(pixels, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    mean, cov = covariance_brute(x, centered=True, ddof=1)
    inv = np.linalg.inv(cov)
    d = t - mean
    denom = d @ inv @ d
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        c = x[i] - mean
        energy = c @ inv @ c
        out[i] = 0.0 if energy < 1e-12 else (c @ inv @ d) ** 2 / (denom * energy)
    return out


def mag1c_transcription(pixels, s, n_iter: int, epsilon: float) -> np.ndarray:
    """Line-by-line naive transcription of the iterative filter.

    Explicit inverses, python loops, divisor N; albedo weights from the
    initial means; w and the mean/covariance/alpha updates applied in
    order each iteration; m clamped to >= 1 inside the loop only.
    """
    x = np.asarray(pixels, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    n, p = x.shape

    mu = np.zeros(p)
    for i in range(n):
        mu += x[i]
    mu /= n
    cov = np.zeros((p, p))
    for i in range(n):
        d = x[i] - mu
        cov += np.outer(d, d)
    cov /= n

    r = np.empty(n)
    for i in range(n):
        r[i] = (x[i] @ mu) / (mu @ mu)

    inv = np.linalg.inv(cov)
    target = mu * s
    denom = target @ inv @ target
    alpha = np.empty(n)
    for i in range(n):
        alpha[i] = (x[i] - mu) @ inv @ target / (r[i] * denom)

    for _ in range(n_iter):
        w = 1.0 / (r * (alpha + epsilon))
        mu_new = np.zeros(p)
        for i in range(n):
            mu_new += x[i] - r[i] * alpha[i] * (mu * s)
        mu_new /= n
        residual = np.empty((n, p))
        for i in range(n):
            residual[i] = x[i] - r[i] * alpha[i] * (mu_new * s) - mu_new
        cov = np.zeros((p, p))
        for i in range(n):
            cov += np.outer(residual[i], residual[i])
        cov /= n
        inv = np.linalg.inv(cov)
        target = mu_new * s
        m = target @ inv @ target
        m = max(m, 1.0)
        for i in range(n):
            alpha[i] = max(((x[i] - mu_new) @ inv @ target - w[i]) / (r[i] * m), 0.0)
        mu = mu_new
    return alpha


def opening_brute(mask, kernel_size: int, erode_iters: int, dilate_iters: int) -> np.ndarray:
    """Set-operation erosion/dilation with out-of-bounds treated as unset."""
    current = np.asarray(mask, dtype=bool).copy()
    h, w = current.shape
    half = kernel_size // 2

    def erode_once(m):
        out = np.zeros_like(m)
        for i in range(h):
            for j in range(w):
                keep = True
                for di in range(-half, half + 1):
                    for dj in range(-half, half + 1):
                        ii, jj = i + di, j + dj
                        if ii < 0 or jj < 0 or ii >= h or jj >= w or not m[ii, jj]:
                            keep = False
                            break
                    if not keep:
                        break
                out[i, j] = keep
        return out

    def dilate_once(m):
        out = np.zeros_like(m)
        for i in range(h):
            for j in range(w):
                hit = False
                for di in range(-half, half + 1):
                    for dj in range(-half, half + 1):
                        ii, jj = i + di, j + dj
                        if 0 <= ii < h and 0 <= jj < w and m[ii, jj]:
                            hit = True
                            break
                    if hit:
                        break
                out[i, j] = hit
        return out

    for _ in range(erode_iters):
        current = erode_once(current)
    for _ in range(dilate_iters):
        current = dilate_once(current)
    return current


def average_precision_brute(scores, truth) -> float:
    """AP by evaluating a PR point at every distinct score threshold."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=bool).ravel()
    positives = int(truth.sum())
    points = []
    for threshold in np.unique(scores):
        predicted = scores >= threshold
        tp = int((predicted & truth).sum())
        fp = int((predicted & ~truth).sum())
        recall = tp / positives
        precision = tp / (tp + fp)
        points.append((recall, precision))
    points.sort()
    area = 0.0
    previous_recall = 0.0
    for recall, precision in points:
        area += (recall - previous_recall) * precision
        previous_recall = recall
    return area


def best_variance_step(values, selected: list[int], candidates: list[int]) -> float:
    """Largest selected-set sample variance reachable by adding one candidate."""
    best = -math.inf
    for candidate in candidates:
        chosen = np.asarray([values[i] for i in selected + [candidate]])
        var = float(np.var(chosen, ddof=1)) if chosen.size >= 2 else 0.0
        best = max(best, var)
    return best
