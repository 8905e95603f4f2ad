"""Vectorised re-derivation of the accumulation objective for grid oracles."""

import numpy as np

LOG2_9 = np.log2(9.0)


def h2(p):
    p = np.clip(p, 1e-300, 1 - 1e-16)
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def curve(s, eps):
    c = (0.25 - eps * eps) ** 2
    u = np.minimum(0.5 + np.sqrt(s * (s + c)) / c, 1.0)
    return np.where(u >= 1.0, 1.0, 1 - h2(u))


def slope(s, eps):
    c = (0.25 - eps * eps) ** 2
    r = np.sqrt(s * (s + c))
    u = 0.5 + r / c
    return np.log2(u / (1 - u)) * (2 * s + c) / (2 * c * r)


def objective(st, gamma, eps_ea, delta, half_block, eps):
    a = slope(st, eps)
    fmin = np.where(delta <= st, curve(np.full_like(st, delta), eps), curve(st, eps) + a * (delta - st))
    spread = np.sqrt(1 - 2 * np.log2(gamma * eps_ea))
    return fmin - 2 * (LOG2_9 + a * (0.5 + eps) ** 2) * spread / np.sqrt(half_block)


def dense_grid_max(gamma, eps_ea, delta, half_block, eps, points=10 ** 5):
    top = (0.25 - eps * eps) ** 2 * (np.sqrt(2) - 1) / 2
    lin = np.linspace(0, top, points + 2)[1:-1]
    log = top * np.logspace(-14, 0, points, endpoint=False)
    best = -np.inf
    for grid in (lin, log):
        best = max(best, float(np.max(objective(grid, gamma, eps_ea, delta, half_block, eps))))
    return best
