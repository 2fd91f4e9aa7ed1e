"""Gauss-Legendre quadrature over piecewise-polynomial history segments."""

from __future__ import annotations

from typing import Callable

import numpy as np

NODES = 16
_X, _W = np.polynomial.legendre.leggauss(NODES)


def segment_nodes(seg, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights on [a, b], NODES per polynomial piece."""
    if b <= a:
        return np.zeros(0), np.zeros(0)
    bps = seg.breakpoints(a, b) if hasattr(seg, "breakpoints") else np.array([a, b])
    lo, hi = bps[:-1], bps[1:]
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    nodes = (mid[:, None] + half[:, None] * _X[None, :]).ravel()
    weights = (half[:, None] * _W[None, :]).ravel()
    return nodes, weights


def integrate(seg, fn: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> np.ndarray:
    """int_a^b fn(seg(s)) ds where fn maps an (m, n) array of states to (m,)
    or (m, k) values."""
    nodes, weights = segment_nodes(seg, a, b)
    if nodes.size == 0:
        return np.asarray(0.0)
    states = seg.eval_many(nodes)
    vals = fn(states)
    return np.tensordot(weights, vals, axes=(0, 0))
