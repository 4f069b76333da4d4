"""Composite Gauss-Legendre rules on explicit or geometrically graded panels."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(breaks, q: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a q-point Gauss rule on every panel of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(q)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def graded_breaks(lo: float, hi: float, end: float, gap: float, ratio: float = 2.0):
    """Panel breaks on [lo, hi] refined geometrically toward ``end``.

    ``gap`` is the distance from ``end`` to the nearest singularity outside the
    interval; panels adjacent to ``end`` have width comparable to ``gap`` and
    grow by ``ratio`` away from it, so every panel sees its singularity at a
    fixed relative distance.
    """
    length = hi - lo
    gap = max(float(gap), 1e-300)
    dists = [0.0]
    d = 0.25 * gap
    while d < length:
        dists.append(d)
        d *= ratio
    dists.append(length)
    dists = np.unique(np.asarray(dists))
    if end == hi:
        out = hi - dists[::-1]
    elif end == lo:
        out = lo + dists
    else:
        raise ValueError("end must be one of the interval endpoints")
    out[0], out[-1] = lo, hi
    return out


def merge_breaks(breaks, extra) -> np.ndarray:
    """Insert the points of ``extra`` lying strictly inside ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    extra = np.atleast_1d(np.asarray(extra, dtype=float))
    inside = extra[(extra > breaks[0]) & (extra < breaks[-1])]
    return np.unique(np.concatenate([breaks, inside]))
