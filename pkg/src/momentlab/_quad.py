"""Vectorized adaptive composite Gauss-Legendre quadrature.

``f`` receives a 1-D array of abscissae and returns an array whose last axis
matches it; leading axes form a batch that is integrated simultaneously (each
batch entry gets its own tolerance).  A panel's error estimate is the
difference between the rule on the panel and the rule on its two halves.
All panels awaiting refinement are evaluated in a single call of ``f``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure


@lru_cache(maxsize=None)
def _nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def _rules(f, lo, hi, order):
    """The rule on each ``[lo_i, hi_i]``; result shape ``batch + (len(lo),)``."""
    x, w = _nodes(order)
    half = 0.5 * (hi - lo)
    pts = (lo[:, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    vals = np.asarray(f(pts))
    vals = vals.reshape(vals.shape[:-1] + (len(lo), order))
    return half * np.tensordot(vals, w, axes=([-1], [0]))


def _panels(f, lo, hi, order):
    mid = 0.5 * (lo + hi)
    n = len(lo)
    both = _rules(f, np.concatenate([lo, lo, mid]), np.concatenate([hi, mid, hi]), order)
    coarse = both[..., :n]
    fine = both[..., n:2 * n] + both[..., 2 * n:]
    return fine, np.abs(fine - coarse)


def integrate(f, breakpoints, rtol=1e-12, atol=0.0, order=16, max_panels=20000):
    """Integrate ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Returns ``(value, error_estimate)`` with the batch shape of ``f``.

    Raises
    ------
    QuadratureFailure
        When the panel budget is exhausted before every batch entry meets
        ``max(rtol * |value|, atol)``.
    """
    pts = np.asarray(breakpoints, dtype=float)
    lo, hi = pts[:-1].copy(), pts[1:].copy()
    vals, errs = _panels(f, lo, hi, order)
    while True:
        total = vals.sum(axis=-1)
        err = errs.sum(axis=-1)
        tol = np.maximum(rtol * np.abs(total), atol)
        if np.all(err <= tol):
            return total, err
        if len(lo) >= max_panels:
            raise QuadratureFailure(
                f"no convergence within {max_panels} panels (error {np.max(err):.3e})"
            )
        safe = np.where(tol > 0, tol, np.finfo(float).tiny)
        score = errs / safe[..., None]
        score = score.reshape(-1, len(lo)).max(axis=0)
        split = score >= 0.25 * score.max()
        keep = ~split
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nv, ne = _panels(f, new_lo, new_hi, order)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[..., keep], nv], axis=-1)
        errs = np.concatenate([errs[..., keep], ne], axis=-1)
