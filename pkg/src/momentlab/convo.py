"""Convolutions of exponentials and multiplicative convolution of weights.

For ``q = 1`` the weight of ``1/p`` is ``(1/t) (f_1 * ... * f_m)(log 1/t)`` with
``f_j(y) = exp(alpha_j y)``, the ``alpha_j`` being the roots of ``p`` with
repetition.  The iterated convolution is built level by level on a composite
Gauss-Legendre grid: each level's values at the grid nodes are stored and the
next level integrates against their panel-wise interpolant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from . import _quad
from .errors import DomainError, QuadratureFailure
from .polycore import RootMultiset
from .weight import WeightFunction

NODES = 16
LEVEL_RTOL = 1e-9
MAX_PANELS = 1 << 14
IMAG_RESIDUE_RTOL = 1e-8


@dataclass(frozen=True)
class ExpFamily:
    exponents: tuple[complex, ...]

    def __post_init__(self):
        exps = tuple(complex(a) for a in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if not exps:
            raise ValueError("need at least one exponent")
        if any(not a.real < 0 for a in exps):
            raise DomainError("every exponent needs a negative real part")

    @classmethod
    def of_roots(cls, roots: RootMultiset) -> "ExpFamily":
        return cls(tuple(roots.flat()))


def _lagrange(nodes: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Matrix ``L[k, i] = l_i(xs[k])`` of Lagrange basis values."""
    diff = xs[:, None] - nodes[None, :]
    out = np.empty((len(xs), len(nodes)))
    for i in range(len(nodes)):
        others = np.delete(np.arange(len(nodes)), i)
        out[:, i] = np.prod(diff[:, others], axis=1) / np.prod(nodes[i] - nodes[others])
    return out


@lru_cache(maxsize=None)
def _reference():
    """Per-panel integration data on ``[-1, 1]``.

    Targets are the panel nodes followed by the right endpoint.  For each target
    ``tau`` the integral over ``[-1, tau]`` uses its own Gauss rule, whose points
    are interpolated from the panel nodes.
    """
    x, wq = np.polynomial.legendre.leggauss(NODES)
    targets = np.append(x, 1.0)
    interp = np.empty((len(targets), NODES, NODES))
    lag = np.empty((len(targets), NODES))
    weights = np.empty((len(targets), NODES))
    for k, tau in enumerate(targets):
        pts = -1.0 + (tau + 1.0) * (x + 1.0) / 2.0
        interp[k] = _lagrange(x, pts)
        lag[k] = tau - pts
        weights[k] = (tau + 1.0) / 2.0 * wq
    return x, targets, interp, lag, weights


def _levels(alphas: tuple[complex, ...], Y: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Node values (panels, NODES) of the full convolution on ``[0, Y]``, and the grid edges."""
    x, targets, interp, lag, weights = _reference()
    edges = np.linspace(0.0, Y, panels + 1)
    h = Y / panels
    rel = (targets + 1.0) / 2.0 * h  # target offset from the panel start
    u = edges[:-1, None] + (x[None, :] + 1.0) / 2.0 * h
    g = np.exp(alphas[0] * u)
    for a in alphas[1:]:
        gq = np.einsum("tqi,pi->ptq", interp, g)
        kern = np.exp(a * lag * h / 2.0) * weights * h / 2.0
        inner = np.einsum("ptq,tq->pt", gq, kern)
        starts = np.empty(panels, dtype=complex)
        decay = np.exp(a * h)
        s = 0j
        for p in range(panels):
            starts[p] = s
            s = decay * s + inner[p, -1]
        g = np.exp(a * rel[None, :NODES]) * starts[:, None] + inner[:, :NODES]
    return g, edges


def _evaluate(alphas, ys: np.ndarray, panels: int) -> np.ndarray:
    Y = float(ys.max())
    g, edges = _levels(alphas, Y, panels)
    x = _reference()[0]
    h = Y / panels
    idx = np.minimum((ys / h).astype(int), panels - 1)
    ref = 2.0 * (ys - edges[idx]) / h - 1.0
    basis = _lagrange(x, ref)
    return np.einsum("ki,ki->k", basis, g[idx])


def convolve_exponentials(fam: ExpFamily, y):
    """``(f_1 * ... * f_m)(y)`` for scalar or array ``y >= 0``.

    Raises
    ------
    QuadratureFailure
        If doubling the panel count stops changing the result only beyond the
        panel budget.
    """
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(ys < 0):
        raise DomainError("y must be nonnegative")
    alphas = fam.exponents
    out = np.zeros(ys.shape, dtype=complex)
    pos = ys > 0
    out[~pos] = 1.0 if len(alphas) == 1 else 0.0
    if np.any(pos):
        yp = ys[pos]
        reach = max(abs(a) for a in alphas)
        panels = max(2, int(math.ceil(float(yp.max()) * reach)))
        prev = _evaluate(alphas, yp, panels)
        while True:
            panels *= 2
            if panels > MAX_PANELS:
                raise QuadratureFailure("iterated convolution did not settle")
            cur = _evaluate(alphas, yp, panels)
            scale = np.maximum(np.abs(cur), np.finfo(float).tiny)
            if np.all(np.abs(cur - prev) <= LEVEL_RTOL * scale + 1e-15 * np.max(np.abs(cur))):
                break
            prev = cur
        out[pos] = cur
    return out.item() if np.ndim(y) == 0 else out


def simplex_form(fam: ExpFamily, y: float, samples: int, seed: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None) -> tuple[complex, float]:
    """Monte Carlo value of ``y^(m-1) * int_simplex exp(y sum lambda_j alpha_j) d lambda``.

    Returns ``(estimate, standard_error)``.  Uniform points on the simplex come
    from normalized exponential variates.
    """
    m = len(fam.exponents)
    if m < 2:
        raise ValueError("the simplex form needs at least two exponents")
    if samples < 10_000:
        raise ValueError("use at least 10^4 samples")
    rng = rng if rng is not None else np.random.default_rng(seed)
    e = rng.standard_exponential((samples, m))
    lam = e / e.sum(axis=1, keepdims=True)
    vals = np.exp(y * lam @ np.array(fam.exponents))
    scale = y ** (m - 1) / math.factorial(m - 1)
    est = complex(vals.mean()) * scale
    var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
    return est, float(scale * math.sqrt(var / samples))


def weight_via_convolution(roots: RootMultiset, t):
    """The weight of ``1/p`` at ``t`` through the iterated convolution."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)) or np.any(t_arr > 1):
        raise DomainError("t must lie in (0, 1]")
    x = -np.log(t_arr)
    val = np.asarray(convolve_exponentials(ExpFamily.of_roots(roots), x)) / t_arr / roots.leading
    floor = 1e-12 * float(np.max(np.abs(val)))
    if np.any(np.abs(val.imag) > IMAG_RESIDUE_RTOL * np.maximum(np.abs(val), floor)):
        raise ArithmeticError("imaginary part of the convolution does not cancel")
    out = val.real
    return float(out) if out.ndim == 0 else out


def multiplicative_convolution(w1: WeightFunction, w2: WeightFunction, t, rtol: float = 1e-10):
    """``(w1 <> w2)(t) = int_t^1 w1(s) w2(t/s) ds/s``.

    With ``s = exp(-u)`` and ``x = log(1/t)`` this is the ordinary convolution
    ``int_0^x W1(u) W2(x - u) du`` of ``W(u) = w(exp(-u))``.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(t_arr > 0)) or np.any(t_arr > 1):
        raise DomainError("t must lie in (0, 1]")
    x = -np.log(t_arr)

    def integrand(sig, absolute=False):
        u = x[:, None] * sig[None, :]
        if absolute:
            return x[:, None] * w1.abs_values_x(u) * w2.abs_values_x(x[:, None] - u)
        return x[:, None] * w1.values_x(u) * w2.values_x(x[:, None] - u)

    breaks = np.linspace(0.0, 1.0, 9)
    mag, _ = _quad.integrate(lambda s: integrand(s, True), breaks, rtol=1e-3)
    val, _ = _quad.integrate(integrand, breaks, rtol=rtol, atol=1e-13 * mag)
    return float(val[0]) if np.ndim(t) == 0 else val


def convolution_moments(w1: WeightFunction, w2: WeightFunction, ns: Iterable[int],
                        rtol: float = 1e-9) -> np.ndarray:
    """``int_0^1 t^n (w1 <> w2)(t) dt`` by quadrature of the convolved weight."""
    ns = np.array(list(ns), dtype=float)
    top = max(w1.max_real_part, w2.max_real_part)
    X = 60.0 / (ns.min() - top)

    def integrand(xs):
        c = multiplicative_convolution(w1, w2, np.exp(-xs))
        return np.exp(-(ns[:, None] + 1.0) * xs[None, :]) * c[None, :]

    val, _ = _quad.integrate(integrand, np.linspace(0.0, X, 33), rtol=rtol)
    return val
