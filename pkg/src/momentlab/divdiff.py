"""Divided differences with repeated nodes, and the weight as a divided difference.

The weight of ``q/p`` equals the divided difference of
``F_t(z) = q(z) * t**(-z - 1)`` over the roots of ``p`` (each repeated by its
multiplicity), divided by the leading coefficient of ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NodesTooClose, PreconditionViolated, UnstablePolynomial
from .polycore import RealPolynomial, RootMultiset, derivative

CONFLUENCE_RTOL = 1e-6
IMAG_RESIDUE_RTOL = 1e-10
SIGN_RTOL = 1e-12


@dataclass(frozen=True)
class NodeList:
    """Distinct points with repetition counts."""

    nodes: tuple[tuple[complex, int], ...]

    def __post_init__(self):
        nodes = tuple((complex(z), int(r)) for z, r in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        for z, r in nodes:
            if r < 1:
                raise ValueError("repetitions must be positive")
        for i, (a, _) in enumerate(nodes):
            for b, _ in nodes[i + 1:]:
                if abs(a - b) <= CONFLUENCE_RTOL * (1 + max(abs(a), abs(b))):
                    raise NodesTooClose(f"nodes {a} and {b} must be merged into one repeated node")

    @classmethod
    def of(cls, points: Sequence[complex]) -> "NodeList":
        """Group exactly equal points; nearly equal distinct points are rejected."""
        counts: dict[complex, int] = {}
        for z in points:
            counts[complex(z)] = counts.get(complex(z), 0) + 1
        return cls(tuple(counts.items()))

    @classmethod
    def of_roots(cls, roots: RootMultiset) -> "NodeList":
        return cls(roots.entries)

    @property
    def count(self) -> int:
        return sum(r for _, r in self.nodes)


class AnalyticFn:
    """Value and derivatives ``[f(z), f'(z), ..., f^(order-1)(z)]`` at a point."""

    max_order: int = 64

    def derivatives(self, z: complex, order: int) -> list:
        raise NotImplementedError


class PolynomialFn(AnalyticFn):
    def __init__(self, p: RealPolynomial):
        self.p = p

    def derivatives(self, z, order):
        return [derivative(self.p, k)(z) for k in range(order)]


class KernelFn(AnalyticFn):
    """``F_t(z) = q(z) t^(-z-1)``, vectorized over an array of ``t``."""

    def __init__(self, q: RealPolynomial, t):
        self.q = q
        self.log_inv_t = -np.log(np.asarray(t, dtype=float))

    def derivatives(self, z, order):
        L = self.log_inv_t
        base = np.exp((z + 1) * L)
        qd = [derivative(self.q, k)(z) for k in range(order)]
        out = []
        for k in range(order):
            acc = sum(math.comb(k, j) * qd[k - j] * L ** j for j in range(k + 1))
            out.append(acc * base)
        return out


def _tableau(f: AnalyticFn, nodes: NodeList):
    pts, derivs = [], []
    for z, r in nodes.nodes:
        if r > f.max_order:
            raise ValueError(f"repetition {r} exceeds the evaluator's derivative order")
        d = f.derivatives(z, r)
        for _ in range(r):
            pts.append(z)
            derivs.append(d)
    col = [np.asarray(d[0], dtype=complex) for d in derivs]
    scale = max(np.max(np.abs(c)) for c in col)
    for k in range(1, len(pts)):
        nxt = []
        for i in range(len(pts) - k):
            if pts[i] == pts[i + k]:
                nxt.append(np.asarray(derivs[i][k], dtype=complex) / math.factorial(k))
            else:
                nxt.append((col[i + 1] - col[i]) / (pts[i + k] - pts[i]))
        col = nxt
        scale = max(scale, max(np.max(np.abs(c)) for c in col))
    return col[0], scale


def divided_difference(f: AnalyticFn, nodes: NodeList):
    """``f[x_1, ..., x_N]`` over the node multiset (complex; array if ``f`` is vectorized)."""
    value, _ = _tableau(f, nodes)
    return value.item() if value.ndim == 0 else value


def weight_via_divdiff(q: RealPolynomial, roots: RootMultiset, t):
    """The weight of ``q/p`` at ``t`` as a divided difference of ``F_t``.

    Raises
    ------
    UnstablePolynomial
        If a root is not in the open left half-plane.
    ArithmeticError
        If the imaginary part fails to cancel.
    """
    if not all(z.real < 0 for z, _ in roots.entries):
        raise UnstablePolynomial("roots must lie in the open left half-plane")
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)) or np.any(t_arr > 1):
        raise DomainError("t must lie in (0, 1]")
    value, scale = _tableau(KernelFn(q, t_arr), NodeList.of_roots(roots))
    value = value / roots.leading
    if np.any(np.abs(value.imag) > IMAG_RESIDUE_RTOL * (np.abs(value) + scale / abs(roots.leading))):
        raise ArithmeticError("imaginary part of the divided difference does not cancel")
    out = value.real
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SufficientResult:
    holds: bool
    values: tuple[float, ...]


def sufficient_condition(q: RealPolynomial, roots: RootMultiset) -> SufficientResult:
    """Check ``q[alpha_1, ..., alpha_j] >= 0`` for every ``j``.

    The roots must be real, negative and simple; they are taken in decreasing
    order.  When every value is nonnegative the sequence ``q(n)/p(n)`` is a
    Hausdorff moment sequence (given a positive leading coefficient of ``p``).
    """
    for z, m in roots.entries:
        if z.imag != 0 or m != 1 or not z.real < 0:
            raise PreconditionViolated("needs simple negative real roots")
    if q.degree >= roots.degree:
        raise PreconditionViolated("needs deg q < deg p")
    alphas = sorted((z.real for z, _ in roots.entries), reverse=True)
    f = PolynomialFn(q)
    values = []
    for j in range(1, len(alphas) + 1):
        values.append(float(divided_difference(f, NodeList.of(alphas[:j])).real))
    scale = max(abs(q(a)) for a in alphas)
    if scale == 0:
        raise PreconditionViolated("q vanishes at every root")
    tol = SIGN_RTOL * scale
    holds = all(v >= -tol for v in values) and roots.leading > 0
    return SufficientResult(holds, tuple(values))
