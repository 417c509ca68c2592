"""Diagonal kernels ``K(z, w) = sum a_n (z conj w)^n`` and the partial-sum counterexample.

A diagonal kernel of this kind, with the shift a contraction, is subnormal
exactly when ``1/a_n`` is a Hausdorff moment sequence.  The Schur product with
the Szego kernel replaces ``a_n`` by its partial sums.  With
``a_n = (n + c)^6`` the kernel is subnormal, while for ``c`` near 1 the partial
sums ``p_c(n)`` give a sequence ``1/p_c(n)`` that is not a moment sequence.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .classify import (
    MOMENT,
    NOT_MOMENT,
    Budget,
    FiniteTestResult,
    Verdict,
    decide,
    hausdorff_finite_test,
)
from .polycore import RealPolynomial, faulhaber_partial_sum, find_roots
from .weight import NEGATIVITY_WITNESS, build_weight, sign_scan

FAULHABER_POWER = 6


@dataclass(frozen=True)
class KernelCoefficients:
    """Diagonal kernel coefficients, optionally with ``1/a_n = q(n)/p(n)``."""

    a: Callable[[int], object]
    description: str
    q: Optional[RealPolynomial] = None
    p: Optional[RealPolynomial] = None

    def __call__(self, n: int):
        value = self.a(n)
        if not value > 0:
            raise ValueError(f"kernel coefficient a_{n} = {value} is not positive")
        return value


def power_kernel(c: float, k: int = FAULHABER_POWER) -> KernelCoefficients:
    """``a_n = (n + c)^k``; ``1/a_n`` has weight ``t^(c-1) log(1/t)^(k-1) / (k-1)!``."""
    fc = Fraction(c)
    p = RealPolynomial([math.comb(k, i) * c ** (k - i) for i in range(k + 1)])
    return KernelCoefficients(lambda n: (n + fc) ** k, f"(n+{c})^{k}", RealPolynomial([1.0]), p)


def schur_product_with_szego(k: KernelCoefficients, n: int):
    """Coefficient ``sum_{j<=n} a_j`` of the Schur product with the Szego kernel."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    terms = [k(j) for j in range(n + 1)]
    if all(isinstance(v, (int, Fraction)) for v in terms):
        return sum(terms, Fraction(0))
    return math.fsum(float(v) for v in terms)


def szego_product(k: KernelCoefficients) -> KernelCoefficients:
    return KernelCoefficients(lambda n: schur_product_with_szego(k, n), f"partial sums of {k.description}")


def subnormality_test(k: KernelCoefficients, budget: Optional[Budget] = None) -> Verdict:
    """Subnormality of the diagonal kernel through the moment property of ``1/a_n``.

    With a rational form ``q/p`` the engine decides; ``deg q = deg p`` is split
    into a constant (a point mass at 1) plus a proper fraction.  Without a
    rational form only the finite-difference test is available.
    """
    budget = budget or Budget()
    if k.q is not None and k.p is not None:
        q, p = k.q, k.p
        if p.leading < 0:
            q, p = q.scale(-1.0), p.scale(-1.0)
        if q.degree == p.degree:
            const = q.leading / p.leading
            rest = q - p.scale(const)
            if const < 0:
                raise ValueError("1/a_n tends to a negative limit")
            if rest.is_zero():
                return Verdict(MOMENT, "point_mass", "point_mass", details={"constant": const})
            inner = decide(rest, p, budget)
            if inner.decision == MOMENT:
                return Verdict(MOMENT, "point_mass_plus_" + inner.rule, inner.certificate, inner.boundary_flag,
                               inner.scan, inner.finite_test, {"constant": const})
            return Verdict("Undetermined", "point_mass_split", None, details={"constant": const,
                                                                               "remainder": inner.decision})
        return decide(q, p, budget)
    def inverse(n):
        v = k(n)
        return 1 / Fraction(v) if isinstance(v, (int, Fraction)) else 1.0 / v

    fd = hausdorff_finite_test(inverse, budget.fd_order, budget.fd_offset)
    if fd.passed:
        return Verdict(MOMENT, "finite_difference_only", fd, finite_test=fd)
    return Verdict(NOT_MOMENT, "finite_difference_only", fd, finite_test=fd)


def partial_sum_polynomial(c: float) -> RealPolynomial:
    """``p_c`` with ``p_c(n) = sum_{j<=n} (j + c)^6``."""
    return faulhaber_partial_sum(c, FAULHABER_POWER)


def misra_counterexample(c: float, budget: Optional[Budget] = None) -> Verdict:
    """Verdict for ``1/p_c(n)``."""
    if not c > 0:
        raise ValueError("c must be positive")
    return decide(RealPolynomial([1.0]), partial_sum_polynomial(c), budget)


@dataclass(frozen=True)
class MisraReport:
    c: float
    partial_sum: RealPolynomial
    verdict: Verdict
    kernel_verdict: Verdict
    finite_test: FiniteTestResult


def misra_report(c: float, budget: Optional[Budget] = None, fd_order: int = 30, fd_offset: int = 30) -> MisraReport:
    """The full pipeline: the kernel ``(n+c)^6``, its Szego product, and both tests."""
    budget = budget or Budget()
    p = partial_sum_polynomial(c)
    kernel = subnormality_test(power_kernel(c), budget)
    verdict = decide(RealPolynomial([1.0]), p, budget)
    seq = hausdorff_finite_test(lambda n: 1 / Fraction(schur_product_with_szego(power_kernel(c), n)),
                                fd_order, fd_offset)
    return MisraReport(c, p, verdict, kernel, seq)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MOMENTLAB_THREADS", "1")))
    except ValueError:
        return 1


def scan_c(cs: Iterable[float], budget: Optional[Budget] = None) -> list[tuple[float, Verdict]]:
    """Verdicts of ``1/p_c`` over several ``c``; ``MOMENTLAB_THREADS`` sets the pool size."""
    cs = list(cs)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        verdicts = list(pool.map(lambda c: misra_counterexample(c, budget), cs))
    return list(zip(cs, verdicts))


def weight_negative(c: float, grid_size: int = 4000) -> bool:
    """Whether the sign scan of the weight of ``1/p_c`` finds a negative value."""
    w = build_weight(RealPolynomial([1.0]), find_roots(partial_sum_polynomial(c)))
    return sign_scan(w, grid_size).kind == NEGATIVITY_WITNESS


def neighborhood_edge(inside: float, outside: float, tol: float = 1e-4, grid_size: int = 4000) -> float:
    """Bisect for the edge of the region around ``inside`` where the weight goes negative.

    Requires a negative weight at ``inside`` and none at ``outside``.
    """
    if not weight_negative(inside, grid_size):
        raise ValueError(f"no negative weight at c = {inside}")
    if weight_negative(outside, grid_size):
        raise ValueError(f"weight is negative at c = {outside} too")
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if weight_negative(mid, grid_size):
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)
