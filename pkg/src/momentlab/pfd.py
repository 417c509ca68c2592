"""Partial fraction decomposition of q/p with repeated poles.

The coefficient of ``(z - a)**-j`` at a pole ``a`` of multiplicity ``b`` is the
Taylor coefficient of order ``b - j`` of ``q / p_a`` at ``a``, where ``p_a`` is
``p`` with the factor ``(z - a)**b`` removed.  Those Taylor coefficients are
obtained by truncated power-series arithmetic, never by differentiating a
quotient symbolically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CommonZero, DegreeViolation, PoleHit
from .polycore import RealPolynomial, RootMultiset

COMMON_ZERO_RTOL = 1e-10
POLE_HIT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Taylor coefficients ``coeffs[k]`` of a function about ``center``."""

    center: complex
    coeffs: np.ndarray

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def of_polynomial(cls, p: RealPolynomial, center: complex, order: int) -> "TruncatedSeries":
        # repeated synthetic division by (z - center) yields p^(k)(center)/k!
        work = np.array(p.coeffs, dtype=complex)
        out = np.zeros(order, dtype=complex)
        for k in range(min(order, len(work))):
            acc = 0j
            quotient = np.zeros(max(len(work) - 1, 0), dtype=complex)
            for i in range(len(work) - 1, -1, -1):
                acc = acc * center + work[i]
                if i > 0:
                    quotient[i - 1] = acc
            out[k] = acc
            work = quotient
        return cls(complex(center), out)

    @classmethod
    def of_linear_power(cls, offset: complex, power: int, center: complex, order: int) -> "TruncatedSeries":
        """Series of ``(offset + h)**power`` in ``h = z - center``."""
        c = np.zeros(order, dtype=complex)
        c[0] = 1.0
        lin = np.zeros(order, dtype=complex)
        lin[0] = offset
        if order > 1:
            lin[1] = 1.0
        s = cls(center, c)
        for _ in range(power):
            s = s * cls(center, lin)
        return s

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order, other.order)
        return TruncatedSeries(self.center, np.convolve(self.coeffs[:n], other.coeffs[:n])[:n])

    def __truediv__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = np.zeros(n, dtype=complex)
        for k in range(n):
            out[k] = (a[k] - np.dot(out[:k], b[k:0:-1])) / b[0]
        return TruncatedSeries(self.center, out)


@dataclass(frozen=True)
class PfdTable:
    """``q/p = sum A / (z - pole)**order`` over ``terms = ((pole, order, A), ...)``."""

    terms: tuple[tuple[complex, int, complex], ...]
    source_degree_p: int
    source_degree_q: int

    def poles(self) -> list[complex]:
        seen = []
        for z, _, _ in self.terms:
            if z not in seen:
                seen.append(z)
        return seen

    def coefficient(self, pole: complex, order: int) -> complex:
        for z, j, a in self.terms:
            if z == pole and j == order:
                return a
        raise KeyError((pole, order))

    def block(self, pole: complex) -> list[complex]:
        """Coefficients ``[A^1, ..., A^b]`` of one pole."""
        return [a for _, a in sorted((j, a) for z, j, a in self.terms if z == pole)]


def _pole_coefficients(q: RealPolynomial, roots: RootMultiset, pole: complex, mult: int) -> list[complex]:
    denom = TruncatedSeries(pole, np.array([complex(roots.leading)] + [0j] * (mult - 1)))
    for other, m in roots.entries:
        if other == pole:
            continue
        denom = denom * TruncatedSeries.of_linear_power(pole - other, m, pole, mult)
    ratio = TruncatedSeries.of_polynomial(q, pole, mult) / denom
    # A^j is the Taylor coefficient of order mult - j
    return [ratio.coeffs[mult - j] for j in range(1, mult + 1)]


def decompose(q: RealPolynomial, roots: RootMultiset) -> PfdTable:
    """Partial fraction coefficients of ``q / p`` where ``p`` has the given roots.

    Raises
    ------
    DegreeViolation
        If ``deg q >= deg p``.
    CommonZero
        If ``q`` vanishes (to relative tolerance) at a root of ``p``.
    """
    if q.degree >= roots.degree:
        raise DegreeViolation(f"deg q = {q.degree} must be below deg p = {roots.degree}")
    terms: list[tuple[complex, int, complex]] = []
    for pole, mult in roots.entries:
        if pole.imag < 0:
            continue
        scale = float(q.eval_scale(pole))
        if abs(q(pole)) <= COMMON_ZERO_RTOL * scale or scale == 0.0:
            raise CommonZero(f"q vanishes at the root {pole}")
        coeffs = _pole_coefficients(q, roots, pole, mult)
        for j, a in enumerate(coeffs, start=1):
            if pole.imag == 0:
                terms.append((pole, j, complex(a.real, 0.0)))
            else:
                terms.append((pole, j, complex(a)))
                terms.append((pole.conjugate(), j, complex(a).conjugate()))
    terms.sort(key=lambda t: (-t[0].real, abs(t[0].imag), t[0].imag, t[1]))
    return PfdTable(tuple(terms), roots.degree, q.degree)


def reconstruct(table: PfdTable, z):
    """Evaluate ``sum A (z - pole)**-order``; raises PoleHit next to a pole."""
    z = np.asarray(z, dtype=complex)
    for pole in table.poles():
        if np.any(np.abs(z - pole) < POLE_HIT_RTOL * (1 + np.abs(z))):
            raise PoleHit(f"evaluation point within tolerance of pole {pole}")
    out = np.zeros(z.shape, dtype=complex)
    for pole, j, a in table.terms:
        out = out + a / (z - pole) ** j
    return out.item() if out.ndim == 0 else out
