"""Real polynomials, complex evaluation, root finding with multiplicity
recovery, and Faulhaber partial-sum polynomials.

Coefficients are always stored in ascending degree order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegreeTooLarge, NonConvergence

COEFF_ZERO_RTOL = 1e-14
CLUSTER_RTOL = 1e-6
REAL_RTOL = 1e-8
# single-linkage radius for candidate clusters; membership is then verified
CANDIDATE_RTOL = 1e-3
# candidate grouping radii; a k-fold root spreads to about eps**(1/k)
CANDIDATE_RADII = (5e-2, 1e-2, CANDIDATE_RTOL, CLUSTER_RTOL)
# |p^(j)(c)| relative to its evaluation scale below which c is a k-fold root
MULTIPLICITY_RTOL = 1e-10
RESIDUAL_TOL = 1e-9
FAULHABER_MAX_K = 12


@dataclass(frozen=True)
class RealPolynomial:
    """Polynomial with real coefficients, ``coeffs[i]`` multiplies ``z**i``."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        c = [float(v) for v in coeffs]
        if not c:
            c = [0.0]
        if not all(math.isfinite(v) for v in c):
            raise ValueError("polynomial coefficients must be finite")
        big = max(abs(v) for v in c)
        c = [0.0 if abs(v) < COEFF_ZERO_RTOL * big else v for v in c]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], leading: float = 1.0) -> "RealPolynomial":
        c = np.array([1.0 + 0j])
        for r in roots:
            c = npoly.polymul(c, [-complex(r), 1.0])
        return cls(np.real(c) * leading)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other: "RealPolynomial") -> "RealPolynomial":
        return RealPolynomial(npoly.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "RealPolynomial") -> "RealPolynomial":
        return RealPolynomial(npoly.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other: "RealPolynomial") -> "RealPolynomial":
        return RealPolynomial(npoly.polymul(self.coeffs, other.coeffs))

    def scale(self, s: float) -> "RealPolynomial":
        return RealPolynomial([s * v for v in self.coeffs])

    def compose_affine(self, a: float, b: float) -> "RealPolynomial":
        """Return the polynomial ``z -> self(a*z + b)``."""
        out = np.zeros(1)
        lin = np.array([b, a])
        for v in reversed(self.coeffs):
            out = npoly.polyadd(npoly.polymul(out, lin), [v])
        return RealPolynomial(out)

    def eval_scale(self, z) -> np.ndarray:
        """Sum of ``|c_i| |z|**i``: the magnitude against which ``p(z)`` rounds."""
        return npoly.polyval(np.abs(z), np.abs(self.coeffs))


@dataclass(frozen=True)
class RootMultiset:
    """Distinct roots with multiplicities plus the leading coefficient.

    ``entries`` holds ``(root, multiplicity)`` with every non-real root
    accompanied by its conjugate.  Real roots are stored with ``imag == 0``.
    """

    entries: tuple[tuple[complex, int], ...]
    leading: float = 1.0

    def __post_init__(self):
        ents = tuple(sorted(((complex(z), int(m)) for z, m in self.entries), key=_root_key))
        object.__setattr__(self, "entries", ents)
        if len({z for z, _ in ents}) != len(ents):
            raise ValueError("roots must be distinct; merge repeats into one multiplicity")
        for z, m in ents:
            if m < 1:
                raise ValueError("multiplicities must be positive")
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError("roots must be finite")
            if z.imag != 0.0:
                if not any(w == z.conjugate() and k == m for w, k in ents):
                    raise ValueError(f"root {z} lacks a conjugate of equal multiplicity")

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[float, float, int]], leading: float = 1.0) -> "RootMultiset":
        """Build from ``(re, im, mult)`` triples, completing missing conjugates."""
        seen: dict[complex, int] = {}
        for re, im, m in triples:
            z = complex(re, im)
            if z in seen:
                raise ValueError(f"root {z} listed twice")
            seen[z] = int(m)
        for z, m in list(seen.items()):
            if z.imag != 0.0:
                zc = z.conjugate()
                if zc in seen and seen[zc] != m:
                    raise ValueError(f"conjugate roots {z} and {zc} disagree in multiplicity")
                seen.setdefault(zc, m)
        return cls(tuple(seen.items()), leading)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.entries)

    @property
    def real_roots(self) -> list[tuple[float, int]]:
        return [(z.real, m) for z, m in self.entries if z.imag == 0.0]

    @property
    def conjugate_pairs(self) -> list[tuple[float, float, int]]:
        return [(z.real, z.imag, m) for z, m in self.entries if z.imag > 0.0]

    @property
    def max_multiplicity(self) -> int:
        return max(m for _, m in self.entries)

    def flat(self) -> list[complex]:
        """Roots repeated according to multiplicity."""
        return [z for z, m in self.entries for _ in range(m)]

    def to_polynomial(self) -> RealPolynomial:
        return RealPolynomial.from_roots(self.flat(), self.leading)

    def evaluate(self, z):
        """Evaluate ``leading * prod (z - root)**mult`` (complex)."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, complex(self.leading))
        for r, m in self.entries:
            out = out * (z - r) ** m
        return out

    def map(self, f) -> "RootMultiset":
        """Apply an affine map of the plane commuting with conjugation to each root."""
        return RootMultiset(tuple((f(z), m) for z, m in self.entries), self.leading)


def _root_key(entry):
    z, _ = entry
    return (-z.real, abs(z.imag), z.imag)


def evaluate(p: RealPolynomial, z):
    """Horner evaluation of ``p`` at real or complex ``z`` (scalar or array)."""
    acc = np.zeros_like(np.asarray(z, dtype=complex if np.iscomplexobj(z) else float))
    for v in reversed(p.coeffs):
        acc = acc * z + v
    if np.ndim(acc) == 0:
        return acc.item()
    return acc


def derivative(p: RealPolynomial, order: int = 1) -> RealPolynomial:
    if order < 0:
        raise ValueError("order must be nonnegative")
    c = list(p.coeffs)
    for _ in range(order):
        if len(c) <= 1:
            return RealPolynomial([0.0])
        c = [i * c[i] for i in range(1, len(c))]
    return RealPolynomial(c)


def is_stable(roots: RootMultiset) -> bool:
    return all(z.real < 0 for z, _ in roots.entries)


# ---------------------------------------------------------------------------
# root finding


def _aberth(c: np.ndarray, maxiter: int = 600) -> np.ndarray:
    """Ehrlich-Aberth simultaneous iteration on the real coefficients ``c``."""
    n = len(c) - 1
    a = c / c[-1]
    radius = 1.0 + np.max(np.abs(a[:-1]))
    # spread the start off the real axis so conjugate symmetry is not imposed early
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    da = npoly.polyder(a)
    best = np.inf
    stall = 0
    for _ in range(maxiter):
        pv = npoly.polyval(z, a)
        dv = npoly.polyval(z, da)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dv != 0, pv / dv, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = np.sum(1.0 / diff, axis=1) - 1.0
            corr = ratio / (1.0 - ratio * s)
        corr = np.where(np.isfinite(corr), corr, 0.0)
        z = z - corr
        step = np.max(np.abs(corr) / (1.0 + np.abs(z)))
        if step < 1e-15:
            break
        # multiple roots stagnate at a noise floor instead of converging
        if step < best * 0.5:
            best, stall = step, 0
        elif step < 1e-6:
            stall += 1
            if stall > 20:
                break
    return z


def _newton(g: RealPolynomial, z: complex, steps: int = 30) -> complex:
    dg = derivative(g)
    best, best_res = z, abs(g(z))
    for _ in range(steps):
        d = dg(z)
        if d == 0:
            break
        z = z - g(z) / d
        res = abs(g(z))
        if res < best_res:
            best, best_res = z, res
        elif res > 10 * best_res:
            break
    return best


def _is_k_fold(p: RealPolynomial, c: complex, k: int) -> bool:
    for j in range(k):
        pj = derivative(p, j)
        scale = pj.eval_scale(c)
        if abs(pj(c)) > MULTIPLICITY_RTOL * max(scale, 1e-300):
            return False
    return True


def _single_linkage(z: np.ndarray, rtol: float) -> list[list[int]]:
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= rtol * (1 + max(abs(z[i]), abs(z[j]))):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _cluster(p: RealPolynomial, z: np.ndarray, radii: Sequence[float] = CANDIDATE_RADII) -> list[tuple[complex, int]]:
    """Group candidates into roots, coarsest radius first.

    A group of size ``k`` is accepted as one ``k``-fold root when Newton on
    ``p^(k-1)`` from its centroid lands on a point where ``p`` vanishes to
    order ``k``; otherwise the group is split at the next finer radius.
    """
    out: list[tuple[complex, int]] = []
    for group in _single_linkage(z, radii[0]):
        sub_z = z[group]
        k = len(group)
        centroid = complex(np.mean(sub_z))
        if k == 1:
            out.append((_newton(p, centroid, steps=5), 1))
            continue
        c = _newton(derivative(p, k - 1), centroid)
        if _is_k_fold(p, c, k):
            out.append((c, k))
        elif len(radii) > 1:
            out.extend(_cluster(p, sub_z, radii[1:]))
        else:
            out.extend((_newton(p, complex(v), steps=5), 1) for v in sub_z)
    return out


def _symmetrize(entries: list[tuple[complex, int]]) -> list[tuple[complex, int]]:
    real, upper, lower = [], [], []
    for z, m in entries:
        if abs(z.imag) <= REAL_RTOL * (1 + abs(z)):
            real.append((complex(z.real, 0.0), m))
        elif z.imag > 0:
            upper.append((z, m))
        else:
            lower.append((z, m))
    if len(upper) != len(lower):
        raise NonConvergence("complex roots do not pair into conjugates")
    out = list(real)
    remaining = list(lower)
    for z, m in upper:
        cands = [i for i, (w, k) in enumerate(remaining) if k == m]
        if not cands:
            raise NonConvergence(f"no conjugate partner for root {z}")
        i = min(cands, key=lambda i: abs(z - remaining[i][0].conjugate()))
        w, _ = remaining.pop(i)
        avg = 0.5 * (z + w.conjugate())
        out.append((avg, m))
        out.append((avg.conjugate(), m))
    return out


def _expand(roots, mults, lead) -> np.ndarray:
    c = np.array([complex(lead)])
    for a, m in zip(roots, mults):
        for _ in range(m):
            c = npoly.polymul(c, [-a, 1.0])
    return c


def _gauss_newton(p: RealPolynomial, entries, iters: int = 6):
    """Refine distinct roots with fixed multiplicities against the coefficients."""
    target = np.asarray(p.coeffs, dtype=complex)
    roots = np.array([z for z, _ in entries])
    mults = [m for _, m in entries]
    lead = p.leading
    res = _expand(roots, mults, lead) - target
    best = np.linalg.norm(res)
    for _ in range(iters):
        jac = np.empty((len(target), len(roots)), dtype=complex)
        for k in range(len(roots)):
            reduced = list(mults)
            reduced[k] -= 1
            col = -mults[k] * _expand(roots, reduced, lead)
            jac[:, k] = np.pad(col, (0, len(target) - len(col)))
        step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        trial = roots + step
        trial_res = _expand(trial, mults, lead) - target
        norm = np.linalg.norm(trial_res)
        if not norm < best:
            break
        roots, res, best = trial, trial_res, norm
    return [(complex(z), m) for z, m in zip(roots, mults)]


def find_roots(p: RealPolynomial) -> RootMultiset:
    """All roots of ``p`` with multiplicities, conjugate-symmetric.

    Raises
    ------
    NonConvergence
        If a returned root leaves a normalized residual above ``RESIDUAL_TOL``.
    """
    if p.degree < 1:
        raise ValueError("find_roots needs degree >= 1")
    c = np.asarray(p.coeffs, dtype=float)
    if p.degree == 1:
        entries = [(complex(-c[0] / c[1], 0.0), 1)]
    else:
        z = _aberth(c)
        entries = _symmetrize(_gauss_newton(p, _symmetrize(_cluster(p, z))))
    if sum(m for _, m in entries) != p.degree:
        raise NonConvergence("multiplicities do not add up to the degree")
    cmax = float(np.max(np.abs(c)))
    for z, _ in entries:
        res = abs(p(z)) / (cmax * (1 + abs(z)) ** p.degree)
        if res > RESIDUAL_TOL:
            raise NonConvergence(f"root {z} has residual {res:.3e}")
    return RootMultiset(tuple(entries), p.leading)


# ---------------------------------------------------------------------------
# Faulhaber partial sums


def bernoulli_plus(n: int) -> list[Fraction]:
    """Bernoulli numbers B_0..B_n with the convention B_1 = +1/2."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, r) * b[r] for r in range(m)) / (m + 1))
    if n >= 1:
        b[1] = Fraction(1, 2)
    return b


def power_sum_coefficients(i: int) -> list[Fraction]:
    """Exact ascending coefficients of ``S_i(n) = sum_{j=0}^{n} j**i``."""
    if i == 0:
        return [Fraction(1), Fraction(1)]
    b = bernoulli_plus(i)
    out = [Fraction(0)] * (i + 2)
    for r in range(i + 1):
        out[i + 1 - r] += Fraction(math.comb(i + 1, r)) * b[r] / (i + 1)
    return out


def faulhaber_coefficients(c, k: int) -> list[Fraction]:
    """Exact coefficients of ``n -> sum_{j=0}^{n} (j + c)**k`` for rational ``c``."""
    if k > FAULHABER_MAX_K:
        raise DegreeTooLarge(f"k={k} exceeds {FAULHABER_MAX_K}")
    if k < 1:
        raise ValueError("k must be a positive integer")
    c = Fraction(c)
    out = [Fraction(0)] * (k + 2)
    for i in range(k + 1):
        w = math.comb(k, i) * c ** (k - i)
        for d, v in enumerate(power_sum_coefficients(i)):
            out[d] += w * v
    return out


def faulhaber_partial_sum(c: float, k: int) -> RealPolynomial:
    """Degree ``k+1`` polynomial ``P`` with ``P(n) = sum_{j=0}^{n} (j+c)**k``."""
    if not c > 0:
        raise ValueError("c must be positive")
    return RealPolynomial([float(v) for v in faulhaber_coefficients(c, k)])


def exact_value(coeffs: Sequence, n) -> Fraction:
    """Evaluate a polynomial exactly in rational arithmetic (float coefficients are exact binary rationals)."""
    acc = Fraction(0)
    n = Fraction(n)
    for v in reversed(coeffs):
        acc = acc * n + Fraction(v)
    return acc
