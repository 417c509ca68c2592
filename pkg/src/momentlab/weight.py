"""Weight functions of rational sequences and their moments.

For stable ``p`` and ``deg q < deg p`` the sequence ``q(n)/p(n)`` is the moment
sequence of the signed density

    w(t) = sum_i sum_j A_i^j (log 1/t)^(j-1) / (j-1)! * t^(-alpha_i - 1)

on ``(0, 1]``, with ``A_i^j`` the partial fraction coefficients.  Everything
here works in the variable ``x = log(1/t)``, where each term becomes
``amp * x**power * exp(rate * x) * cos(phase + freq * x)``.  A conjugate pair
contributes a single term with amplitude ``2|A|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammaincc

from . import _quad
from .errors import DomainError, QuadratureFailure, UnstablePolynomial, UnstableShift
from .pfd import PfdTable, decompose
from .polycore import RealPolynomial, RootMultiset, is_stable

IMAG_RESIDUE_RTOL = 1e-12
NEGATIVITY_RTOL = 1e-11
TAIL_RTOL = 1e-14
PANEL_RTOL = 1e-12
# absolute floor relative to the integral of |integrand|; needed when the moment cancels
PANEL_ATOL_SCALE = 1e-14
MAX_X = 700.0
# keeps exp(rate * x) inside the normal float range for witnesses
MAX_EXPONENT = 600.0
MAX_GRID = 2_000_000
SAMPLES_PER_PERIOD = 32
DOMINANCE_RTOL = 1e-9
_CHUNK = 200_000
TAYLOR_TERMS = 40


@dataclass(frozen=True)
class RealBlock:
    root: float
    mult: int
    coeffs: tuple[float, ...]


@dataclass(frozen=True)
class PairBlock:
    x: float
    y: float
    mult: int
    magnitudes: tuple[float, ...]
    phases: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class WeightFunction:
    q: RealPolynomial
    roots: RootMultiset
    pfd: PfdTable
    real_blocks: tuple[RealBlock, ...]
    pair_blocks: tuple[PairBlock, ...]
    amp: np.ndarray
    power: np.ndarray
    rate: np.ndarray
    freq: np.ndarray
    phase: np.ndarray
    taylor: np.ndarray
    taylor_radius: float

    @property
    def real_form(self) -> list:
        return list(self.real_blocks) + list(self.pair_blocks)

    @property
    def max_real_part(self) -> float:
        return max(z.real for z, _ in self.roots.entries)

    def values_x(self, x, shift: float = 0.0) -> np.ndarray:
        """``exp(-shift * x) * w(exp(-x))`` for an array of ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        for s in range(0, max(len(flat), 1), _CHUNK):
            xs = flat[s:s + _CHUNK][None, :]
            terms = (
                self.amp[:, None]
                * xs ** self.power[:, None]
                * np.exp((self.rate[:, None] - shift) * xs)
                * np.cos(self.phase[:, None] + self.freq[:, None] * xs)
            )
            out[s:s + _CHUNK] = terms.sum(axis=0)
        return out.reshape(x.shape)

    def values_x_stable(self, x, shift: float = 0.0) -> np.ndarray:
        """As :meth:`values_x`, but summing a Taylor series near ``x = 0``.

        Near ``t = 1`` the weight vanishes to the order ``deg p - deg q - 1`` while
        its terms do not; the series avoids that cancellation.
        """
        x = np.asarray(x, dtype=float)
        out = self.values_x(x, shift)
        near = x <= self.taylor_radius
        if np.any(near):
            xn = x[near]
            out[near] = np.polynomial.polynomial.polyval(xn, self.taylor) * np.exp((1.0 - shift) * xn)
        return out

    def abs_values_x(self, x, shift: float = 0.0) -> np.ndarray:
        """Sum of term magnitudes; the conditioning scale of ``values_x``."""
        x = np.asarray(x, dtype=float)[None, ...]
        ex = (slice(None),) + (None,) * (x.ndim - 1)
        terms = np.abs(self.amp[ex]) * x ** self.power[ex] * np.exp((self.rate[ex] - shift) * x)
        return terms.sum(axis=0)


@dataclass(frozen=True)
class MomentReport:
    n: int
    claimed: float
    integrated: float
    rel_error: float
    error_estimate: float = 0.0


@dataclass(frozen=True)
class SignCertificate:
    """Outcome of a sign scan.

    ``min_value`` is the minimum of ``t**scale_exponent * w(t)`` over the scanned
    points, located at ``t = min_location``; ``witness_value`` is the unscaled
    ``w`` there.  The scaling keeps the scan free of overflow and makes the
    tolerance meaningful deep inside the decay region.
    """

    kind: str
    witness_t: Optional[float]
    witness_value: float
    grid_size: int
    min_value: float
    min_location: float
    scale_exponent: float = 0.0
    abs_tol: float = 0.0


NEGATIVITY_WITNESS = "NegativityWitness"
POSITIVITY_MARGIN = "PositivityMargin"


def _laurent_taylor(q: RealPolynomial, roots: RootMultiset, order: int) -> np.ndarray:
    """Taylor coefficients at 0 of ``h(x) = sum A x^(j-1)/(j-1)! e^(alpha x)``.

    ``q/p = sum_k h^(k)(0) z^(-k-1)`` at infinity, so the derivatives follow from
    long division of the coefficient lists.
    """
    p = roots.to_polynomial().coeffs
    d = len(p) - 1
    qc = q.coeffs
    mu = np.zeros(order)
    for m in range(order):
        j = d - 1 - m
        acc = qc[j] if 0 <= j < len(qc) else 0.0
        for i in range(max(0, d - m), d):
            acc -= p[i] * mu[m - (d - i)]
        mu[m] = acc / p[d]
    return mu / np.array([math.factorial(k) for k in range(order)], dtype=float)


def _from_table(q: RealPolynomial, roots: RootMultiset, table: PfdTable) -> WeightFunction:
    real_blocks, pair_blocks = [], []
    amp, power, rate, freq, phase = [], [], [], [], []
    for pole, mult in roots.entries:
        if pole.imag < 0:
            continue
        block = table.block(pole)
        if pole.imag == 0:
            coeffs = tuple(float(a.real) for a in block)
            real_blocks.append(RealBlock(pole.real, mult, coeffs))
            for j, a in enumerate(coeffs, start=1):
                amp.append(a / math.factorial(j - 1))
                power.append(j - 1)
                rate.append(pole.real + 1.0)
                freq.append(0.0)
                phase.append(0.0)
        else:
            mags = tuple(abs(a) for a in block)
            # principal argument lies in (-pi, pi]
            phs = tuple(float(np.angle(a)) if a != 0 else 0.0 for a in block)
            pair_blocks.append(PairBlock(pole.real, pole.imag, mult, mags, phs))
            for j, (m, th) in enumerate(zip(mags, phs), start=1):
                amp.append(2.0 * m / math.factorial(j - 1))
                power.append(j - 1)
                rate.append(pole.real + 1.0)
                freq.append(pole.imag)
                phase.append(th)
    arr = lambda v: np.array(v, dtype=float)  # noqa: E731
    reach = max(abs(z) for z, _ in roots.entries)
    return WeightFunction(
        q, roots, table, tuple(real_blocks), tuple(pair_blocks),
        arr(amp), arr(power), arr(rate), arr(freq), arr(phase),
        _laurent_taylor(q, roots, TAYLOR_TERMS), min(1.0, 1.0 / reach),
    )


def build_weight(q: RealPolynomial, roots: RootMultiset) -> WeightFunction:
    """Weight function of ``q/p`` where ``p`` has the given roots.

    Raises
    ------
    UnstablePolynomial
        If a root of ``p`` has nonnegative real part.
    DegreeViolation, CommonZero
        From the partial fraction step.
    """
    if not is_stable(roots):
        raise UnstablePolynomial("the weight exists only for roots in the open left half-plane")
    return _from_table(q, roots, decompose(q, roots))


def _to_x(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)) or np.any(t > 1):
        raise DomainError("t must lie in (0, 1]")
    return -np.log(t)


def eval_weight(w: WeightFunction, t):
    """``w(t)`` for scalar or array ``t`` in ``(0, 1]``."""
    x = _to_x(t)
    out = w.values_x(x)
    return float(out) if out.ndim == 0 else out


def eval_weight_complex(w: WeightFunction, t):
    """``w(t)`` summed directly over the complex partial fraction terms.

    Raises ``ArithmeticError`` if the imaginary residue exceeds the tolerance.
    """
    x = np.atleast_1d(_to_x(t))
    total = np.zeros(x.shape, dtype=complex)
    scale = np.zeros(x.shape)
    for pole, j, a in w.pfd.terms:
        term = a * x ** (j - 1) / math.factorial(j - 1) * np.exp((pole + 1) * x)
        total += term
        scale += np.abs(term)
    if np.any(np.abs(total.imag) > IMAG_RESIDUE_RTOL * np.maximum(scale, np.finfo(float).tiny)):
        raise ArithmeticError("conjugate terms failed to cancel")
    out = total.real
    return float(out[0]) if np.ndim(t) == 0 else out


def _tail_bounds(w: WeightFunction, ns: np.ndarray, X: float) -> np.ndarray:
    """Bound on ``int_X^inf |e^{-(n+1)x} w(e^{-x})| dx`` for each ``n``."""
    beta = ns[:, None] + 1.0 - w.rate[None, :]
    p = w.power[None, :]
    gam = np.array([math.factorial(int(k)) for k in w.power], dtype=float)[None, :]
    return (np.abs(w.amp)[None, :] * gam * gammaincc(p + 1, beta * X) / beta ** (p + 1)).sum(axis=1)


def _breakpoints(w: WeightFunction, a: float, b: float) -> np.ndarray:
    fmax = float(w.freq.max()) if len(w.freq) else 0.0
    width = min(2.0, math.pi / fmax) if fmax > 0 else 2.0
    pts = np.linspace(a, b, max(2, int(math.ceil((b - a) / width)) + 1))
    # the stable evaluator switches form at the Taylor radius
    if a < w.taylor_radius < b:
        pts = np.union1d(pts, [w.taylor_radius])
    return pts


def moments(w: WeightFunction, ns: Iterable[int], rtol: float = PANEL_RTOL) -> list[MomentReport]:
    """Moments ``int_0^1 t^n w(t) dt`` for several ``n`` at once.

    Raises
    ------
    QuadratureFailure
        If the panel budget or the truncation range is exhausted.
    """
    ns = np.array(list(ns), dtype=float)
    if np.any(ns < 0):
        raise DomainError("moment order must be nonnegative")
    beta = ns[:, None] + 1.0 - w.rate[None, :]
    gam = np.array([math.factorial(int(k)) for k in w.power], dtype=float)[None, :]
    abs_integral = (np.abs(w.amp)[None, :] * gam / beta ** (w.power[None, :] + 1)).sum(axis=1)
    atol = float(PANEL_ATOL_SCALE * abs_integral.min())

    def integrand(x):
        return np.stack([w.values_x_stable(x, shift=n + 1.0) for n in ns])

    X = 40.0 / float(beta.min())
    total, err = _quad.integrate(integrand, _breakpoints(w, 0.0, X), rtol=rtol, atol=atol)
    while np.any(_tail_bounds(w, ns, X) > TAIL_RTOL * np.maximum(np.abs(total), atol)):
        if X > 1e5:
            raise QuadratureFailure("integrand tail does not decay within the truncation range")
        extra, extra_err = _quad.integrate(integrand, _breakpoints(w, X, 2 * X), rtol=rtol, atol=atol)
        total, err = total + extra, err + extra_err
        X *= 2
    reports = []
    for n, value, e in zip(ns, total, err):
        n = int(n)
        claimed = float(w.q(float(n)) / w.roots.evaluate(float(n)).real)
        rel = abs(value - claimed) / max(abs(claimed), 1e-300)
        reports.append(MomentReport(n, claimed, float(value), rel, float(e)))
    return reports


def moment(w: WeightFunction, n: int, rtol: float = PANEL_RTOL) -> MomentReport:
    """The ``n``-th moment of ``w`` compared with ``q(n)/p(n)``."""
    return moments(w, [n], rtol)[0]


def dominant_pairs(w: WeightFunction) -> list[PairBlock]:
    """Conjugate pairs sharing the largest real part among all poles."""
    a = w.max_real_part
    return [b for b in w.pair_blocks if abs(b.x - a) <= DOMINANCE_RTOL * (1 + abs(a))]


def witness_x(pair: PairBlock, ks: Iterable[int]) -> np.ndarray:
    """Points ``x_k`` where the leading oscillation of ``pair`` has phase ``(2k+1)pi``."""
    return np.array([((2 * k + 1) * math.pi - pair.phases[-1]) / pair.y for k in ks])


def _x_cap(a: float) -> float:
    s = a + 1.0
    return MAX_X if abs(s) < 1e-12 else min(MAX_X, MAX_EXPONENT / abs(s))


def _dominance_onset(w: WeightFunction) -> float:
    """An ``x`` beyond which the top-power dominant terms exceed twice the rest."""
    a = w.max_real_part
    dom = np.abs(w.rate - 1.0 - a) <= DOMINANCE_RTOL * (1 + abs(a))
    top = dom & (w.power == w.power[dom].max())
    lead_amp = np.abs(w.amp[top]).max()
    lead_pow = w.power[top].max()
    rest = ~top
    if not rest.any():
        return 0.0
    gap = a + 1.0 - w.rate[rest]
    amps = np.abs(w.amp[rest])
    pows = w.power[rest]

    def holds(x):
        other = (amps * x ** pows * np.exp(-gap * x)).sum()
        return lead_amp * x ** lead_pow >= 2.0 * other

    x = 1.0
    while x < MAX_X and not (holds(x) and holds(2 * x) and holds(4 * x)):
        x *= 1.25
    return x


def scan_window(w: WeightFunction) -> float:
    """Upper end of the ``x`` range covered by :func:`sign_scan`."""
    a = w.max_real_part
    ys = [b.y for b in w.pair_blocks]
    window = 20.0
    if ys:
        window = max(window, 12.0 * math.pi / min(ys))
    onset = _dominance_onset(w)
    dom = dominant_pairs(w)
    if dom:
        onset += 4.0 * math.pi / min(b.y for b in dom)
    return min(max(window, onset), _x_cap(a))


def witness_candidates(w: WeightFunction, count: int = 10) -> np.ndarray:
    """Oscillation-phase candidates for negativity of each dominant pair.

    Includes ``k = 1..count`` and ``count`` further values starting where the
    dominant pair has overtaken the remaining terms.
    """
    cap = _x_cap(w.max_real_part)
    onset = _dominance_onset(w)
    xs = []
    for pair in dominant_pairs(w):
        xs.append(witness_x(pair, range(1, count + 1)))
        k0 = max(1, int(math.ceil((onset * pair.y + pair.phases[-1] - math.pi) / (2 * math.pi))))
        xs.append(witness_x(pair, range(k0, k0 + count)))
    if not xs:
        return np.empty(0)
    x = np.concatenate(xs)
    return x[(x > 0) & (x <= cap)]


def sign_scan(w: WeightFunction, grid_size: int = 4000, candidate_ts: Sequence[float] = ()) -> SignCertificate:
    """Search ``(0, 1]`` for a point where ``w`` is negative."""
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    a = w.max_real_part
    shift = a + 1.0
    X = scan_window(w)
    fmax = float(w.freq.max()) if len(w.freq) else 0.0
    n = max(grid_size, int(math.ceil(SAMPLES_PER_PERIOD * X * fmax / (2 * math.pi))))
    grid = np.linspace(0.0, X, min(n, MAX_GRID))
    extra = [float(v) for v in _to_x(np.asarray(candidate_ts, dtype=float))] if len(candidate_ts) else []
    xs = np.concatenate([grid, np.asarray(extra, dtype=float), witness_candidates(w)])
    xs = xs[xs <= _x_cap(a)]
    s = w.values_x(xs, shift=shift)
    abs_tol = NEGATIVITY_RTOL * (1.0 + float(np.max(np.abs(s))))
    smin = float(s.min())
    # ties go to the smaller t, i.e. the larger x
    idx = int(np.flatnonzero(s == smin)[np.argmax(xs[s == smin])])
    t0 = float(math.exp(-xs[idx]))
    raw = eval_weight(w, t0)
    if smin < -abs_tol and raw < 0:
        return SignCertificate(NEGATIVITY_WITNESS, t0, raw, len(xs), smin, t0, shift, abs_tol)
    return SignCertificate(POSITIVITY_MARGIN, None, raw, len(xs), smin, t0, shift, abs_tol)


def shift_rescale(w: WeightFunction, c: float, d: float = 1.0) -> WeightFunction:
    """Weight of ``q(z/d - c) / p(z/d - c)``, whose poles are ``d * (alpha + c)``.

    With ``d == 1`` the result is ``t**(-c) * w(t)``: poles move by ``c`` and the
    partial fraction coefficients are reused unchanged.  Other ``d`` rebuild the
    weight from the rescaled roots.

    Raises
    ------
    UnstableShift
        If a moved pole is not in the open left half-plane.
    """
    if not d > 0:
        raise DomainError("rescale factor must be positive")
    moved = w.roots.map(lambda z: d * (z + c))
    if not is_stable(moved):
        raise UnstableShift(f"shift by {c} and rescale by {d} leaves the left half-plane")
    moved = RootMultiset(moved.entries, w.roots.leading * d ** (-w.roots.degree))
    q = w.q.compose_affine(1.0 / d, -c)
    if d == 1.0:
        terms = tuple((z + c, j, a) for z, j, a in w.pfd.terms)
        return _from_table(q, moved, PfdTable(terms, w.pfd.source_degree_p, w.pfd.source_degree_q))
    return build_weight(q, moved)
