"""Deciding whether ``q(n)/p(n)`` is a Hausdorff moment sequence.

Exact rules cover the shapes with a closed-form classification (reducible
``p``, degrees 3 and 4, the degree-5 vertical line, strict dominance of a
non-real root, divided-difference positivity, and the sign of ``q`` at the
largest real root).  Everything else falls back to a sign scan of the weight
backed by a moment audit and a finite-difference test.  Every rule outcome is
cross-checked against the sign scan; a disagreement raises instead of picking a
side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .divdiff import sufficient_condition
from .errors import (
    CommonZero,
    DegreeViolation,
    DomainError,
    Overflow,
    PreconditionViolated,
    RuleAuditMismatch,
)
from .polycore import RealPolynomial, RootMultiset, exact_value, find_roots, is_stable
from .weight import NEGATIVITY_WITNESS, SignCertificate, WeightFunction, build_weight, moments, sign_scan

MOMENT = "Moment"
NOT_MOMENT = "NotMoment"
UNDETERMINED = "Undetermined"

VIOLATED = "Violated"
INCONCLUSIVE = "Inconclusive"
SUFFICIENT_DEG1 = "SufficientDeg1"

BOUNDARY_RTOL = 1e-9
INTEGER_RTOL = 1e-9
UNDETERMINED_RTOL = 1e-9
FD_RTOL = 1e-10
CANCELLATION_LIMIT = 1e8
ROUNDING_SLACK = 4 * 2.0 ** -52
MAX_BINOMIAL_ORDER = 60
COMMON_ZERO_RTOL = 1e-10


@dataclass(frozen=True)
class Budget:
    grid_size: int = 4000
    fd_order: int = 25
    fd_offset: int = 25
    moment_orders: int = 21
    moment_rtol: float = 1e-8


@dataclass(frozen=True)
class FiniteViolation:
    m: int
    n: int
    value: float


@dataclass(frozen=True)
class FiniteTestResult:
    passed: bool
    violation: Optional[FiniteViolation]
    max_order: int
    max_offset: int
    exact: bool


@dataclass(frozen=True)
class RootCertificate:
    """A root of ``p`` outside the open left half-plane."""

    root: complex


@dataclass(frozen=True)
class Verdict:
    decision: str
    rule: str
    certificate: object = None
    boundary_flag: bool = False
    scan: Optional[SignCertificate] = None
    finite_test: Optional[FiniteTestResult] = None
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# finite differences


def _values(x: Union[Callable[[int], object], Sequence], count: int) -> list:
    if callable(x):
        return [x(n) for n in range(count)]
    if len(x) < count:
        raise DomainError(f"need {count} sequence terms, got {len(x)}")
    return list(x[:count])


def hausdorff_finite_test(x, max_order: int, max_offset: int, rtol: float = FD_RTOL) -> FiniteTestResult:
    """Check ``Delta^m x_n >= -rtol |x_n|`` for ``m <= max_order``, ``n <= max_offset``.

    ``Delta^m x_n = sum_j (-1)^j C(m, j) x_{n+j}``.  ``m = 0`` is included, so
    negative terms fail.  Integer and ``Fraction`` input is differenced exactly.
    Float input uses the iterated-difference recurrence; an entry whose
    cancellation exceeds ``1e8`` is recomputed from the binomial sum with
    ``math.fsum``, and the tolerance widens by the amplified rounding of the
    terms themselves, ``4 eps 2^m max|x_{n+j}|``.  The first violation in
    order of ``(m, n)`` is reported.

    Raises
    ------
    Overflow
        If the binomial recomputation is needed for ``m > 60``.
    DomainError
        If a term is not finite.
    """
    vals = _values(x, max_order + max_offset + 1)
    exact = all(isinstance(v, (int, Fraction)) for v in vals)
    if exact:
        vals = [Fraction(v) for v in vals]
        tol = Fraction(rtol)
    else:
        vals = [float(v) for v in vals]
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("sequence terms must be finite")
        tol = rtol
    row = list(vals)
    for m in range(max_order + 1):
        for n in range(max_offset + 1):
            d = row[n]
            slack = 0.0
            if not exact:
                bound = 2.0 ** m * max(abs(v) for v in vals[n:n + m + 1])
                if bound > CANCELLATION_LIMIT * abs(d):
                    if m > MAX_BINOMIAL_ORDER:
                        raise Overflow(f"binomial recomputation needed at order {m} > {MAX_BINOMIAL_ORDER}")
                    d = math.fsum((-1) ** j * math.comb(m, j) * vals[n + j] for j in range(m + 1))
                # rounding already present in the terms is amplified by up to 2^m
                slack = ROUNDING_SLACK * bound
            if d < -tol * abs(vals[n]) - slack:
                return FiniteTestResult(False, FiniteViolation(m, n, float(d)), max_order, max_offset, exact)
        row = [row[i] - row[i + 1] for i in range(len(row) - 1)]
    return FiniteTestResult(True, None, max_order, max_offset, exact)


def exact_sequence(q: RealPolynomial, p: RealPolynomial) -> Callable[[int], Fraction]:
    """``n -> q(n)/p(n)`` in rational arithmetic on the binary values of the coefficients."""

    def term(n: int) -> Fraction:
        den = exact_value(p.coeffs, n)
        if den == 0:
            raise DomainError(f"p vanishes at n = {n}")
        return exact_value(q.coeffs, n) / den

    return term


# ---------------------------------------------------------------------------
# exact rules


@dataclass(frozen=True)
class NecessaryResult:
    status: str
    pair: Optional[tuple[float, float, int]] = None


def _strictly_above(a: float, b: float) -> bool:
    return a - b > BOUNDARY_RTOL * (1 + abs(a))


def necessary_condition(roots: RootMultiset) -> NecessaryResult:
    """``Violated`` when a conjugate pair strictly dominates every other root.

    Strict dominance forces the weight to oscillate in sign near ``t = 0``.
    Ties are ``Inconclusive``.
    """
    pairs = roots.conjugate_pairs
    for x1, y1, m1 in pairs:
        others = [r for r, _ in roots.real_roots] + [x for x, y, _ in pairs if (x, y) != (x1, y1)]
        if all(_strictly_above(x1, o) for o in others):
            return NecessaryResult(VIOLATED, (x1, y1, m1))
    return NecessaryResult(INCONCLUSIVE)


def g_function(u: float, x):
    """``u^2 - 1 - u^2 cos(x) + cos(u x)``; its sign is that of the vertical-line weight."""
    if not u > 1:
        raise DomainError("u must exceed 1")
    x = np.asarray(x, dtype=float)
    out = u * u - 1.0 - u * u * np.cos(x) + np.cos(u * x)
    return float(out) if out.ndim == 0 else out


def rational_necessary_q(q: RealPolynomial, roots: RootMultiset) -> str:
    """Sign rule at the largest root when every root of ``p`` is real and negative.

    ``q(alpha_1) <= 0`` rules the sequence out.  A degree-1 ``q`` with positive
    leading coefficient and ``q(alpha_1) > 0`` makes it a moment sequence: the
    sequence splits as a positive constant (point mass at 1) plus a positive
    multiple of ``1/(n - alpha_1)``, times moment sequences ``1/(n - alpha_i)``.
    """
    if roots.conjugate_pairs or any(not r < 0 for r, _ in roots.real_roots):
        raise PreconditionViolated("needs negative real roots only")
    if q.degree >= roots.degree:
        raise PreconditionViolated("needs deg q < deg p")
    for r, _ in roots.real_roots:
        if abs(q(r)) <= COMMON_ZERO_RTOL * float(q.eval_scale(r)):
            raise PreconditionViolated(f"q and p share the root {r}")
    a1 = max(r for r, _ in roots.real_roots)
    value = q(a1) / roots.leading
    if value <= 0:
        return VIOLATED
    if q.degree == 1 and q.leading / roots.leading > 0:
        return SUFFICIENT_DEG1
    return INCONCLUSIVE


def _weight_one(roots: RootMultiset) -> WeightFunction:
    return build_weight(RealPolynomial([1.0]), roots)


def _band(cert: SignCertificate) -> float:
    # abs_tol = 1e-11 (1 + max|w|); the undetermined band is 1e-9 (1 + max|w|)
    return cert.abs_tol * (UNDETERMINED_RTOL / 1e-11)


def _audit(w: WeightFunction, decision: str, rule: str, budget: Budget,
           candidate_ts: Sequence[float] = ()) -> SignCertificate:
    cert = sign_scan(w, budget.grid_size, candidate_ts)
    negative = cert.kind == NEGATIVITY_WITNESS
    if decision == MOMENT and negative and cert.min_value < -_band(cert):
        raise RuleAuditMismatch(f"rule {rule} says Moment but w({cert.witness_t:.6g}) = {cert.witness_value:.6g}")
    if decision == NOT_MOMENT and not negative:
        raise RuleAuditMismatch(f"rule {rule} says NotMoment but the scan found no negative value")
    return cert


def _rule_verdict(w: WeightFunction, decision: str, rule: str, budget: Budget, boundary: bool = False,
                  candidate_ts: Sequence[float] = (), details: Optional[dict] = None) -> Verdict:
    cert = _audit(w, decision, rule, budget, candidate_ts)
    return Verdict(decision, rule, cert if decision == NOT_MOMENT else rule, boundary, cert,
                   details=details or {})


def _on_boundary(a: float, r: float) -> bool:
    return abs(a - r) <= BOUNDARY_RTOL * (1 + abs(r))


def classify_degree3(r: float, alpha: complex, budget: Optional[Budget] = None) -> Verdict:
    """``1/((z - r)(z - alpha)(z - conj alpha))`` is a moment sequence iff ``Re alpha <= r``."""
    alpha = complex(alpha)
    if not (r < 0 and alpha.real < 0 and alpha.imag != 0):
        raise PreconditionViolated("needs r < 0 and a non-real alpha with negative real part")
    budget = budget or Budget()
    roots = RootMultiset(((r, 1), (alpha, 1), (alpha.conjugate(), 1)))
    boundary = _on_boundary(alpha.real, r)
    decision = MOMENT if boundary or alpha.real <= r else NOT_MOMENT
    return _rule_verdict(_weight_one(roots), decision, "degree3", budget, boundary)


def classify_degree4(roots: RootMultiset, budget: Optional[Budget] = None) -> Verdict:
    """Degree 4 with a non-real root: Moment iff ``Re alpha <= r`` for some real root ``r``.

    Without real roots the sequence is never a moment sequence: two pairs on one
    vertical line give an oscillating weight, otherwise one pair dominates.
    """
    if roots.degree != 4 or not is_stable(roots) or not roots.conjugate_pairs:
        raise PreconditionViolated("needs a stable degree-4 root set with a non-real root")
    budget = budget or Budget()
    w = _weight_one(roots)
    reals = [r for r, _ in roots.real_roots]
    if not reals:
        ys = sorted(y for _, y, _ in roots.conjugate_pairs)
        # the weight is negative where y_1 log(1/t) = 3 pi / 2
        return _rule_verdict(w, NOT_MOMENT, "degree4", budget, candidate_ts=[math.exp(-1.5 * math.pi / ys[0])])
    a = roots.conjugate_pairs[0][0]
    top = max(reals)
    boundary = _on_boundary(a, top)
    decision = MOMENT if boundary or a <= top else NOT_MOMENT
    return _rule_verdict(w, decision, "degree4", budget, boundary)


def classify_degree5_vertical(r: float, y1: float, y2: float, budget: Optional[Budget] = None) -> Verdict:
    """Roots ``r, r +- i y1, r +- i y2``: a moment sequence iff ``y2/y1`` is an integer ``>= 2``."""
    if not (r < 0 and 0 < y1 <= y2):
        raise PreconditionViolated("needs r < 0 and 0 < y1 <= y2")
    budget = budget or Budget()
    u = y2 / y1
    if abs(u - 1.0) <= INTEGER_RTOL * u:
        roots = RootMultiset(((r, 1), (complex(r, y1), 2), (complex(r, -y1), 2)))
        ks = range(1, 11)
        ts = [math.exp(-(4 * k + 1) * math.pi / (2 * y1)) for k in ks]
        return _rule_verdict(_weight_one(roots), NOT_MOMENT, "degree5_vertical", budget,
                             candidate_ts=ts, details={"u": 1.0, "witness_family": ts})
    roots = RootMultiset(((r, 1), (complex(r, y1), 1), (complex(r, -y1), 1),
                          (complex(r, y2), 1), (complex(r, -y2), 1)))
    w = _weight_one(roots)
    if abs(u - round(u)) <= INTEGER_RTOL * u:
        return _rule_verdict(w, MOMENT, "degree5_vertical", budget, details={"u": u})
    g2pi = g_function(u, 2 * math.pi)
    return _rule_verdict(w, NOT_MOMENT, "degree5_vertical", budget,
                         candidate_ts=[math.exp(-2 * math.pi / y1)], details={"u": u, "g(2pi)": g2pi})


# ---------------------------------------------------------------------------
# the decision cascade


def _divide_out(q: RealPolynomial, factor: RealPolynomial) -> RealPolynomial:
    quot, rem = np.polynomial.polynomial.polydiv(np.array(q.coeffs), np.array(factor.coeffs))
    if np.max(np.abs(rem), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(q.coeffs))):
        raise CommonZero("common factor does not divide q cleanly")
    return RealPolynomial(quot)


def cancel_common(q: RealPolynomial, roots: RootMultiset) -> tuple[RealPolynomial, RootMultiset]:
    """Remove roots of ``p`` at which ``q`` vanishes, from both sides."""
    entries = dict(roots.entries)
    changed = True
    while changed and not q.is_zero():
        changed = False
        for z, m in list(entries.items()):
            if z.imag < 0 or m == 0:
                continue
            if abs(q(z)) <= COMMON_ZERO_RTOL * float(q.eval_scale(z)):
                if z.imag == 0:
                    factor = RealPolynomial([-z.real, 1.0])
                else:
                    factor = RealPolynomial([abs(z) ** 2, -2 * z.real, 1.0])
                    entries[z.conjugate()] -= 1
                q = _divide_out(q, factor)
                entries[z] -= 1
                changed = True
                break
    left = tuple((z, m) for z, m in entries.items() if m > 0)
    return q, RootMultiset(left, roots.leading)


def _vertical5(roots: RootMultiset) -> Optional[tuple[float, float, float]]:
    reals = roots.real_roots
    if roots.degree != 5 or len(reals) != 1 or reals[0][1] != 1:
        return None
    r = reals[0][0]
    pairs = roots.conjugate_pairs
    if not all(_on_boundary(x, r) for x, _, _ in pairs):
        return None
    if len(pairs) == 1 and pairs[0][2] == 2:
        return r, pairs[0][1], pairs[0][1]
    if len(pairs) == 2 and all(m == 1 for _, _, m in pairs):
        y1, y2 = sorted(y for _, y, _ in pairs)
        return r, y1, y2
    return None


def _fd_audit(seq, budget: Budget) -> FiniteTestResult:
    return hausdorff_finite_test(seq, budget.fd_order, budget.fd_offset)


def _confirm_moment(verdict: Verdict, seq, budget: Budget) -> Verdict:
    fd = _fd_audit(seq, budget)
    if not fd.passed:
        v = fd.violation
        raise RuleAuditMismatch(f"rule {verdict.rule} says Moment but Delta^{v.m} x_{v.n} = {v.value:.3e}")
    return Verdict(verdict.decision, verdict.rule, verdict.certificate, verdict.boundary_flag,
                   verdict.scan, fd, verdict.details)


def decide(q: RealPolynomial, p: RealPolynomial, budget: Optional[Budget] = None) -> Verdict:
    """Classify the sequence ``q(n)/p(n)``, finding the roots of ``p`` first."""
    if p.is_zero() or p.degree < 1:
        raise DegreeViolation("p must have degree at least 1")
    if p.leading < 0:
        q, p = q.scale(-1.0), p.scale(-1.0)
    return decide_roots(q, find_roots(p), budget, sequence=exact_sequence(q, p))


def decide_roots(q: RealPolynomial, roots: RootMultiset, budget: Optional[Budget] = None,
                 sequence: Optional[Callable[[int], Fraction]] = None) -> Verdict:
    """Classify ``q(n)/p(n)`` for ``p`` given by its roots and leading coefficient."""
    budget = budget or Budget()
    if q.degree >= roots.degree:
        raise DegreeViolation(f"deg q = {q.degree} must be below deg p = {roots.degree}")
    if roots.leading < 0:
        q, roots = q.scale(-1.0), RootMultiset(roots.entries, -roots.leading)
    seq = sequence or exact_sequence(q, roots.to_polynomial())
    if q.is_zero():
        return Verdict(MOMENT, "zero_sequence", "zero_sequence")

    if not is_stable(roots):
        bad = next(z for z, _ in roots.entries if not z.real < 0)
        try:
            fd = _fd_audit(seq, budget)
        except DomainError:
            fd = None
        cert = fd if fd is not None and not fd.passed else RootCertificate(bad)
        return Verdict(NOT_MOMENT, "unstable", cert, finite_test=fd)

    q, roots = cancel_common(q, roots)
    head = hausdorff_finite_test(seq, 0, budget.fd_order + budget.fd_offset)
    if not head.passed:
        return Verdict(NOT_MOMENT, "negative_sequence", head, finite_test=head)

    w = build_weight(q, roots)
    pairs = roots.conjugate_pairs
    reals = roots.real_roots
    constant = q.degree == 0

    verdict = None
    if constant and not pairs:
        verdict = _rule_verdict(w, MOMENT, "reducible", budget)
    elif constant and roots.degree == 3 and len(pairs) == 1 and pairs[0][2] == 1:
        x, y, _ = pairs[0]
        verdict = classify_degree3(reals[0][0], complex(x, y), budget)
    elif constant and roots.degree == 4 and pairs:
        verdict = classify_degree4(RootMultiset(roots.entries), budget)
    elif constant and _vertical5(roots) is not None:
        verdict = classify_degree5_vertical(*_vertical5(roots), budget)
    if verdict is None and pairs and necessary_condition(roots).status == VIOLATED:
        verdict = _rule_verdict(w, NOT_MOMENT, "necessary_condition", budget)
    if verdict is None and not pairs:
        if all(m == 1 for _, m in reals) and sufficient_condition(q, roots).holds:
            verdict = _rule_verdict(w, MOMENT, "sufficient_divdiff", budget,
                                    details={"divided_differences": sufficient_condition(q, roots).values})
        else:
            status = rational_necessary_q(q, roots)
            if status == VIOLATED:
                verdict = _rule_verdict(w, NOT_MOMENT, "q_at_largest_root", budget)
            elif status == SUFFICIENT_DEG1:
                verdict = _rule_verdict(w, MOMENT, "q_monic_deg1", budget)
    if verdict is not None:
        if verdict.decision == MOMENT:
            verdict = _confirm_moment(verdict, seq, budget)
        return verdict
    return _numeric(w, seq, budget)


def _numeric(w: WeightFunction, seq, budget: Budget) -> Verdict:
    cert = sign_scan(w, budget.grid_size)
    margin = {"min_value": cert.min_value, "band": _band(cert)}
    if cert.kind == NEGATIVITY_WITNESS:
        if cert.min_value < -_band(cert):
            return Verdict(NOT_MOMENT, "numeric_scan", cert, scan=cert, details=margin)
        return Verdict(UNDETERMINED, "numeric_scan", None, scan=cert, details=margin)
    reports = moments(w, range(budget.moment_orders))
    worst = max(r.rel_error for r in reports)
    margin["moment_rel_error"] = worst
    fd = _fd_audit(seq, budget)
    if not fd.passed:
        return Verdict(NOT_MOMENT, "finite_difference_audit", fd, scan=cert, finite_test=fd, details=margin)
    if worst > budget.moment_rtol:
        return Verdict(UNDETERMINED, "numeric_scan", None, scan=cert, finite_test=fd, details=margin)
    return Verdict(MOMENT, "numeric_scan", cert, scan=cert, finite_test=fd, details=margin)
