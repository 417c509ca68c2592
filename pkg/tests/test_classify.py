import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from families import dominant_pair_roots, stable_family
from momentlab.classify import (
    INCONCLUSIVE,
    MOMENT,
    NOT_MOMENT,
    SUFFICIENT_DEG1,
    VIOLATED,
    Budget,
    FiniteTestResult,
    RootCertificate,
    cancel_common,
    classify_degree3,
    classify_degree4,
    classify_degree5_vertical,
    decide,
    decide_roots,
    exact_sequence,
    g_function,
    hausdorff_finite_test,
    necessary_condition,
    rational_necessary_q,
)
from momentlab.errors import DomainError, Overflow, PreconditionViolated
from momentlab.polycore import RealPolynomial, RootMultiset, faulhaber_partial_sum, find_roots
from momentlab.weight import NEGATIVITY_WITNESS, SignCertificate, build_weight, eval_weight, sign_scan

ONE = RealPolynomial([1.0])


def pair(x, y, m=1):
    return [(complex(x, y), m), (complex(x, -y), m)]


def roots_of(*groups):
    out = []
    for g in groups:
        out += g if isinstance(g, list) else [g]
    return RootMultiset(tuple(out))


def delta_exact(x, m, n):
    return sum((-1) ** j * math.comb(m, j) * x(n + j) for j in range(m + 1))


def assert_sound(verdict, q, roots):
    """A NotMoment certificate must re-validate."""
    cert = verdict.certificate
    if isinstance(cert, SignCertificate):
        w = build_weight(*cancel_common(q, roots))
        assert cert.kind == NEGATIVITY_WITNESS
        assert eval_weight(w, cert.witness_t) < 0
    elif isinstance(cert, FiniteTestResult):
        v = cert.violation
        assert delta_exact(exact_sequence(q, roots.to_polynomial()), v.m, v.n) < 0
    else:
        assert isinstance(cert, RootCertificate) and cert.root.real >= 0


class TestFiniteTest:
    def test_point_mass(self):
        res = hausdorff_finite_test(lambda n: Fraction(1, 2**n), 30, 30)
        assert res.passed and res.exact and res.violation is None

    def test_point_mass_float(self):
        res = hausdorff_finite_test(lambda n: 0.5**n, 30, 30)
        assert res.passed and not res.exact

    def test_alternating(self):
        res = hausdorff_finite_test(lambda n: (-1) ** n, 5, 5)
        assert not res.passed
        # x_1 = -1 is already negative; the first difference x_1 - x_2 = -2 fails too
        assert (res.violation.m, res.violation.n) == (0, 1)
        assert delta_exact(lambda n: (-1) ** n, 1, 1) == -2

    def test_first_difference_failure(self):
        res = hausdorff_finite_test([1.0, 0.2, 0.3, 0.4], 1, 2)
        assert (res.violation.m, res.violation.n) == (1, 1)
        assert res.violation.value == pytest.approx(-0.1)

    def test_hilbert_sequence(self):
        assert hausdorff_finite_test(lambda n: Fraction(1, n + 1), 25, 25).passed

    def test_float_matches_exact(self):
        x = exact_sequence(ONE, RealPolynomial.from_roots([-1.0, -2.5, -0.5]))
        exact = hausdorff_finite_test(x, 25, 25)
        approx = hausdorff_finite_test(lambda n: float(x(n)), 25, 25)
        assert exact.passed and approx.passed

    def test_overflow_guard(self):
        # nearly constant floats force the binomial recomputation
        with pytest.raises(Overflow):
            hausdorff_finite_test(lambda n: 1.0 + 1e-12 * n, 61, 0)

    def test_short_sequence(self):
        with pytest.raises(DomainError):
            hausdorff_finite_test([1.0, 0.5], 3, 3)

    def test_faulhaber_reciprocal_fails_by_order_30(self):
        x = exact_sequence(ONE, faulhaber_partial_sum(1, 6))
        res = hausdorff_finite_test(x, 30, 30)
        assert not res.passed


class TestNecessaryCondition:
    def test_dominant_pair(self):
        res = necessary_condition(roots_of((-1.0, 1), pair(-0.5, 1.0)))
        assert res.status == VIOLATED and res.pair == (-0.5, 1.0, 1)

    def test_dominant_real(self):
        assert necessary_condition(roots_of((-1.0, 1), pair(-2.0, 1.0))).status == INCONCLUSIVE

    def test_tie_is_inconclusive(self):
        assert necessary_condition(roots_of((-1.0, 1), pair(-1.0, 2.0))).status == INCONCLUSIVE

    def test_two_pairs_tied(self):
        assert necessary_condition(roots_of(pair(-1.0, 1.0), pair(-1.0, 2.0))).status == INCONCLUSIVE

    def test_faulhaber_roots(self):
        res = necessary_condition(find_roots(faulhaber_partial_sum(1, 6)))
        assert res.status == VIOLATED
        assert_allclose(res.pair[:2], (-0.62, 0.16), atol=0.01)

    def test_violations_confirmed_by_scan(self):
        rng = np.random.default_rng(61)
        for _ in range(40):
            roots = dominant_pair_roots(rng)
            assert necessary_condition(roots).status == VIOLATED
            assert sign_scan(build_weight(ONE, roots), 4000).kind == NEGATIVITY_WITNESS


class TestDegree3:
    def test_inside(self):
        v = classify_degree3(-1.0, -2 + 1j)
        assert v.decision == MOMENT and not v.boundary_flag

    def test_outside(self):
        v = classify_degree3(-1.0, -0.5 + 1j)
        assert v.decision == NOT_MOMENT
        assert eval_weight(build_weight(ONE, roots_of((-1.0, 1), pair(-0.5, 1.0))), v.certificate.witness_t) < 0

    def test_boundary(self):
        v = classify_degree3(-1.0, -1 + 1j)
        assert v.decision == MOMENT and v.boundary_flag

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            classify_degree3(-1.0, -2.0)


class TestDegree4:
    @pytest.mark.parametrize(
        "roots, decision",
        [
            (roots_of((-1.0, 1), (-3.0, 1), pair(-2.0, 1.0)), MOMENT),
            (roots_of(pair(-1.0, 1.0), pair(-1.0, 2.0)), NOT_MOMENT),
            (roots_of((-0.5, 1), (-0.7, 1), pair(-0.6, 1.0)), MOMENT),
            (roots_of((-1.0, 1), (-3.0, 1), pair(-0.5, 1.0)), NOT_MOMENT),
            (roots_of(pair(-1.0, 1.0), pair(-2.0, 0.5)), NOT_MOMENT),
        ],
    )
    def test_rule(self, roots, decision):
        v = classify_degree4(roots)
        assert v.decision == decision
        assert (v.scan.kind == NEGATIVITY_WITNESS) == (decision == NOT_MOMENT)

    def test_vertical_witness_location(self):
        v = classify_degree4(roots_of(pair(-1.0, 1.0), pair(-1.0, 2.0)))
        assert v.certificate.witness_value < 0

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            classify_degree4(roots_of((-1.0, 1), (-2.0, 1), (-3.0, 1), (-4.0, 1)))


class TestDegree5Vertical:
    @pytest.mark.parametrize("u, decision", [(1.0, NOT_MOMENT), (1.5, NOT_MOMENT), (2.0, MOMENT),
                                             (2.5, NOT_MOMENT), (3.0, MOMENT), (4.0, MOMENT)])
    def test_verdicts(self, u, decision):
        v = classify_degree5_vertical(-1.0, 1.0, u)
        assert v.decision == decision

    def test_g_certificate(self):
        v = classify_degree5_vertical(-1.0, 1.0, 1.5)
        assert v.details["g(2pi)"] == pytest.approx(-2.0)

    def test_double_pair_family(self):
        v = classify_degree5_vertical(-1.0, 1.0, 1.0)
        ts = v.details["witness_family"]
        assert_allclose(ts[0], math.exp(-5 * math.pi / 2))
        assert v.certificate.witness_value < 0

    def test_integer_recognition(self):
        assert classify_degree5_vertical(-1.0, 0.7, 0.7 * 3 * (1 + 1e-12)).decision == MOMENT

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            classify_degree5_vertical(-1.0, 2.0, 1.0)


class TestGFunction:
    @pytest.mark.parametrize("u, x, expected", [(2.0, 0.0, 0.0), (2.0, 2 * math.pi, 0.0), (1.5, 2 * math.pi, -2.0)])
    def test_values(self, u, x, expected):
        assert g_function(u, x) == pytest.approx(expected, abs=1e-12)

    def test_integer_u_nonnegative(self):
        x = np.linspace(0, 20, 2001)
        for u in (2.0, 3.0, 5.0):
            assert np.all(g_function(u, x) >= -1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            g_function(1.0, 0.5)


class TestRationalNecessaryQ:
    def test_sufficient_deg1(self):
        # q(x) = x - beta with beta = -3 below the largest root -1
        assert rational_necessary_q(RealPolynomial([3.0, 1.0]), roots_of((-1.0, 1), (-2.0, 1))) == SUFFICIENT_DEG1

    def test_violated(self):
        assert rational_necessary_q(RealPolynomial([0.5, 1.0]), roots_of((-1.0, 1), (-2.0, 1))) == VIOLATED

    def test_constant(self):
        assert rational_necessary_q(ONE, roots_of((-1.0, 1), (-2.0, 1))) == INCONCLUSIVE

    def test_scaling_invariant(self):
        q = RealPolynomial([6.0, 2.0])
        assert rational_necessary_q(q, roots_of((-1.0, 1), (-2.0, 1))) == SUFFICIENT_DEG1

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            rational_necessary_q(ONE, roots_of(pair(-1.0, 1.0)))


class TestDecide:
    def test_boundary_degree3(self):
        v = decide(ONE, RealPolynomial.from_roots([-1, -1 + 2j, -1 - 2j]))
        assert v.decision == MOMENT and v.boundary_flag and v.rule == "degree3"

    def test_faulhaber(self):
        v = decide(ONE, faulhaber_partial_sum(1, 6))
        assert v.decision == NOT_MOMENT and v.rule == "necessary_condition"
        assert_sound(v, ONE, find_roots(faulhaber_partial_sum(1, 6)))

    def test_reducible(self):
        v = decide(ONE, RealPolynomial.from_roots([-1, -2]))
        assert v.decision == MOMENT and v.rule == "reducible"

    def test_unstable(self):
        v = decide(ONE, RealPolynomial.from_roots([1.0, -2.0]))
        assert v.decision == NOT_MOMENT and v.rule == "unstable"

    def test_unstable_with_sequence_violation(self):
        # 1/((n - 0.5)(n + 2)) is negative at n = 0
        v = decide(ONE, RealPolynomial.from_roots([0.5, -2.0]))
        assert isinstance(v.certificate, FiniteTestResult) and v.certificate.violation.n == 0

    def test_negative_sequence(self):
        v = decide(RealPolynomial([-1.0]), RealPolynomial.from_roots([-1, -2]))
        assert v.decision == NOT_MOMENT and v.rule == "negative_sequence"

    def test_common_factor_cancelled(self):
        v = decide(RealPolynomial([1.0, 1.0]), RealPolynomial.from_roots([-1, -2, -3]))
        assert v.decision == MOMENT

    def test_sign_of_p_normalized(self):
        v = decide(RealPolynomial([-1.0]), RealPolynomial.from_roots([-1, -2], leading=-1.0))
        assert v.decision == MOMENT

    def test_sufficient_divdiff(self):
        b1, b2, p1, p2 = 2.0, 3.0, 1.0, 3.5
        q = RealPolynomial([b1 * b2 - p1 * p2, b1 + b2 - p1 - p2])
        v = decide(q, RealPolynomial.from_roots([-p1, -p2]))
        assert v.decision == MOMENT and v.rule == "sufficient_divdiff"

    def test_q_at_largest_root(self):
        v = decide(RealPolynomial([-0.5, 1.0, 1.0]), RealPolynomial.from_roots([-1, -2, -3]))
        assert v.decision == NOT_MOMENT

    def test_numeric_fallback_moment(self):
        roots = roots_of((-0.5, 1), pair(-1.5, 1.0), pair(-2.5, 0.5))
        v = decide_roots(ONE, roots)
        assert v.decision == MOMENT and v.rule == "numeric_scan"
        assert v.finite_test.passed

    def test_numeric_fallback_not_moment(self):
        # tie between the real root and the pair real part; higher multiplicity of the pair wins
        roots = roots_of((-1.0, 1), pair(-1.0, 1.0, 2), (-2.0, 1))
        v = decide_roots(ONE, roots)
        assert v.decision == NOT_MOMENT
        assert_sound(v, ONE, roots)

    def test_zero_numerator(self):
        assert decide(RealPolynomial([0.0]), RealPolynomial.from_roots([-1, -2])).decision == MOMENT


def closed_form_shapes(seed, count):
    """Random degree 3/4/5 inputs matching a closed-form rule, away from its boundary."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        kind = int(rng.integers(0, 3))
        r = float(rng.uniform(-2.0, -0.3))
        if kind == 0:
            x = float(rng.uniform(-3.0, -0.05))
            if abs(x - r) < 0.05:
                continue
            out.append(("degree3", roots_of((r, 1), pair(x, float(rng.uniform(0.3, 2.0))))))
        elif kind == 1:
            r2 = float(rng.uniform(-3.0, -0.3))
            x = float(rng.uniform(-3.0, -0.05))
            if min(abs(x - r), abs(x - r2), abs(r - r2)) < 0.05:
                continue
            out.append(("degree4", roots_of((r, 1), (r2, 1), pair(x, float(rng.uniform(0.3, 2.0))))))
        else:
            y1 = float(rng.uniform(0.4, 1.5))
            u = float(rng.choice([2.0, 3.0, 4.0, rng.uniform(1.1, 4.0)]))
            if abs(u - round(u)) > 1e-9 and abs(u - round(u)) < 0.05:
                continue
            out.append(("degree5_vertical", roots_of((r, 1), pair(r, y1), pair(r, u * y1))))
    return out


class TestProperties:
    def test_rule_numeric_agreement(self):
        for rule, roots in closed_form_shapes(71, 60):
            v = decide_roots(ONE, roots)
            assert v.rule == rule
            cert = sign_scan(build_weight(ONE, roots), 4000)
            assert (cert.kind == NEGATIVITY_WITNESS) == (v.decision == NOT_MOMENT)

    def test_moment_implies_finite_test(self):
        cases = [(ONE, roots) for _, roots in closed_form_shapes(72, 30)] + stable_family(73, 30, max_degree=5)
        n_moment = 0
        for q, roots in cases:
            v = decide_roots(q, roots)
            if v.decision == MOMENT:
                n_moment += 1
                assert hausdorff_finite_test(exact_sequence(q, roots.to_polynomial()), 25, 25).passed
        assert n_moment >= 10

    def test_not_moment_sound(self):
        cases = [(ONE, roots) for _, roots in closed_form_shapes(74, 30)] + stable_family(75, 40, max_degree=6)
        for q, roots in cases:
            v = decide_roots(q, roots, Budget())
            if v.decision == NOT_MOMENT:
                assert_sound(v, q, roots)
