import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from families import stable_family
from momentlab.errors import DomainError, UnstablePolynomial, UnstableShift
from momentlab.polycore import RealPolynomial, RootMultiset, faulhaber_partial_sum, find_roots
from momentlab.weight import (
    NEGATIVITY_WITNESS,
    POSITIVITY_MARGIN,
    build_weight,
    eval_weight,
    eval_weight_complex,
    moment,
    moments,
    shift_rescale,
    sign_scan,
)

ONE = RealPolynomial([1.0])
TS = np.logspace(-6, 0, 40)


def weight_of(*entries, q=ONE):
    return build_weight(q, RootMultiset(tuple(entries)))


def vertical4(r, y1, y2):
    a, b = complex(r, y1), complex(r, y2)
    return weight_of((a, 1), (a.conjugate(), 1), (b, 1), (b.conjugate(), 1))


@pytest.fixture(scope="module")
def p1_weight():
    return build_weight(ONE, find_roots(faulhaber_partial_sum(1, 6)))


class TestBuildWeight:
    @pytest.mark.parametrize("a", [-0.5, -1.0, -3.2])
    def test_simple_pole(self, a):
        assert_allclose(eval_weight(weight_of((a, 1)), TS), TS ** (-a - 1), rtol=1e-13)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_sixth_power(self, c):
        w = weight_of((-c, 6))
        expected = TS ** (c - 1) * np.log(1 / TS) ** 5 / 120
        assert_allclose(eval_weight(w, TS), expected, rtol=1e-9, atol=1e-14)

    @pytest.mark.parametrize("r, y1, y2", [(-1.0, 1.0, 2.0), (-0.5, 0.3, 0.9), (-2.0, 0.7, 1.1)])
    def test_vertical_line_degree4(self, r, y1, y2):
        w = vertical4(r, y1, y2)
        lt = np.log(TS)
        expected = TS ** (-r - 1) * (
            np.sin(y1 * lt) / (y1 * (y1**2 - y2**2)) + np.sin(y2 * lt) / (y2 * (y2**2 - y1**2))
        )
        scale = TS ** (-r - 1) / (y1 * abs(y1**2 - y2**2))
        assert np.all(np.abs(eval_weight(w, TS) - expected) <= 1e-12 * scale)

    def test_unstable(self):
        with pytest.raises(UnstablePolynomial):
            weight_of((0.5, 1))

    def test_real_form_partitions_terms(self):
        w = weight_of((-1.0, 2), (complex(-2, 1), 3), (complex(-2, -1), 3), (complex(-0.5, 2), 1),
                      (complex(-0.5, -2), 1))
        assert [b.mult for b in w.real_blocks] == [2]
        assert sorted((b.x, b.y, b.mult) for b in w.pair_blocks) == [(-2.0, 1.0, 3), (-0.5, 2.0, 1)]
        assert sum(b.mult for b in w.real_blocks) + 2 * sum(b.mult for b in w.pair_blocks) == len(w.pfd.terms)
        for b in w.pair_blocks:
            assert all(-math.pi < th <= math.pi for th in b.phases)

    def test_real_and_complex_forms_agree(self):
        for q, roots in stable_family(21, 60):
            w = build_weight(q, roots)
            x = -np.log(TS)
            scale = w.abs_values_x(x)
            assert np.all(np.abs(eval_weight(w, TS) - eval_weight_complex(w, TS)) <= 1e-10 * scale)


class TestEvalWeight:
    def test_constant(self):
        assert eval_weight(weight_of((-1.0, 1)), 0.5) == 1.0

    def test_one_minus_t(self):
        assert eval_weight(weight_of((-1.0, 1), (-2.0, 1)), 0.25) == pytest.approx(0.75, rel=1e-14)

    def test_vertical_line_negative(self):
        y1 = 1.0
        t = math.exp(-1.5 * math.pi / y1)
        assert eval_weight(vertical4(-1.0, y1, 2.0), t) < 0

    @pytest.mark.parametrize("t", [0.0, -0.1, 1.5, float("nan")])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            eval_weight(weight_of((-1.0, 1)), t)


class TestMoments:
    def test_one_minus_t_third_moment(self):
        rep = moment(weight_of((-1.0, 1), (-2.0, 1)), 3)
        assert rep.claimed == pytest.approx(1 / 20)
        assert rep.rel_error <= 1e-10
        assert abs(rep.integrated - 0.05) <= 1e-12

    def test_constant_weight(self):
        assert moment(weight_of((-1.0, 1)), 0).integrated == pytest.approx(1.0, rel=1e-12)

    def test_p1_zeroth_moment(self, p1_weight):
        rep = moment(p1_weight, 0)
        assert rep.integrated == pytest.approx(1.0, rel=1e-8)

    def test_report_fields(self):
        rep = moment(weight_of((-1.0, 1), (-2.0, 1)), 0)
        assert rep.rel_error == abs(rep.integrated - rep.claimed) / abs(rep.claimed)

    def test_unbounded_integrable_weight(self):
        # w(t) = t^(-0.7), unbounded at 0
        rep = moment(weight_of((-0.3, 1)), 0)
        assert rep.rel_error <= 1e-10

    def test_random_family(self):
        worst = 0.0
        for q, roots in stable_family(3, 60):
            worst = max(worst, max(r.rel_error for r in moments(build_weight(q, roots), range(21))))
        assert worst <= 1e-8

    def test_absolute_integrability(self, p1_weight):
        f = lambda x: math.exp(-x) * abs(float(p1_weight.values_x_stable(np.array([x]))[0]))
        total, err = integrate.quad(f, 0, 400, limit=400)
        assert math.isfinite(total) and err < 1e-6 * total
        assert total >= 1.0 - 1e-8

    def test_negative_order(self):
        with pytest.raises(DomainError):
            moments(weight_of((-1.0, 1)), [-1])


class TestSignScan:
    def test_positive_weight(self):
        cert = sign_scan(weight_of((-1.0, 1), (-2.0, 1)), 1000)
        assert cert.kind == POSITIVITY_MARGIN
        assert cert.witness_t is None
        assert cert.min_value == 0.0 and cert.min_location == 1.0

    def test_vertical_line_witness(self):
        cert = sign_scan(vertical4(-1.0, 1.0, 2.0), 4000)
        assert cert.kind == NEGATIVITY_WITNESS
        assert cert.witness_value < 0
        # here w = sin(x)/3 - sin(2x)/6 with x = log(1/t)
        x0 = -math.log(cert.witness_t)
        assert math.sin(x0) - math.sin(2 * x0) / 2 < 0

    def test_p1_witness(self, p1_weight):
        cert = sign_scan(p1_weight, 4000)
        assert cert.kind == NEGATIVITY_WITNESS
        assert 0 < cert.witness_t < 1

    def test_witness_reevaluates(self, p1_weight):
        cert = sign_scan(p1_weight, 4000)
        again = eval_weight(p1_weight, cert.witness_t)
        assert again < 0
        assert abs(again - cert.witness_value) <= 1e-10 * abs(cert.witness_value)

    def test_candidate_points_added(self):
        w = weight_of((-1.0, 1), (-2.0, 1))
        assert sign_scan(w, 1000, [0.3, 0.6]).grid_size == sign_scan(w, 1000).grid_size + 2

    def test_grid_size_guard(self):
        with pytest.raises(ValueError):
            sign_scan(weight_of((-1.0, 1)), 999)


class TestShiftRescale:
    def test_shift_to_constant(self):
        w = shift_rescale(weight_of((-2.0, 1)), 1.0)
        assert_allclose(eval_weight(w, TS), 1.0, rtol=1e-13)

    def test_zero_shift(self):
        w = weight_of((-1.0, 1), (-2.0, 1))
        assert_allclose(eval_weight(shift_rescale(w, 0.0), TS), eval_weight(w, TS), rtol=0, atol=0)

    def test_double_pole_shift(self):
        w = shift_rescale(weight_of((-2.0, 2)), 1.0)
        assert_allclose(eval_weight(w, TS), np.log(1 / TS), rtol=1e-12, atol=1e-15)

    def test_unstable_shift(self):
        with pytest.raises(UnstableShift):
            shift_rescale(weight_of((-1.0, 2)), 1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-0.15, 2.0))
    def test_shift_identity(self, seed, c):
        (q, roots), = stable_family(seed, 1)
        assume(max(z.real for z, _ in roots.entries) + c < 0)
        w = build_weight(q, roots)
        shifted = shift_rescale(w, c)
        x = -np.log(TS)
        # identical terms, each scaled by t^(-c); only the summation order can differ
        gap = np.abs(shifted.values_x(x) - TS ** (-c) * w.values_x(x))
        assert np.all(gap <= 1e-14 * shifted.abs_values_x(x))
        rebuilt = build_weight(q.compose_affine(1.0, -c), roots.map(lambda z: z + c))
        scale = rebuilt.abs_values_x(-np.log(TS))
        assert np.all(np.abs(eval_weight(shifted, TS) - eval_weight(rebuilt, TS)) <= 1e-9 * scale)

    def test_rescale_matches_moments(self):
        # q(z/d)/p(z/d) evaluated at n is the sequence in n/d
        w = weight_of((-1.0, 1), (complex(-2, 1), 1), (complex(-2, -1), 1), q=RealPolynomial([1.0, 0.5]))
        d = 2.5
        scaled = shift_rescale(w, 0.0, d)
        for rep in moments(scaled, range(6)):
            assert rep.claimed == pytest.approx(w.q(rep.n / d) / w.roots.evaluate(rep.n / d).real, rel=1e-12)
            assert rep.rel_error <= 1e-9
