import numpy as np
import pytest
from numpy.testing import assert_allclose

from families import random_q, random_roots
from momentlab.errors import CommonZero, DegreeViolation, PoleHit
from momentlab.pfd import TruncatedSeries, decompose, reconstruct
from momentlab.polycore import RealPolynomial, RootMultiset, derivative

ONE = RealPolynomial([1.0])


def vertical_double(r, y1):
    a = complex(r, y1)
    return RootMultiset(((r, 1), (a, 2), (a.conjugate(), 2)))


def vertical_simple(r, y1, y2):
    a, b = complex(r, y1), complex(r, y2)
    return RootMultiset(((r, 1), (a, 1), (a.conjugate(), 1), (b, 1), (b.conjugate(), 1)))


class TestTruncatedSeries:
    def test_polynomial_series(self):
        p = RealPolynomial([1.0, 2.0, 3.0])
        s = TruncatedSeries.of_polynomial(p, 1.0, 3)
        assert_allclose(s.coeffs, [6.0, 8.0, 3.0])

    def test_division_inverts_multiplication(self):
        a = TruncatedSeries(0.5, np.array([1.0, 2.0, -1.0, 0.5], dtype=complex))
        b = TruncatedSeries(0.5, np.array([2.0, 1.0, 3.0, 1.0], dtype=complex))
        assert_allclose(((a * b) / b).coeffs, a.coeffs, atol=1e-14)


class TestDecompose:
    def test_simple_pole(self):
        table = decompose(ONE, RootMultiset(((-0.7, 1),)))
        assert table.terms == ((-0.7 + 0j, 1, 1 + 0j),)

    @pytest.mark.parametrize("r, y1", [(-1.0, 1.0), (-0.5, 0.3)])
    def test_double_vertical_closed_form(self, r, y1):
        roots = vertical_double(r, y1)
        table = decompose(ONE, roots)
        a = complex(r, y1)
        assert_allclose(table.coefficient(complex(r), 1), 1 / y1**4, rtol=1e-10)
        assert_allclose(table.coefficient(a, 1), -1 / (2 * y1**4), rtol=1e-10)
        assert_allclose(table.coefficient(a, 2), 1j / (4 * y1**3), rtol=1e-10)
        assert table.coefficient(a.conjugate(), 2) == table.coefficient(a, 2).conjugate()

    @pytest.mark.parametrize("r, y1, y2", [(-1.0, 1.0, 2.0), (-0.5, 0.3, 0.9)])
    def test_two_pair_vertical_closed_form(self, r, y1, y2):
        table = decompose(ONE, vertical_simple(r, y1, y2))
        assert_allclose(table.coefficient(complex(r), 1), 1 / (y1**2 * y2**2), rtol=1e-10)
        assert_allclose(table.coefficient(complex(r, y1), 1), 1 / (2 * y1**2 * (y1**2 - y2**2)), rtol=1e-10)
        assert_allclose(table.coefficient(complex(r, y2), 1), 1 / (2 * y2**2 * (y2**2 - y1**2)), rtol=1e-10)

    def test_degree_violation(self):
        with pytest.raises(DegreeViolation):
            decompose(RealPolynomial([1.0, 1.0]), RootMultiset(((-1.0, 1),)))

    def test_common_zero(self):
        with pytest.raises(CommonZero):
            decompose(RealPolynomial([1.0, 1.0]), RootMultiset(((-1.0, 1), (-2.0, 1))))

    def test_every_order_present(self):
        roots = RootMultiset(((-1.0, 3), (complex(-2, 1), 2), (complex(-2, -1), 2)))
        table = decompose(ONE, roots)
        assert {(z, j) for z, j, _ in table.terms} == {(z, j) for z, m in roots.entries for j in range(1, m + 1)}
        assert len(table.terms) == roots.degree
        assert table.coefficient(complex(-1), 3) != 0

    def test_residue_formula(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            roots = random_roots(rng, max_degree=8, max_mult=1)
            q = random_q(rng, roots)
            table = decompose(q, roots)
            dp = derivative(roots.to_polynomial(), 1)
            for z, _ in roots.entries:
                assert abs(table.coefficient(z, 1) - q(z) / dp(z)) <= 1e-10 * abs(q(z) / dp(z))

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            roots = random_roots(rng, max_degree=8)
            table = decompose(random_q(rng, roots), roots)
            for z, j, a in table.terms:
                assert abs(table.coefficient(z.conjugate(), j) - a.conjugate()) <= 1e-12 * abs(a)


class TestReconstruct:
    def test_single_pole(self):
        assert reconstruct(decompose(ONE, RootMultiset(((-1.0, 1),))), 0.0) == pytest.approx(1.0)

    def test_two_poles(self):
        table = decompose(ONE, RootMultiset(((-1.0, 1), (-2.0, 1))))
        assert reconstruct(table, 1.0) == pytest.approx(1 / 6, rel=1e-14)

    def test_double_vertical_at_zero(self):
        roots = vertical_double(-1.0, 1.0)
        # p(0) = (0 - r) |0 - a|^4 = 1 * 2^2
        assert reconstruct(decompose(ONE, roots), 0.0) == pytest.approx(1 / 4, rel=1e-12)

    def test_pole_hit(self):
        table = decompose(ONE, RootMultiset(((-1.0, 1),)))
        with pytest.raises(PoleHit):
            reconstruct(table, -1.0 + 1e-12)

    def test_identity_random(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            roots = random_roots(rng, max_degree=8)
            q = random_q(rng, roots)
            table = decompose(q, roots)
            poles = np.array([z for z, _ in roots.entries])
            zs = []
            while len(zs) < 100:
                z = complex(rng.uniform(-4, 2), rng.uniform(-3, 3))
                if np.min(np.abs(poles - z)) >= 0.5:
                    zs.append(z)
            zs = np.array(zs)
            exact = q(zs) / roots.evaluate(zs)
            assert np.all(np.abs(reconstruct(table, zs) - exact) <= 1e-9 * (1 + np.abs(exact)))
