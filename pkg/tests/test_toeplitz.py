import numpy as np
import pytest

from waveschwarz.numerics import lu_det, poly_eval, poly_roots
from waveschwarz.schwarz1d import SchwarzParams, coefficients_1d
from waveschwarz.toeplitz import (
    ToeplitzBlocks,
    assemble_dense,
    charpoly,
    generating_check,
    limiting_spectrum,
    q_poly,
    spectrum,
)


def random_ab(rng):
    mod = rng.uniform(0.1, 3.0, 2)
    ang = rng.uniform(-np.pi, np.pi, 2)
    return mod[0] * np.exp(1j * ang[0]), mod[1] * np.exp(1j * ang[1])


def hausdorff(A, B):
    D = np.abs(np.asarray(A)[:, None] - np.asarray(B)[None, :])
    return max(D.min(axis=1).max(), D.min(axis=0).max())


class TestBlocksAndAssembly:
    def test_zero_coefficients_rejected(self):
        with pytest.raises(ValueError):
            ToeplitzBlocks(0.0, 2.0, 1)
        with pytest.raises(ValueError):
            ToeplitzBlocks(1.0, 0.0, 1)
        ToeplitzBlocks(0.0, 2.0, 1, allow_degenerate=True)

    def test_m1_block(self):
        T = assemble_dense(ToeplitzBlocks(1.0, 2.0, 1))
        assert np.array_equal(T, np.array([[0, 2], [2, 0]], dtype=complex))

    def test_m2_structure(self):
        # matches the 4x4 determinant display for p_2 (diagonal -z removed)
        T = assemble_dense(ToeplitzBlocks(1.0, 2.0, 2))
        expect = np.array([
            [0, 2, 1, 0],
            [2, 0, 0, 0],
            [0, 0, 0, 2],
            [0, 1, 2, 0],
        ], dtype=complex)
        assert np.array_equal(T, expect)

    def test_degenerate_a_zero_decouples(self):
        T = assemble_dense(ToeplitzBlocks(0.0, 2.0, 3, allow_degenerate=True))
        blk = np.array([[0, 2], [2, 0]], dtype=complex)
        assert np.array_equal(T, np.kron(np.eye(3), blk))


class TestCharpoly:
    def test_p1(self):
        seq = charpoly(ToeplitzBlocks(1.0, 2.0, 1))
        assert np.allclose(seq.polys[1], [-4, 0, 1])

    def test_p2_closed_form(self):
        seq = charpoly(ToeplitzBlocks(1.0, 2.0, 2))
        assert np.allclose(seq.p_m, [12, 0, -8, 0, 1])

    def test_recurrence_exact_at_coefficient_level(self):
        rng = np.random.default_rng(0)
        a, b = random_ab(rng)
        seq = charpoly(ToeplitzBlocks(a, b, 6))
        for m in range(2, 7):
            p, p1, p0 = seq.polys[m], seq.polys[m - 1], seq.polys[m - 2]
            lhs = np.zeros(len(p), dtype=complex)
            lhs[2:2 + len(p1)] += p1
            lhs[:len(p1)] += (a * a - b * b) * p1
            lhs[2:2 + len(p0)] -= a * a * p0
            assert np.abs(lhs - p).max() == 0.0

    def test_p3_against_determinant(self):
        rng = np.random.default_rng(1)
        blocks = ToeplitzBlocks(1.0, 2.0, 3)
        seq = charpoly(blocks)
        T = assemble_dense(blocks)
        for _ in range(10):
            z = rng.standard_normal() + 1j * rng.standard_normal()
            pv = poly_eval(seq.p_m, z)
            dv = lu_det(z * np.eye(6) - T)
            assert abs(pv - dv) <= 1e-10 * max(1.0, abs(dv))

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            charpoly(ToeplitzBlocks(0.0, 1.0, 2, allow_degenerate=True))


class TestGeneratingFunction:
    def test_constant_term(self):
        assert generating_check(ToeplitzBlocks(1.0, 2.0, 1), 0.0, 1.3 + 0.2j, 0) == 0.0

    def test_example_z0(self):
        assert generating_check(ToeplitzBlocks(1.0, 2.0, 2), 0.1, 0.0, 30) <= 1e-12

    def test_example_z3(self):
        assert generating_check(ToeplitzBlocks(1.0, 1.0, 2), 0.05, 3.0, 40) <= 1e-12

    def test_pole_rejected(self):
        # D(t, z) = 1 + 3t at z=0 for (a, b) = (1, 2): pole at t = -1/3
        with pytest.raises(ValueError):
            generating_check(ToeplitzBlocks(1.0, 2.0, 1), -1.0 / 3.0, 0.0, 10)

    def test_large_t_rejected(self):
        with pytest.raises(ValueError):
            generating_check(ToeplitzBlocks(1.0, 2.0, 1), 0.2, 0.0, 10)


class TestQPoly:
    def test_m1_c2(self):
        # c = a^2/z^2 = 2 at a=1, z=1/sqrt(2)
        diag = q_poly(ToeplitzBlocks(1.0, 2.0, 1), 1.0 / np.sqrt(2.0))
        assert diag.c == pytest.approx(2.0)
        assert np.allclose(diag.f, [1, -2, 2, -2, 1])
        assert diag.reciprocal_pairing_error <= 1e-7

    def test_q_equals_one_always_a_root(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = random_ab(rng)
            z = rng.standard_normal() + 1j * rng.standard_normal()
            m = int(rng.integers(1, 8))
            diag = q_poly(ToeplitzBlocks(a, b, m), z)
            assert abs(poly_eval(diag.f, 1.0)) <= 1e-12 * max(1.0, abs(diag.c))

    def test_m2_c1_factorisation(self):
        # c = 1 at a = 1, z = 1: f = q^6 - q^5 - q + 1 = (q-1)(q^5-1).
        # q = 1 is a double root, so location accuracy is ~sqrt(residual tol).
        diag = q_poly(ToeplitzBlocks(1.0, 2.0, 2), 1.0)
        assert np.allclose(diag.f, [1, -1, 0, 0, 0, -1, 1])
        expect = np.concatenate([[1.0], np.exp(2j * np.pi * np.arange(5) / 5)])
        assert hausdorff(diag.roots, expect) <= 1e-5

    def test_palindrome_and_reciprocal_closure(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a, b = random_ab(rng)
            z = rng.standard_normal() + 1j * rng.standard_normal()
            m = int(rng.integers(1, 11))
            diag = q_poly(ToeplitzBlocks(a, b, m), z)
            assert np.allclose(diag.f, diag.f[::-1])  # palindromic
            assert np.abs(diag.roots).min() > 0  # q = 0 never a root
            assert diag.reciprocal_pairing_error <= 1e-7

    def test_z_zero_rejected(self):
        with pytest.raises(ValueError):
            q_poly(ToeplitzBlocks(1.0, 2.0, 1), 0.0)


class TestLimitingSpectrum:
    def test_degenerate_a0_collapses(self):
        lim = limiting_spectrum(0.0, 2.0, samples=64)
        pts = np.concatenate([lim.lambda_plus, lim.lambda_minus])
        assert np.allclose(np.abs(pts), 2.0)
        assert set(np.round(pts, 12)) <= {2.0 + 0j, -2.0 + 0j}

    def test_zero_on_curve_when_a_equals_b(self):
        lim = limiting_spectrum(1.0, 1.0, samples=4097)  # includes theta = pi/2
        assert min(np.abs(np.concatenate([lim.lambda_plus, lim.lambda_minus]))) <= 1e-12

    def test_outliers_a1_b1(self):
        lim = limiting_spectrum(1.0, 1.0)
        assert lim.admissible  # |a^2| = 1 > |b^2/2 - a^2| = 1/2
        expect = np.sqrt(0.5 - 1.0 + 0j)
        assert np.allclose(np.sort_complex(lim.outliers),
                           np.sort_complex(np.array([expect, -expect])))

    def test_curve_membership_quadratic(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            mod = rng.uniform(0.1, 3.0, 2)
            ang = rng.uniform(-np.pi, np.pi, 2)
            a, b = mod[0] * np.exp(1j * ang[0]), mod[1] * np.exp(1j * ang[1])
            lim = limiting_spectrum(a, b, samples=256)
            for th, lam in zip(lim.thetas, lim.lambda_plus):
                res = lam * lam - 2 * a * np.cos(th) * lam - b * b + a * a
                assert abs(res) <= 1e-12 * max(1.0, abs(lam) ** 2)
            for th, lam in zip(lim.thetas, lim.lambda_minus):
                res = lam * lam - 2 * a * np.cos(th) * lam - b * b + a * a
                assert abs(res) <= 1e-12 * max(1.0, abs(lam) ** 2)

    def test_outlier_gate_flips_at_boundary(self):
        # |a^2| - |b^2/2 - a^2| changes sign along this a-sweep at b = 2:
        # admissible iff |a|^2 > |2 - a^2|, i.e. a^2 > 1 for real a.
        for a in (0.5, 0.8, 0.99):
            assert not limiting_spectrum(a, 2.0).admissible
        for a in (1.01, 1.2, 1.4):
            assert limiting_spectrum(a, 2.0).admissible


class TestSpectrum:
    def test_m1(self):
        rep = spectrum(ToeplitzBlocks(1.0, 2.0, 1))
        assert hausdorff(rep.eigenvalues, [2.0, -2.0]) <= 1e-10

    def test_m2_biquadratic(self):
        rep = spectrum(ToeplitzBlocks(1.0, 2.0, 2))
        expect = [np.sqrt(2), -np.sqrt(2), np.sqrt(6), -np.sqrt(6)]
        assert hausdorff(rep.eigenvalues, expect) <= 1e-9

    def test_root_eigenvalue_equivalence_interpolation(self):
        # independent oracle: interpolate det(zI - T) at 2m+1 Chebyshev points
        # (degree-2m interpolation is exact for the characteristic polynomial)
        # and take the roots of the interpolant via its colleague matrix
        # |a|/|b| ratios are kept moderate (<= 2): larger ratios cluster the
        # eigenvalues so strongly that the det-sampled interpolant cannot
        # resolve them to 1e-6 in double precision.
        rng = np.random.default_rng(6)
        for m in (2, 4, 6, 8):
            while True:
                mod = rng.uniform(0.5, 2.0, 2)
                if max(mod) / min(mod) <= 2.0:
                    break
            ang = rng.uniform(-np.pi, np.pi, 2)
            a, b = mod[0] * np.exp(1j * ang[0]), mod[1] * np.exp(1j * ang[1])
            blocks = ToeplitzBlocks(a, b, m)
            T = assemble_dense(blocks)
            n = 2 * m
            R = 1.5 * (abs(a) + abs(b))
            s_nodes = np.cos(np.pi * (2 * np.arange(n + 1) + 1) / (2 * (n + 1)))
            vals = np.array([lu_det(s * R * np.eye(n) - T) for s in s_nodes])
            vals /= R ** n  # keep interpolation values well scaled
            cheb = np.polynomial.chebyshev.chebfit(s_nodes, vals, n)
            oracle = np.polynomial.chebyshev.chebroots(cheb) * R
            rep = spectrum(blocks)
            assert hausdorff(rep.eigenvalues, oracle) <= 1e-6

    def test_spectral_inclusion_trend(self):
        # distances to the limit set shrink (up to 10% slack) as m grows
        params = SchwarzParams(k=30, sigma=0.1, delta=0.1, L=1.0)
        a, b = coefficients_1d(params)
        dmax = []
        for m in (10, 20, 40, 80, 160):
            dmax.append(spectrum(ToeplitzBlocks(a, b, m)).max_distance)
        for prev, cur in zip(dmax, dmax[1:]):
            assert cur <= prev * 1.10

    def test_method_switch(self):
        params = SchwarzParams(k=30, sigma=0.1, delta=0.1, L=1.0)
        a, b = coefficients_1d(params)
        assert spectrum(ToeplitzBlocks(a, b, 40)).method == "charpoly-roots"
        assert spectrum(ToeplitzBlocks(a, b, 120)).method == "dense-eig"

    def test_route_agreement_at_switch(self):
        # both eigenvalue routes agree where they hand over
        params = SchwarzParams(k=30, sigma=5.0, delta=0.1, L=1.0)
        a, b = coefficients_1d(params)
        blocks = ToeplitzBlocks(a, b, 60)
        rep = spectrum(blocks)
        ev = np.linalg.eigvals(assemble_dense(blocks))
        assert hausdorff(rep.eigenvalues, ev) <= 1e-7
