import cmath

import numpy as np
import pytest

from waveschwarz.iteration import (
    build_iteration_matrix,
    iterate,
    nilpotency_check,
    spectral_radius_curve,
)
from waveschwarz.schwarz1d import SchwarzParams, coefficients_1d
from waveschwarz.toeplitz import ToeplitzBlocks, assemble_dense, spectrum


class TestBuildIterationMatrix:
    def test_n2_is_antidiagonal_block(self):
        _, T = build_iteration_matrix(0.7, 0.3j, 2)
        assert np.array_equal(T, np.array([[0, 0.3j], [0.3j, 0]]))

    def test_n3_matches_block_form(self):
        a, b = 0.4 - 0.2j, 0.1 + 0.5j
        _, T = build_iteration_matrix(a, b, 3)
        assert np.array_equal(T, assemble_dense(ToeplitzBlocks(a, b, 2)))

    def test_structural_equality_up_to_64(self):
        rng = np.random.default_rng(21)
        for N in range(2, 65):
            a = complex(rng.standard_normal(), rng.standard_normal())
            b = complex(rng.standard_normal(), rng.standard_normal())
            blocks, T = build_iteration_matrix(a, b, N)
            assert blocks.m == N - 1
            assert np.array_equal(T, assemble_dense(ToeplitzBlocks(a, b, N - 1)))

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            build_iteration_matrix(1.0, 1.0, 1)


class TestIterate:
    def test_zero_start_rejected(self):
        _, T = build_iteration_matrix(0.5, 0.5, 3)
        with pytest.raises(ValueError):
            iterate(T, np.zeros(4), 10)

    def test_rate_tracks_spectral_radius(self):
        params = SchwarzParams(k=30.0, sigma=5.0, delta=0.1, L=1.0)
        a, b = coefficients_1d(params)
        _, T = build_iteration_matrix(a, b, 40)
        rho = spectrum(ToeplitzBlocks(a, b, 39)).spectral_radius
        rng = np.random.default_rng(3)
        r0 = rng.standard_normal(78) + 1j * rng.standard_normal(78)
        hist = iterate(T, r0, 60)
        assert hist.estimated_rate <= rho + 0.05
        assert hist.steps == 60
        assert len(hist.norms) == 61

    def test_rate_consistency_on_convergent_configs(self):
        rng = np.random.default_rng(4)
        for sigma in (1.0, 5.0):
            params = SchwarzParams(k=10.0, sigma=sigma, delta=0.1, L=1.0)
            a, b = coefficients_1d(params)
            _, T = build_iteration_matrix(a, b, 20)
            rho = spectrum(ToeplitzBlocks(a, b, 19)).spectral_radius
            r0 = rng.standard_normal(38) + 1j * rng.standard_normal(38)
            hist = iterate(T, r0, 80)
            assert hist.estimated_rate <= rho * 1.05

    def test_nilpotent_case_converges_in_n_steps(self):
        # b = 0 at zero absorption: exact convergence in N subdomain sweeps
        N = 12
        a = cmath.exp(-1j * 2.0)
        _, T = build_iteration_matrix(a, 0.0, N)
        rng = np.random.default_rng(5)
        r0 = rng.standard_normal(2 * (N - 1)) + 1j * rng.standard_normal(2 * (N - 1))
        hist = iterate(T, r0, N)
        assert hist.norms[-1] <= 1e-8 * hist.norms[0]


class TestSpectralRadiusCurve:
    def test_n2_radius_is_abs_b(self):
        params = SchwarzParams(k=30.0, sigma=0.1, delta=0.1, L=1.0)
        a, b = coefficients_1d(params)
        curve = spectral_radius_curve(params, [2])
        assert curve.points[0][1] == pytest.approx(abs(b), rel=1e-10)

    def test_growth_and_bound(self):
        params = SchwarzParams(k=30.0, sigma=0.1, delta=0.1, L=1.0)
        curve = spectral_radius_curve(params, [10, 20, 40, 80, 160])
        rhos = [r for _, r in curve.points]
        assert all(r2 >= r1 - 1e-9 for r1, r2 in zip(rhos, rhos[1:]))
        assert all(r <= curve.r1d_bound + 1e-6 for r in rhos)

    def test_stronger_absorption_below(self):
        weak = spectral_radius_curve(
            SchwarzParams(k=30.0, sigma=0.1, delta=0.1, L=1.0), [10, 20, 40])
        strong = spectral_radius_curve(
            SchwarzParams(k=30.0, sigma=5.0, delta=0.1, L=1.0), [10, 20, 40])
        for (_, rw), (_, rs) in zip(weak.points, strong.points):
            assert rs < rw

    def test_per_mode_curve(self):
        params = SchwarzParams(k=10.0, sigma=1.0, delta=0.1, L=1.0)
        curve = spectral_radius_curve(params, [4, 8], k_tilde=2.0 * params.k,
                                      alpha=1j * params.k)
        assert all(r < 1 for _, r in curve.points)


class TestNilpotency:
    def test_small_case(self):
        assert nilpotency_check(1.0, 0.1, 1.0, 3) <= 1e-12

    def test_medium_case(self):
        assert nilpotency_check(1.0, 0.1, 1.0, 8) <= 1e-8

    def test_spectrum_collapses_to_zero(self):
        a = cmath.exp(-1j * 5.0)
        T = assemble_dense(ToeplitzBlocks(a, 0.0, 7, allow_degenerate=True))
        assert np.abs(np.linalg.eigvals(T)).max() <= 1e-7
