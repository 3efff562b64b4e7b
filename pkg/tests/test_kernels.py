"""Kernel-level checks: scaled trig blocks, derivatives, dual execution paths."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from wellpoles import _kernels as K

RTOL_PATHS = 1e-13
RTOL_MPMATH = 1e-12
RTOL_DERIV = 2e-6

M, A = 1.0, 1.5


def rand_points(n, seed, box=5.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, n) + 1j * rng.uniform(-box, box, n)


class TestScaledTrig:
    def test_matches_direct_at_moderate_z(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            z = complex(rng.uniform(-8, 8), rng.uniform(-8, 8))
            C, S, Z, G, E = K.trig_scaled(z)
            assert np.isclose(C, np.cos(z) * E, rtol=1e-14, atol=1e-300)
            assert np.isclose(S, np.sin(z) * E, rtol=1e-14, atol=1e-300)

    def test_finite_at_huge_imaginary_part(self):
        for y in (1e3, 1e6, -1e8):
            C, S, Z, G, E = K.trig_scaled(complex(0.3, y))
            for v in (C, S, Z, G):
                assert np.isfinite(v.real) and np.isfinite(v.imag)
                assert abs(v) <= 1.0 + 1e-12

    def test_mpmath_oracle_large_scale(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 60
        for zc in (complex(2.7, 120.0), complex(-5.1, -340.0), complex(0.0, 55.5)):
            C, S, Z, G, E = K.trig_scaled(zc)
            zm = mp.mpc(zc.real, zc.imag)
            scale = mp.e ** (-abs(zc.imag))
            cm = mp.cos(zm) * scale
            sm = mp.sin(zm) * scale
            assert abs(complex(cm) - C) <= RTOL_MPMATH * abs(complex(cm))
            assert abs(complex(sm) - S) <= RTOL_MPMATH * abs(complex(sm))

    def test_series_windows_match_high_precision(self):
        # just inside each series window the kernel must agree with an
        # extended-precision evaluation of the same block at the same point
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        for r in (0.95e-4, 0.099):
            for ang in (0.0, 0.7, 2.2, -1.3):
                z = r * np.exp(1j * ang)
                C, S, Z, G, E = K.trig_scaled(z)
                zm = mp.mpc(z.real, z.imag)
                scale = mp.e ** (-abs(z.imag))
                z_ref = complex(mp.sincpi(zm / mp.pi) * scale)
                g_ref = complex((mp.cos(zm) - mp.sin(zm) / zm) / zm**2 * scale)
                assert abs(Z - z_ref) < 1e-13 * abs(z_ref)
                assert abs(G - g_ref) < 1e-13 * abs(g_ref)

    def test_sinc_at_zero(self):
        C, S, Z, G, E = K.trig_scaled(0.0 + 0.0j)
        assert Z == 1.0
        assert C == 1.0
        assert abs(G + 1.0 / 3.0) < 1e-15


class TestDenomDerivatives:
    @pytest.mark.parametrize("ch", [K.CH_PLUS, K.CH_MINUS])
    def test_dk_matches_central_difference(self, ch):
        rng = np.random.default_rng(11)
        h = 1e-6
        for _ in range(60):
            k = complex(rng.uniform(-4, 4), rng.uniform(-3, 3))
            g = np.exp(1j * rng.uniform(-np.pi, np.pi))
            U = rng.uniform(0.05, 5.0)
            d, dk, da, E = K.denom_scaled(k, g, M, A, U, ch)
            dp = K.denom_scaled(k + h, g, M, A, U, ch)
            dm = K.denom_scaled(k - h, g, M, A, U, ch)
            # remove the scaling mismatch between neighbouring points
            num = (dp[0] / dp[3] - dm[0] / dm[3]) / (2 * h)
            assert abs(num - dk / E) < RTOL_DERIV * (1.0 + abs(dk / E))

    @pytest.mark.parametrize("ch", [K.CH_PLUS, K.CH_MINUS])
    def test_dalpha_matches_central_difference(self, ch):
        rng = np.random.default_rng(12)
        h = 1e-6
        for _ in range(60):
            k = complex(rng.uniform(-4, 4), rng.uniform(-3, 3))
            al = rng.uniform(-np.pi, np.pi)
            U = rng.uniform(0.05, 5.0)
            d, dk, da, E = K.denom_scaled(k, np.exp(1j * al), M, A, U, ch)
            dp = K.denom_scaled(k, np.exp(1j * (al + h)), M, A, U, ch)
            dm = K.denom_scaled(k, np.exp(1j * (al - h)), M, A, U, ch)
            num = (dp[0] / dp[3] - dm[0] / dm[3]) / (2 * h)
            assert abs(num - da / E) < RTOL_DERIV * (1.0 + abs(da / E))

    def test_plus_k_derivative_vanishes_at_collision_point(self):
        # d(d_plus)/dk == 0 at k = -i/a identically in (gamma, U)
        rng = np.random.default_rng(13)
        kc = -1j / A
        for _ in range(40):
            g = np.exp(1j * rng.uniform(-np.pi, np.pi))
            U = rng.uniform(0.01, 8.0)
            d, dk, da, E = K.denom_scaled(kc, g, M, A, U, K.CH_PLUS)
            assert abs(dk) < 1e-13


class TestNewton:
    def test_converges_to_known_zero(self):
        k, it, ok = K.newton_pole(1.85j, 1.0 + 0j, M, A, 2.0, K.CH_PLUS, 1e-12, 50)
        assert ok and it <= 10
        assert abs(k - 1.841595559696953j) < 1e-12

    def test_reports_failure_on_tiny_budget(self):
        k, it, ok = K.newton_pole(3.0 + 2.0j, 1.0 + 0j, M, A, 2.0, K.CH_PLUS, 1e-15, 1)
        assert not ok


class TestDualPaths:
    def test_grid_paths_agree(self):
        ks = rand_points(500, 21)
        for ch in (K.CH_PLUS, K.CH_MINUS):
            d1, dk1 = K.grid_denom_dk(ks, np.exp(0.4j), M, A, 2.5, ch)
            d2, dk2 = K.grid_denom_dk_numpy(ks, np.exp(0.4j), M, A, 2.5, ch)
            np.testing.assert_allclose(d1, d2, rtol=RTOL_PATHS, atol=1e-15)
            np.testing.assert_allclose(dk1, dk2, rtol=RTOL_PATHS, atol=1e-15)

    def test_axis_paths_agree(self):
        kap = np.linspace(-7.0, 7.0, 3001)
        for ch in (K.CH_PLUS, K.CH_MINUS):
            for g in (1.0 + 0j, -1.0 + 0j):
                p1 = K.axis_phi(kap, g, M, A, 1.7, ch)
                p2 = K.axis_phi_numpy(kap, g, M, A, 1.7, ch)
                np.testing.assert_allclose(p1, p2, rtol=RTOL_PATHS, atol=1e-14)

    def test_loop_reference_agrees_with_dispatch(self):
        kap = np.linspace(-4.0, 4.0, 501)
        p_ref = K.axis_phi_loop_py(kap, 1.0 + 0j, M, A, 0.8, K.CH_PLUS)
        p = K.axis_phi(kap, 1.0 + 0j, M, A, 0.8, K.CH_PLUS)
        np.testing.assert_allclose(p_ref, p, rtol=RTOL_PATHS, atol=1e-15)

    def test_env_flag_selects_pure_path(self):
        code = "from wellpoles import _kernels as K; print(K.USING_NUMBA)"
        env = dict(os.environ, WELLPOLES_NUMBA="0")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.stdout.strip() == "False"
