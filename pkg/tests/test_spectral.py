"""Marginal exponents, joint characteristic functions, dependence ratios.

Frozen oracle notes: tent-pair literals are closed forms (overlap algebra);
the powerlaw ratio literal 0.9130791975880924 comes from 2e6-point
trapezoid integration with log-mapped tails out to 1e30 (5e-11 agreement);
the compound-Poisson joint characteristic literal is the exact three-region
sum 0.5*(K(1)+K(2)+K(3)) exponentiated.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srdcert.errors import QuadratureError, RejectionError
from srdcert.kernels import (
    box_kernel,
    gaussian_kernel,
    powerlaw_kernel,
    tent_kernel,
    zero_kernel,
)
from srdcert.levy import gaussian_triplet, poisson_triplet, stable_triplet
from srdcert.spectral import (
    _clamp_ratio,
    build_profile,
    char_joint,
    char_joint_grid,
    char_marginal,
    dependence_ratio,
    dependence_ratio_grid,
    marginal_exponent_grid,
    marginal_exponent_sq,
    max_dependence_ratio,
    t_lattice,
)


class TestMarginalExponent:
    def test_gaussian_box(self):
        # 0.5 * s^2 * ||f||_2^2 on the unit box
        assert marginal_exponent_sq(box_kernel(), gaussian_triplet(1.0), 2.0) == \
            pytest.approx(2.0, rel=1e-12)

    def test_stable_scaling_identity(self):
        # |s|^alpha * ||f||_alpha^alpha for calibrated stable integrators
        for alpha in (0.5, 1.0, 1.5):
            trip = stable_triplet(alpha)
            got = marginal_exponent_sq(box_kernel(), trip, 2.0)
            assert got == pytest.approx(2.0 ** alpha, rel=1e-12)

    def test_stable_tent(self):
        # ||tent||_1 = 1, so sigma^2(s) = |s| for alpha = 1
        assert marginal_exponent_sq(tent_kernel(), stable_triplet(1.0), 3.0) == \
            pytest.approx(3.0, rel=1e-11)

    def test_envelope_support(self):
        got = marginal_exponent_sq(powerlaw_kernel(1.5), stable_triplet(1.0), 1.0)
        assert got == pytest.approx(6.0, rel=1e-10)

    def test_grid_matches_scalar(self):
        s = np.array([0.1, 1.0, 10.0])
        grid, err = marginal_exponent_grid(box_kernel(), stable_triplet(1.5), s)
        scalars = [marginal_exponent_sq(box_kernel(), stable_triplet(1.5), v) for v in s]
        assert np.allclose(grid, scalars, rtol=1e-11)
        assert err < 1e-8

    def test_two_dimensional_box(self):
        k = box_kernel(0.0, 1.0, dim=2)
        assert marginal_exponent_sq(k, gaussian_triplet(1.0), 2.0) == \
            pytest.approx(2.0, rel=1e-8)

    @given(s=st.floats(min_value=1e-2, max_value=1e2))
    @settings(max_examples=20, deadline=None)
    def test_evenness(self, s):
        k = box_kernel()
        trip = stable_triplet(1.3)
        assert marginal_exponent_sq(k, trip, s) == marginal_exponent_sq(k, trip, -s)


class TestCharacteristicFunctions:
    def test_marginal_gaussian_box(self):
        got = char_marginal(box_kernel(), gaussian_triplet(1.0), 1.0)
        assert got == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_marginal_consistency_with_exponent(self):
        # -log|char| must reproduce sigma^2 for every variant
        k = tent_kernel()
        for trip in (gaussian_triplet(0.7), stable_triplet(1.2),
                     poisson_triplet(1.0, atoms=(1.0,))):
            for s in (0.5, 2.0):
                sig = marginal_exponent_sq(k, trip, s)
                mod = abs(char_marginal(k, trip, s))
                assert -math.log(mod) == pytest.approx(sig, rel=1e-10, abs=1e-12)

    def test_joint_box_stable_overlap_oracle(self):
        # t=0.5 on the unit box: exponent = 0.5*(|s1+s2| + |s1| + |s2|)
        got = char_joint(box_kernel(), stable_triplet(1.0), 0.5, 1.0, 1.0)
        assert got == pytest.approx(math.exp(-2.0), rel=1e-11)

    def test_joint_factorises_beyond_diameter(self):
        k = box_kernel()
        trip = stable_triplet(1.5)
        joint = char_joint(k, trip, 1.7, 1.0, 2.0)
        product = char_marginal(k, trip, 1.0) * char_marginal(k, trip, 2.0)
        assert joint == pytest.approx(product, rel=1e-11)

    def test_joint_poisson_oracle(self):
        got = char_joint(box_kernel(), poisson_triplet(1.0, atoms=(1.0,)), 0.5, 1.0, 2.0)
        assert got.real == pytest.approx(-0.06724914634312716, rel=1e-10)
        assert got.imag == pytest.approx(-0.12815200176607697, rel=1e-10)

    def test_joint_grid_shape_and_symmetry(self):
        s = np.array([0.5, 1.0, 2.0])
        grid, err = char_joint_grid(box_kernel(), stable_triplet(1.0), 0.3, s, s)
        assert grid.shape == (3, 3)
        assert err < 1e-9
        # symmetric kernel overlap: swapping (s1, s2) conjugate-symmetric in
        # the symmetric-measure case means equal moduli
        assert abs(grid[0, 2]) == pytest.approx(abs(grid[2, 0]), rel=1e-11)

    def test_zero_frequency_is_one(self):
        got = char_joint(box_kernel(), stable_triplet(1.0), 0.5, 0.0, 0.0)
        assert got == pytest.approx(1.0, rel=1e-13)


class TestDependenceRatio:
    def test_stable_box_equals_tent(self):
        trip = stable_triplet(1.0)
        for t, expect in ((0.0, 1.0), (0.25, 0.75), (0.4, 0.6), (0.9, 0.1), (1.5, 0.0)):
            got = dependence_ratio(box_kernel(), trip, t, 1.0, 3.0)
            assert got == pytest.approx(expect, abs=1e-11)

    def test_stable_frequency_independence(self):
        s = np.geomspace(1e-3, 1e3, 9)
        grid, _ = dependence_ratio_grid(box_kernel(), stable_triplet(1.5), 0.3, s, s)
        assert float(grid.max() - grid.min()) < 1e-10

    def test_tent_gaussian_oracle(self):
        # gamma = 2 collapse: overlap integral / ||tent||_2^2 = 23/32 at t = 0.5
        rm = max_dependence_ratio(tent_kernel(), gaussian_triplet(1.0), 0.5)
        assert rm.method == "analytic-homogeneous"
        assert rm.value == pytest.approx(23.0 / 32.0, rel=1e-11)

    def test_powerlaw_oracle(self):
        rm = max_dependence_ratio(powerlaw_kernel(1.5), stable_triplet(1.0), 2.0)
        assert rm.value == pytest.approx(0.9130791975880924, rel=1e-8)

    def test_grid_agrees_with_homogeneous(self):
        trip = stable_triplet(1.0)
        exact = max_dependence_ratio(box_kernel(), trip, 0.4)
        grid = max_dependence_ratio(box_kernel(), trip, 0.4, force_grid=True,
                                    grid_points=7, refine_rounds=1)
        assert grid.method == "grid-approximate"
        assert grid.value == pytest.approx(exact.value, abs=1e-9)
        assert math.isfinite(grid.s1) and math.isfinite(grid.s2)

    def test_lag_symmetry(self):
        trip = poisson_triplet(1.0, atoms=(1.0,))
        a = max_dependence_ratio(box_kernel(), trip, 0.35, grid_points=7,
                                 refine_rounds=1)
        b = max_dependence_ratio(box_kernel(), trip, -0.35, grid_points=7,
                                 refine_rounds=1)
        assert a.value == pytest.approx(b.value, abs=1e-10)

    def test_ratio_at_zero_lag_is_one(self):
        for kern in (box_kernel(), tent_kernel(), powerlaw_kernel(1.5)):
            rm = max_dependence_ratio(kern, stable_triplet(1.0), 0.0)
            assert rm.value == pytest.approx(1.0, abs=1e-10)

    def test_clamp_accepts_tiny_overshoot(self):
        vals = np.array([0.3, 1.0 + 5e-10])
        out = _clamp_ratio(vals)
        assert out[1] == 1.0

    def test_clamp_rejects_large_overshoot(self):
        with pytest.raises(QuadratureError):
            _clamp_ratio(np.array([1.0 + 1e-6]))

    @given(t=st.floats(min_value=0.0, max_value=2.0))
    @settings(max_examples=25, deadline=None)
    def test_ratio_in_unit_interval(self, t):
        rm = max_dependence_ratio(box_kernel(), stable_triplet(0.8), t)
        assert 0.0 <= rm.value <= 1.0


class TestProfile:
    def test_build_stable_box(self):
        prof = build_profile(box_kernel(), stable_triplet(1.0), window=3.0,
                             t_step=0.25, s_points=12)
        assert prof.ratio_method == "analytic-homogeneous"
        assert len(prof.s_grid) == 12
        assert prof.t_grid.shape == (25, 1)
        mid = np.argmin(np.abs(prof.t_grid[:, 0]))
        assert prof.ratio_values[mid] == pytest.approx(1.0, abs=1e-10)
        # tent shape on the lattice
        idx = np.argmin(np.abs(prof.t_grid[:, 0] - 0.5))
        assert prof.ratio_values[idx] == pytest.approx(0.5, abs=1e-10)
        outer = np.abs(prof.t_grid[:, 0]) >= 1.0
        assert np.all(prof.ratio_values[outer] < 1e-12)

    def test_profile_symmetry(self):
        prof = build_profile(box_kernel(), poisson_triplet(1.0, atoms=(1.0,)),
                             window=1.5, t_step=0.5, s_points=8)
        vals = prof.ratio_values
        assert np.allclose(vals, vals[::-1], atol=1e-12)
        assert prof.ratio_method == "grid-approximate"

    def test_sigma_grid_positive_and_increasing_for_stable(self):
        prof = build_profile(box_kernel(), stable_triplet(1.0), window=2.0,
                             t_step=0.5, s_points=16)
        assert np.all(prof.sigma_sq > 0)
        assert np.all(np.diff(prof.sigma_sq) > 0)

    def test_consistency_gap_small(self):
        prof = build_profile(box_kernel(), stable_triplet(1.0), window=2.0,
                             t_step=0.5, s_points=8)
        assert prof.consistency_gap() < 1e-9

    def test_degenerate_kernel_rejected(self):
        with pytest.raises(RejectionError) as exc:
            build_profile(zero_kernel(), gaussian_triplet(1.0), window=2.0, t_step=0.5)
        assert exc.value.condition == "degenerate-profile"

    def test_bad_window_rejected(self):
        with pytest.raises(RejectionError):
            build_profile(box_kernel(), gaussian_triplet(), window=1.0, t_step=2.0)
        with pytest.raises(RejectionError):
            build_profile(box_kernel(), gaussian_triplet(), window=-1.0, t_step=0.5)

    def test_lattice_contains_origin(self):
        lat = t_lattice(2.0, 0.3, 1)
        assert np.any(np.all(lat == 0.0, axis=1))
        lat2 = t_lattice(1.0, 0.5, 2)
        assert lat2.shape == (25, 2)
        assert np.any(np.all(lat2 == 0.0, axis=1))
