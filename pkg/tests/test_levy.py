"""Cumulant evaluation and inequality checks for integrator triplets.

Frozen oracle notes: the stable growth constants below were cross-checked
against split quadrature of 2*int_0^inf (1-cos u) u**(-1-alpha) du (core on
[0, 10] plus a Fourier-weighted tail), agreeing to 2e-11 relative.  The
clipped second moment literal comes from direct quadrature of
min(1, (yv)^2) against the jump density (1.3e-15 relative agreement).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srdcert.errors import RejectionError
from srdcert.levy import (
    CompoundPoisson,
    LevyTriplet,
    NO_JUMPS,
    SymmetricStable,
    TabulatedMeasure,
    calibrated_stable,
    check_negdef_inequalities,
    clipped_second_moment,
    cumulant,
    cumulant_re,
    default_validation_triplets,
    gaussian_triplet,
    homogeneity_exponent,
    poisson_triplet,
    small_signal_bound,
    stable_re_constant,
    stable_triplet,
    truncated_mean_shift,
)

# quadrature oracle values for 2*int_0^inf (1-cos u) u**(-1-alpha) du
STABLE_CONST_ORACLE = {
    0.5: 5.013256549293769,
    0.7: 3.880411142000617,
    1.0: 3.1415926535600085,
    1.5: 3.3421710328940155,
}


class TestStableConstant:
    @pytest.mark.parametrize("alpha,expected", sorted(STABLE_CONST_ORACLE.items()))
    def test_matches_quadrature_oracle(self, alpha, expected):
        assert stable_re_constant(alpha) == pytest.approx(expected, rel=1e-9)

    def test_alpha_one_is_pi(self):
        assert stable_re_constant(1.0) == pytest.approx(math.pi, rel=1e-14)

    def test_calibration_unit_growth(self):
        # calibrated measure: Re K(s) = |s|**alpha exactly
        for alpha in (0.5, 1.0, 1.5):
            trip = stable_triplet(alpha)
            assert cumulant_re(trip, 2.0) == pytest.approx(2.0 ** alpha, rel=1e-13)
            assert cumulant_re(trip, -2.0) == pytest.approx(2.0 ** alpha, rel=1e-13)

    def test_calibrated_value_frozen(self):
        assert stable_triplet(1.5).measure.scale * stable_re_constant(1.5) == pytest.approx(1.0)
        assert cumulant_re(stable_triplet(1.5), 2.0) == pytest.approx(2.8284271247461903, rel=1e-13)


class TestCumulantClosedForms:
    def test_gaussian(self):
        trip = gaussian_triplet(1.0)
        assert cumulant(trip, 2.0) == pytest.approx(2.0)
        trip2 = LevyTriplet(a0=0.5, b0=1.0)
        assert cumulant(trip2, 2.0) == pytest.approx(2.0 - 1.0j)

    def test_poisson_single_atom(self):
        trip = poisson_triplet(1.0, atoms=(1.0,))
        k = cumulant(trip, math.pi)
        # real part 1 - cos(pi) = 2; imaginary part s - sin(s)
        assert k.real == pytest.approx(2.0, abs=1e-14)
        assert k.imag == pytest.approx(math.pi, abs=1e-14)
        assert cumulant_re(trip, math.pi) == pytest.approx(2.0, abs=1e-14)

    def test_poisson_two_atoms_vectorised(self):
        trip = poisson_triplet(2.0, atoms=(-0.5, 2.0), weights=(0.6, 0.4))
        s = np.array([0.0, 0.3, -0.3, 4.0])
        k = cumulant(trip, s)
        assert k.shape == (4,)
        assert k[0] == 0.0
        # evenness of the real part, oddness of the imaginary part
        assert k[1].real == pytest.approx(k[2].real, rel=1e-14)
        assert k[1].imag == pytest.approx(-k[2].imag, rel=1e-14)
        expect_re = 2.0 * (0.6 * (1 - math.cos(-0.5 * 0.3)) + 0.4 * (1 - math.cos(2.0 * 0.3)))
        assert k[1].real == pytest.approx(expect_re, rel=1e-13)

    def test_zero_frequency(self):
        for trip in default_validation_triplets():
            assert cumulant(trip, 0.0) == 0.0
            assert cumulant_re(trip, 0.0) == 0.0


class TestTabulatedMeasure:
    def symmetric_powerlaw_table(self, alpha=0.7, lo=1e-6, hi=1e6, n=121):
        scale = 1.0 / stable_re_constant(alpha)
        pos = np.geomspace(lo, hi, n)
        grid = np.concatenate([-pos[::-1], pos])
        dens = scale * np.abs(grid) ** (-1.0 - alpha)
        return TabulatedMeasure(tuple(grid), tuple(dens))

    def test_matches_stable_closed_form(self):
        # log-linear interpolation is exact on a power law, so the only gap
        # is the outer truncation at |y| = 1e6 (bounded by 4.7e-5 absolute)
        trip = LevyTriplet(b0=0.0, measure=self.symmetric_powerlaw_table(), name="table")
        for s in (0.5, 2.0):
            assert cumulant_re(trip, s) == pytest.approx(abs(s) ** 0.7, rel=1e-4)

    def test_imaginary_part_vanishes_for_symmetric_table(self):
        trip = LevyTriplet(b0=0.0, measure=self.symmetric_powerlaw_table(n=41), name="table")
        k = cumulant(trip, 1.7)
        assert abs(k.imag) < 1e-7 * (1 + abs(k.real))

    def test_one_sided_table_has_drift_component(self):
        grid = (0.5, 1.0, 2.0)
        dens = (1.0, 1.0, 1.0)
        trip = LevyTriplet(b0=0.0, measure=TabulatedMeasure(grid, dens), name="one-sided")
        k = cumulant(trip, 1.0)
        assert k.real > 0
        assert k.imag != pytest.approx(0.0, abs=1e-6)

    def test_rejects_grid_inside_cutoff(self):
        with pytest.raises(RejectionError):
            TabulatedMeasure((1e-12, 1.0), (1.0, 1.0))

    def test_rejects_unsorted_grid(self):
        with pytest.raises(RejectionError):
            TabulatedMeasure((1.0, 0.5), (1.0, 1.0))

    def test_rejects_negative_density(self):
        with pytest.raises(RejectionError):
            TabulatedMeasure((0.5, 1.0), (1.0, -1.0))


class TestTripletValidation:
    def test_degenerate_rejected(self):
        with pytest.raises(RejectionError) as exc:
            LevyTriplet(a0=0.0, b0=0.0, measure=NO_JUMPS)
        assert exc.value.condition == "degenerate-triplet"

    def test_negative_variance_rejected(self):
        with pytest.raises(RejectionError):
            LevyTriplet(b0=-1.0)

    def test_alpha_out_of_range(self):
        for alpha in (0.0, 2.0, -0.3, 2.5):
            with pytest.raises(RejectionError):
                SymmetricStable(alpha=alpha)

    def test_poisson_weights_must_sum_to_one(self):
        with pytest.raises(RejectionError):
            CompoundPoisson(1.0, (1.0, 2.0), (0.5, 0.6))

    def test_poisson_zero_atom_rejected(self):
        with pytest.raises(RejectionError):
            CompoundPoisson(1.0, (0.0,), (1.0,))


class TestMomentHelpers:
    def test_mean_shift_zero_for_symmetric(self):
        assert truncated_mean_shift(stable_triplet(1.2), 0.7) == 0.0
        assert truncated_mean_shift(gaussian_triplet(), 0.7) == 0.0

    def test_mean_shift_poisson_steps(self):
        trip = poisson_triplet(2.0, atoms=(-0.5, 2.0), weights=(0.6, 0.4))
        assert truncated_mean_shift(trip, 0.25) == pytest.approx(1.6)
        assert truncated_mean_shift(trip, 1.0) == pytest.approx(0.0)
        assert truncated_mean_shift(trip, 3.0) == pytest.approx(0.6)

    def test_clipped_second_moment_stable_oracle(self):
        trip = stable_triplet(0.7)
        assert clipped_second_moment(trip, 2.0) == pytest.approx(1.8401865539722853, rel=1e-12)

    def test_clipped_second_moment_poisson(self):
        trip = poisson_triplet(2.0, atoms=(-0.5, 2.0), weights=(0.6, 0.4))
        v = 0.4
        expect = 2.0 * (0.6 * min(1.0, (0.5 * v) ** 2) + 0.4 * min(1.0, (2.0 * v) ** 2))
        assert clipped_second_moment(trip, v) == pytest.approx(expect, rel=1e-14)

    def test_small_signal_bound_dominates(self):
        vs = np.linspace(-1.0, 1.0, 201)
        for trip in default_validation_triplets():
            gamma, coef = small_signal_bound(trip)
            bound = coef * np.abs(vs) ** gamma
            re = cumulant_re(trip, vs)
            assert np.all(re <= bound * (1 + 1e-12) + 1e-15)

    def test_homogeneity_exponent(self):
        assert homogeneity_exponent(stable_triplet(0.8)) == 0.8
        assert homogeneity_exponent(gaussian_triplet()) == 2.0
        assert homogeneity_exponent(poisson_triplet()) is None
        mixed = LevyTriplet(b0=1.0, measure=calibrated_stable(1.0))
        assert homogeneity_exponent(mixed) is None


finite_s = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False,
                     allow_infinity=False)


class TestCumulantProperties:
    @given(s=finite_s)
    @settings(max_examples=60, deadline=None)
    def test_re_even_and_nonnegative(self, s):
        for trip in (gaussian_triplet(0.5), stable_triplet(1.3), poisson_triplet()):
            r1 = cumulant_re(trip, s)
            r2 = cumulant_re(trip, -s)
            assert r1 >= 0.0
            assert r1 == r2  # computed through |s|, equal bit for bit

    @given(s=finite_s)
    @settings(max_examples=60, deadline=None)
    def test_conjugate_symmetry(self, s):
        trip = LevyTriplet(a0=0.3, b0=0.2,
                           measure=CompoundPoisson(1.5, (-1.0, 0.5, 2.0), (0.2, 0.5, 0.3)))
        k1 = cumulant(trip, s)
        k2 = cumulant(trip, -s)
        assert k1.real == pytest.approx(k2.real, rel=1e-12, abs=1e-12)
        assert k1.imag == pytest.approx(-k2.imag, rel=1e-12, abs=1e-12)

    @given(s=st.floats(min_value=1e-3, max_value=1e3),
           lam=st.floats(min_value=1e-2, max_value=1e2))
    @settings(max_examples=60, deadline=None)
    def test_stable_homogeneity(self, s, lam):
        trip = stable_triplet(1.5)
        lhs = cumulant_re(trip, lam * s)
        rhs = lam ** 1.5 * cumulant_re(trip, s)
        assert lhs == pytest.approx(rhs, rel=1e-11)


class TestNegDefInequalities:
    @pytest.mark.parametrize("trip", default_validation_triplets(),
                             ids=lambda t: t.name)
    def test_no_violations_at_moderate_sample_size(self, trip):
        report = check_negdef_inequalities(trip, n_samples=20_000, seed=11)
        assert report.passed, report.violations
        assert report.max_excess == 0.0

    def test_report_covers_all_checks(self):
        report = check_negdef_inequalities(gaussian_triplet(), n_samples=100, seed=0)
        assert len(report.violations) == 7
        assert report.n_samples == 100

    def test_seed_reproducibility(self):
        a = check_negdef_inequalities(stable_triplet(0.7), n_samples=500, seed=3)
        b = check_negdef_inequalities(stable_triplet(0.7), n_samples=500, seed=3)
        assert a == b

    def test_tabulated_measure_accepted(self):
        pos = np.geomspace(1e-3, 1e3, 31)
        grid = tuple(np.concatenate([-pos[::-1], pos]))
        dens = tuple(0.1 * np.abs(np.asarray(grid)) ** (-2.0))
        trip = LevyTriplet(b0=0.0, measure=TabulatedMeasure(grid, dens), name="table")
        report = check_negdef_inequalities(trip, n_samples=40, seed=5)
        assert report.passed, report.violations
