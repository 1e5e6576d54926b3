"""Kernel evaluation, norms, and integrator-compatibility checks.

Frozen oracle notes: the drift-condition literal 5.079683366298239 is the
closed form 2 * 1.6 * 2 * (2**(2/3))**(-1/2) for the step-shift integrand
(cross-checked by quadrature to 1e-12); the jump-condition literal is
(4/pi) * 6 since the clipped moment of a calibrated alpha=1 measure is
exactly (4/pi)*|v|.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srdcert.errors import DivergentNormError, RejectionError
from srdcert.kernels import (
    BoundedBox,
    DecayEnvelope,
    Kernel,
    box_kernel,
    check_integrability,
    gaussian_kernel,
    lp_norm,
    powerlaw_kernel,
    tabulated_kernel,
    tent_kernel,
    zero_kernel,
)
from srdcert.levy import gaussian_triplet, poisson_triplet, stable_triplet


def strip_closed_norms(kernel: Kernel) -> Kernel:
    """Clone without registered norms, forcing the quadrature path."""
    return Kernel(dim=kernel.dim, func=kernel.func, support=kernel.support,
                  name=kernel.name + "-noclosed", closed_norms=None,
                  knots=kernel.knots, indicator=kernel.indicator,
                  continuous=kernel.continuous)


class TestEvaluation:
    def test_box_masks_outside_exactly(self):
        k = box_kernel(0.0, 1.0)
        x = np.array([[-0.5], [0.0], [0.5], [1.0], [1.5]])
        assert k(x).tolist() == [0.0, 1.0, 1.0, 1.0, 0.0]

    def test_tent_shape(self):
        k = tent_kernel()
        assert k.value_at(0.0) == 1.0
        assert k.value_at(0.5) == 0.5
        assert k.value_at(-0.25) == 0.75
        assert k.value_at(1.5) == 0.0

    def test_powerlaw_plateau_and_tail(self):
        k = powerlaw_kernel(1.5)
        assert k.value_at(0.0) == 1.0
        assert k.value_at(0.5) == 1.0
        assert k.value_at(4.0) == pytest.approx(4.0 ** -1.5, rel=1e-15)

    def test_gaussian_2d(self):
        k = gaussian_kernel(dim=2)
        assert k.value_at(0.0, 0.0) == 1.0
        assert k.value_at(1.0, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)
        assert k.value_at(10.0, 0.0) == 0.0  # beyond the truncation box

    def test_scalar_convenience_1d(self):
        k = tent_kernel()
        vals = k(np.array([0.0, 0.5, 2.0]))
        assert vals.tolist() == [1.0, 0.5, 0.0]

    def test_dimension_mismatch(self):
        k = box_kernel(dim=2)
        with pytest.raises(ValueError):
            k(np.zeros((3, 1)))

    def test_tabulated_matches_tent(self):
        grid = np.linspace(-1.0, 1.0, 401)
        vals = np.maximum(1.0 - np.abs(grid), 0.0)
        k = tabulated_kernel((grid,), vals)
        for x in (-0.7, -0.2, 0.0, 0.413, 0.95):
            assert k.value_at(x) == pytest.approx(1.0 - abs(x), abs=1e-12)
        assert k.value_at(1.2) == 0.0

    def test_tabulated_2d(self):
        gx = np.linspace(0.0, 1.0, 11)
        gy = np.linspace(0.0, 2.0, 21)
        vals = np.add.outer(gx, gy)
        k = tabulated_kernel((gx, gy), vals)
        assert k.value_at(0.35, 1.15) == pytest.approx(1.5, abs=1e-12)

    def test_support_validation(self):
        with pytest.raises(RejectionError):
            BoundedBox((0.0,), (0.0,))
        with pytest.raises(RejectionError):
            DecayEnvelope(radius=1.0, exponent=-2.0)
        with pytest.raises(RejectionError):
            box_kernel(1.0, 0.0)


class TestNorms:
    def test_box_all_orders(self):
        k = box_kernel(0.0, 2.0)
        for p in (0.5, 1.0, 2.0, 3.7):
            assert lp_norm(k, p) == pytest.approx(2.0 ** (1.0 / p), rel=1e-14)

    def test_tent_closed_forms(self):
        k = tent_kernel()
        assert lp_norm(k, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert lp_norm(k, 0.5) == pytest.approx((4.0 / 3.0) ** 2, rel=1e-14)
        assert lp_norm(k, 2.0) == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-14)

    def test_gaussian_closed_form(self):
        assert lp_norm(gaussian_kernel(), 2.0) == pytest.approx(1.1195151349202477, rel=1e-13)

    def test_powerlaw_closed_forms(self):
        k = powerlaw_kernel(1.5)
        assert lp_norm(k, 1.0) == pytest.approx(6.0, rel=1e-14)
        assert lp_norm(k, 2.0) == pytest.approx(math.sqrt(3.0), rel=1e-14)

    @pytest.mark.parametrize("make,p", [
        (lambda: tent_kernel(), 1.0),
        (lambda: tent_kernel(), 2.0),
        (lambda: gaussian_kernel(), 2.0),
        (lambda: powerlaw_kernel(1.5), 1.0),
        (lambda: powerlaw_kernel(1.5), 2.0),
        (lambda: powerlaw_kernel(0.8), 3.0),
    ])
    def test_quadrature_matches_closed(self, make, p):
        k = make()
        closed = lp_norm(k, p)
        quad_only = lp_norm(strip_closed_norms(k), p)
        assert quad_only == pytest.approx(closed, rel=1e-9)

    def test_divergent_norm_raises(self):
        k = powerlaw_kernel(1.5)
        with pytest.raises(DivergentNormError):
            lp_norm(k, 0.5)  # p*beta = 0.75 <= 1
        with pytest.raises(DivergentNormError):
            lp_norm(powerlaw_kernel(0.8), 1.0)

    def test_gaussian_2d_quadrature(self):
        k = strip_closed_norms(gaussian_kernel(dim=2))
        assert lp_norm(k, 2.0) == pytest.approx((math.pi / 2.0) ** 0.5, rel=1e-8)

    def test_zero_kernel_norm(self):
        assert lp_norm(zero_kernel(), 2.0) == 0.0

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            lp_norm(tent_kernel(), 0.0)
        with pytest.raises(ValueError):
            lp_norm(tent_kernel(), -1.0)

    @given(p=st.floats(min_value=0.7, max_value=4.0))
    @settings(max_examples=25, deadline=None)
    def test_norm_scaling_property(self, p):
        # stretching the tent by w multiplies the L^p norm by w**(1/p)
        base = lp_norm(tent_kernel(1.0), p)
        wide = lp_norm(tent_kernel(2.0), p)
        assert wide == pytest.approx(2.0 ** (1.0 / p) * base, rel=1e-12)


class TestIntegrability:
    def test_stable_powerlaw_pair(self):
        # the long-tail pair: field exists even though dependence is long
        report = check_integrability(powerlaw_kernel(1.5), stable_triplet(1.0))
        assert report.all_finite
        by_key = {c.key: c for c in report.conditions}
        assert by_key["drift"].value == 0.0
        assert by_key["gaussian"].value == 0.0
        assert by_key["jumps"].value == pytest.approx((4.0 / math.pi) * 6.0, rel=1e-9)

    def test_gaussian_box_pair(self):
        report = check_integrability(box_kernel(0.0, 1.0), gaussian_triplet(2.0))
        assert report.all_finite
        by_key = {c.key: c for c in report.conditions}
        assert by_key["gaussian"].value == pytest.approx(2.0, rel=1e-12)
        assert by_key["jumps"].value == 0.0

    def test_poisson_drift_step_oracle(self):
        trip = poisson_triplet(2.0, atoms=(-0.5, 2.0), weights=(0.6, 0.4))
        report = check_integrability(powerlaw_kernel(1.5), trip)
        assert report.all_finite
        by_key = {c.key: c for c in report.conditions}
        assert by_key["drift"].value == pytest.approx(5.079683366298239, rel=1e-6)

    def test_drift_divergence_flagged(self):
        trip = stable_triplet(1.0, a0=1.0)
        report = check_integrability(powerlaw_kernel(0.8), trip)
        by_key = {c.key: c for c in report.conditions}
        assert by_key["drift"].finite is False
        assert not report.all_finite

    def test_gaussian_divergence_flagged(self):
        report = check_integrability(powerlaw_kernel(0.4), gaussian_triplet(1.0))
        by_key = {c.key: c for c in report.conditions}
        assert by_key["gaussian"].finite is False

    def test_jump_divergence_flagged(self):
        # alpha * beta = 0.5*1.5 <= 1: the clipped moment does not integrate
        report = check_integrability(powerlaw_kernel(1.5), stable_triplet(0.5))
        by_key = {c.key: c for c in report.conditions}
        assert by_key["jumps"].finite is False

    def test_poisson_box_drift_zero(self):
        trip = poisson_triplet(2.0, atoms=(-0.5, 2.0), weights=(0.6, 0.4))
        report = check_integrability(box_kernel(0.0, 1.0), trip)
        by_key = {c.key: c for c in report.conditions}
        # on the box f = 1 and the shift at v=1 vanishes for these atoms
        assert by_key["drift"].value == pytest.approx(0.0, abs=1e-12)
        assert report.all_finite

    def test_report_rows_format(self):
        report = check_integrability(box_kernel(), gaussian_triplet())
        rows = report.rows()
        assert len(rows) == 3
        assert {r[0] for r in rows} == {"drift", "gaussian", "jumps"}
        assert all(r[1] in {"finite", "divergent", "unknown"} for r in rows)
