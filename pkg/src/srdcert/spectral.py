"""Marginal exponents, joint characteristic functionals, dependence ratios.

The marginal exponent sigma^2(s) = integral Re K(s f(-x)) dx equals
-log|char_marginal(s)| and measures how much randomness a single frequency
sees.  The dependence ratio at lag t,

    ratio_t(s1, s2) = integral sqrt(Re K(s1 f(t-x)) Re K(s2 f(-x))) dx
                      / (sigma(s1) sigma(s2)),

always lands in [0, 1]; its supremum over frequencies drives certification.
A spectral profile bundles both quantities on explicit grids together with
error estimates and method provenance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import levy
from .errors import QuadratureError, RejectionError
from .kernels import BoundedBox, DecayEnvelope, Kernel, lp_norm
from .quadrature import (
    Segment,
    integrate_box,
    integrate_segments,
    merge_intervals,
    tail_segments,
)

ABS_TOL = 1e-12
REL_TOL = 1e-10
RATIO_CLAMP_TOL = 1e-9
DEFAULT_S_BOX = (1e-3, 1e3)
DEFAULT_S_POINTS = 25
REFINE_ROUNDS = 3


# ---------------------------------------------------------------------------
# integration domains


def _box_union_segments(kernel: Kernel, shifts: tuple[float, ...]):
    """1-D segments where any of f(shift - x) can be nonzero (box support)."""
    sup = kernel.support
    lo, hi = sup.lo[0], sup.hi[0]
    intervals = merge_intervals([(sh - hi, sh - lo) for sh in shifts])
    segments = [Segment(a, b) for a, b in intervals]
    breaks: list[float] = []
    for sh in shifts:
        breaks.extend([sh - lo, sh - hi])
        breaks.extend(sh - k for k in kernel.knots)
    return segments, breaks, 0.0


def _box_intersection_segments(kernel: Kernel, t: float):
    sup = kernel.support
    lo, hi = sup.lo[0], sup.hi[0]
    a = max(t - hi, -hi)
    b = min(t - lo, -lo)
    if not a < b:
        return [], [], 0.0
    breaks = [t - k for k in kernel.knots] + [-k for k in kernel.knots]
    return [Segment(a, b)], breaks, 0.0


def _envelope_segments(kernel: Kernel, shifts: tuple[float, ...],
                       tail_exponent: float, tail_coef: float,
                       abs_tol: float = ABS_TOL):
    """Core segment plus log-mapped tails under a decay envelope.

    Beyond the core radius every |shift - x| >= |x|/2, so the envelope bound
    with an extra 2**exponent folded into ``tail_coef`` controls the tail.
    """
    sup = kernel.support
    shift_max = max((abs(sh) for sh in shifts), default=0.0)
    core = max(4.0 * sup.radius, 4.0, 2.0 * shift_max + 2.0 * sup.radius)
    if tail_exponent <= 1.0:
        raise QuadratureError(
            f"spatial tail exponent {tail_exponent:g} <= 1: integral diverges",
            residual=math.inf)
    tails, residual = tail_segments(core, tail_exponent, tail_coef, 1, abs_tol)
    breaks = [sh - k for sh in shifts for k in (-sup.radius, sup.radius)]
    return [Segment(-core, core)] + tails, breaks, residual


def _re_tail_coef(kernel: Kernel, triplet: levy.LevyTriplet, s_scale: float,
                  power: float = 1.0) -> tuple[float, float]:
    """(exponent, coef) bounding Re K(s f(shift - x))**power tails."""
    sup = kernel.support
    gamma, coef = levy.small_signal_bound(triplet)
    amp = sup.amplitude * 2.0 ** sup.exponent
    return power * gamma * sup.exponent, (coef * (s_scale * amp) ** gamma) ** power


def _complex_tail_coef(kernel: Kernel, triplet: levy.LevyTriplet,
                       s_scale: float) -> tuple[float, float]:
    """(exponent, coef) bounding |K(s f(shift - x))| tails."""
    sup = kernel.support
    exp_re, coef_re = _re_tail_coef(kernel, triplet, s_scale)
    c_im = levy.im_linear_coef(triplet)
    if c_im == 0.0:
        return exp_re, coef_re
    amp = sup.amplitude * 2.0 ** sup.exponent
    exp_im = sup.exponent
    return min(exp_re, exp_im), coef_re + c_im * s_scale * amp


# ---------------------------------------------------------------------------
# core integrals, 1-D fast paths plus generic d <= 3


def _integrate_shifted(kernel: Kernel, integrand_of_fvals, shifts,
                       tail_exponent: float, tail_coef: float,
                       abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL):
    """integral g(f(shift_1 - x), ..., f(shift_m - x)) dx for vector-valued g.

    ``integrand_of_fvals`` maps a tuple of kernel values at one point x to a
    1-D array.  Returns (values, error).
    """
    d = kernel.dim
    shifts = tuple(np.atleast_1d(np.asarray(sh, dtype=float)) for sh in shifts)
    if d == 1:
        flat = tuple(float(sh[0]) for sh in shifts)
        if isinstance(kernel.support, BoundedBox):
            segs, breaks, residual = _box_union_segments(kernel, flat)
        else:
            segs, breaks, residual = _envelope_segments(
                kernel, flat, tail_exponent, tail_coef, abs_tol)

        def g(x: float) -> np.ndarray:
            pts = np.array([[sh - x] for sh in flat])
            fv = kernel(pts)
            return integrand_of_fvals(fv)

        vals, err = integrate_segments(g, segs, breakpoints=breaks,
                                       abs_tol=abs_tol, rel_tol=rel_tol)
        return vals, err + residual

    lo, hi, residual = _product_domain(kernel, shifts, tail_exponent, tail_coef, abs_tol)

    def g_nd(x: np.ndarray) -> np.ndarray:
        pts = np.stack([sh - x for sh in shifts])
        fv = kernel(pts)
        return integrand_of_fvals(fv)

    vals, err = integrate_box(g_nd, lo, hi, abs_tol=abs_tol, rel_tol=max(rel_tol, 1e-8))
    return vals, err + residual


def _product_domain(kernel: Kernel, shifts, tail_exponent, tail_coef, abs_tol):
    sup = kernel.support
    d = kernel.dim
    if isinstance(sup, BoundedBox):
        lo = np.min(np.stack([sh - np.asarray(sup.hi) for sh in shifts]), axis=0)
        hi = np.max(np.stack([sh - np.asarray(sup.lo) for sh in shifts]), axis=0)
        return lo, hi, 0.0
    if tail_exponent <= d:
        raise QuadratureError(
            f"spatial tail exponent {tail_exponent:g} <= dim {d}", residual=math.inf)
    shift_max = max(float(np.max(np.abs(sh))) for sh in shifts)
    area = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[d]
    r = max(4.0 * sup.radius, 4.0, 2.0 * shift_max + 2.0 * sup.radius)
    bound = lambda rr: tail_coef * area * rr ** (d - tail_exponent) / (tail_exponent - d)
    while bound(r) > abs_tol and r < 1e5:
        r *= 2.0
    return np.full(d, -r), np.full(d, r), bound(r)


def marginal_exponent_grid(kernel: Kernel, triplet: levy.LevyTriplet,
                           s_values: np.ndarray) -> tuple[np.ndarray, float]:
    """sigma^2 on a whole frequency grid in one adaptive pass."""
    s_values = np.asarray(s_values, dtype=float)
    s_scale = float(np.max(np.abs(s_values))) if s_values.size else 1.0
    exp_t, coef_t = (math.inf, 0.0)
    if isinstance(kernel.support, DecayEnvelope):
        exp_t, coef_t = _re_tail_coef(kernel, triplet, s_scale)

    def integrand(fv: np.ndarray) -> np.ndarray:
        return np.asarray(levy.cumulant_re(triplet, s_values * fv[0]))

    zero = np.zeros(kernel.dim)
    vals, err = _integrate_shifted(kernel, integrand, (zero,), exp_t, coef_t)
    return np.maximum(vals, 0.0), err


@lru_cache(maxsize=200_000)
def _mexp_scalar(kernel: Kernel, triplet: levy.LevyTriplet, s: float) -> tuple[float, float]:
    vals, err = marginal_exponent_grid(kernel, triplet, np.array([s]))
    return float(vals[0]), err


def marginal_exponent_sq(kernel: Kernel, triplet: levy.LevyTriplet, s: float) -> float:
    """sigma^2(s) = integral Re K(s f(-x)) dx, cached per (kernel, triplet, s)."""
    return _mexp_scalar(kernel, triplet, float(s))[0]


def char_marginal(kernel: Kernel, triplet: levy.LevyTriplet, u: float) -> complex:
    """Characteristic function of the field at one point."""
    exp_t, coef_t = (math.inf, 0.0)
    if isinstance(kernel.support, DecayEnvelope):
        exp_t, coef_t = _complex_tail_coef(kernel, triplet, abs(u))

    def integrand(fv: np.ndarray) -> np.ndarray:
        return np.atleast_1d(levy.cumulant(triplet, u * fv[0]))

    zero = np.zeros(kernel.dim)
    vals, _ = _integrate_shifted(kernel, integrand, (zero,), exp_t, coef_t)
    return complex(np.exp(-vals[0]))


def char_joint(kernel: Kernel, triplet: levy.LevyTriplet, t, s1: float,
               s2: float) -> complex:
    """Joint characteristic function E exp(i(s1 X(t) + s2 X(0)))."""
    out, _ = char_joint_grid(kernel, triplet, t, np.array([s1]), np.array([s2]))
    return complex(out[0, 0])


def char_joint_grid(kernel: Kernel, triplet: levy.LevyTriplet, t,
                    s1_values: np.ndarray, s2_values: np.ndarray
                    ) -> tuple[np.ndarray, float]:
    """Joint characteristic function on an (s1, s2) product grid."""
    s1_values = np.asarray(s1_values, dtype=float)
    s2_values = np.asarray(s2_values, dtype=float)
    n1, n2 = len(s1_values), len(s2_values)
    s_scale = float(max(np.max(np.abs(s1_values)), np.max(np.abs(s2_values))))
    exp_t, coef_t = (math.inf, 0.0)
    if isinstance(kernel.support, DecayEnvelope):
        exp_t, coef_t = _complex_tail_coef(kernel, triplet, s_scale)
        coef_t *= 2.0  # two shifted copies contribute

    def integrand(fv: np.ndarray) -> np.ndarray:
        args = s1_values[:, None] * fv[0] + s2_values[None, :] * fv[1]
        return np.asarray(levy.cumulant(triplet, args.ravel()))

    t_vec = np.atleast_1d(np.asarray(t, dtype=float))
    zero = np.zeros(kernel.dim)
    vals, err = _integrate_shifted(kernel, integrand, (t_vec, zero), exp_t, coef_t)
    return np.exp(-vals.reshape(n1, n2)), err


def dependence_numerator_grid(kernel: Kernel, triplet: levy.LevyTriplet, t,
                              s1_values: np.ndarray, s2_values: np.ndarray
                              ) -> tuple[np.ndarray, float]:
    """integral sqrt(Re K(s1 f(t-x)) Re K(s2 f(-x))) dx on a product grid.

    The integrand factorises pointwise, so a grid of n1 x n2 pairs costs
    n1 + n2 cumulant evaluations per x.
    """
    s1_values = np.asarray(s1_values, dtype=float)
    s2_values = np.asarray(s2_values, dtype=float)
    t_vec = np.atleast_1d(np.asarray(t, dtype=float))
    s_scale = float(max(np.max(np.abs(s1_values)), np.max(np.abs(s2_values))))
    exp_t, coef_t = (math.inf, 0.0)
    if isinstance(kernel.support, DecayEnvelope):
        exp_t, coef_t = _re_tail_coef(kernel, triplet, s_scale)

    def integrand(fv: np.ndarray) -> np.ndarray:
        u = np.sqrt(np.asarray(levy.cumulant_re(triplet, s1_values * fv[0])))
        w = np.sqrt(np.asarray(levy.cumulant_re(triplet, s2_values * fv[1])))
        return np.outer(u, w).ravel()

    if kernel.dim == 1 and isinstance(kernel.support, BoundedBox):
        segs, breaks, _ = _box_intersection_segments(kernel, float(t_vec[0]))
        if not segs:
            return np.zeros((len(s1_values), len(s2_values))), 0.0

        def g(x: float) -> np.ndarray:
            fv = kernel(np.array([[float(t_vec[0]) - x], [-x]]))
            return integrand(fv)

        vals, err = integrate_segments(g, segs, breakpoints=breaks, abs_tol=ABS_TOL)
        return vals.reshape(len(s1_values), len(s2_values)), err

    vals, err = _integrate_shifted(kernel, integrand, (t_vec, np.zeros(kernel.dim)),
                                   exp_t, coef_t)
    return vals.reshape(len(s1_values), len(s2_values)), err


def _sigma_for(kernel: Kernel, triplet: levy.LevyTriplet, s_values: np.ndarray
               ) -> np.ndarray:
    out = np.array([marginal_exponent_sq(kernel, triplet, float(s)) for s in s_values])
    if np.any(out <= 0.0):
        bad = float(s_values[np.argmin(out)])
        raise RejectionError("degenerate-profile",
                             f"marginal exponent vanishes at s={bad:g}")
    return np.sqrt(out)


def _clamp_ratio(values: np.ndarray) -> np.ndarray:
    worst = float(np.max(values)) if values.size else 0.0
    if worst > 1.0 + RATIO_CLAMP_TOL:
        raise QuadratureError(
            f"dependence ratio overshoots 1 by {worst - 1.0:.3e}",
            partial=worst, residual=worst - 1.0)
    return np.clip(values, 0.0, 1.0)


def dependence_ratio_grid(kernel: Kernel, triplet: levy.LevyTriplet, t,
                          s1_values: np.ndarray, s2_values: np.ndarray
                          ) -> tuple[np.ndarray, float]:
    """Normalised dependence ratio on a frequency product grid, clamped to [0, 1]."""
    s1_values = np.asarray(s1_values, dtype=float)
    s2_values = np.asarray(s2_values, dtype=float)
    num, err = dependence_numerator_grid(kernel, triplet, t, s1_values, s2_values)
    den = np.outer(_sigma_for(kernel, triplet, s1_values),
                   _sigma_for(kernel, triplet, s2_values))
    return _clamp_ratio(num / den), err


def dependence_ratio(kernel: Kernel, triplet: levy.LevyTriplet, t, s1: float,
                     s2: float) -> float:
    grid, _ = dependence_ratio_grid(kernel, triplet, t, np.array([s1]), np.array([s2]))
    return float(grid[0, 0])


@dataclass(frozen=True)
class RatioMax:
    """Supremum of the dependence ratio over frequencies at one lag."""

    value: float
    s1: float
    s2: float
    method: str
    error: float
    s_box: tuple[float, float]
    resolution: int


@lru_cache(maxsize=4096)
def _gamma_norm_pow(kernel: Kernel, gamma: float) -> float:
    return lp_norm(kernel, gamma) ** gamma


def max_dependence_ratio(kernel: Kernel, triplet: levy.LevyTriplet, t,
                         s_box: tuple[float, float] = DEFAULT_S_BOX,
                         grid_points: int = DEFAULT_S_POINTS,
                         refine_rounds: int = REFINE_ROUNDS,
                         force_grid: bool = False) -> RatioMax:
    """sup over (s1, s2) of the dependence ratio at lag t.

    Homogeneous integrators (pure Gaussian, pure stable) admit an exact
    frequency-free form: the ratio collapses to
    integral |f(t-x) f(-x)|**(gamma/2) dx / ||f||_gamma^gamma.  Everything
    else runs a log-grid search over ``s_box`` squared, refined around the
    argmax; the result is tagged "grid-approximate" with the searched box
    recorded, and is exact only up to that search.
    """
    gamma = levy.homogeneity_exponent(triplet)
    if gamma is not None and not force_grid:
        value, err = _homogeneous_ratio(kernel, triplet, t, gamma)
        return RatioMax(value=value, s1=math.nan, s2=math.nan,
                        method="analytic-homogeneous", error=err,
                        s_box=s_box, resolution=0)

    s_vals = np.geomspace(s_box[0], s_box[1], grid_points)
    ratios, err = dependence_ratio_grid(kernel, triplet, t, s_vals, s_vals)
    idx = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    best = float(ratios[idx])
    b1, b2 = float(s_vals[idx[0]]), float(s_vals[idx[1]])

    spacing = (s_box[1] / s_box[0]) ** (1.0 / (grid_points - 1))
    for _ in range(refine_rounds):
        spacing = spacing ** 0.5
        g1 = np.geomspace(b1 / spacing, b1 * spacing, 5)
        g2 = np.geomspace(b2 / spacing, b2 * spacing, 5)
        g1 = np.clip(g1, s_box[0], s_box[1])
        g2 = np.clip(g2, s_box[0], s_box[1])
        sub, sub_err = dependence_ratio_grid(kernel, triplet, t, g1, g2)
        sidx = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if float(sub[sidx]) >= best:
            best = float(sub[sidx])
            b1, b2 = float(g1[sidx[0]]), float(g2[sidx[1]])
        err = max(err, sub_err)

    return RatioMax(value=best, s1=b1, s2=b2, method="grid-approximate",
                    error=err, s_box=s_box, resolution=grid_points)


def _homogeneous_ratio(kernel: Kernel, triplet: levy.LevyTriplet, t,
                       gamma: float) -> tuple[float, float]:
    t_vec = np.atleast_1d(np.asarray(t, dtype=float))
    exp_t = coef_t = 0.0
    if isinstance(kernel.support, DecayEnvelope):
        sup = kernel.support
        amp = sup.amplitude * 2.0 ** sup.exponent
        exp_t, coef_t = gamma * sup.exponent, amp ** gamma
    else:
        exp_t, coef_t = math.inf, 0.0

    def integrand(fv: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.abs(fv[0] * fv[1]) ** (gamma / 2.0))

    if kernel.dim == 1 and isinstance(kernel.support, BoundedBox):
        segs, breaks, _ = _box_intersection_segments(kernel, float(t_vec[0]))
        if not segs:
            return 0.0, 0.0

        def g(x: float) -> np.ndarray:
            fv = kernel(np.array([[float(t_vec[0]) - x], [-x]]))
            return integrand(fv)

        vals, err = integrate_segments(g, segs, breakpoints=breaks, abs_tol=ABS_TOL)
        num = float(vals[0])
    else:
        vals, err = _integrate_shifted(kernel, integrand,
                                       (t_vec, np.zeros(kernel.dim)), exp_t, coef_t)
        num = float(vals[0])
    den = _gamma_norm_pow(kernel, gamma)
    if den <= 0.0:
        raise RejectionError("degenerate-profile", "kernel gamma-norm vanishes")
    value = num / den
    if value > 1.0 + RATIO_CLAMP_TOL:
        raise QuadratureError(f"homogeneous ratio overshoots 1: {value}",
                              partial=value, residual=value - 1.0)
    return min(max(value, 0.0), 1.0), err / den


# ---------------------------------------------------------------------------
# profile


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Gridded view of one kernel-integrator pair.

    Frequencies carry the marginal exponent; lags carry the maximal
    dependence ratio.  ``ratio_method`` records whether ratios are exact
    (homogeneous collapse) or a grid search, and ``s_box`` what was searched.
    """

    kernel: Kernel
    triplet: levy.LevyTriplet
    window: float
    t_step: float
    s_grid: np.ndarray
    sigma_sq: np.ndarray
    sigma_err: float
    t_grid: np.ndarray
    ratio_values: np.ndarray
    ratio_error: float
    ratio_method: str
    s_box: tuple[float, float]
    s_points: int

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @property
    def cell_volume(self) -> float:
        return self.t_step ** self.dim

    def sigma_sq_at(self, s: float) -> float:
        return marginal_exponent_sq(self.kernel, self.triplet, s)

    def ratio_at(self, t) -> RatioMax:
        force = self.ratio_method == "grid-approximate"
        return max_dependence_ratio(self.kernel, self.triplet, t,
                                    s_box=self.s_box, force_grid=force)

    def consistency_gap(self, s_values=None) -> float:
        """max |sigma^2(s) + log|char_marginal(s)|| over probe frequencies."""
        if s_values is None:
            s_values = np.geomspace(self.s_box[0] * 10, self.s_box[1] / 10, 5)
        worst = 0.0
        for s in s_values:
            sig = self.sigma_sq_at(float(s))
            mod = abs(char_marginal(self.kernel, self.triplet, float(s)))
            if mod <= 0.0:
                continue
            worst = max(worst, abs(sig + math.log(mod)))
        return worst


def t_lattice(window: float, step: float, dim: int) -> np.ndarray:
    """Symmetric lattice over [-window, window]^dim, always containing 0."""
    n = int(round(window / step))
    axis = step * np.arange(-n, n + 1)
    if dim == 1:
        return axis.reshape(-1, 1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def build_profile(kernel: Kernel, triplet: levy.LevyTriplet, window: float,
                  t_step: float, s_box: tuple[float, float] = DEFAULT_S_BOX,
                  s_points: int = 40) -> SpectralProfile:
    """Compute a spectral profile over [-window, window]^d.

    Rejects degenerate pairs (vanishing marginal exponent), exploits the
    lag symmetry ratio(-t) = ratio(t), and tags ratio provenance.
    """
    if not (window > 0 and t_step > 0 and t_step <= window):
        raise RejectionError("profile-window",
                             f"need 0 < t_step <= window, got {t_step}, {window}")
    if not (0 < s_box[0] < s_box[1]) or s_points < 4:
        raise RejectionError("profile-sbox", "bad frequency box or point count")

    probe = math.sqrt(s_box[0] * s_box[1])
    if marginal_exponent_sq(kernel, triplet, probe) <= 1e-14:
        raise RejectionError("degenerate-profile",
                             "marginal exponent vanishes at the probe frequency")

    s_grid = np.geomspace(s_box[0], s_box[1], s_points)
    sigma_sq, sigma_err = marginal_exponent_grid(kernel, triplet, s_grid)

    lattice = t_lattice(window, t_step, kernel.dim)
    ratio_values = np.empty(lattice.shape[0])
    cache: dict[tuple[float, ...], tuple[float, float, str]] = {}
    ratio_err = 0.0
    method = ""
    for i, t in enumerate(lattice):
        # ratio(-t) = ratio(t), so fold each lag onto a canonical sign
        tt = tuple(float(v) for v in t)
        key = max(tt, tuple(-v for v in tt))
        if key in cache:
            val, e, method = cache[key]
        else:
            rm = max_dependence_ratio(kernel, triplet, t, s_box=s_box)
            val, e, method = rm.value, rm.error, rm.method
            cache[key] = (val, e, method)
        ratio_values[i] = val
        ratio_err = max(ratio_err, e)

    return SpectralProfile(
        kernel=kernel, triplet=triplet, window=float(window), t_step=float(t_step),
        s_grid=s_grid, sigma_sq=np.asarray(sigma_sq), sigma_err=sigma_err,
        t_grid=lattice, ratio_values=ratio_values, ratio_error=ratio_err,
        ratio_method=method, s_box=(float(s_box[0]), float(s_box[1])),
        s_points=int(s_points),
    )
