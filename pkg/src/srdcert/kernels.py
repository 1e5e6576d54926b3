"""Moving-average kernels: evaluation, supports, norms, compatibility.

A kernel is a deterministic function f on R^d whose shifts weight the
integrator.  Everything the analytic layer needs is carried as metadata:
where f lives (a bounded box or a power-decay envelope), closed-form norms
when available, and breakpoints that keep quadrature sharp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from . import levy
from .errors import DivergentNormError, RejectionError
from .quadrature import Segment, integrate_box, integrate_segments, tail_segments

NORM_ABS_TOL = 1e-12
# surface area of the unit sphere in R^d, d = 1, 2, 3
_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


@dataclass(frozen=True)
class BoundedBox:
    """Axis-aligned box outside which the kernel vanishes identically."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not lo:
            raise RejectionError("support-box", "box bounds must align")
        if any(not (a < b) for a, b in zip(lo, hi)):
            raise RejectionError("support-box", f"empty box {lo}..{hi}")
        if any(not math.isfinite(v) for v in lo + hi):
            raise RejectionError("support-box", "box bounds must be finite")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def diameter(self) -> float:
        """Largest per-axis extent; shifts farther apart cannot overlap."""
        return max(b - a for a, b in zip(self.lo, self.hi))

    @property
    def outer_radius(self) -> float:
        return max(max(abs(a), abs(b)) for a, b in zip(self.lo, self.hi))

    def volume(self) -> float:
        out = 1.0
        for a, b in zip(self.lo, self.hi):
            out *= b - a
        return out


@dataclass(frozen=True)
class DecayEnvelope:
    """Power-decay bound |f(x)| <= amplitude * |x|**(-exponent) for |x| >= radius,
    together with |f(x)| <= peak inside."""

    radius: float
    exponent: float
    amplitude: float = 1.0
    peak: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise RejectionError("support-envelope", f"radius={self.radius} must be positive")
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise RejectionError("support-envelope", f"exponent={self.exponent} must be positive")
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise RejectionError("support-envelope", "amplitude must be positive")

    def bound_at(self, r: float) -> float:
        if r <= self.radius:
            return self.peak
        return self.amplitude * r ** (-self.exponent)


Support = Union[BoundedBox, DecayEnvelope]


@dataclass(frozen=True, eq=False)
class Kernel:
    """Kernel function plus the metadata the analytic layer consumes.

    ``func`` maps an (n, dim) array of points to n values; evaluation goes
    through ``__call__`` which masks box supports to exact zeros outside.
    ``closed_norms`` maps an order p to the exact L^p norm, returning None
    where no closed form exists.  ``knots`` lists interior 1-D breakpoints
    (kinks, jumps) passed on to quadrature.
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    support: Support
    name: str = ""
    closed_norms: Callable[[float], float | None] | None = None
    knots: tuple[float, ...] = ()
    indicator: bool = False
    continuous: bool = True

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise RejectionError("kernel-dim", f"dim={self.dim} unsupported")
        if isinstance(self.support, BoundedBox) and self.support.dim != self.dim:
            raise RejectionError("kernel-dim", "support box dimension mismatch")

    def __call__(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        squeeze = pts.ndim == 1
        if squeeze:
            pts = pts.reshape(1, -1) if self.dim > 1 else pts.reshape(-1, 1)
            squeeze = self.dim > 1
        elif pts.ndim == 2 and pts.shape[1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, kernel has {self.dim}")
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        vals = np.asarray(self.func(pts), dtype=float).reshape(pts.shape[0])
        if isinstance(self.support, BoundedBox):
            lo = np.asarray(self.support.lo)
            hi = np.asarray(self.support.hi)
            inside = np.all((pts >= lo) & (pts <= hi), axis=1)
            vals = np.where(inside, vals, 0.0)
        return vals[0] if squeeze else vals

    def value_at(self, *coords: float) -> float:
        return float(self(np.array([coords], dtype=float))[0])


# ---------------------------------------------------------------------------
# built-in kernels


def box_kernel(lo: float = 0.0, hi: float = 1.0, dim: int = 1) -> Kernel:
    """Indicator of the box [lo, hi]^dim."""
    if not lo < hi:
        raise RejectionError("kernel-box", f"need lo < hi, got {lo} >= {hi}")
    vol = (hi - lo) ** dim

    def f(pts: np.ndarray) -> np.ndarray:
        return np.ones(pts.shape[0])

    return Kernel(
        dim=dim,
        func=f,
        support=BoundedBox((lo,) * dim, (hi,) * dim),
        name=f"box[{lo:g},{hi:g}]^{dim}",
        closed_norms=lambda p: vol ** (1.0 / p),
        indicator=True,
        continuous=False,
    )


def tent_kernel(half_width: float = 1.0) -> Kernel:
    """(1 - |x|/w)+ on [-w, w], one-dimensional."""
    if not half_width > 0:
        raise RejectionError("kernel-tent", "half_width must be positive")
    w = float(half_width)

    def f(pts: np.ndarray) -> np.ndarray:
        return np.maximum(1.0 - np.abs(pts[:, 0]) / w, 0.0)

    return Kernel(
        dim=1,
        func=f,
        support=BoundedBox((-w,), (w,)),
        name=f"tent(w={w:g})",
        closed_norms=lambda p: (2.0 * w / (p + 1.0)) ** (1.0 / p),
        knots=(0.0,),
    )


def gaussian_kernel(dim: int = 1, width: float = 1.0) -> Kernel:
    """exp(-|x/width|^2), truncated to exact zero where it is < 5e-32."""
    if not width > 0:
        raise RejectionError("kernel-gaussian", "width must be positive")
    w = float(width)
    cut = 8.5 * w

    def f(pts: np.ndarray) -> np.ndarray:
        r2 = np.sum((pts / w) ** 2, axis=1)
        return np.exp(-r2)

    def norm(p: float) -> float:
        return (w * math.sqrt(math.pi / p)) ** (dim / p)

    return Kernel(
        dim=dim,
        func=f,
        support=BoundedBox((-cut,) * dim, (cut,) * dim),
        name=f"gaussian(w={w:g})^{dim}",
        closed_norms=norm,
    )


def powerlaw_kernel(exponent: float, radius: float = 1.0) -> Kernel:
    """min(1, (|x|/radius)**(-exponent)) on the line; heavy algebraic tails."""
    if not exponent > 0:
        raise RejectionError("kernel-powerlaw", "exponent must be positive")
    r0 = float(radius)
    beta = float(exponent)

    def f(pts: np.ndarray) -> np.ndarray:
        r = np.abs(pts[:, 0])
        with np.errstate(divide="ignore", over="ignore"):
            tail = np.where(r > 0, (np.maximum(r, 1e-300) / r0) ** (-beta), np.inf)
        return np.minimum(1.0, tail)

    def norm(p: float) -> float | None:
        pb = p * beta
        if pb <= 1.0:
            return None
        return (2.0 * r0 * pb / (pb - 1.0)) ** (1.0 / p)

    return Kernel(
        dim=1,
        func=f,
        support=DecayEnvelope(radius=r0, exponent=beta, amplitude=r0 ** beta, peak=1.0),
        name=f"powerlaw(beta={beta:g},r0={r0:g})",
        closed_norms=norm,
        knots=(-r0, r0),
    )


def tabulated_kernel(axes: tuple[np.ndarray, ...], values: np.ndarray,
                     name: str = "table") -> Kernel:
    """Multilinear interpolation of sampled values on a rectangular grid,
    zero outside the grid's bounding box."""
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    values = np.asarray(values, dtype=float)
    dim = len(axes)
    if values.shape != tuple(len(a) for a in axes):
        raise RejectionError("kernel-table", "value grid does not match axes")
    if not np.all(np.isfinite(values)):
        raise RejectionError("kernel-table", "values must be finite")
    for a in axes:
        if len(a) < 2 or np.any(np.diff(a) <= 0):
            raise RejectionError("kernel-table", "axes must be strictly increasing")

    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator(axes, values, method="linear",
                                     bounds_error=False, fill_value=0.0)

    def f(pts: np.ndarray) -> np.ndarray:
        return np.asarray(interp(pts), dtype=float)

    knots = tuple(float(v) for v in axes[0][1:-1][:200]) if dim == 1 else ()
    return Kernel(
        dim=dim,
        func=f,
        support=BoundedBox(tuple(float(a[0]) for a in axes),
                           tuple(float(a[-1]) for a in axes)),
        name=name,
        knots=knots,
    )


def zero_kernel(dim: int = 1) -> Kernel:
    """Identically zero; exercises the degenerate-field rejection path."""
    return Kernel(
        dim=dim,
        func=lambda pts: np.zeros(pts.shape[0]),
        support=BoundedBox((0.0,) * dim, (1.0,) * dim),
        name="zero",
        closed_norms=lambda p: 0.0,
        indicator=False,
        continuous=True,
    )


BUILTIN_KERNELS = {
    "box": box_kernel,
    "tent": tent_kernel,
    "gaussian": gaussian_kernel,
    "powerlaw": powerlaw_kernel,
    "zero": zero_kernel,
}


# ---------------------------------------------------------------------------
# norms


def lp_norm(kernel: Kernel, p: float) -> float:
    """L^p norm of the kernel, p > 0.

    Closed forms win when registered; otherwise adaptive quadrature over the
    support, with log-mapped tails under a decay envelope.  Raises
    DivergentNormError when the envelope says p * exponent <= dim.
    """
    if not (p > 0 and math.isfinite(p)):
        raise ValueError(f"norm order p={p} must be positive and finite")
    return _lp_power_integral(kernel, float(p))[0] ** (1.0 / p)


@lru_cache(maxsize=4096)
def _lp_power_integral(kernel: Kernel, p: float) -> tuple[float, float]:
    """(integral of |f|^p, error estimate)."""
    sup = kernel.support
    if isinstance(sup, DecayEnvelope) and p * sup.exponent <= kernel.dim:
        raise DivergentNormError(
            f"L^{p:g} norm diverges: decay exponent {sup.exponent:g} * {p:g}"
            f" <= dim {kernel.dim}")
    if kernel.closed_norms is not None:
        closed = kernel.closed_norms(p)
        if closed is not None:
            return float(closed) ** p, 0.0

    if kernel.dim == 1:
        return _power_integral_1d(kernel, lambda v: np.abs(v) ** p, p * _decay_exponent(kernel))

    if isinstance(sup, BoundedBox):
        val, err = integrate_box(lambda x: np.abs(kernel(x.reshape(1, -1))) ** p,
                                 sup.lo, sup.hi, abs_tol=NORM_ABS_TOL)
        return float(val[0]), err
    return _envelope_box_integral(kernel, lambda v: np.abs(v) ** p,
                                  p * sup.exponent, sup.amplitude ** p)


def _decay_exponent(kernel: Kernel) -> float:
    sup = kernel.support
    return sup.exponent if isinstance(sup, DecayEnvelope) else math.inf


def _power_integral_1d(kernel: Kernel, transform, tail_exponent: float,
                       tail_coef: float | None = None,
                       core_radius: float | None = None) -> tuple[float, float]:
    """integral transform(f(x)) dx over the 1-D support.

    ``transform`` is vectorised and must satisfy transform(0) = 0.  For
    envelope supports the tail integrand is bounded by
    tail_coef * |x|**(-tail_exponent); by default that comes from applying
    ``transform`` to the envelope itself.
    """
    sup = kernel.support

    def integrand(x: float) -> np.ndarray:
        return np.atleast_1d(transform(kernel(np.array([[x]]))[0]))

    if isinstance(sup, BoundedBox):
        segs = [Segment(sup.lo[0], sup.hi[0])]
        vals, err = integrate_segments(integrand, segs, breakpoints=kernel.knots,
                                       abs_tol=NORM_ABS_TOL)
        return float(vals[0]), err

    core = core_radius if core_radius is not None else max(4.0 * sup.radius, 4.0)
    if tail_coef is None:
        # multiplicative transforms only: transform(A r^-b) = transform(A) r^(-tail_exponent)
        tail_coef = float(np.atleast_1d(transform(sup.amplitude))[0])
    segs = [Segment(-core, core)]
    tails, residual = tail_segments(core, tail_exponent, tail_coef, 1, NORM_ABS_TOL)
    segs.extend(tails)
    vals, err = integrate_segments(integrand, segs, breakpoints=kernel.knots,
                                   abs_tol=NORM_ABS_TOL)
    return float(vals[0]), err + residual


def _envelope_box_integral(kernel: Kernel, transform, tail_exponent: float,
                           tail_coef: float) -> tuple[float, float]:
    """d >= 2 envelope integral: truncate to a box using the radial bound."""
    d = kernel.dim
    sup = kernel.support
    if tail_exponent <= d:
        raise DivergentNormError(
            f"radial tail exponent {tail_exponent:g} <= dim {d}")
    area = _SPHERE_AREA[d]
    r = max(2.0 * sup.radius, 2.0)
    target = NORM_ABS_TOL

    def tail_bound(rr: float) -> float:
        return tail_coef * area * rr ** (d - tail_exponent) / (tail_exponent - d)

    while tail_bound(r) > target and r < 1e5:
        r *= 2.0
    val, err = integrate_box(lambda x: np.atleast_1d(transform(kernel(x.reshape(1, -1))[0])),
                             (-r,) * d, (r,) * d, abs_tol=NORM_ABS_TOL, rel_tol=1e-9)
    return float(val[0]), err + tail_bound(r)


# ---------------------------------------------------------------------------
# integrator compatibility


@dataclass(frozen=True)
class IntegrabilityCondition:
    """One of the three moment conditions for the kernel-integrator pair."""

    key: str
    finite: bool | None
    value: float
    error: float = 0.0
    note: str = ""


@dataclass(frozen=True)
class IntegrabilityReport:
    kernel_name: str
    triplet_name: str
    conditions: tuple[IntegrabilityCondition, ...]

    @property
    def all_finite(self) -> bool:
        return all(c.finite is True for c in self.conditions)

    def rows(self) -> list[tuple[str, str, str, str]]:
        return [(c.key, {True: "finite", False: "divergent", None: "unknown"}[c.finite],
                 f"{c.value:.17g}", c.note) for c in self.conditions]


def check_integrability(kernel: Kernel, triplet: levy.LevyTriplet) -> IntegrabilityReport:
    """Verify the three moment conditions that make the field well defined:
    the rescaled drift is absolutely integrable, the Gaussian part sees a
    square-integrable kernel, and the clipped second jump moment of the
    rescaled measure integrates over space."""
    conds = (
        _drift_condition(kernel, triplet),
        _gaussian_condition(kernel, triplet),
        _jump_condition(kernel, triplet),
    )
    return IntegrabilityReport(kernel_name=kernel.name,
                               triplet_name=triplet.name or repr(triplet),
                               conditions=conds)


def _drift_condition(kernel: Kernel, triplet: levy.LevyTriplet) -> IntegrabilityCondition:
    key = "drift"
    shift0 = levy.truncated_mean_shift(triplet, 0.0)
    asympt = abs(triplet.a0 + shift0)
    sup = kernel.support

    def transform(v):
        v_arr = np.atleast_1d(v)
        shift = np.atleast_1d(levy.truncated_mean_shift(triplet, v_arr))
        out = np.abs(v_arr) * np.abs(triplet.a0 + shift)
        return np.where(v_arr == 0.0, 0.0, out)

    if isinstance(sup, DecayEnvelope):
        beta = sup.exponent
        if asympt > 0.0 and beta <= kernel.dim:
            return IntegrabilityCondition(
                key, False, math.inf,
                note=f"drift density ~ {asympt:.3g}*|f|, decay {beta:g} <= dim")
        lock = levy.mean_shift_lock_radius(triplet)
        if asympt == 0.0:
            if math.isinf(lock):
                return IntegrabilityCondition(key, True, 0.0, note="no effective drift")
            # beyond r_lock, |f| <= lock so the shift sits at its limit and
            # the integrand is identically zero
            r_lock = max((sup.amplitude / lock) ** (1.0 / beta), sup.radius)
            if kernel.dim == 1:
                val, err = _finite_window_integral_1d(kernel, transform, 1.5 * r_lock)
                return IntegrabilityCondition(key, True, val, err)
            val, err = integrate_box(
                lambda x: np.atleast_1d(transform(kernel(x.reshape(1, -1))[0])),
                (-1.5 * r_lock,) * kernel.dim, (1.5 * r_lock,) * kernel.dim,
                abs_tol=NORM_ABS_TOL, rel_tol=1e-9)
            return IntegrabilityCondition(key, True, float(val[0]), err)
        dev = levy.mean_shift_deviation_bound(triplet)
        coef = sup.amplitude * (asympt + dev)
        if kernel.dim == 1:
            val, err = _power_integral_1d(kernel, transform, beta, tail_coef=coef)
            return IntegrabilityCondition(key, True, val, err)
        val, err = _envelope_box_integral(kernel, transform, beta, coef)
        return IntegrabilityCondition(key, True, val, err)

    if kernel.dim == 1:
        val, err = _power_integral_1d(kernel, transform, math.inf)
    else:
        box_val, err = integrate_box(
            lambda x: np.atleast_1d(transform(kernel(x.reshape(1, -1))[0])),
            sup.lo, sup.hi, abs_tol=NORM_ABS_TOL, rel_tol=1e-9)
        val = float(box_val[0])
    return IntegrabilityCondition(key, True, val, err)


def _finite_window_integral_1d(kernel: Kernel, transform, radius: float) -> tuple[float, float]:
    def integrand(x: float) -> np.ndarray:
        return np.atleast_1d(transform(kernel(np.array([[x]]))[0]))
    vals, err = integrate_segments(integrand, [Segment(-radius, radius)],
                                   breakpoints=kernel.knots, abs_tol=NORM_ABS_TOL)
    return float(vals[0]), err


def _gaussian_condition(kernel: Kernel, triplet: levy.LevyTriplet) -> IntegrabilityCondition:
    key = "gaussian"
    if triplet.b0 == 0.0:
        return IntegrabilityCondition(key, True, 0.0, note="no gaussian part")
    try:
        sq = lp_norm(kernel, 2.0)
    except DivergentNormError:
        return IntegrabilityCondition(key, False, math.inf,
                                      note="kernel not square integrable")
    return IntegrabilityCondition(key, True, triplet.b0 * sq * sq)


def _jump_condition(kernel: Kernel, triplet: levy.LevyTriplet) -> IntegrabilityCondition:
    key = "jumps"
    if isinstance(triplet.measure, levy.NoJumps):
        return IntegrabilityCondition(key, True, 0.0, note="no jump part")
    growth, coef = levy.clipped_growth(triplet)
    sup = kernel.support

    def transform(v):
        v_arr = np.atleast_1d(v)
        out = np.atleast_1d(levy.clipped_second_moment(triplet, v_arr))
        return np.where(v_arr == 0.0, 0.0, out)

    if isinstance(sup, DecayEnvelope):
        beta = sup.exponent
        if growth * beta <= kernel.dim:
            return IntegrabilityCondition(
                key, False, math.inf,
                note=f"clipped moment ~ |f|^{growth:g}, {growth:g}*{beta:g} <= dim")
        tail_coef = coef * sup.amplitude ** growth
        if kernel.dim == 1:
            val, err = _power_integral_1d(kernel, transform, growth * beta,
                                          tail_coef=tail_coef)
            return IntegrabilityCondition(key, True, val, err)
        val, err = _envelope_box_integral(kernel, transform, growth * beta, tail_coef)
        return IntegrabilityCondition(key, True, val, err)

    if kernel.dim == 1:
        val, err = _power_integral_1d(kernel, transform, math.inf)
    else:
        box_val, err = integrate_box(
            lambda x: np.atleast_1d(transform(kernel(x.reshape(1, -1))[0])),
            sup.lo, sup.hi, abs_tol=NORM_ABS_TOL, rel_tol=1e-9)
        val = float(box_val[0])
    return IntegrabilityCondition(key, True, val, err)
