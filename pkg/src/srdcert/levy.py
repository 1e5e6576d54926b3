"""Integrator triplets and their cumulant function.

An independently scattered, stationary integrator is described by a triplet
``(a0, b0, nu0)``: drift, Gaussian variance density, and jump measure.  Its
cumulant is

    K(s) = -i*s*a0 + 0.5*s**2*b0 - integral(exp(i*s*y) - 1 - i*s*y*1[|y|<=1], nu0(dy))

with Re K >= 0.  Everything downstream (marginal exponents, dependence
ratios, certification) consumes K through the evaluators here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma_fn

from .errors import QuadratureError, RejectionError

# Jump sizes below this are treated as absent in tabulated measures; the
# compensated integrand scales like y**2 there so the truncation error is
# bounded by density * 3e-25 per unit of tabulated density.
TABLE_INNER_CUTOFF = 1e-8

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-10, limit=400)


# ---------------------------------------------------------------------------
# measure variants


@dataclass(frozen=True)
class NoJumps:
    """Empty jump measure."""

    def __repr__(self) -> str:
        return "NoJumps()"


NO_JUMPS = NoJumps()


@dataclass(frozen=True)
class SymmetricStable:
    """Jump density scale * |y|**(-1-alpha) on both half-lines, 0 < alpha < 2."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise RejectionError("stable-alpha", f"alpha={self.alpha} outside (0, 2)")
        if not self.scale > 0.0 or not math.isfinite(self.scale):
            raise RejectionError("stable-scale", f"scale={self.scale} must be positive")


@dataclass(frozen=True)
class CompoundPoisson:
    """Finite jump measure rate * sum_i weights[i] * delta(atoms[i])."""

    rate: float
    atoms: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.rate > 0.0 or not math.isfinite(self.rate):
            raise RejectionError("poisson-rate", f"rate={self.rate} must be positive")
        atoms = tuple(float(a) for a in self.atoms)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if len(atoms) == 0 or len(atoms) != len(weights):
            raise RejectionError("poisson-atoms", "atoms and weights must align and be nonempty")
        if any(not math.isfinite(a) or a == 0.0 for a in atoms):
            raise RejectionError("poisson-atoms", "atoms must be finite and nonzero")
        if any(w <= 0.0 for w in weights):
            raise RejectionError("poisson-weights", "weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise RejectionError("poisson-weights", f"weights sum to {sum(weights)}, not 1")


@dataclass(frozen=True)
class TabulatedMeasure:
    """Jump density given on a finite grid of jump sizes.

    The grid must be strictly increasing, stay outside (-cutoff, cutoff),
    and carry both signs or be explicitly one-sided; densities interpolate
    log-linearly between knots of like sign (exact on power laws) and drop
    to zero outside the tabulated range.
    """

    grid: tuple[float, ...]
    density: tuple[float, ...]

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        dens = tuple(float(d) for d in self.density)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", dens)
        if len(grid) < 2 or len(grid) != len(dens):
            raise RejectionError("table-shape", "need matching grid/density with >= 2 rows")
        if any(g2 <= g1 for g1, g2 in zip(grid, grid[1:])):
            raise RejectionError("table-grid", "jump-size grid must be strictly increasing")
        if any(abs(g) < TABLE_INNER_CUTOFF for g in grid):
            raise RejectionError(
                "table-grid", f"jump sizes inside (+-{TABLE_INNER_CUTOFF}) are not resolvable")
        if any(d < 0.0 or not math.isfinite(d) for d in dens):
            raise RejectionError("table-density", "densities must be finite and >= 0")
        if not any(d > 0.0 for d in dens):
            raise RejectionError("table-density", "density is identically zero")

    def sides(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(|y| knots, density) per sign-definite side, |y| increasing."""
        g = np.asarray(self.grid)
        d = np.asarray(self.density)
        out = []
        neg = g < 0
        if neg.any():
            out.append((-g[neg][::-1], d[neg][::-1]))
        pos = g > 0
        if pos.any():
            out.append((g[pos], d[pos]))
        return out

    def density_at(self, r: np.ndarray, knots: np.ndarray, vals: np.ndarray) -> np.ndarray:
        """Interpolated density on one side at radii ``r`` (zero outside)."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (r >= knots[0]) & (r <= knots[-1])
        if not inside.any():
            return out
        ri = r[inside]
        idx = np.clip(np.searchsorted(knots, ri, side="right") - 1, 0, len(knots) - 2)
        k0, k1 = knots[idx], knots[idx + 1]
        v0, v1 = vals[idx], vals[idx + 1]
        w = np.log(ri / k0) / np.log(k1 / k0)
        both_pos = (v0 > 0) & (v1 > 0)
        res = np.where(
            both_pos,
            np.exp((1 - w) * np.log(np.where(v0 > 0, v0, 1.0))
                   + w * np.log(np.where(v1 > 0, v1, 1.0))),
            (1 - w) * v0 + w * v1,
        )
        out[inside] = res
        return out


LevyMeasure = Union[NoJumps, SymmetricStable, CompoundPoisson, TabulatedMeasure]


def total_jump_mass(measure: LevyMeasure) -> float:
    """Total mass of the jump measure; inf for stable densities.

    Finite mass means the real cumulant part is globally bounded by twice
    the mass, which downstream turns bounded-support kernels into bounded
    marginal exponents.
    """
    if isinstance(measure, NoJumps):
        return 0.0
    if isinstance(measure, SymmetricStable):
        return math.inf
    if isinstance(measure, CompoundPoisson):
        return measure.rate
    total = 0.0
    for knots, vals in measure.sides():
        for k0, k1, v0, v1 in zip(knots, knots[1:], vals, vals[1:]):
            if v0 > 0.0 and v1 > 0.0:
                p = math.log(v1 / v0) / math.log(k1 / k0)
                if abs(p + 1.0) < 1e-12:
                    total += v0 * k0 * math.log(k1 / k0)
                else:
                    total += v0 * k0 * ((k1 / k0) ** (p + 1.0) - 1.0) / (p + 1.0)
            else:
                total += 0.5 * (v0 + v1) * (k1 - k0)
    return total


# ---------------------------------------------------------------------------
# triplet


@dataclass(frozen=True)
class LevyTriplet:
    """Drift, Gaussian variance density, and jump measure of the integrator.

    Degenerate triplets (zero drift, zero variance, no jumps) are rejected:
    the resulting field is a.s. constant and nothing downstream is defined.
    """

    a0: float = 0.0
    b0: float = 0.0
    measure: LevyMeasure = NO_JUMPS
    name: str = ""

    def __post_init__(self):
        if not math.isfinite(self.a0):
            raise RejectionError("drift", f"a0={self.a0} must be finite")
        if self.b0 < 0.0 or not math.isfinite(self.b0):
            raise RejectionError("variance", f"b0={self.b0} must be finite and >= 0")
        if self.a0 == 0.0 and self.b0 == 0.0 and isinstance(self.measure, NoJumps):
            raise RejectionError("degenerate-triplet", "a0 = b0 = 0 with no jumps")


def gaussian_triplet(b0: float = 1.0, a0: float = 0.0) -> LevyTriplet:
    return LevyTriplet(a0=a0, b0=b0, name=f"gaussian(b0={b0:g})")


def stable_re_constant(alpha: float) -> float:
    """2 * integral_0^inf (1 - cos u) u**(-1-alpha) du.

    With jump density |y|**(-1-alpha) the real part of the cumulant is
    exactly this constant times |s|**alpha.
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha={alpha} outside (0, 2)")
    return math.pi / (_gamma_fn(1.0 + alpha) * math.sin(math.pi * alpha / 2.0))


def calibrated_stable(alpha: float) -> SymmetricStable:
    """Stable measure scaled so that Re K(s) = |s|**alpha exactly."""
    return SymmetricStable(alpha=alpha, scale=1.0 / stable_re_constant(alpha))


def stable_triplet(alpha: float, scale: float | None = None, a0: float = 0.0) -> LevyTriplet:
    """Pure-jump symmetric stable triplet, calibrated unless a scale is given."""
    measure = SymmetricStable(alpha, scale) if scale is not None else calibrated_stable(alpha)
    return LevyTriplet(a0=a0, b0=0.0, measure=measure,
                       name=f"stable(alpha={alpha:g})")


def poisson_triplet(rate: float = 1.0,
                    atoms: tuple[float, ...] = (1.0,),
                    weights: tuple[float, ...] | None = None,
                    a0: float = 0.0, b0: float = 0.0) -> LevyTriplet:
    if weights is None:
        weights = tuple(1.0 / len(atoms) for _ in atoms)
    return LevyTriplet(a0=a0, b0=b0,
                       measure=CompoundPoisson(rate, tuple(atoms), tuple(weights)),
                       name=f"poisson(rate={rate:g})")


def default_validation_triplets() -> list[LevyTriplet]:
    """Triplet battery used by the validation command and the test suite."""
    return [
        gaussian_triplet(1.0),
        stable_triplet(0.7),
        stable_triplet(1.5),
        poisson_triplet(1.0, atoms=(1.0,)),
        poisson_triplet(2.0, atoms=(-0.5, 2.0), weights=(0.6, 0.4)),
    ]


# ---------------------------------------------------------------------------
# cumulant evaluation


def cumulant(triplet: LevyTriplet, s) -> np.ndarray | complex:
    """K(s), vectorised over ``s``.

    Array in, complex array out; scalar in, complex out.  Tabulated jump
    measures integrate numerically per frequency, all other variants are
    closed-form.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = (-1j * triplet.a0) * s_arr + (0.5 * triplet.b0) * s_arr * s_arr
    out = out.astype(complex)
    m = triplet.measure
    if isinstance(m, SymmetricStable):
        out += (m.scale * stable_re_constant(m.alpha)) * np.abs(s_arr) ** m.alpha
    elif isinstance(m, CompoundPoisson):
        atoms = np.asarray(m.atoms)
        weights = np.asarray(m.weights)
        phase = np.exp(1j * s_arr[..., None] * atoms)
        jump = m.rate * (1.0 - phase @ weights)
        m1 = m.rate * float(weights @ (atoms * (np.abs(atoms) <= 1.0)))
        out += jump + 1j * s_arr * m1
    elif isinstance(m, TabulatedMeasure):
        out += np.array([_tabulated_jump_cumulant(m, float(x)) for x in s_arr.ravel()],
                        dtype=complex).reshape(s_arr.shape)
    return out if np.ndim(s) else complex(out[0])


def cumulant_re(triplet: LevyTriplet, s) -> np.ndarray | float:
    """Re K(s) >= 0, computed through |s| so evenness holds exactly."""
    s_arr = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    out = (0.5 * triplet.b0) * s_arr * s_arr
    m = triplet.measure
    if isinstance(m, SymmetricStable):
        out = out + (m.scale * stable_re_constant(m.alpha)) * s_arr ** m.alpha
    elif isinstance(m, CompoundPoisson):
        atoms = np.asarray(m.atoms)
        weights = np.asarray(m.weights)
        # 1 - cos via half-angle, stable near 0
        half = np.sin(0.5 * s_arr[..., None] * atoms)
        out = out + m.rate * (2.0 * half * half) @ weights
    elif isinstance(m, TabulatedMeasure):
        out = out + np.array([_tabulated_jump_cumulant(m, float(x)).real
                              for x in s_arr.ravel()]).reshape(s_arr.shape)
    result = np.maximum(out, 0.0)
    return result if np.ndim(s) else float(result[0])


def _one_minus_cos(z: np.ndarray) -> np.ndarray:
    h = np.sin(0.5 * z)
    return 2.0 * h * h


def _z_minus_sin(z: np.ndarray) -> np.ndarray:
    """z - sin z, series-stable for small |z|."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    out = np.where(small, z ** 3 / 6.0 - z ** 5 / 120.0, z - np.sin(z))
    return out


def _tabulated_jump_cumulant(m: TabulatedMeasure, s: float) -> complex:
    """-integral(exp(isy) - 1 - isy 1[|y|<=1]) over the tabulated density.

    Worked segment by segment between density knots.  Slowly varying
    segments integrate in log radius with series-stable forms; once the
    phase |s| * r outruns that, the cosine and sine factors switch to
    Fourier-weighted quadrature so wide oscillatory spans stay cheap.
    """
    if s == 0.0:
        return 0.0 + 0.0j
    sa = abs(s)
    sgn_s = 1.0 if s > 0 else -1.0
    re_total = 0.0
    im_odd = 0.0
    err_total = 0.0
    scale_hint = 0.0
    for side_sign, (knots, vals) in zip(_side_signs(m), m.sides()):
        edges = [float(k) for k in knots]
        if edges[0] < 1.0 < edges[-1]:
            edges = sorted(set(edges) | {1.0})
        for a, b in zip(edges[:-1], edges[1:]):
            def dens(r, kn=knots, vl=vals):
                return m.density_at(np.atleast_1d(float(r)), kn, vl)[0]

            if sa * b <= 0.5:
                # phase stays small: direct log-radius quadrature
                def f_small(u):
                    r = math.exp(u)
                    z = sa * r
                    w = dens(r) * r
                    if b <= 1.0:
                        q = _z_minus_sin(np.array([z]))[0]
                    else:
                        q = -math.sin(z)
                    return np.array([_one_minus_cos(np.array([z]))[0] * w, q * w])

                val, err = _quad_pair(f_small, math.log(a), math.log(b))
                p_seg, q_seg = float(val[0]), float(val[1])
            else:
                mass, e1 = quad(dens, a, b, **_QUAD_OPTS)
                cos_part, e2 = quad(dens, a, b, weight="cos", wvar=sa,
                                    epsabs=1e-13, epsrel=1e-10, limit=400, maxp1=100)
                sin_part, e3 = quad(dens, a, b, weight="sin", wvar=sa,
                                    epsabs=1e-13, epsrel=1e-10, limit=400, maxp1=100)
                p_seg = mass - cos_part
                err = e1 + e2 + e3
                if b <= 1.0:
                    first, e4 = quad(lambda r: r * dens(r), a, b, **_QUAD_OPTS)
                    q_seg = sa * first - sin_part
                    err += e4
                else:
                    q_seg = -sin_part
            re_total += p_seg
            im_odd += side_sign * q_seg
            err_total += err
            scale_hint = max(scale_hint, abs(p_seg), abs(q_seg))
    if err_total > 1e-6 * (1.0 + abs(re_total) + abs(im_odd)):
        raise QuadratureError(
            f"tabulated cumulant quadrature error {err_total:.3e} too large at s={s}",
            partial=complex(re_total, sgn_s * im_odd), residual=err_total)
    return complex(re_total, sgn_s * im_odd)


def _quad_pair(fn, lo, hi):
    from scipy.integrate import quad_vec
    val, err, info = quad_vec(fn, lo, hi, epsabs=1e-14, epsrel=1e-11,
                              limit=400, full_output=True)
    if not info.success:
        raise QuadratureError("segment quadrature failed", residual=float(err))
    return val, float(err)


def _side_signs(m: TabulatedMeasure) -> list[float]:
    g = np.asarray(m.grid)
    signs = []
    if (g < 0).any():
        signs.append(-1.0)
    if (g > 0).any():
        signs.append(1.0)
    return signs


# ---------------------------------------------------------------------------
# small-signal growth and related moments


def small_signal_bound(triplet: LevyTriplet) -> tuple[float, float]:
    """(gamma, coef) with Re K(v) <= coef * |v|**gamma for |v| <= 1.

    Used to truncate tail integrals where the kernel has already decayed.
    gamma is the slowest growth exponent among the triplet's parts.
    """
    parts: list[tuple[float, float]] = []
    if triplet.b0 > 0.0:
        parts.append((2.0, 0.5 * triplet.b0))
    m = triplet.measure
    if isinstance(m, SymmetricStable):
        parts.append((m.alpha, m.scale * stable_re_constant(m.alpha)))
    elif isinstance(m, CompoundPoisson):
        atoms = np.asarray(m.atoms)
        weights = np.asarray(m.weights)
        # 1 - cos(vy) <= (vy)^2 / 2 for all v
        parts.append((2.0, m.rate * float(weights @ (atoms * atoms / 2.0))))
    elif isinstance(m, TabulatedMeasure):
        sec = 0.0
        for knots, vals in m.sides():
            def f(r, kn=knots, vl=vals):
                rr = np.atleast_1d(r)
                return float((rr * rr / 2.0 * m.density_at(rr, kn, vl))[0])
            v, _ = quad(f, float(knots[0]), float(knots[-1]),
                        points=[float(k) for k in knots[1:-1]] or None, **_QUAD_OPTS)
            sec += v
        parts.append((2.0, sec))
    if not parts:
        raise RejectionError("degenerate-triplet", "no growing cumulant part")
    gamma = min(g for g, _ in parts)
    coef = sum(c for _, c in parts)
    return gamma, coef


def im_linear_coef(triplet: LevyTriplet) -> float:
    """C with |Im K(v)| <= C * |v| for all v.

    Uses |sin z| <= |z|; symmetric measures contribute nothing beyond the
    drift, so pure stable triplets get exactly |a0|.
    """
    m = triplet.measure
    coef = abs(triplet.a0)
    if isinstance(m, CompoundPoisson):
        coef += 2.0 * m.rate * float(np.asarray(m.weights) @ np.abs(m.atoms))
    elif isinstance(m, TabulatedMeasure):
        total = 0.0
        for knots, vals in m.sides():
            def f(r, kn=knots, vl=vals):
                rr = np.atleast_1d(r)
                return float((rr * m.density_at(rr, kn, vl))[0])
            v, _ = quad(f, float(knots[0]), float(knots[-1]),
                        points=[float(k) for k in knots[1:-1]] or None, **_QUAD_OPTS)
            total += v
        coef += 2.0 * total
    return coef


def homogeneity_exponent(triplet: LevyTriplet) -> float | None:
    """gamma when Re K(v) = coef * |v|**gamma exactly, else None.

    Pure Gaussian gives 2, pure calibrated-or-not stable gives alpha; any
    mixture breaks exact homogeneity.
    """
    m = triplet.measure
    if triplet.b0 > 0.0 and isinstance(m, NoJumps):
        return 2.0
    if triplet.b0 == 0.0 and isinstance(m, SymmetricStable):
        return m.alpha
    return None


def truncated_mean_shift(triplet: LevyTriplet, v) -> np.ndarray | float:
    """integral y * (1[|yv|<=1] - 1[|y|<=1]) nu0(dy), vectorised over v.

    The drift correction that appears when the integrator is scaled by a
    kernel value v.  Zero for symmetric measures.
    """
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    m = triplet.measure
    if isinstance(m, (NoJumps, SymmetricStable)):
        out = np.zeros_like(v_arr)
    elif isinstance(m, CompoundPoisson):
        atoms = np.asarray(m.atoms)
        weights = np.asarray(m.weights)
        ind_v = (np.abs(v_arr[..., None] * atoms) <= 1.0).astype(float)
        ind_1 = (np.abs(atoms) <= 1.0).astype(float)
        out = m.rate * ((ind_v - ind_1) * atoms) @ weights
    else:
        out = np.array([_tabulated_mean_shift(m, float(x)) for x in v_arr.ravel()]
                       ).reshape(v_arr.shape)
    return out if np.ndim(v) else float(out[0])


def _tabulated_mean_shift(m: TabulatedMeasure, v: float) -> float:
    r_hi = 1.0 / abs(v) if v != 0.0 else math.inf
    total = 0.0
    for sign, (knots, vals) in zip(_side_signs(m), m.sides()):
        lo = max(float(knots[0]), min(1.0, r_hi))
        hi = min(float(knots[-1]), max(1.0, r_hi))
        if lo >= hi:
            continue

        def f(r, kn=knots, vl=vals, sg=sign):
            rr = np.atleast_1d(r)
            return float((sg * rr * m.density_at(rr, kn, vl))[0])

        val, _ = quad(f, lo, hi, points=[float(k) for k in knots if lo < k < hi] or None,
                      **_QUAD_OPTS)
        total += val if r_hi >= 1.0 else -val
    return total


def mean_shift_lock_radius(triplet: LevyTriplet) -> float:
    """Largest v* with truncated_mean_shift constant on [0, v*].

    Below 1/max|y| every jump satisfies |y*v| <= 1, so the shift equals its
    v=0 value exactly.  Measures with unbounded support that are symmetric
    have shift identically zero, hence lock radius infinity.
    """
    m = triplet.measure
    if isinstance(m, (NoJumps, SymmetricStable)):
        return math.inf
    if isinstance(m, CompoundPoisson):
        return 1.0 / max(abs(a) for a in m.atoms)
    return 1.0 / max(abs(g) for g in m.grid)


def mean_shift_deviation_bound(triplet: LevyTriplet) -> float:
    """Upper bound on sup_v |shift(v) - shift(0)|."""
    m = triplet.measure
    if isinstance(m, (NoJumps, SymmetricStable)):
        return 0.0
    if isinstance(m, CompoundPoisson):
        return m.rate * float(np.asarray(m.weights) @ np.abs(m.atoms))
    total = 0.0
    for knots, vals in m.sides():
        def f(r, kn=knots, vl=vals):
            rr = np.atleast_1d(r)
            return float((rr * m.density_at(rr, kn, vl))[0])
        v, _ = quad(f, float(knots[0]), float(knots[-1]),
                    points=[float(k) for k in knots[1:-1]] or None, **_QUAD_OPTS)
        total += v
    return total


def clipped_growth(triplet: LevyTriplet) -> tuple[float, float]:
    """(g, C) with clipped_second_moment(v) <= C * |v|**g for all v.

    Exact for stable measures; the quadratic bound min(1, (yv)^2) <= (yv)^2
    covers the finite-second-moment variants.
    """
    m = triplet.measure
    if isinstance(m, NoJumps):
        return 2.0, 0.0
    if isinstance(m, SymmetricStable):
        return m.alpha, 2.0 * m.scale * (1.0 / m.alpha + 1.0 / (2.0 - m.alpha))
    if isinstance(m, CompoundPoisson):
        return 2.0, m.rate * float(np.asarray(m.weights) @ np.square(m.atoms))
    total = 0.0
    for knots, vals in m.sides():
        def f(r, kn=knots, vl=vals):
            rr = np.atleast_1d(r)
            return float((rr * rr * m.density_at(rr, kn, vl))[0])
        v, _ = quad(f, float(knots[0]), float(knots[-1]),
                    points=[float(k) for k in knots[1:-1]] or None, **_QUAD_OPTS)
        total += v
    return 2.0, total


def clipped_second_moment(triplet: LevyTriplet, v) -> np.ndarray | float:
    """integral min(1, (y*v)**2) nu0(dy), vectorised over v."""
    v_arr = np.abs(np.atleast_1d(np.asarray(v, dtype=float)))
    m = triplet.measure
    if isinstance(m, NoJumps):
        out = np.zeros_like(v_arr)
    elif isinstance(m, SymmetricStable):
        a = m.alpha
        out = 2.0 * m.scale * (1.0 / a + 1.0 / (2.0 - a)) * v_arr ** a
    elif isinstance(m, CompoundPoisson):
        atoms = np.asarray(m.atoms)
        weights = np.asarray(m.weights)
        out = m.rate * np.minimum(1.0, (v_arr[..., None] * atoms) ** 2) @ weights
    else:
        out = np.array([_tabulated_clipped_second(m, float(x)) for x in v_arr.ravel()]
                       ).reshape(v_arr.shape)
    return out if np.ndim(v) else float(out[0])


def _tabulated_clipped_second(m: TabulatedMeasure, v: float) -> float:
    total = 0.0
    for knots, vals in m.sides():
        def f(r, kn=knots, vl=vals):
            rr = np.atleast_1d(r)
            return float((np.minimum(1.0, (rr * v) ** 2) * m.density_at(rr, kn, vl))[0])
        pts = [float(k) for k in knots[1:-1]]
        if v != 0.0 and knots[0] < 1.0 / abs(v) < knots[-1]:
            pts.append(1.0 / abs(v))
        val, _ = quad(f, float(knots[0]), float(knots[-1]),
                      points=sorted(set(pts)) or None, **_QUAD_OPTS)
        total += val
    return total


# ---------------------------------------------------------------------------
# negative-definiteness validation


@dataclass(frozen=True)
class NegDefReport:
    """Sampled inequality check results for one triplet."""

    triplet_name: str
    n_samples: int
    violations: dict[str, int] = field(default_factory=dict)
    max_excess: float = 0.0

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    @property
    def passed(self) -> bool:
        return self.total_violations == 0

    def rows(self) -> list[tuple[str, int]]:
        return sorted(self.violations.items())


_CHECKS = (
    "re-nonneg",
    "conjugate-symmetry",
    "subadditive-complex-sum",
    "subadditive-complex-diff",
    "subadditive-real-sum",
    "subadditive-real-diff",
    "sqrt-lower-bound",
)


def check_negdef_inequalities(triplet: LevyTriplet, n_samples: int = 100_000,
                              seed: int = 0, tol: float = 1e-9) -> NegDefReport:
    """Sample heavy-tailed frequency pairs and test the cumulant inequalities.

    Checked, with slack tol * (1 + |lhs| + |rhs|) per pair:
      * Re K >= 0 and K(-x) = conj(K(x));
      * |K(x) + K(y) - K(x + y)| <= 2 sqrt(Re K(x) Re K(y)), its difference
        form |K(x) + conj(K(y)) - K(x - y)| <= same (conjugation is what the
        symmetry K(-y) = conj(K(y)) demands; without it any drift component
        falsifies the bound), and both sign variants on real parts;
      * min(Re K(x +- y), Re K(x) + Re K(y)) >= (sqrt(Re K(x)) - sqrt(Re K(y)))**2.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = rng.standard_cauchy(n_samples)
    y = rng.standard_cauchy(n_samples)

    kx = cumulant(triplet, x)
    ky = cumulant(triplet, y)
    kxpy = cumulant(triplet, x + y)
    kxmy = cumulant(triplet, x - y)
    kmx = cumulant(triplet, -x)

    rex = np.maximum(kx.real, 0.0)
    rey = np.maximum(ky.real, 0.0)
    cross = 2.0 * np.sqrt(rex * rey)

    violations: dict[str, int] = {}
    max_excess = 0.0

    def record(check: str, excess: np.ndarray):
        nonlocal max_excess
        bad = excess > 0.0
        violations[check] = int(bad.sum())
        if bad.any():
            max_excess = max(max_excess, float(excess[bad].max()))

    slack = lambda lhs, rhs: tol * (1.0 + np.abs(lhs) + np.abs(rhs))

    record("re-nonneg", np.maximum(-kx.real, -ky.real) - tol * (1.0 + np.abs(kx) + np.abs(ky)))
    record("conjugate-symmetry", np.abs(kx - np.conj(kmx)) - slack(kx, kmx))
    record("subadditive-complex-sum", np.abs(kx + ky - kxpy) - cross - slack(kx + ky, kxpy))
    record("subadditive-complex-diff",
           np.abs(kx + np.conj(ky) - kxmy) - cross - slack(kx + np.conj(ky), kxmy))
    record("subadditive-real-sum",
           np.abs(kx.real + ky.real - kxpy.real) - cross - slack(kx.real + ky.real, kxpy.real))
    record("subadditive-real-diff",
           np.abs(kx.real + ky.real - kxmy.real) - cross - slack(kx.real + ky.real, kxmy.real))
    gap = (np.sqrt(rex) - np.sqrt(rey)) ** 2
    lower = np.minimum.reduce([kxpy.real, kxmy.real, rex + rey])
    record("sqrt-lower-bound", gap - lower - slack(gap, lower))

    for check in _CHECKS:
        violations.setdefault(check, 0)
    return NegDefReport(triplet_name=triplet.name or repr(triplet),
                        n_samples=n_samples, violations=violations,
                        max_excess=max_excess)
