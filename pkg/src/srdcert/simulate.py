"""Monte Carlo validation: lattice sampling and empirical bound checks.

The field is approximated on a lattice of mesh ``h``: each cell carries an
independent increment of the integrator with cell volume ``h**d``, and the
field value at a lag is the kernel-weighted sum of increments.  All lags of
one sample share the same increments, so joint dependence is reproduced.
Checks cover the empirical characteristic function, the factorization gap
of the joint characteristic function, and the smoothed indicator-covariance
bound on the low-dependence region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import levy
from .certify import frequency_integral
from .errors import RejectionError
from .kernels import BoundedBox, DecayEnvelope, Kernel
from .spectral import (
    SpectralProfile,
    char_joint,
    char_marginal,
    dependence_numerator_grid,
    marginal_exponent_sq,
    max_dependence_ratio,
)

CHUNK = 1024
MAX_CELLS = 200_000
# envelope kernels are truncated where the decay bound falls below this
# fraction of the peak; the neglected cumulant mass is orders of magnitude
# below Monte Carlo resolution
TRUNCATION_FRACTION = 1e-9


# ---------------------------------------------------------------------------
# probe measures


@dataclass(frozen=True)
class ProbeMeasure:
    """Finite probability measure smoothing the exceedance indicators."""

    points: tuple[float, ...]
    weights: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        wts = tuple(float(w) for w in self.weights)
        if len(pts) == 0 or len(pts) != len(wts):
            raise RejectionError("probe-measure", "points and weights must align")
        if any(not math.isfinite(p) for p in pts):
            raise RejectionError("probe-measure", "points must be finite")
        if any(w <= 0.0 for w in wts):
            raise RejectionError("probe-measure", "weights must be positive")
        if abs(sum(wts) - 1.0) > 1e-9:
            raise RejectionError("probe-measure", f"weights sum to {sum(wts)}")
        order = sorted(range(len(pts)), key=lambda i: pts[i])
        object.__setattr__(self, "points", tuple(pts[i] for i in order))
        object.__setattr__(self, "weights", tuple(wts[i] for i in order))

    def char(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        p = np.asarray(self.points)
        w = np.asarray(self.weights)
        return np.exp(1j * np.multiply.outer(s, p)) @ w


def point_mass(u: float = 0.0) -> ProbeMeasure:
    return ProbeMeasure((u,), (1.0,), name=f"point({u:g})")


def finite_discrete(points: tuple[float, ...],
                    weights: tuple[float, ...] | None = None) -> ProbeMeasure:
    if weights is None:
        weights = tuple(1.0 / len(points) for _ in points)
    return ProbeMeasure(tuple(points), weights,
                        name=f"discrete({len(points)})")


def gaussian_quantiles(n: int = 512, scale: float = 1.0) -> ProbeMeasure:
    """Equal-weight atoms at the midpoint quantiles of a centred normal."""
    if n < 1:
        raise RejectionError("probe-measure", "need at least one quantile")
    qs = ndtri((np.arange(n) + 0.5) / n) * scale
    return ProbeMeasure(tuple(qs), tuple(1.0 / n for _ in range(n)),
                        name=f"gaussian-quantiles({n})")


# ---------------------------------------------------------------------------
# lattice sampler


@dataclass(frozen=True)
class SimConfig:
    n_samples: int
    lattice_step: float
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise RejectionError("sim-config", "n_samples must be positive")
        if not (self.lattice_step > 0 and math.isfinite(self.lattice_step)):
            raise RejectionError("sim-config", "lattice_step must be positive")
        if self.seed < 0:
            raise RejectionError("sim-config", "seed must be >= 0")


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Joint samples of the field at fixed lags; values has shape (n, lags)."""

    lags: tuple
    values: np.ndarray
    n_cells: int
    config: SimConfig
    kernel_name: str
    triplet_name: str

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]


def _as_lag_array(lags, dim: int) -> np.ndarray:
    arr = np.asarray(lags, dtype=float)
    if arr.ndim == 1 and dim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise RejectionError("sim-lags", f"lags must be ({len(arr)}, {dim})-shaped")
    return arr


def _cell_centers(kernel: Kernel, lags: np.ndarray, h: float
                  ) -> tuple[np.ndarray, float]:
    """Midpoint lattice covering every shifted copy of the support."""
    sup = kernel.support
    if isinstance(sup, BoundedBox):
        lo = [float(lags[:, a].min()) - sup.hi[a] for a in range(kernel.dim)]
        hi = [float(lags[:, a].max()) - sup.lo[a] for a in range(kernel.dim)]
    else:
        radius = sup.radius * max(
            (1.0 / TRUNCATION_FRACTION) ** (1.0 / sup.exponent), 4.0)
        lo = [float(lags[:, a].min()) - radius for a in range(kernel.dim)]
        hi = [float(lags[:, a].max()) + radius for a in range(kernel.dim)]
    counts = [max(1, int(math.ceil((hi[a] - lo[a]) / h - 1e-12)))
              for a in range(kernel.dim)]
    total = math.prod(counts)
    if total > MAX_CELLS:
        raise RejectionError(
            "lattice-too-large",
            f"{total} cells exceed the {MAX_CELLS} cap; increase the step")
    axes = [lo[a] + (np.arange(counts[a]) + 0.5) * h
            for a in range(kernel.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    return centers, h ** kernel.dim


def _standard_symmetric_stable(u: np.ndarray, e: np.ndarray,
                               alpha: float) -> np.ndarray:
    """Symmetric stable variates with char exp(-|s|^alpha).

    ``u`` uniform on (-pi/2, pi/2), ``e`` standard exponential; the
    exponent (1-alpha)/alpha vanishes at alpha=1 where the value reduces
    to tan(u) (Cauchy).
    """
    with np.errstate(divide="ignore", over="ignore"):
        core = np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
        tilt = (np.cos((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    return core * tilt


def sample_field(kernel: Kernel, triplet: levy.LevyTriplet, lags,
                 config: SimConfig) -> FieldSample:
    """Draw joint field samples at the given lags.

    Chunked with a counter-based generator: sample i is byte-identical for
    every n_samples >= i+1 under the same seed, because each chunk draws
    full-size arrays from its own jumped stream and slices.
    """
    measure = triplet.measure
    if isinstance(measure, levy.TabulatedMeasure):
        raise RejectionError("unsupported-measure",
                             "tabulated jump measures have no exact sampler")
    lag_arr = _as_lag_array(lags, kernel.dim)
    centers, vol = _cell_centers(kernel, lag_arr, config.lattice_step)
    n_cells = len(centers)
    weights = np.stack([kernel(lag_arr[i] - centers)
                        for i in range(len(lag_arr))], axis=1)

    drift_term = triplet.a0 * vol * weights.sum(axis=0)
    comp = 0.0
    if isinstance(measure, levy.CompoundPoisson):
        atoms = np.asarray(measure.atoms)
        pvals = np.asarray(measure.weights)
        comp = measure.rate * float(
            np.sum(pvals * atoms * (np.abs(atoms) <= 1.0)))

    out = np.empty((config.n_samples, len(lag_arr)))
    for chunk_idx in range(0, (config.n_samples + CHUNK - 1) // CHUNK):
        rng = np.random.Generator(
            np.random.Philox(key=config.seed).jumped(chunk_idx))
        take = min(CHUNK, config.n_samples - chunk_idx * CHUNK)
        incr = np.zeros((CHUNK, n_cells))
        if triplet.b0 > 0.0:
            incr += rng.normal(scale=math.sqrt(triplet.b0 * vol),
                               size=(CHUNK, n_cells))
        if isinstance(measure, levy.SymmetricStable):
            u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=(CHUNK, n_cells))
            e = rng.standard_exponential(size=(CHUNK, n_cells))
            cell_scale = (vol * measure.scale
                          * levy.stable_re_constant(measure.alpha)
                          ) ** (1.0 / measure.alpha)
            incr += cell_scale * _standard_symmetric_stable(u, e, measure.alpha)
        elif isinstance(measure, levy.CompoundPoisson):
            counts = rng.poisson(lam=measure.rate * vol, size=(CHUNK, n_cells))
            if len(measure.atoms) == 1:
                jumps = counts * measure.atoms[0]
            else:
                split = rng.multinomial(counts.ravel(), pvals)
                jumps = (split @ atoms).reshape(CHUNK, n_cells)
            incr += jumps - comp * vol
        block = incr[:take] @ weights + drift_term
        out[chunk_idx * CHUNK:chunk_idx * CHUNK + take] = block
    lag_tuples = tuple(tuple(float(v) for v in row) for row in lag_arr)
    return FieldSample(lags=lag_tuples, values=out,
                       n_cells=n_cells, config=config,
                       kernel_name=kernel.name,
                       triplet_name=triplet.name or repr(triplet))


# ---------------------------------------------------------------------------
# empirical statistics


def empirical_char(values: np.ndarray, s_grid: np.ndarray
                   ) -> tuple[np.ndarray, float]:
    """Empirical characteristic function and a uniform standard error.

    Real and imaginary parts each have variance at most 1/n, so the
    complex deviation has standard error at most sqrt(2/n).
    """
    values = np.asarray(values, dtype=float).ravel()
    s_grid = np.asarray(s_grid, dtype=float)
    phases = np.exp(1j * np.multiply.outer(s_grid, values))
    return phases.mean(axis=1), math.sqrt(2.0 / len(values))


def exceedance_cov(x0: np.ndarray, xt: np.ndarray, u_levels: np.ndarray,
                   v_levels: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Cov(1{x0 > u_k}, 1{xt > v_l}) on the full level grid.

    Counting runs through a 2-D histogram of level ranks and a reverse
    double cumulative sum, so cost is O(n + K*L) rather than O(n*K*L).
    Returns (cov, se, p_u, p_v) with the delta-method standard error.
    """
    x0 = np.asarray(x0, dtype=float)
    xt = np.asarray(xt, dtype=float)
    u_levels = np.asarray(u_levels, dtype=float)
    v_levels = np.asarray(v_levels, dtype=float)
    n = len(x0)
    iu = np.searchsorted(u_levels, x0, side="left")
    iv = np.searchsorted(v_levels, xt, side="left")
    hist = np.zeros((len(u_levels) + 1, len(v_levels) + 1))
    np.add.at(hist, (iu, iv), 1.0)
    suffix = hist[::-1, ::-1].cumsum(axis=0).cumsum(axis=1)[::-1, ::-1]
    p11 = suffix[1:, 1:] / n
    p1 = suffix[1:, 0] / n
    p2 = suffix[0, 1:] / n
    cov = p11 - np.outer(p1, p2)
    m1 = 1.0 - 2.0 * p1
    m2 = 1.0 - 2.0 * p2
    second = (p11 * np.outer(m1, m2) + np.outer(p1 ** 2, p2 * m2)
              + np.outer(p1 * m1, p2 ** 2) + np.outer(p1 ** 2, p2 ** 2))
    var = np.clip(second - cov ** 2, 0.0, None)
    return cov, np.sqrt(var / n), p1, p2


def probe_smoothed_cov(x0: np.ndarray, xt: np.ndarray, probe: ProbeMeasure,
                       signed: bool = False) -> tuple[float, float]:
    """Probe-averaged indicator covariance and a conservative standard error.

    With ``signed`` the covariances are averaged as they are; otherwise
    their absolute values are (the quantity the covariance bound controls).
    """
    cov, se, _, _ = exceedance_cov(x0, xt, np.asarray(probe.points),
                                   np.asarray(probe.points))
    w = np.asarray(probe.weights)
    body = cov if signed else np.abs(cov)
    value = float(w @ body @ w)
    return value, float(w @ se @ w)


# ---------------------------------------------------------------------------
# bound checks


@dataclass(frozen=True)
class FactorizationReport:
    """Joint-vs-product characteristic gap against its analytic bound."""

    kernel_name: str
    triplet_name: str
    n_triples: int
    violations: int
    max_excess: float
    max_gap: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def factorization_check(kernel: Kernel, triplet: levy.LevyTriplet,
                        n_triples: int = 200, seed: int = 0,
                        tol: float = 1e-8, t_max: float | None = None,
                        s_range: tuple[float, float] = (0.1, 10.0)
                        ) -> FactorizationReport:
    """Verify |phi_t(s1,s2) - phi(s1) phi(s2)| <= exp(-D) * 2 * N.

    N is the mixed square-root integral and D = sigma^2(s1) + sigma^2(s2)
    - 2N its complement; both sides are deterministic quadratures, so any
    excess beyond ``tol`` is a genuine inequality failure.
    """
    if t_max is None:
        sup = kernel.support
        t_max = sup.diameter * 1.5 if isinstance(sup, BoundedBox) \
            else sup.radius * 6.0
    rng = np.random.Generator(np.random.Philox(key=seed))
    lags = rng.uniform(0.0, t_max, size=(n_triples, kernel.dim))
    log_lo, log_hi = math.log(s_range[0]), math.log(s_range[1])
    s_pairs = np.exp(rng.uniform(log_lo, log_hi, size=(n_triples, 2)))
    s_pairs *= rng.choice([-1.0, 1.0], size=(n_triples, 2))

    violations = 0
    max_excess = 0.0
    max_gap = 0.0
    for i in range(n_triples):
        t = tuple(lags[i])
        s1, s2 = float(s_pairs[i, 0]), float(s_pairs[i, 1])
        joint = char_joint(kernel, triplet, t, s1, s2)
        lhs = abs(joint - char_marginal(kernel, triplet, s1)
                  * char_marginal(kernel, triplet, s2))
        num, _ = dependence_numerator_grid(kernel, triplet, t,
                                           np.array([s1]), np.array([s2]))
        mixed = float(num[0, 0])
        dsq = marginal_exponent_sq(kernel, triplet, s1) \
            + marginal_exponent_sq(kernel, triplet, s2) - 2.0 * mixed
        rhs = math.exp(-max(dsq, 0.0)) * 2.0 * mixed
        max_gap = max(max_gap, lhs)
        excess = lhs - rhs
        if excess > tol * (1.0 + abs(rhs)):
            violations += 1
            max_excess = max(max_excess, excess)
    return FactorizationReport(
        kernel_name=kernel.name,
        triplet_name=triplet.name or repr(triplet),
        n_triples=n_triples, violations=violations,
        max_excess=max_excess, max_gap=max_gap)


@dataclass(frozen=True)
class CovarianceBoundReport:
    """Monte Carlo check of the smoothed covariance bound at one lag."""

    lag: tuple
    probe_name: str
    threshold: float
    ratio_at_lag: float
    freq_integral: float
    rhs: float
    lhs: float
    se: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * self.se

    def row(self) -> tuple:
        return (self.lag, self.probe_name, self.threshold, self.ratio_at_lag,
                self.rhs, self.lhs, self.se, self.passed)


def covariance_bound_check(profile: SpectralProfile, t, probe: ProbeMeasure,
                           threshold: float, config: SimConfig,
                           sample: FieldSample | None = None
                           ) -> CovarianceBoundReport:
    """Check the probe-smoothed covariance bound at lag t.

    The bound (2/pi^2) * I(threshold)^2 * ratio(t) only holds where the
    maximal ratio stays below the threshold, so lags outside that region
    are rejected.  ``sample`` lets callers reuse one set of field draws
    across several probes.
    """
    kernel, triplet = profile.kernel, profile.triplet
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ratio = max_dependence_ratio(kernel, triplet, tuple(t_arr),
                                 s_box=profile.s_box,
                                 force_grid=profile.ratio_method
                                 == "grid-approximate")
    if ratio.value > threshold + ratio.error + 1e-12:
        raise RejectionError(
            "lag-outside-low-dependence",
            f"ratio {ratio.value:.6g} at lag {t} exceeds threshold {threshold}")
    freq = frequency_integral(profile, threshold)
    if freq.divergent:
        raise RejectionError("frequency-divergent",
                             f"bound constant is infinite: {freq.note}")
    rhs = 2.0 / math.pi ** 2 * freq.value ** 2 * ratio.value
    if sample is None:
        zero = tuple(0.0 for _ in t_arr)
        sample = sample_field(kernel, triplet, [zero, tuple(t_arr)], config)
    lhs, se = probe_smoothed_cov(sample.column(0), sample.column(1), probe)
    return CovarianceBoundReport(
        lag=tuple(t_arr), probe_name=probe.name, threshold=threshold,
        ratio_at_lag=ratio.value, freq_integral=freq.value, rhs=rhs,
        lhs=lhs, se=se, n_samples=config.n_samples)
