"""The endpoint counterexample engine.

Witnesses the failure of the endpoint estimate quantitatively: the
v-truncated (x,v)-norm of rho* g is evaluated both directly (``vtrunc_lhs``)
and through the Fourier-side identity with constant c = (2 pi)^{-d^2}
(``vtrunc_rhs``), and its growth along a truncation schedule is fitted
(``divergence_study``).  The determinant factorization and the divergent
radial/angular integrals behind the mechanism are exposed separately.

Only the v-truncation is an unbounded parameter; x, t and xi windows are
enlarged adaptively so no other cutoff can masquerade as the divergence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functions import BumpPairFunction, GaussianSpaceTime
from .grids import GridSpec, ball_grid
from .rng import batch_generator, batch_layout
from .transport import adjoint_density

TAIL_RADIUS = 3.2


class DegenerateInputError(ValueError):
    pass


class SampleFloorError(ValueError):
    """Too few MC samples for the requested truncation threshold."""


# ---------------------------------------------------------------------------
# growth tables and fits

@dataclass
class FitResult:
    model: str
    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    residuals: np.ndarray

    @property
    def slope_ci95(self) -> tuple[float, float]:
        return (self.slope - 1.96 * self.slope_stderr,
                self.slope + 1.96 * self.slope_stderr)


@dataclass
class GrowthTable:
    """(truncation parameter, value) series with a fitted growth law."""

    params: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray | None = None
    model: str = "log"  # value ~ intercept + slope * ln(param) | "power"

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.params.shape != self.values.shape:
            raise DegenerateInputError("params/values length mismatch")

    @property
    def insufficient_data(self) -> bool:
        return self.params.size < 2

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.values) > 0))

    def fit(self) -> FitResult:
        if self.insufficient_data:
            raise DegenerateInputError("need at least two rows to fit a growth law")
        if self.model == "log":
            xs, ys = np.log(self.params), self.values
        elif self.model == "power":
            xs, ys = np.log(self.params), np.log(self.values)
        else:
            raise DegenerateInputError(f"unknown model {self.model!r}")
        n = xs.size
        A = np.stack([xs, np.ones(n)], axis=-1)
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        slope, intercept = float(coef[0]), float(coef[1])
        resid = ys - A @ coef
        ss_res = float(resid @ resid)
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
        if n > 2:
            sxx = float(np.sum((xs - xs.mean()) ** 2))
            se = math.sqrt(ss_res / (n - 2) / sxx) if sxx > 0 else float("inf")
        else:
            se = 0.0
        return FitResult(self.model, slope, intercept, r2, se, resid)


# ---------------------------------------------------------------------------
# determinant factorization

@dataclass
class PolarFactorization:
    radii: np.ndarray
    directions: np.ndarray  # (d, d), row j = theta_j
    det_k: float
    det_theta: float


def polar_factorize(xis) -> PolarFactorization:
    """Split |det K| (rows -xi_j) into (prod r_j) |det Theta|."""
    xis = np.asarray(xis, dtype=float)
    if xis.ndim != 2 or xis.shape[0] != xis.shape[1]:
        raise DegenerateInputError("need d vectors in R^d")
    radii = np.linalg.norm(xis, axis=1)
    if np.any(radii == 0):
        raise DegenerateInputError("zero xi vector has no polar factorization")
    thetas = xis / radii[:, None]
    det_k = abs(float(np.linalg.det(-xis)))
    det_theta = abs(float(np.linalg.det(thetas)))
    return PolarFactorization(radii, thetas, det_k, det_theta)


# ---------------------------------------------------------------------------
# radial / angular divergence mechanisms

def radial_integral(d: int, delta: float) -> float:
    """int over [delta, 1]^d of prod r_j^{d-2} dr (both directions for d = 1).

    d = 1 diverges like 2 ln(1/delta); d >= 2 stays bounded as delta -> 0.
    """
    if not 0 < delta < 1:
        raise DegenerateInputError("delta must lie in (0, 1)")
    if d == 1:
        return 2.0 * math.log(1.0 / delta)
    one_dim = (1.0 - delta ** (d - 1)) / (d - 1)
    return one_dim**d


def angular_integral_exact_d2(eps: float) -> float:
    """I(eps) for d = 2 via the 1-D reduction det = sin(angle difference).

    I(eps) = 2 pi * int over {|sin phi| > eps} of d phi / |sin phi|
           = 8 pi * ln((1 + sqrt(1 - eps^2)) / eps),  eps in (0, 1].
    """
    if not 0 < eps <= 1:
        raise DegenerateInputError("eps must lie in (0, 1]")
    return 8 * math.pi * math.log((1 + math.sqrt(1 - eps * eps)) / eps)


def _uniform_sphere(gen: np.random.Generator, n: int, dim: int) -> np.ndarray:
    z = gen.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def angular_schedule_mc(d: int, eps_schedule, n_samples: int = 1_000_000,
                        seed: int = 0, batch_size: int = 1 << 15,
                        workers: int = 1) -> GrowthTable:
    """Seeded MC for I(eps) over a schedule, d >= 3.

    The same sample set serves every eps (the super-level sets are nested),
    so the schedule is monotone by construction and reproducible for any
    worker count.
    """
    eps = np.asarray(sorted(eps_schedule, reverse=True), dtype=float)
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise DegenerateInputError("eps values must lie in (0, 1)")
    floor = int(math.ceil(100.0 / float(eps.min())))
    if n_samples < floor:
        raise SampleFloorError(
            f"{n_samples} samples is below the floor {floor} for eps = {eps.min():g}")

    layout = batch_layout(n_samples, batch_size)
    surface = _sphere_surface(d)

    def run_batch(args):
        b, size = args
        gen = batch_generator(seed, b)
        dets = np.abs(np.linalg.det(
            np.stack([_uniform_sphere(gen, size, d) for _ in range(d)], axis=1)))
        sums = np.empty(eps.size)
        sumsq = np.empty(eps.size)
        for i, e in enumerate(eps):
            contrib = np.where(dets > e, 1.0 / np.where(dets > 0, dets, 1.0), 0.0)
            sums[i] = contrib.sum()
            sumsq[i] = (contrib * contrib).sum()
        return sums, sumsq

    jobs = list(enumerate(layout))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_batch, jobs))
    else:
        results = [run_batch(j) for j in jobs]
    total = np.zeros(eps.size)
    total_sq = np.zeros(eps.size)
    for sums, sumsq in results:  # fixed batch order
        total += sums
        total_sq += sumsq
    volume = surface**d
    mean = total / n_samples
    var = np.clip(total_sq / n_samples - mean**2, 0.0, None)
    stderr = volume * np.sqrt(var / n_samples)
    # largest eps first in the table; report against 1/eps growth
    return GrowthTable(params=1.0 / eps, values=volume * mean, stderrs=stderr,
                       model="log")


def _sphere_surface(d: int) -> float:
    """Surface measure of S^{d-1} in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def angular_integral(d: int, eps: float, n_samples: int = 1_000_000,
                     seed: int = 0, workers: int = 1) -> tuple[float, float | None]:
    """I(eps) = integral over (S^{d-1})^d of 1{|det| > eps} / |det|."""
    if d == 2:
        if eps >= 1:
            return 0.0, None
        return angular_integral_exact_d2(eps), None
    if d < 2:
        raise DegenerateInputError("the angular mechanism needs d >= 2")
    table = angular_schedule_mc(d, [eps], n_samples=n_samples, seed=seed, workers=workers)
    return float(table.values[0]), float(table.stderrs[0])


# ---------------------------------------------------------------------------
# truncated norm, both sides of the Fourier identity

def _orthonormal_frames(v: np.ndarray) -> np.ndarray:
    """(m, d, d) frames with column 0 along v (d = 2 only)."""
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    vh = v / np.where(norms > 0, norms, 1.0)
    frames = np.empty(v.shape[:1] + (2, 2))
    frames[:, :, 0] = vh
    frames[:, 0, 1] = -vh[:, 1]
    frames[:, 1, 1] = vh[:, 0]
    return frames


def _x_windows(g, v: np.ndarray):
    """Per-v x-integration frame and half-widths for (rho* g)^{d+1}.

    Gaussian: analytic localization, frame aligned with v (the adjoint
    spreads like sqrt(1+|v|^2) along v).  Bump-pair: axis-aligned box from
    the support geometry, growing linearly in |v|.
    """
    d = v.shape[1]
    m = v.shape[0]
    if isinstance(g, GaussianSpaceTime):
        if not g.is_centered:
            raise DegenerateInputError("endpoint lab expects centered g")
        at, ax = 1.0 / g.t_width**2, 1.0 / g.x_width**2
        v2 = np.sum(v**2, axis=1)
        half_par = TAIL_RADIUS * np.sqrt((at + ax * v2) / (ax * at))
        halves = np.empty((m, d))
        halves[:, 0] = half_par
        if d == 2:
            halves[:, 1] = TAIL_RADIUS / math.sqrt(ax)
            frames = _orthonormal_frames(v)
        else:
            frames = np.broadcast_to(np.eye(1), (m, 1, 1))
        return frames, halves
    if isinstance(g, BumpPairFunction):
        # (rho* g)^{d+1} cubes the relative tail, so a modest tolerance
        # keeps the window inside the transform grid's Nyquist-safe radius
        reach = g.effective_support_radius(1e-5)
        halves = reach + reach * np.abs(v)
        frames = np.broadcast_to(np.eye(d), (m, d, d))
        return frames, halves
    raise DegenerateInputError("vtrunc_lhs needs a Gaussian or bump-pair g")


def _vtrunc_lhs_once(g, V: float, d: int, n_x: int, n_vr: int, n_va: int,
                     n_t: int, oracle: bool) -> float:
    v_pts, v_wts = ball_grid(d, V, n_vr, n_va)
    if oracle and isinstance(g, GaussianSpaceTime):
        evaluator = g.adjoint_closed_form
    else:
        evaluator = adjoint_density(g, GridSpec.uniform(1, -1, 1, n_t, "gauss-legendre"))
    frames, halves = _x_windows(g, v_pts)
    ref, wref = np.polynomial.legendre.leggauss(n_x)
    total = 0.0
    chunk = max(1, int(4e6 // (n_x**d)))
    for start in range(0, v_pts.shape[0], chunk):
        sl = slice(start, min(start + chunk, v_pts.shape[0]))
        vs, ws = v_pts[sl], v_wts[sl]
        fr, hf = frames[sl], halves[sl]
        m = vs.shape[0]
        if d == 1:
            xs = (hf[:, 0:1] * ref[None, :])[..., None]  # (m, n, 1)
            vals = evaluator(xs, vs[:, None, :])
            inner = (vals ** (d + 1)) @ wref * hf[:, 0]
        else:
            c1 = ref[None, :, None]
            c2 = ref[None, None, :]
            xs = (hf[:, 0, None, None, None] * c1[..., None] * fr[:, None, None, :, 0]
                  + hf[:, 1, None, None, None] * c2[..., None] * fr[:, None, None, :, 1])
            vals = evaluator(xs, vs[:, None, None, :])
            inner = np.tensordot(vals ** (d + 1), np.outer(wref, wref), axes=2)
            inner = inner * hf[:, 0] * hf[:, 1]
        total += float(np.dot(ws, inner))
    return total


def vtrunc_lhs(g, V: float, d: int | None = None, n_x: int = 48, n_v_radial: int = 48,
               n_v_angular: int = 48, n_t: int = 64, oracle: bool = False,
               error_estimate: bool = True) -> tuple[float, float | None]:
    """int_{|v| <= V} int_x (rho* g)^{d+1} dx dv, by quadrature.

    ``oracle=True`` substitutes the closed-form adjoint for Gaussian g.
    Returns (value, Richardson error estimate).
    """
    if V < 0:
        raise DegenerateInputError("V must be nonnegative")
    if d is None:
        d = g.d
    if V == 0:
        return 0.0, 0.0
    value = _vtrunc_lhs_once(g, V, d, n_x, n_v_radial, n_v_angular, n_t, oracle)
    err = None
    if error_estimate:
        coarse = _vtrunc_lhs_once(g, V, d, max(8, n_x // 2), max(8, n_v_radial // 2),
                                  max(8, n_v_angular // 2), max(8, n_t // 2), oracle)
        err = abs(value - coarse)
    return value, err


@dataclass
class FourierSideConfig:
    """Discretization of the Fourier-side identity.

    The tau variables and the (d+1)-th xi are eliminated analytically by the
    delta functions (tau_j = -v . xi_j, xi_{d+1} = -sum xi_j); only the xi_j
    grids and the v truncation remain.  ``c`` counts the (2 pi) factors from
    d+1 Fourier inversions against the delta normalizations.
    """

    d: int
    xi_grid: GridSpec | None = None  # d axes; template reused for every xi_j
    n_v_radial: int = 24
    n_v_angular: int = 24
    c: float | None = None

    def __post_init__(self):
        if self.c is None:
            self.c = (2 * math.pi) ** (-self.d**2)

    def resolved_xi_grid(self, g) -> GridSpec:
        if self.xi_grid is not None:
            return self.xi_grid
        if isinstance(g, BumpPairFunction):
            reach = 2 * g.profile.radius
        else:
            reach = 12.0 / g.x_width
        count = 40 if self.d == 1 else 32
        return GridSpec.uniform(self.d, -reach, reach, count)


def _fourier_factors(g):
    """Separable factorization ghat(tau, xi) = amp * ft(tau) prod fx(xi_k)."""
    if isinstance(g, GaussianSpaceTime):
        if not g.is_centered:
            raise DegenerateInputError("Fourier side expects centered g")
        amp = g.amplitude * g.t_width * g.x_width**g.d
        st2, sx2 = g.t_width**2, g.x_width**2
        return amp, (lambda s: np.exp(-st2 * np.asarray(s) ** 2 / (4 * np.pi))), \
            (lambda s: np.exp(-sx2 * np.asarray(s) ** 2 / (4 * np.pi)))
    if isinstance(g, BumpPairFunction):
        return 1.0, g._conv, g._conv
    raise DegenerateInputError("vtrunc_rhs needs a Gaussian or bump-pair g")


def _vtrunc_rhs_once(g, V: float, cfg: FourierSideConfig, n_vr: int, n_va: int,
                     xi_grid: GridSpec) -> float:
    d = cfg.d
    amp, ft, fx = _fourier_factors(g)
    v_pts, v_wts = ball_grid(d, V, n_vr, n_va)
    xi_pts, xi_wts = xi_grid.points_weights()

    if d == 1:
        # integrand: amp^2 ft(v xi)^2 fx(xi)^2
        base = amp * amp * (fx(xi_pts[:, 0]) ** 2) * xi_wts
        u = np.outer(v_pts[:, 0], xi_pts[:, 0])
        inner = (ft(u) ** 2) @ base
        return float(cfg.c * np.dot(v_wts, inner))

    if d == 2:
        # per v: A^T (amp * T o D) A with A_i = amp ft(-u_i) fx-parts w_i,
        # T_ij = ft(u_i + u_j), D_ij = prod_k fx(xi_ik + xi_jk)
        fx_part = fx(xi_pts[:, 0]) * fx(xi_pts[:, 1]) * xi_wts
        D = (fx(xi_pts[:, 0][:, None] + xi_pts[:, 0][None, :])
             * fx(xi_pts[:, 1][:, None] + xi_pts[:, 1][None, :]))
        total = 0.0
        for i, v in enumerate(v_pts):
            u = xi_pts @ v
            A = amp * ft(-u) * fx_part
            T = ft(u[:, None] + u[None, :])
            total += v_wts[i] * float(A @ ((amp * T * D) @ A))
        return float(cfg.c * total)

    raise DegenerateInputError("tensor quadrature implemented for d in {1, 2}; "
                               "use vtrunc_rhs_mc for d = 3")


def vtrunc_rhs(g, V: float, cfg: FourierSideConfig,
               error_estimate: bool = True) -> tuple[float, float | None]:
    """Fourier-side value of the v-truncated norm, c * int prod ghat(...)."""
    if V < 0:
        raise DegenerateInputError("V must be nonnegative")
    if V == 0:
        return 0.0, 0.0
    xi_grid = cfg.resolved_xi_grid(g)
    value = _vtrunc_rhs_once(g, V, cfg, cfg.n_v_radial, cfg.n_v_angular, xi_grid)
    err = None
    if error_estimate:
        coarse = _vtrunc_rhs_once(g, V, cfg, max(8, cfg.n_v_radial // 2),
                                  max(8, cfg.n_v_angular // 2), xi_grid.halved())
        err = abs(value - coarse)
    return value, err


def vtrunc_rhs_mc(g, V: float, cfg: FourierSideConfig, n_samples: int = 1_000_000,
                  seed: int = 0, batch_size: int = 1 << 15,
                  workers: int = 1) -> tuple[float, float]:
    """Seeded Monte Carlo for the Fourier side, d = 3."""
    d = cfg.d
    amp, ft, fx = _fourier_factors(g)
    xi_grid = cfg.resolved_xi_grid(g)
    lo = np.array([ax.lo for ax in xi_grid.axes])
    hi = np.array([ax.hi for ax in xi_grid.axes])
    box_vol = float(np.prod(hi - lo)) ** d
    ball_vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * V**d
    layout = batch_layout(n_samples, batch_size)

    def run_batch(args):
        b, size = args
        gen = batch_generator(seed, b)
        # v uniform in the ball, xi_j uniform in the box
        z = gen.standard_normal((size, d))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        v = z * (gen.random((size, 1)) ** (1.0 / d)) * V
        vals = np.ones(size)
        xi_sum = np.zeros((size, d))
        u_sum = np.zeros(size)
        for _ in range(d):
            xi = lo + (hi - lo) * gen.random((size, d))
            u = np.sum(v * xi, axis=1)
            fxprod = np.ones(size)
            for k in range(d):
                fxprod *= fx(xi[:, k])
            vals *= amp * ft(-u) * fxprod
            xi_sum += xi
            u_sum += u
        fxprod = np.ones(size)
        for k in range(d):
            fxprod *= fx(-xi_sum[:, k])
        vals *= amp * ft(u_sum) * fxprod
        return vals.sum(), (vals * vals).sum()

    jobs = list(enumerate(layout))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_batch, jobs))
    else:
        results = [run_batch(j) for j in jobs]
    s = sum(r[0] for r in results)
    s2 = sum(r[1] for r in results)
    mean = s / n_samples
    var = max(s2 / n_samples - mean**2, 0.0)
    scale = cfg.c * box_vol * ball_vol
    return scale * mean, scale * math.sqrt(var / n_samples)


def divergence_study(g, d: int, v_schedule, with_rhs: bool = False,
                     cfg: FourierSideConfig | None = None, oracle: bool = True,
                     n_x: int = 48, n_v_radial: int = 48, n_v_angular: int = 48,
                     n_t: int = 64, error_estimate: bool = True):
    """Growth of the truncated norm along a V-schedule.

    Returns (GrowthTable over V, per-row detail dict).  The fitted growth
    (logarithmic for the Gaussian reference) is the artifact's witness that
    the untruncated endpoint norm is infinite.
    """
    vs = [float(V) for V in v_schedule]
    if any(V <= 0 for V in vs):
        raise DegenerateInputError("V-schedule must be positive")
    rows = {"V": [], "lhs": [], "rhs": [], "lhs_err": [], "rhs_err": []}
    for V in vs:
        lhs, lhs_err = vtrunc_lhs(g, V, d=d, n_x=n_x, n_v_radial=n_v_radial,
                                  n_v_angular=n_v_angular, n_t=n_t, oracle=oracle,
                                  error_estimate=error_estimate)
        rows["V"].append(V)
        rows["lhs"].append(lhs)
        rows["lhs_err"].append(lhs_err if lhs_err is not None else float("nan"))
        if with_rhs:
            rhs, rhs_err = vtrunc_rhs(g, V, cfg or FourierSideConfig(d),
                                      error_estimate=error_estimate)
            rows["rhs"].append(rhs)
            rows["rhs_err"].append(rhs_err if rhs_err is not None else float("nan"))
        else:
            rows["rhs"].append(float("nan"))
            rows["rhs_err"].append(float("nan"))
    table = GrowthTable(params=np.array(rows["V"]), values=np.array(rows["lhs"]),
                        model="log")
    return table, rows
