"""Closed-form test function families.

Gaussians carry their exact Lebesgue norms, densities and Fourier
transforms, so they serve as oracles for every quadrature in the package.
The bump-pair family realizes the counterexample class: g >= 0 with a
nonnegative, compactly supported, smooth space-time Fourier transform.

Fourier convention:  ghat(tau, xi) = integral of g(t,x) e^{-i(t tau + x.xi)},
so each inversion carries a factor (2 pi)^{-(1+d)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import GAUSS, GridSpec


class MalformedFunctionError(ValueError):
    pass


class ResolutionError(ValueError):
    """A quadrature/transform grid is too coarse for the requested use."""


def _as_points(arr, d: int) -> np.ndarray:
    """Coerce to shape (..., d)."""
    arr = np.asarray(arr, dtype=float)
    if d == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != d:
        raise MalformedFunctionError(f"expected trailing dimension {d}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class GaussianPhaseSpace:
    """f0(x, v) = A exp(-pi(|x-x0|^2/sx^2 + |v-v0|^2/sv^2)) on R^d x R^d."""

    d: int
    amplitude: float = 1.0
    x_center: tuple = ()
    v_center: tuple = ()
    x_width: float = 1.0
    v_width: float = 1.0

    def __post_init__(self):
        if self.x_width <= 0 or self.v_width <= 0:
            raise MalformedFunctionError("widths must be positive")
        xc = np.zeros(self.d) if len(self.x_center) == 0 else np.asarray(self.x_center, float)
        vc = np.zeros(self.d) if len(self.v_center) == 0 else np.asarray(self.v_center, float)
        if xc.shape != (self.d,) or vc.shape != (self.d,):
            raise MalformedFunctionError("center dimension mismatch")
        object.__setattr__(self, "x_center", tuple(xc))
        object.__setattr__(self, "v_center", tuple(vc))

    def __call__(self, x, v) -> np.ndarray:
        x = _as_points(x, self.d)
        v = _as_points(v, self.d)
        qx = np.sum((x - np.array(self.x_center)) ** 2, axis=-1) / self.x_width**2
        qv = np.sum((v - np.array(self.v_center)) ** 2, axis=-1) / self.v_width**2
        return self.amplitude * np.exp(-np.pi * (qx + qv))

    def lebesgue_norm(self, a: float) -> float:
        """Exact L^a_{x,v} norm; a = inf gives the sup."""
        if np.isinf(a):
            return abs(self.amplitude)
        return abs(self.amplitude) * (self.x_width * self.v_width) ** (self.d / a) * a ** (-self.d / a)

    def density_closed_form(self, t, x) -> np.ndarray:
        """rho(f0)(t, x) = integral over v, in closed form.

        Standard Gaussian: (1+t^2)^{-d/2} exp(-pi |x|^2 / (1+t^2)).
        """
        t = np.asarray(t, dtype=float)
        x = _as_points(x, self.d)
        sx2, sv2 = self.x_width**2, self.v_width**2
        denom = sx2 + t**2 * sv2
        shift = x - np.array(self.x_center) - t[..., None] * np.array(self.v_center)
        q = np.sum(shift**2, axis=-1)
        pref = (self.x_width * self.v_width) ** self.d * denom ** (-self.d / 2)
        return self.amplitude * pref * np.exp(-np.pi * q / denom)

    def dilated(self, mu: float, nu: float) -> "GaussianPhaseSpace":
        """f0(x/mu, v/nu): widths and centers scale, amplitude fixed."""
        return GaussianPhaseSpace(
            self.d, self.amplitude,
            tuple(mu * c for c in self.x_center),
            tuple(nu * c for c in self.v_center),
            mu * self.x_width, nu * self.v_width)


@dataclass(frozen=True)
class GaussianSpaceTime:
    """g(t, x) = A exp(-pi((t-t0)^2/st^2 + |x-x0|^2/sx^2)) on R x R^d."""

    d: int
    amplitude: float = 1.0
    t_center: float = 0.0
    x_center: tuple = ()
    t_width: float = 1.0
    x_width: float = 1.0

    def __post_init__(self):
        if self.t_width <= 0 or self.x_width <= 0:
            raise MalformedFunctionError("widths must be positive")
        xc = np.zeros(self.d) if len(self.x_center) == 0 else np.asarray(self.x_center, float)
        if xc.shape != (self.d,):
            raise MalformedFunctionError("center dimension mismatch")
        object.__setattr__(self, "x_center", tuple(xc))

    @property
    def is_centered(self) -> bool:
        return self.t_center == 0.0 and all(c == 0.0 for c in self.x_center)

    def __call__(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = _as_points(x, self.d)
        qx = np.sum((x - np.array(self.x_center)) ** 2, axis=-1) / self.x_width**2
        qt = (t - self.t_center) ** 2 / self.t_width**2
        return self.amplitude * np.exp(-np.pi * (qt + qx))

    def fourier(self, tau, xi) -> np.ndarray:
        """ghat(tau, xi); closed form, real and positive for centered g."""
        if not self.is_centered:
            raise MalformedFunctionError("closed-form transform implemented for centered Gaussians")
        tau = np.asarray(tau, dtype=float)
        xi = _as_points(xi, self.d)
        pref = self.amplitude * self.t_width * self.x_width**self.d
        q = self.t_width**2 * tau**2 + self.x_width**2 * np.sum(xi**2, axis=-1)
        return pref * np.exp(-q / (4 * np.pi))

    def total_integral(self) -> float:
        return self.amplitude * self.t_width * self.x_width**self.d

    def slice_norm(self, t: float, p: float) -> float:
        """Exact ||g(t, .)||_{L^p_x}."""
        amp = self.amplitude * np.exp(-np.pi * (t - self.t_center) ** 2 / self.t_width**2)
        if np.isinf(p):
            return float(amp)
        return float(amp * self.x_width ** (self.d / p) * p ** (-self.d / (2 * p)))

    def spacetime_norm(self, q: float, p: float) -> float:
        """Exact ||g||_{L^q_t L^p_x}."""
        if np.isinf(q):
            t_factor = self.amplitude
        else:
            t_factor = self.amplitude * self.t_width ** (1 / q) * q ** (-1 / (2 * q))
        if np.isinf(p):
            x_factor = 1.0
        else:
            x_factor = self.x_width ** (self.d / p) * p ** (-self.d / (2 * p))
        return float(t_factor * x_factor)

    def adjoint_closed_form(self, x, v) -> np.ndarray:
        """rho* g(x, v) = integral of g(t, x + t v) dt, in closed form.

        Standard Gaussian: (1+|v|^2)^{-1/2} exp(-pi(|x|^2 - (x.v)^2/(1+|v|^2))).
        """
        x = _as_points(x, self.d)
        v = _as_points(v, self.d)
        at = 1.0 / self.t_width**2
        ax = 1.0 / self.x_width**2
        xt = x + self.t_center * v - np.array(self.x_center)
        v2 = np.sum(v**2, axis=-1)
        dot = np.sum(xt * v, axis=-1)
        denom = at + ax * v2
        q = ax * np.sum(xt**2, axis=-1) - (ax * dot) ** 2 / denom
        return self.amplitude * denom ** (-0.5) * np.exp(-np.pi * q)

    def slice_at(self, t: float) -> "GaussianSlice":
        amp = self.amplitude * float(np.exp(-np.pi * (t - self.t_center) ** 2 / self.t_width**2))
        return GaussianSlice(self.d, amp, self.x_center, self.x_width)

    def dilated(self, mu_t: float, mu_x: float) -> "GaussianSpaceTime":
        return GaussianSpaceTime(self.d, self.amplitude, mu_t * self.t_center,
                                 tuple(mu_x * c for c in self.x_center),
                                 mu_t * self.t_width, mu_x * self.x_width)


@dataclass(frozen=True)
class GaussianSlice:
    """A fixed-time spatial slice A exp(-pi |x-c|^2 / s^2) with exact norms."""

    d: int
    amplitude: float = 1.0
    center: tuple = ()
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise MalformedFunctionError("width must be positive")
        c = np.zeros(self.d) if len(self.center) == 0 else np.asarray(self.center, float)
        if c.shape != (self.d,):
            raise MalformedFunctionError("center dimension mismatch")
        object.__setattr__(self, "center", tuple(c))

    def __call__(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        q = np.sum((x - np.array(self.center)) ** 2, axis=-1) / self.width**2
        return self.amplitude * np.exp(-np.pi * q)

    def norm(self, p: float) -> float:
        if np.isinf(p):
            return abs(self.amplitude)
        return abs(self.amplitude) * self.width ** (self.d / p) * p ** (-self.d / (2 * p))

    def powered(self, sigma: float) -> "GaussianSlice":
        """The pointwise power; still Gaussian with shrunken width."""
        return GaussianSlice(self.d, self.amplitude**sigma, self.center,
                             self.width / np.sqrt(sigma))


def make_gaussian_phase_space(d: int, **params) -> GaussianPhaseSpace:
    return GaussianPhaseSpace(d, **params)


def make_gaussian_spacetime(d: int, **params) -> GaussianSpaceTime:
    return GaussianSpaceTime(d, **params)


@dataclass(frozen=True)
class BumpProfile:
    """1-D even bump b(u) = (1 - (u/radius)^2)^power on [-radius, radius]."""

    radius: float = 1.0
    power: int = 4

    def __post_init__(self):
        if self.radius <= 0:
            raise MalformedFunctionError("radius must be positive")
        if self.power < 2:
            raise MalformedFunctionError("power < 2 is not smooth enough at the support edge")

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        core = np.clip(1.0 - (u / self.radius) ** 2, 0.0, None)
        return core**self.power

    def integral(self) -> float:
        # int_{-R}^{R} (1-(u/R)^2)^k du = R * B(1/2, k+1) = 2R * (2k)!! / (2k+1)!!
        from math import gamma
        k = self.power
        return self.radius * gamma(0.5) * gamma(k + 1) / gamma(k + 1.5)

    def l2_squared(self) -> float:
        from math import gamma
        k = 2 * self.power
        return self.radius * gamma(0.5) * gamma(k + 1) / gamma(k + 1.5)


class BumpPairFunction:
    """g with ghat = phi * phi (self-convolution of a tensor bump).

    phi(tau, xi) = b(tau) prod_i b(xi_i) with b the 1-D profile, so
    ghat >= 0 with support in [-2R, 2R]^{1+d}, and

        g(t, x) = (2 pi)^{-(1+d)} B(t)^2 prod_i B(x_i)^2 >= 0,

    where B is the (real, even) 1-D transform of b.  Both sign conditions
    of the counterexample class therefore hold exactly by construction.

    The transform B is evaluated by Gauss-Legendre quadrature whose node
    count comes from the supplied inverse-FT grid; evaluation points beyond
    the grid's Nyquist-safe radius raise ``ResolutionError``.
    """

    # table resolution for the self-convolution ghat = (b*b) per axis
    _CONV_TABLE_SIZE = 8192
    _CONV_QUAD_NODES = 96
    # oversampling demanded of the transform quadrature vs. pure Nyquist
    # (n-node Gauss-Legendre on [-R, R] resolves cos(u y) well up to
    # |y| ~ pi n / (2R); the margin keeps clear of the breakdown edge)
    _NYQUIST_MARGIN = 1.5

    def __init__(self, d: int, profile: BumpProfile, ft_grid: GridSpec):
        if ft_grid.ndim != 1 + d:
            raise MalformedFunctionError(
                f"inverse-FT grid must have {1 + d} axes, got {ft_grid.ndim}")
        R = profile.radius
        for ax in ft_grid.axes:
            if ax.lo > -2 * R or ax.hi < 2 * R:
                raise ResolutionError(
                    f"ft grid axis [{ax.lo}, {ax.hi}] does not cover supp ghat = [-{2*R}, {2*R}]")
        self.d = d
        self.profile = profile
        self.ft_grid = ft_grid
        self._n_quad = min(ax.count for ax in ft_grid.axes)
        if self._n_quad < 8:
            raise ResolutionError("inverse-FT grid too coarse (need >= 8 points per axis)")
        nodes, weights = np.polynomial.legendre.leggauss(self._n_quad)
        self._quad_u = R * nodes
        self._quad_w = R * weights * profile(self._quad_u)
        # dense table of C = b*b on [0, 2R] (C is even)
        s = np.linspace(0.0, 2 * R, self._CONV_TABLE_SIZE)
        self._conv_s = s
        self._conv_table = self._self_convolution(s)
        # dense table of the 1-D transform B out to the Nyquist-safe radius;
        # step well below the oscillation period pi/R
        n_tab = min(1 << 17, max(1 << 12, int(self.nyquist_radius * R / 0.004)))
        self._B_s = np.linspace(0.0, self.nyquist_radius, n_tab)
        self._B_table = np.cos(self._B_s[:, None] * self._quad_u) @ self._quad_w

    def _self_convolution(self, s: np.ndarray) -> np.ndarray:
        """(b*b)(s) for s >= 0 by Gauss quadrature on the overlap interval."""
        R = self.profile.radius
        lo = np.maximum(-R, s - R)
        hi = np.full_like(s, R)
        mid = (lo + hi) / 2
        half = (hi - lo) / 2
        nodes, weights = np.polynomial.legendre.leggauss(self._CONV_QUAD_NODES)
        u = mid[:, None] + half[:, None] * nodes[None, :]
        vals = self.profile(u) * self.profile(s[:, None] - u)
        out = half * (vals @ weights)
        out[half <= 0] = 0.0
        return out

    def _conv(self, s) -> np.ndarray:
        return np.interp(np.abs(np.asarray(s, dtype=float)),
                         self._conv_s, self._conv_table, right=0.0)

    @property
    def nyquist_radius(self) -> float:
        """Largest |coordinate| the transform quadrature can resolve."""
        return np.pi * self._n_quad / (2 * self.profile.radius * self._NYQUIST_MARGIN)

    def transform_1d_exact(self, y) -> np.ndarray:
        """B(y) = integral b(u) e^{-i u y} du (real and even), by quadrature."""
        y = np.asarray(y, dtype=float)
        return np.cos(y[..., None] * self._quad_u) @ self._quad_w

    def transform_1d(self, y) -> np.ndarray:
        """Tabulated B(y); raises past the Nyquist-safe radius."""
        y = np.abs(np.asarray(y, dtype=float))
        if y.size and np.max(y) > self.nyquist_radius:
            raise ResolutionError(
                f"evaluation radius {np.max(y):.3g} exceeds the transform grid's "
                f"Nyquist-safe radius {self.nyquist_radius:.3g}; refine the inverse-FT grid")
        return np.interp(y, self._B_s, self._B_table)

    def fourier(self, tau, xi) -> np.ndarray:
        """ghat(tau, xi) = (b*b)(tau) prod_i (b*b)(xi_i); nonnegative."""
        xi = _as_points(xi, self.d)
        out = self._conv(tau)
        for i in range(self.d):
            out = out * self._conv(xi[..., i])
        return out

    def ghat_at_origin(self) -> float:
        """ghat(0,0) = (b*b)(0)^{1+d} = (int b^2)^{1+d} > 0."""
        return self.profile.l2_squared() ** (1 + self.d)

    def __call__(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = _as_points(x, self.d)
        out = self.transform_1d(t) ** 2
        for i in range(self.d):
            out = out * self.transform_1d(x[..., i]) ** 2
        return out * (2 * np.pi) ** (-(1 + self.d))

    def effective_support_radius(self, rel_tol: float = 1e-7) -> float:
        """Radius beyond which a single-axis factor drops below rel_tol of its peak."""
        b0 = self.transform_1d(np.array(0.0)) ** 2
        r = self.profile.radius
        radius = 2.0 / r
        y_max = self.nyquist_radius
        # envelope of B(y)^2 decays polynomially; march outward on a coarse grid
        while radius < y_max:
            ys = np.linspace(radius, min(radius * 1.5, y_max), 64)
            if np.max(self.transform_1d(ys) ** 2) < rel_tol * b0:
                return float(radius)
            radius *= 1.5
        return float(y_max)


def make_counterexample_g(d: int, ft_grid: GridSpec | None = None,
                          radius: float = 1.0, power: int = 4,
                          n_per_axis: int = 64) -> BumpPairFunction:
    """A member of the counterexample class (g >= 0, ghat in C_c, ghat >= 0)."""
    if ft_grid is None:
        ft_grid = GridSpec.uniform(1 + d, -2 * radius, 2 * radius, n_per_axis,
                                   rule=GAUSS)
    return BumpPairFunction(d, BumpProfile(radius, power), ft_grid)
