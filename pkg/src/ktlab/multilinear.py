"""The multilinear machinery behind the non-endpoint estimates.

The (d+1)-linear form int prod g_j(t_j, x + t_j v) dx dv is evaluated by
quadrature and compared against its bilinear change-of-variables bound
(constant exactly 1), the interpolated bound with the L^{(d+1)/2} slice
norms (constant 1, the equal-weight geometric mean of the bilinear bounds),
and instances of the multilinear Hardy-Littlewood-Sobolev inequality.

The pair products run over the full range 1 <= i < j <= d+1: only that
range makes the kernel homogeneity match the HLS scaling identity checked
exactly in ``mhls_homogeneity_identity``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exponents import ExtRational, q_of_sigma
from .functions import GaussianSlice

TAIL_STD = 8.0


class DegeneracyError(ValueError):
    pass


def validate_time_tuple(ts) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.size < 2:
        raise DegeneracyError("need at least two times")
    gaps = np.abs(ts[:, None] - ts[None, :])[np.triu_indices(ts.size, 1)]
    if np.min(gaps) == 0:
        raise DegeneracyError("times must be pairwise distinct")
    return ts


@dataclass
class BoundReport:
    form: float
    bound: float
    kind: str
    times: tuple

    @property
    def margin(self) -> float:
        return self.bound - self.form


def _product_frame(slices, ts):
    """Principal-axis frame of the Gaussian product in each (x_k, v_k) plane.

    The product of the slices is Gaussian with the same 2x2 Hessian H in
    every coordinate plane; integrating along H's eigenvectors keeps the
    integrand axis-aligned even when two times nearly coincide (where the
    product degenerates into a thin diagonal ridge).  Returns per-coordinate
    centers (2, d), the rotation Q (columns = eigenvectors) and the
    half-widths covering TAIL_STD standard deviations along each axis.
    """
    a = np.array([1.0 / s.width**2 for s in slices])
    H = np.array([[a.sum(), (a * ts).sum()], [(a * ts).sum(), (a * ts * ts).sum()]])
    evals, Q = np.linalg.eigh(H)
    if np.min(evals) <= 0:
        raise DegeneracyError("time tuple degenerates the (x, v) localization")
    halves = TAIL_STD / np.sqrt(2 * np.pi * evals)
    d = slices[0].d
    centers = np.empty((2, d))
    for k in range(d):
        b = np.array([sum(a[j] * slices[j].center[k] for j in range(len(slices))),
                      sum(a[j] * ts[j] * slices[j].center[k] for j in range(len(slices)))])
        centers[:, k] = np.linalg.solve(H, b)
    return centers, Q, halves


def product_form(slices, ts, n_per_axis: int = 32) -> float:
    """int over R^{2d} of prod_j g_j(x + t_j v) dx dv by tensor quadrature."""
    ts = validate_time_tuple(ts)
    if len(slices) != ts.size:
        raise DegeneracyError("one slice per time required")
    d = slices[0].d
    if any(s.d != d for s in slices):
        raise DegeneracyError("slice dimensions differ")
    centers, Q, halves = _product_frame(slices, ts)

    ref, wref = np.polynomial.legendre.leggauss(n_per_axis)
    # 2d quadrature axes: principal coordinates (s1_k, s2_k) per coordinate k,
    # ordered (s1_1..s1_d, s2_1..s2_d); (x_k, v_k) = center_k + Q (s1_k, s2_k)
    axis_nodes = []
    scale = 1.0
    for group in range(2):
        for _ in range(d):
            axis_nodes.append(halves[group] * ref)
            scale *= halves[group]
    mesh = np.meshgrid(*axis_nodes, indexing="ij")
    s1 = np.stack(mesh[:d], axis=-1)
    s2 = np.stack(mesh[d:], axis=-1)
    x = centers[0] + Q[0, 0] * s1 + Q[0, 1] * s2
    v = centers[1] + Q[1, 0] * s1 + Q[1, 1] * s2
    vals = np.ones(x.shape[:-1])
    for s, t in zip(slices, ts):
        vals = vals * s(x + t * v)
    w = wref
    for _ in range(2 * d - 1):
        w = np.multiply.outer(w, wref)
    return float(np.tensordot(vals, w, axes=2 * d) * scale)


def jacobian_factor(t_i: float, t_j: float, d: int) -> float:
    """|t_i - t_j|^d, the change-of-variables factor of (x,v) -> (x+t_i v, x+t_j v)."""
    if t_i == t_j:
        raise DegeneracyError("coincident times give a singular change of variables")
    return abs(t_i - t_j) ** d


def block_jacobian_det_exact(t_i, t_j, d: int) -> Fraction:
    """det [[I, t_i I], [I, t_j I]] over exact rationals, by elimination."""
    ti, tj = Fraction(t_i), Fraction(t_j)
    n = 2 * d
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(d):
        M[k][k] = Fraction(1)
        M[k][d + k] = ti
        M[d + k][k] = Fraction(1)
        M[d + k][d + k] = tj
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            factor = M[r][col] * inv
            if factor:
                for c in range(col, n):
                    M[r][c] -= factor * M[col][c]
    return det


def bilinear_bound_check(slices, ts, pair: tuple[int, int],
                         n_per_axis: int = 32) -> BoundReport:
    """form <= ||g_i||_1 ||g_j||_1 prod_k ||g_k||_inf / |t_i - t_j|^d, constant 1."""
    ts = validate_time_tuple(ts)
    i, j = pair
    if i == j:
        raise DegeneracyError("pair indices must differ")
    d = slices[0].d
    form = product_form(slices, ts, n_per_axis=n_per_axis)
    bound = slices[i].norm(1) * slices[j].norm(1) / jacobian_factor(ts[i], ts[j], d)
    for k in range(len(slices)):
        if k not in (i, j):
            bound *= slices[k].norm(np.inf)
    return BoundReport(form=form, bound=bound, kind=f"bilinear({i},{j})",
                       times=tuple(ts))


def interpolated_bound_check(slices, ts, n_per_axis: int = 32) -> BoundReport:
    """form <= prod_{i<j} |t_i-t_j|^{-2/(d+1)} prod_k ||g_k||_{(d+1)/2}, constant 1.

    The pair product runs over all 1 <= i < j <= d+1.
    """
    ts = validate_time_tuple(ts)
    d = slices[0].d
    if len(slices) != d + 1:
        raise DegeneracyError("interpolated bound is stated for d+1 factors")
    form = product_form(slices, ts, n_per_axis=n_per_axis)
    bound = 1.0
    for i in range(d + 1):
        for j in range(i + 1, d + 1):
            bound *= abs(ts[i] - ts[j]) ** (-2.0 / (d + 1))
    for s in slices:
        bound *= s.norm((d + 1) / 2)
    return BoundReport(form=form, bound=bound, kind="interpolated", times=tuple(ts))


# ---------------------------------------------------------------------------
# multilinear HLS instances

def mhls_homogeneity_identity(d: int, sigma) -> bool:
    """Exact check: (d(d+1)/2) beta = d/sigma = sum_k (1 - 1/q(sigma))."""
    sigma = ExtRational(sigma).fraction
    beta = Fraction(2, 1) / ((d + 1) * sigma)
    kernel_degree = Fraction(d * (d + 1), 2) * beta
    q = q_of_sigma(sigma, d)
    norm_degree = (d + 1) * (1 - q.reciprocal)
    return kernel_degree == Fraction(d, 1) / sigma == norm_degree


def _staggered_axis(T: float, count: int, k: int, n_axes: int) -> np.ndarray:
    """Midpoint-style nodes with a per-axis stagger, so no two axes collide."""
    h = 2 * T / count
    offset = (k + 1) / (2 * (n_axes + 1))
    return -T + h * (np.arange(count) + 0.5 + offset - 0.25)


def mhls_check(d: int, sigma: float, profile: GaussianSlice | None = None,
               T: float = 4.0, n_per_axis: int = 64) -> BoundReport:
    """Instance of the multilinear HLS inequality on [-T, T]^{d+1}.

    Computes int prod_{i<j} |t_i - t_j|^{-beta} prod_k h(t_k) dt against
    prod_k ||h||_{q(sigma)}; the report's form/bound ratio is the empirical
    constant (the inequality's own constant is not asserted).
    """
    if sigma <= 1:
        raise DegeneracyError("sigma must exceed 1 (endpoint refused)")
    if profile is None:
        profile = GaussianSlice(1)
    beta = 2.0 / ((d + 1) * sigma)
    n_axes = d + 1
    axes = [_staggered_axis(T, n_per_axis, k, n_axes) for k in range(n_axes)]
    h_vals = [np.asarray(profile(a[:, None])) for a in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    integrand = np.ones(mesh[0].shape)
    for k in range(n_axes):
        shape = [1] * n_axes
        shape[k] = -1
        integrand = integrand * h_vals[k].reshape(shape)
    for i in range(n_axes):
        for j in range(i + 1, n_axes):
            integrand = integrand * np.abs(mesh[i] - mesh[j]) ** (-beta)
    cell = (2 * T / n_per_axis) ** n_axes
    form = float(integrand.sum() * cell)
    q = float(q_of_sigma(Fraction(sigma).limit_denominator(10**6), d))
    bound = profile.norm(q) ** n_axes
    return BoundReport(form=form, bound=bound, kind="mhls", times=(T,))


def sigma_exponent_tuple(sigma, d: int):
    """The reduced (r = 1) primal tuple whose dual realizes (q(sigma), sigma(d+1))."""
    from .exponents import ExponentTuple, conjugate

    sigma = ExtRational(sigma)
    a_prime = ExtRational((d + 1) * sigma.fraction)
    p_prime = ExtRational(a_prime.fraction / 2)
    q_prime = q_of_sigma(sigma, d)
    return ExponentTuple(conjugate(q_prime), conjugate(p_prime), ExtRational(1),
                         conjugate(a_prime))


def nonendpoint_sweep(family, d: int, sigma_schedule, ratio_fn) -> "np.ndarray":
    """Worst-case dual-ratio constants over a function family, per sigma.

    ``ratio_fn(g, E)`` supplies the dual ratio (injected to keep grid policy
    with the caller).  Returns rows of (sigma, q(sigma), worst constant),
    sigma in the given order.
    """
    rows = []
    for sigma in sigma_schedule:
        E = sigma_exponent_tuple(sigma, d)
        worst = max(ratio_fn(g, E) for g in family)
        rows.append((float(ExtRational(sigma)), float(q_of_sigma(sigma, d)), worst))
    return np.array(rows)
