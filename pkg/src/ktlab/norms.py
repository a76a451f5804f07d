"""Mixed Lebesgue norms L^q_t L^p_x L^r_v and the Strichartz ratio functionals.

Norms are evaluated innermost-to-outermost (v, then x, then t) on tensor
grids.  Every power/sum step runs in peak-normalized arithmetic (divide by
the running maximum, multiply back) so large exponents never overflow; the
normalization factor is recorded on the result.  An infinite exponent is
realized as the grid maximum, a lower bound for the true sup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exponents import ExponentTuple, conjugate
from .functions import GaussianPhaseSpace, GaussianSpaceTime
from .grids import GridSpec
from .transport import adjoint_density, density


class DegenerateInputError(ValueError):
    pass


class EndpointDivergenceError(ValueError):
    """The requested norm diverges at the endpoint; use the endpoint lab."""


GroupLike = "GridSpec | Sequence[tuple[np.ndarray, np.ndarray]]"


def _group_axes(group) -> list[tuple[np.ndarray, np.ndarray]]:
    if isinstance(group, GridSpec):
        return [ax.nodes_weights() for ax in group.axes]
    return [(np.asarray(n, float), np.asarray(w, float)) for n, w in group]


@dataclass
class MixedNormResult:
    value: float
    exponents: tuple
    peak: float
    error_estimate: float | None = None


def _reduce_axis(vals: np.ndarray, weights: np.ndarray, exponent: float) -> np.ndarray:
    """One nested-norm step along the last axis, peak-normalized."""
    if np.isinf(exponent):
        return np.max(np.abs(vals), axis=-1)
    peak = np.max(np.abs(vals), axis=-1, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    powered = (np.abs(vals) / safe) ** exponent
    acc = powered @ weights
    return safe[..., 0] * acc ** (1.0 / exponent)


def _sample_and_reduce(F, exponents: Sequence[float], groups) -> tuple[float, float]:
    """Returns (norm value, global sample peak)."""
    axes_per_group = [_group_axes(g) for g in groups]
    outer_axes = axes_per_group[0]
    inner = axes_per_group[1:]
    inner_exps = list(exponents[1:])

    # mesh of the outer group
    outer_nodes = [n for n, _ in outer_axes]
    outer_mesh = np.meshgrid(*outer_nodes, indexing="ij")
    outer_pts = np.stack([m.ravel() for m in outer_mesh], axis=-1)  # (No, d0)

    inner_meshes = []
    inner_dims = []
    for axes in inner:
        nodes = [n for n, _ in axes]
        mesh = np.meshgrid(*nodes, indexing="ij")
        inner_meshes.append(np.stack([m.ravel() for m in mesh], axis=-1))
        inner_dims.append(len(axes))

    peak = 0.0
    reduced = np.empty(outer_pts.shape[0])
    # chunk over outer points to bound memory
    n_inner = int(np.prod([m.shape[0] for m in inner_meshes])) if inner_meshes else 1
    chunk = max(1, int(2e6 // max(n_inner, 1)))
    for start in range(0, outer_pts.shape[0], chunk):
        sl = slice(start, min(start + chunk, outer_pts.shape[0]))
        opts = outer_pts[sl]
        m = opts.shape[0]
        args = [opts.reshape((m,) + (1,) * len(inner_meshes) + (opts.shape[1],))]
        for j, mesh in enumerate(inner_meshes):
            shape = [1] * (1 + len(inner_meshes)) + [mesh.shape[1]]
            shape[1 + j] = mesh.shape[0]
            args.append(mesh.reshape(shape))
        target = (m,) + tuple(mm.shape[0] for mm in inner_meshes)
        args = [np.broadcast_to(a, target + (a.shape[-1],)) for a in args]
        vals = np.asarray(F(*args), dtype=float)
        peak = max(peak, float(np.max(np.abs(vals))) if vals.size else 0.0)
        # unflatten each inner group to its own axes, reduce innermost first
        full_shape = (m,) + tuple(
            axes[k][0].shape[0] for axes in inner for k in range(len(axes)))
        vals = vals.reshape(full_shape)
        for gi in range(len(inner) - 1, -1, -1):
            for k in range(len(inner[gi]) - 1, -1, -1):
                vals = _reduce_axis(vals, inner[gi][k][1], inner_exps[gi])
        reduced[sl] = vals
    # outer group reduction
    vals = reduced.reshape(tuple(n.shape[0] for n in outer_nodes))
    for k in range(len(outer_axes) - 1, -1, -1):
        vals = _reduce_axis(vals, outer_axes[k][1], exponents[0])
    return float(vals), peak


def mixed_norm(F, exponents: Sequence, groups, error_estimate: bool = True) -> MixedNormResult:
    """Nested norm of F over the given axis groups (outermost first).

    F is called as F(g0, g1, ...) where each argument has a trailing axis of
    that group's dimension; exponents align with groups.
    """
    exps = [float(e) for e in exponents]
    if len(exps) != len(groups):
        raise DegenerateInputError("one exponent per axis group required")
    if any(e < 1 for e in exps):
        raise DegenerateInputError("exponents must be >= 1 or inf")
    value, peak = _sample_and_reduce(F, exps, groups)
    err = None
    if error_estimate and all(isinstance(g, GridSpec) for g in groups):
        coarse, _ = _sample_and_reduce(F, exps, [g.halved() for g in groups])
        err = abs(value - coarse)
    return MixedNormResult(value=value, exponents=tuple(exps), peak=peak,
                           error_estimate=err)


def strichartz_ratio(f0, E: ExponentTuple, t_grid, x_grid, v_grid: GridSpec,
                     error_estimate: bool = False) -> float:
    """||rho(f0)||_{L^q_t L^p_x} / ||f0||_{L^a_{x,v}} for a reduced (r = 1) tuple."""
    if E.r != 1:
        raise DegenerateInputError("strichartz_ratio is defined on the r = 1 reduction")
    rho = density(f0, v_grid)
    num = mixed_norm(lambda T, X: rho(T[..., 0], X),
                     (E.q, E.p), (t_grid, x_grid),
                     error_estimate=error_estimate)
    if isinstance(f0, GaussianPhaseSpace):
        den = f0.lebesgue_norm(float(E.a))
    else:
        den = mixed_norm(lambda X, V: f0(X, V), (E.a, E.a), (x_grid, v_grid),
                         error_estimate=False).value
    if den == 0:
        raise DegenerateInputError("zero initial datum")
    return num.value / den


def dual_ratio(g, E: ExponentTuple, t_grid, x_grid, v_grid, d: int | None = None) -> float:
    """||rho* g||_{L^{a'}_{x,v}} / ||g||_{L^{q'}_t L^{a'/2}_x} on a truncation box.

    Refuses at and below the endpoint a' = d+1, where the left norm diverges.
    """
    qp = conjugate(E.q)
    ap = conjugate(E.a)
    if d is None:
        d = getattr(g, "d")
    if float(ap) <= d + 1:
        raise EndpointDivergenceError(
            f"a' = {ap} <= d+1 = {d + 1}: the (x,v)-norm diverges; "
            "use the endpoint lab's truncation study instead")
    field = adjoint_density(g, t_grid)
    num = mixed_norm(lambda X, V: field(X, V), (float(ap), float(ap)),
                     (x_grid, v_grid), error_estimate=False)
    if isinstance(g, GaussianSpaceTime):
        den = g.spacetime_norm(float(qp), float(ap) / 2)
    else:
        den = mixed_norm(lambda T, X: g(T[..., 0], X), (float(qp), float(ap) / 2),
                         (t_grid, x_grid), error_estimate=False).value
    if den == 0:
        raise DegenerateInputError("zero function")
    return num.value / den
