"""Tensor-product quadrature grids.

One ``GridSpec`` describes an axis group (t, x, v or xi): per-axis interval,
point count and rule.  Trapezoid on uniform nodes is the default; nodes are
spectrally accurate here because every integrand in this artifact is smooth
with rapid decay inside its box.  Gauss-Legendre is available per axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TRAPEZOID = "trapezoid"
GAUSS = "gauss-legendre"


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int
    rule: str = TRAPEZOID

    def __post_init__(self):
        if not self.lo < self.hi:
            raise GridError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.count < 2:
            raise GridError(f"need count >= 2, got {self.count}")
        if self.rule not in (TRAPEZOID, GAUSS):
            raise GridError(f"unknown rule {self.rule!r}")

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        if self.rule == TRAPEZOID:
            nodes = np.linspace(self.lo, self.hi, self.count)
            h = (self.hi - self.lo) / (self.count - 1)
            weights = np.full(self.count, h)
            weights[0] = weights[-1] = h / 2
            return nodes, weights
        nodes, weights = np.polynomial.legendre.leggauss(self.count)
        half = (self.hi - self.lo) / 2
        mid = (self.hi + self.lo) / 2
        return mid + half * nodes, half * weights

    def halved(self) -> "Axis":
        return Axis(self.lo, self.hi, max(2, (self.count + 1) // 2), self.rule)


@dataclass(frozen=True)
class GridSpec:
    """An ordered group of quadrature axes integrated jointly."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise GridError("empty axis group")

    @classmethod
    def uniform(cls, ndim: int, lo: float, hi: float, count: int,
                rule: str = TRAPEZOID) -> "GridSpec":
        return cls(tuple(Axis(lo, hi, count, rule) for _ in range(ndim)))

    @classmethod
    def box(cls, centers, half_widths, count: int, rule: str = TRAPEZOID) -> "GridSpec":
        centers = np.atleast_1d(np.asarray(centers, dtype=float))
        half_widths = np.broadcast_to(np.asarray(half_widths, dtype=float), centers.shape)
        return cls(tuple(Axis(c - w, c + w, count, rule)
                         for c, w in zip(centers, half_widths)))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def volume(self) -> float:
        return float(np.prod([ax.hi - ax.lo for ax in self.axes]))

    def total_weight(self) -> float:
        return float(np.prod([ax.nodes_weights()[1].sum() for ax in self.axes]))

    def halved(self) -> "GridSpec":
        return GridSpec(tuple(ax.halved() for ax in self.axes))

    def points_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened tensor grid: points (N, ndim) and combined weights (N,).

        The flattening order is fixed (C order over the axis meshes), which
        pins the summation order used by every consumer.
        """
        per_axis = [ax.nodes_weights() for ax in self.axes]
        meshes = np.meshgrid(*[n for n, _ in per_axis], indexing="ij")
        points = np.stack([m.ravel() for m in meshes], axis=-1)
        wmesh = np.meshgrid(*[w for _, w in per_axis], indexing="ij")
        weights = np.ones(points.shape[0])
        for w in wmesh:
            weights = weights * w.ravel()
        return points, weights

    def integrate(self, func) -> float:
        """Integrate a vectorized callable func(points[:, ndim]) -> values."""
        points, weights = self.points_weights()
        vals = np.asarray(func(points), dtype=float)
        return float(np.dot(weights, vals))


def sinh_stretched_interval(radius: float, count: int,
                            rule: str = GAUSS) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for [-radius, radius] under v = sinh(u).

    Resolves both the unit scale near 0 and slow 1/|v| decay out to large
    radii with a fixed point count.
    """
    u_max = float(np.arcsinh(radius))
    u, wu = Axis(-u_max, u_max, count, rule).nodes_weights()
    return np.sinh(u), wu * np.cosh(u)


def ball_grid(d: int, radius: float, n_radial: int, n_angular: int = 0,
              stretch: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for the centered ball |v| <= radius, d in {1, 2}.

    Returns points (N, d) and weights (N,).  d = 2 uses polar coordinates
    (Gauss-Legendre radially, periodic-uniform in angle), so the ball is
    represented exactly.  ``stretch`` applies a sinh substitution radially,
    suited to integrands decaying like powers of |v|.
    """
    if d == 1:
        if stretch:
            v, w = sinh_stretched_interval(radius, n_radial)
        else:
            v, w = Axis(-radius, radius, n_radial, GAUSS).nodes_weights()
        return v[:, None], w
    if d == 2:
        if n_angular <= 0:
            raise GridError("d = 2 ball grid needs n_angular > 0")
        if stretch:
            u_max = float(np.arcsinh(radius))
            u, wu = Axis(0.0, u_max, n_radial, GAUSS).nodes_weights()
            r = np.sinh(u)
            wr = wu * np.cosh(u) * r
        else:
            r, wr = Axis(0.0, radius, n_radial, GAUSS).nodes_weights()
            wr = wr * r
        phi = 2 * np.pi * np.arange(n_angular) / n_angular
        wphi = np.full(n_angular, 2 * np.pi / n_angular)
        rr, pp = np.meshgrid(r, phi, indexing="ij")
        points = np.stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel()], axis=-1)
        weights = np.outer(wr, wphi).ravel()
        return points, weights
    raise GridError(f"ball_grid supports d in {{1, 2}}, got d = {d}")
