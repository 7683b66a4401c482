"""Closed discretized Brownian bridges and loop configurations.

A winding-j loop carries j particles: its path visits j beta-legs on a common
time grid of n_slices knots per leg.  Paths are stored unwrapped; periodic
loops may close onto a lattice image of their base point (spatial winding), in
which case the wrapped view satisfies the closure identity modulo L.

Bridge interiors are filled by recursive midpoint construction: split the
knot range at its midpoint, draw the midpoint from the exact Gaussian
conditional (variance 2 dt_left dt_right / dt_total per coordinate), recurse.
The schedule is deterministic, so a batch of loops fills in lockstep with
vectorized draws.
"""

from dataclasses import dataclass, field

import numpy as np

from .regions import PERIODIC, BoxRegion, wrap


@dataclass
class BridgeLoop:
    """One closed bridge: base point, winding number, unwrapped path of knots.

    path has shape (winding * n_slices + 1, d) with path[0] = base and
    path[-1] = base + image * L (image is the spatial winding vector; zero for
    Dirichlet loops, whose knots all lie strictly inside the box).
    """

    base: np.ndarray
    winding: int
    path: np.ndarray
    image: np.ndarray

    def n_knots(self) -> int:
        return self.path.shape[0]

    def wrapped(self, L: float) -> np.ndarray:
        return wrap(self.path, L)

    def leg_positions(self, n_slices: int) -> np.ndarray:
        """Knots regrouped per beta-leg: shape (winding, n_slices + 1, d)."""
        j, d = self.winding, self.path.shape[1]
        legs = np.empty((j, n_slices + 1, d))
        for a in range(j):
            legs[a] = self.path[a * n_slices : (a + 1) * n_slices + 1]
        return legs

    def validate(self, region: BoxRegion):
        if self.winding < 1:
            raise ValueError("winding must be >= 1")
        expect = self.winding * region.n_slices + 1
        if self.path.shape != (expect, region.d):
            raise ValueError(f"path must have shape ({expect}, {region.d})")
        if region.boundary == PERIODIC:
            if not np.allclose(self.path[-1], self.path[0] + self.image * region.L):
                raise ValueError("periodic loop must close onto an image of its base")
        else:
            if np.any(self.image != 0):
                raise ValueError("dirichlet loops carry no spatial winding")
            if not np.allclose(self.path[-1], self.path[0]):
                raise ValueError("loop must close")
            inner = self.path
            if inner.min() <= 0 or inner.max() >= region.L:
                raise ValueError("dirichlet loop knots must stay strictly inside the box")


@dataclass
class LoopConfiguration:
    """Multiset of loops; the particle number is the total winding."""

    loops: list = field(default_factory=list)

    @property
    def particle_number(self) -> int:
        return sum(lp.winding for lp in self.loops)

    @property
    def loop_count(self) -> int:
        return len(self.loops)

    def winding_histogram(self, j_max: int) -> np.ndarray:
        h = np.zeros(j_max + 1, dtype=int)
        for lp in self.loops:
            if lp.winding <= j_max:
                h[lp.winding] += 1
        return h

    def copy(self) -> "LoopConfiguration":
        return LoopConfiguration(
            loops=[
                BridgeLoop(lp.base.copy(), lp.winding, lp.path.copy(), lp.image.copy())
                for lp in self.loops
            ]
        )


def _midpoint_schedule(n_intervals: int):
    """Deterministic (a, m, b) splitting order for a bridge over n_intervals steps."""
    out = []
    stack = [(0, n_intervals)]
    while stack:
        a, b = stack.pop()
        if b - a < 2:
            continue
        m = (a + b) // 2
        out.append((a, m, b))
        stack.append((a, m))
        stack.append((m, b))
    return out


def fill_bridges(x0: np.ndarray, x1: np.ndarray, n_intervals: int, dtau: float, rng) -> np.ndarray:
    """Batch of discrete Brownian bridges between fixed endpoints.

    x0, x1: (batch, d) endpoints; returns (batch, n_intervals + 1, d) with the
    exact Gaussian bridge law at the knot times (variance 2 t per coordinate).
    """
    batch, d = x0.shape
    path = np.empty((batch, n_intervals + 1, d))
    path[:, 0] = x0
    path[:, -1] = x1
    for a, m, b in _midpoint_schedule(n_intervals):
        ta, tm, tb = a * dtau, m * dtau, b * dtau
        w = (tb - tm) / (tb - ta)
        mean = w * path[:, a] + (1 - w) * path[:, b]
        var = 2.0 * (tm - ta) * (tb - tm) / (tb - ta)
        path[:, m] = mean + np.sqrt(var) * rng.standard_normal((batch, d))
    return path


def draw_winding_images(count: int, j: int, beta: float, region: BoxRegion, rng) -> np.ndarray:
    """Spatial winding vectors for periodic loops, per coordinate with the
    image weights exp(-(w L)^2 / (4 j beta))."""
    t = j * beta
    n = int(np.sqrt(max(-4 * t * np.log(1e-16), 0.0)) / region.L) + 1
    w = np.arange(-n, n + 1)
    p = np.exp(-((w * region.L) ** 2) / (4 * t))
    p = p / p.sum()
    return rng.choice(w, size=(count, region.d), p=p)


def segment_survival_log(path: np.ndarray, L: float, dtau: float) -> np.ndarray:
    """Log-probability that each discrete segment's continuum excursion stays in (0, L).

    Leading two-image bound per coordinate: the chance a bridge from a to b
    over dtau (variance 2 dtau) hits 0 is exp(-a b / dtau), similarly at L.
    Knots outside the box give log 0 = -inf.  Shape: path (..., K+1, d) ->
    (...,) summed log survival.
    """
    a = path[..., :-1, :]
    b = path[..., 1:, :]
    inside = (path > 0).all(axis=(-1, -2)) & (path < L).all(axis=(-1, -2))
    with np.errstate(divide="ignore", invalid="ignore"):
        hit_low = np.exp(-a * b / dtau)
        hit_high = np.exp(-(L - a) * (L - b) / dtau)
        p = np.clip(1.0 - hit_low - hit_high, 1e-300, 1.0)
        logp = np.log(p).sum(axis=(-1, -2))
    return np.where(inside, logp, -np.inf)
