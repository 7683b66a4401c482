"""Central two-body pair potentials with stability and integrability checks.

A usable potential must satisfy the standard conditions: central and
continuous away from the origin, stable (sum of pair energies bounded below by
-B n over every finite point set), and absolutely integrable beyond some
radius r0.  Stability is probed on random point sets at construction; the
tail integrability is checked by quadrature.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..rng import generator

HARD_CORE_SENTINEL = np.inf


@dataclass(frozen=True)
class PairPotential:
    """Radial pair potential V(r) with an optional hard core.

    stability_B is the claimed stability constant (>= 0); the constructor
    spot-checks it on random finite configurations and rejects detected
    violations.  r0 marks where |V| must start being integrable.
    """

    v_of_r: object
    d: int
    hard_core: float = 0.0
    stability_B: float = 0.0
    r0: float = 0.0
    range_hint: float = field(default=np.inf)
    label: str = "potential"
    _checked: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.hard_core < 0 or self.stability_B < 0 or self.r0 < 0:
            raise ValueError("hard_core, stability_B, and r0 must be >= 0")
        self.check_integrability()
        self.check_stability()
        object.__setattr__(self, "_checked", True)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.v_of_r(np.maximum(r, 1e-300)), dtype=float)
        if self.hard_core > 0:
            out = np.where(r < self.hard_core, HARD_CORE_SENTINEL, out)
        return out

    def check_integrability(self, upper: float = np.inf) -> float:
        """integral_{r0}^inf |V(r)| r^(d-1) dr must be finite (weighted tail norm)."""
        import warnings

        f = lambda r: abs(float(self.v_of_r(r))) * r ** (self.d - 1)
        lo = max(self.r0, self.hard_core, 1e-12)
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(f, lo, upper, limit=400)
            except integrate.IntegrationWarning as exc:
                raise ValueError(f"tail integral of |V| r^(d-1) did not converge: {exc}")
        if not np.isfinite(val) or (err > 1e-4 * max(abs(val), 1.0) and err > 1e-6):
            raise ValueError(f"tail integral of |V| r^(d-1) did not converge: {val} +- {err}")
        return float(val)

    def check_stability(self, n_sets: int = 200, max_points: int = 8, seed: int = 1234):
        """Property test of sum_{i<j} V(x_i - x_j) >= -B n on random point sets."""
        rng = generator(seed)
        for _ in range(n_sets):
            n = int(rng.integers(2, max_points + 1))
            scale = float(rng.uniform(0.5, 4.0))
            pts = rng.uniform(0, scale, size=(n, self.d))
            r = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
            iu = np.triu_indices(n, k=1)
            vals = self(r[iu])
            if np.any(np.isinf(vals)):
                continue  # a hard-core overlap carries zero Gibbs weight, not instability
            total = float(vals.sum())
            if total < -self.stability_B * n - 1e-9:
                raise ValueError(
                    f"stability violated: energy {total:.4f} < -B n = {-self.stability_B * n:.4f}"
                )


def hard_core(d: int, radius: float, n_slices_hint: int = 16) -> PairPotential:
    """Pure hard core: +inf inside the radius, zero outside; stable with B = 0."""
    return PairPotential(
        v_of_r=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        d=d,
        hard_core=radius,
        stability_B=0.0,
        r0=radius,
        range_hint=radius,
        label=f"hard-core a={radius}",
    )


def gaussian_repulsion(d: int, amplitude: float, width: float = 1.0) -> PairPotential:
    """Positive Gaussian bump: smooth, positive, hence stable with B = 0."""
    if amplitude <= 0:
        raise ValueError("amplitude must be positive for the repulsive bump")
    return PairPotential(
        v_of_r=lambda r: amplitude * np.exp(-((np.asarray(r) / width) ** 2)),
        d=d,
        stability_B=0.0,
        r0=0.0,
        range_hint=6 * width,
        label=f"gaussian A={amplitude} w={width}",
    )
