"""Time-aligned interaction energies of loop configurations.

All loops share the same beta grid, so the pair energy between two legs is a
single trapezoid sum over one period:

    e(leg_k, leg_l) = integral_0^beta V(omega_k(tau) - omega_l(tau)) dtau.

The configuration energy collects every unordered pair of legs on distinct
loops plus every unordered pair of distinct legs within one loop; the same-leg
diagonal V(0) never enters (normal ordering removes it).  A hard-core contact
returns +inf, which the Gibbs weight turns into zero.
"""

import numpy as np

from .loops import BridgeLoop, LoopConfiguration
from .potential import PairPotential
from .regions import PERIODIC, BoxRegion, min_image


def _trapezoid_weights(n_knots: int, dtau: float) -> np.ndarray:
    w = np.full(n_knots, dtau)
    w[0] = w[-1] = dtau / 2
    return w


def _leg_array(loop: BridgeLoop, region: BoxRegion) -> np.ndarray:
    """(winding, n_slices + 1, d) view of a loop's legs on the common grid."""
    return loop.leg_positions(region.n_slices)


def pair_energy(
    a: BridgeLoop, b: BridgeLoop, V: PairPotential, beta: float, region: BoxRegion
) -> float:
    """Sum over leg pairs (alpha on a, gamma on b) of the one-period trapezoid."""
    la = _leg_array(a, region)
    lb = _leg_array(b, region)
    diff = la[:, None, :, :] - lb[None, :, :, :]
    if region.boundary == PERIODIC:
        diff = min_image(diff, region.L)
    r = np.sqrt((diff**2).sum(axis=-1))
    vals = V(r)
    if np.isinf(vals).any():
        return np.inf
    w = _trapezoid_weights(region.n_slices + 1, beta / region.n_slices)
    return float((vals * w).sum())


def intra_energy(loop: BridgeLoop, V: PairPotential, beta: float, region: BoxRegion) -> float:
    """Unordered distinct-leg pairs within one loop; zero for winding 1."""
    j = loop.winding
    if j < 2:
        return 0.0
    legs = _leg_array(loop, region)
    diff = legs[:, None, :, :] - legs[None, :, :, :]
    if region.boundary == PERIODIC:
        diff = min_image(diff, region.L)
    r = np.sqrt((diff**2).sum(axis=-1))
    iu = np.triu_indices(j, k=1)
    vals = V(r[iu])
    if np.isinf(vals).any():
        return np.inf
    w = _trapezoid_weights(region.n_slices + 1, beta / region.n_slices)
    return float((vals * w).sum())


def interaction_energy(
    config: LoopConfiguration, V: PairPotential, beta: float, region: BoxRegion
) -> float:
    """Full configuration energy: inter-loop pairs plus intra-loop distinct legs."""
    loops = config.loops
    total = 0.0
    for i, lp in enumerate(loops):
        e = intra_energy(lp, V, beta, region)
        if np.isinf(e):
            return np.inf
        total += e
        for other in loops[i + 1 :]:
            e = pair_energy(lp, other, V, beta, region)
            if np.isinf(e):
                return np.inf
            total += e
    return total


def loop_in_config_energy(
    loop: BridgeLoop,
    config: LoopConfiguration,
    V: PairPotential,
    beta: float,
    region: BoxRegion,
    skip: int = -1,
) -> float:
    """Energy of one loop against a configuration (optionally skipping one index),
    including the loop's own intra-leg term."""
    total = intra_energy(loop, V, beta, region)
    if np.isinf(total):
        return np.inf
    for i, other in enumerate(config.loops):
        if i == skip:
            continue
        e = pair_energy(loop, other, V, beta, region)
        if np.isinf(e):
            return np.inf
        total += e
    return total


def stability_floor_ok(energy: float, config: LoopConfiguration, V: PairPotential, beta: float) -> bool:
    """Hard guard: time-integrated stability, energy >= -beta B N."""
    if np.isinf(energy):
        return True
    return energy >= -beta * V.stability_B * config.particle_number - 1e-9
