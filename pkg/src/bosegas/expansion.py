"""Small-activity expansion of the loop gas: Mayer coefficients, series
density, and a Kirkwood-Salsburg-type convergence bound.

The pressure-like generating function ln Z / |box| = sum_n c_n z^n collects,
at each order in the activity, winding sectors and connected Mayer clusters:

    c_1 = kappa_1                      (one 1-loop; kappa_j = (4 pi j beta)^(-d/2))
    c_2 = (1/2) kappa_2 <e^(-intra)>   (one 2-loop)
        + (1/2) kappa_1^2 integral dx <e^(-pair) - 1>
    c_3 = (1/3) kappa_3 <e^(-intra)>
        + kappa_2 kappa_1 / 2 integral dx <e^(-intra(2-loop)) (e^(-pair) - 1)>
        + (1/6) kappa_1^3 integral dx2 dx3 <sum of connected 2- and 3-edge products>

and the density series is rho(z) = z d/dz ln Z / |box| = sum_n n c_n z^n, so
b_n = n c_n.  Pair energies are the time-aligned leg sums used everywhere
else; expectations run over free Brownian bridges, with Mayer displacement
integrals importance-sampled uniformly inside a truncation ball sized from
the potential's range and the thermal spread.

A finite box may be passed for boundary-condition comparisons; the
thermodynamic-limit default uses free bridges with no images.
"""

from dataclasses import dataclass
from math import gamma as gamma_fn
from math import pi

import numpy as np

from .loopgas.energy import intra_energy, pair_energy
from .loopgas.free import _fill_loop_paths, _sample_bases
from .loopgas.loops import BridgeLoop, fill_bridges
from .loopgas.potential import PairPotential
from .loopgas.regions import PERIODIC, BoxRegion, diagonal_mass
from .rng import derive_seed, generator


@dataclass(frozen=True)
class MayerCoefficients:
    """Density-series coefficients b_n with quadrature errors and per-sector parts."""

    order: int
    value: float
    error: float
    parts: dict


@dataclass(frozen=True)
class ConvergenceEstimate:
    """Lower bound on the activity convergence radius, exp(-2 beta B - 1)/C."""

    radius_lower_bound: float
    stability_B: float
    C_value: float
    C_error: float


def _ball_volume(d: int, R: float) -> float:
    return pi ** (d / 2) / gamma_fn(d / 2 + 1) * R**d


def _mayer_ball_radius(V: PairPotential, beta: float, j_sum: int = 2) -> float:
    """Truncation radius for displacement integrals: interaction range plus
    the thermal spread of the two paths."""
    reach = V.range_hint if np.isfinite(V.range_hint) else 6.0
    return reach + 6.0 * np.sqrt(j_sum * beta)


def _free_loop(j: int, beta: float, d: int, n_slices: int, rng, base=None) -> BridgeLoop:
    x0 = np.zeros(d) if base is None else np.asarray(base, dtype=float)
    path = fill_bridges(x0[None], x0[None], j * n_slices, beta / n_slices, rng)[0]
    return BridgeLoop(base=x0, winding=j, path=path, image=np.zeros(d, dtype=int))


def _shifted(loop: BridgeLoop, x: np.ndarray) -> BridgeLoop:
    return BridgeLoop(base=loop.base + x, winding=loop.winding, path=loop.path + x, image=loop.image)


def _region_loops(count, j, beta, region, rng):
    bases = _sample_bases(count, j, beta, region, rng)
    paths, images = _fill_loop_paths(bases, j, beta, region, rng)
    return [
        BridgeLoop(base=bases[i].copy(), winding=j, path=paths[i], image=images[i].copy())
        for i in range(count)
    ]


def mayer_coefficient(
    n: int,
    beta: float,
    V: PairPotential | None,
    region: BoxRegion | None = None,
    n_mc: int = 4000,
    seed: int = 0,
    n_slices: int = 16,
) -> MayerCoefficients:
    """b_n of the density series, n in {1, 2, 3}.

    region = None gives the thermodynamic-limit coefficients; a finite box
    (periodic or absorbing) evaluates the same clusters with boundary-aware
    masses and bridges, for sigma-independence comparisons.
    """
    if n not in (1, 2, 3):
        raise ValueError("orders 1..3 are implemented")
    d = region.d if region is not None else (V.d if V is not None else 3)
    if region is not None:
        n_slices = region.n_slices
    rng = generator(derive_seed(seed, "mayer", n))
    free_geom = BoxRegion(d=d, L=1e9, boundary=PERIODIC, n_slices=n_slices)
    geom = region if region is not None else free_geom

    def kappa(j):
        if region is None:
            return (4 * pi * j * beta) ** (-d / 2)
        return diagonal_mass(region, j * beta) / region.volume

    def draw_loops(count, j):
        if region is None:
            return [_free_loop(j, beta, d, n_slices, rng) for _ in range(count)]
        return _region_loops(count, j, beta, region, rng)

    if n == 1:
        return MayerCoefficients(order=1, value=float(kappa(1)), error=0.0, parts={"j1": float(kappa(1))})

    if V is None:
        # free gas: only the winding sector survives at each order (b_n = kappa_n)
        return MayerCoefficients(order=n, value=float(kappa(n)), error=0.0, parts={f"w{n}": float(kappa(n))})

    if n == 2:
        loops2 = draw_loops(n_mc, 2)
        w_intra = np.array([np.exp(-_finite(intra_energy(lp, V, beta, geom))) for lp in loops2])
        c2_w = 0.5 * kappa(2) * w_intra.mean()
        c2_w_err = 0.5 * kappa(2) * w_intra.std(ddof=1) / np.sqrt(n_mc)

        a_loops = draw_loops(n_mc, 1)
        b_loops = draw_loops(n_mc, 1)
        vals = np.empty(n_mc)
        if region is None:
            R = _mayer_ball_radius(V, beta)
            vol = _ball_volume(d, R)
            for i in range(n_mc):
                x = _random_ball(rng, d, R)
                lb = _shifted(b_loops[i], a_loops[i].base + x - b_loops[i].base)
                vals[i] = np.exp(-_finite(pair_energy(a_loops[i], lb, V, beta, geom))) - 1.0
        else:
            # independent box bases carry the displacement law; weight = |box|
            vol = region.volume
            for i in range(n_mc):
                vals[i] = np.exp(-_finite(pair_energy(a_loops[i], b_loops[i], V, beta, geom))) - 1.0
        c2_m = 0.5 * kappa(1) ** 2 * vol * vals.mean()
        c2_m_err = 0.5 * kappa(1) ** 2 * vol * vals.std(ddof=1) / np.sqrt(n_mc)
        b2 = 2 * (c2_w + c2_m)
        err = 2 * float(np.hypot(c2_w_err, c2_m_err))
        return MayerCoefficients(
            order=2, value=float(b2), error=err,
            parts={"w2": float(2 * c2_w), "mayer11": float(2 * c2_m),
                   "w2_err": float(2 * c2_w_err), "mayer11_err": float(2 * c2_m_err)},
        )

    # n == 3
    loops3 = draw_loops(n_mc, 3)
    w3 = np.array([np.exp(-_finite(intra_energy(lp, V, beta, geom))) for lp in loops3])
    c3_w = kappa(3) / 3 * w3.mean()
    c3_w_err = kappa(3) / 3 * w3.std(ddof=1) / np.sqrt(n_mc)

    R = _mayer_ball_radius(V, beta, j_sum=3)
    vol = _ball_volume(d, R) if region is None else region.volume
    loops2 = draw_loops(n_mc, 2)
    ones = draw_loops(n_mc, 1)
    vals21 = np.empty(n_mc)
    for i in range(n_mc):
        if region is None:
            x = _random_ball(rng, d, R)
            lb = _shifted(ones[i], loops2[i].base + x - ones[i].base)
        else:
            lb = ones[i]
        wi = np.exp(-_finite(intra_energy(loops2[i], V, beta, geom)))
        e = pair_energy(loops2[i], lb, V, beta, geom)
        vals21[i] = wi * (np.exp(-_finite(e)) - 1.0)
    c3_21 = 0.5 * kappa(2) * kappa(1) * vol * vals21.mean()
    c3_21_err = 0.5 * kappa(2) * kappa(1) * vol * vals21.std(ddof=1) / np.sqrt(n_mc)

    a1 = draw_loops(n_mc, 1)
    a2 = draw_loops(n_mc, 1)
    a3 = draw_loops(n_mc, 1)
    vals111 = np.empty(n_mc)
    for i in range(n_mc):
        l1 = a1[i]
        if region is None:
            l2 = _shifted(a2[i], l1.base + _random_ball(rng, d, R) - a2[i].base)
            l3 = _shifted(a3[i], l1.base + _random_ball(rng, d, R) - a3[i].base)
        else:
            l2, l3 = a2[i], a3[i]
        f12 = np.exp(-_finite(pair_energy(l1, l2, V, beta, geom))) - 1.0
        f13 = np.exp(-_finite(pair_energy(l1, l3, V, beta, geom))) - 1.0
        f23 = np.exp(-_finite(pair_energy(l2, l3, V, beta, geom))) - 1.0
        vals111[i] = f12 * f13 + f12 * f23 + f13 * f23 + f12 * f13 * f23
    c3_111 = (1.0 / 6.0) * kappa(1) ** 3 * vol**2 * vals111.mean()
    c3_111_err = (1.0 / 6.0) * kappa(1) ** 3 * vol**2 * vals111.std(ddof=1) / np.sqrt(n_mc)

    b3 = 3 * (c3_w + c3_21 + c3_111)
    err = 3 * float(np.sqrt(c3_w_err**2 + c3_21_err**2 + c3_111_err**2))
    return MayerCoefficients(
        order=3, value=float(b3), error=err,
        parts={"w3": float(3 * c3_w), "mix21": float(3 * c3_21), "mayer111": float(3 * c3_111)},
    )


def _finite(e: float) -> float:
    return 1e12 if np.isinf(e) else e  # exp(-1e12) underflows to the hard-core zero


def _random_ball(rng, d: int, R: float) -> np.ndarray:
    while True:
        x = rng.uniform(-R, R, size=d)
        if (x**2).sum() <= R**2:
            return x


def delta_c2(beta: float, V: PairPotential, n_mc: int = 4000, seed: int = 0, n_slices: int = 16) -> dict:
    """Interaction part of c_2 (the free winding term subtracted), for the
    order-z^2 comparison with measured partition-function corrections."""
    b2_v = mayer_coefficient(2, beta, V, None, n_mc, seed, n_slices)
    b2_0 = mayer_coefficient(2, beta, None, None, n_mc, seed, n_slices)
    return {
        "delta_c2": (b2_v.value - b2_0.value) / 2.0,
        "delta_c2_err": b2_v.error / 2.0,
    }


def series_density(z: float, coeffs, bound: ConvergenceEstimate | None = None) -> dict:
    """Truncated-series density with a last-term truncation heuristic.

    Refuses (returns the bound info instead of a number) when z exceeds the
    supplied convergence bound.
    """
    if bound is not None and z > bound.radius_lower_bound:
        return {
            "refused": True,
            "reason": f"z = {z} above the convergence bound {bound.radius_lower_bound:.4g}",
            "bound": bound,
        }
    coeffs = sorted(coeffs, key=lambda c: c.order)
    rho = sum(c.value * z**c.order for c in coeffs)
    stat = np.sqrt(sum((c.error * z**c.order) ** 2 for c in coeffs))
    last = coeffs[-1]
    trunc = abs(last.value) * z ** last.order * z / max(1 - z, 1e-9)
    return {
        "refused": False,
        "density": float(rho),
        "stat_error": float(stat),
        "truncation_error": float(trunc),
    }


def convergence_radius(
    beta: float,
    V: PairPotential | None,
    n_mc: int = 2000,
    n_ref: int = 8,
    seed: int = 0,
    n_slices: int = 16,
) -> ConvergenceEstimate:
    """Kirkwood-Salsburg-type bound exp(-2 beta B - 1) / C(beta, V).

    C is the supremum over reference bridges of the absolute Mayer integral
    against a second one-loop; it is estimated as the maximum over sampled
    reference bridges plus the Monte Carlo error (conservative).  The bound is
    capped at the free-gas radius z < 1, which is also the V = 0 limit where
    C degenerates to zero.
    """
    if V is None:
        return ConvergenceEstimate(1.0, 0.0, 0.0, 0.0)
    d = V.d
    rng = generator(derive_seed(seed, "ks-radius"))
    R = _mayer_ball_radius(V, beta)
    vol = _ball_volume(d, R)
    kappa1 = (4 * pi * beta) ** (-d / 2)
    best, best_err = 0.0, 0.0
    for _ in range(n_ref):
        ref = _free_loop(1, beta, d, n_slices, rng)
        vals = np.empty(n_mc)
        for i in range(n_mc):
            x = _random_ball(rng, d, R)
            other = _shifted(_free_loop(1, beta, d, n_slices, rng), x)
            e = pair_energy(ref, other, V, beta, BoxRegion(d=d, L=1e9, n_slices=n_slices))
            vals[i] = abs(np.exp(-_finite(e)) - 1.0)
        C_ref = kappa1 * vol * vals.mean()
        err = kappa1 * vol * vals.std(ddof=1) / np.sqrt(n_mc)
        if C_ref > best:
            best, best_err = C_ref, err
    C = best + best_err
    if C <= 0:
        return ConvergenceEstimate(1.0, V.stability_B, 0.0, 0.0)
    bound = min(float(np.exp(-2 * beta * V.stability_B - 1.0) / C), 1.0)
    return ConvergenceEstimate(bound, V.stability_B, float(C), float(best_err))
