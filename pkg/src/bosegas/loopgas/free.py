"""Free functional Poisson measure over closed bridges.

The loop gas at activity z (= exp(-beta mu)) is a Poisson point process on
closed bridges: independently for each winding j, the loop count is Poisson
with mean nu_j = (z^j / j) M_j(box) where M_j is the diagonal bridge mass, base
points follow the diagonal-kernel density, and path interiors are conditional
Brownian bridges.  The winding sum converges for z < 1 and is truncated
adaptively with a 1e-10 tail bound.

Dirichlet sampling draws free bridges and accepts them with the per-segment
continuum survival probability, which defines the discrete absorbing-wall
model; loop counts use the exact continuum masses so the count-level
observables stay closed-form.
"""

import numpy as np

from ..errors import ActivityError
from ..rng import derive_seed, generator
from .loops import (
    BridgeLoop,
    LoopConfiguration,
    draw_winding_images,
    fill_bridges,
    segment_survival_log,
)
from .regions import PERIODIC, BoxRegion, diagonal_mass, kernel

J_MAX_CAP = 400
TAIL_TOL = 1e-10


def winding_masses(z: float, beta: float, region: BoxRegion, j_max: int | None = None):
    """Poisson means nu_j = (z^j / j) M_j(box) with the adaptive winding cutoff."""
    if not (0 <= z < 1):
        raise ActivityError(f"activity z = {z} outside [0, 1): winding sum diverges")
    if z == 0:
        return np.zeros(1)[1:], 1
    nus = []
    j = 1
    mass_sup = 0.0
    while True:
        m = diagonal_mass(region, j * beta)
        mass_sup = max(mass_sup, m, 1.0)  # periodic masses tend to 1 from either side
        nus.append(z**j / j * m)
        # geometric bound on the dropped tail: sum_{k>j} z^k M_k / k
        tail = mass_sup * z ** (j + 1) / ((j + 1) * (1 - z))
        if j_max is not None and j >= j_max:
            break
        if j_max is None and (tail < TAIL_TOL or j >= J_MAX_CAP):
            break
        j += 1
    return np.array(nus), j


def free_density(z: float, beta: float, region: BoxRegion, j_max: int | None = None) -> float:
    """Particle density sum_j j nu_j / |box| of the free loop gas."""
    nus, _ = winding_masses(z, beta, region, j_max)
    j = np.arange(1, nus.size + 1)
    return float((j * nus).sum() / region.volume)


def free_log_partition(z: float, beta: float, region: BoxRegion, j_max: int | None = None) -> float:
    """log Z of the free loop gas: the Poisson identity log Z = sum_j nu_j."""
    nus, _ = winding_masses(z, beta, region, j_max)
    return float(nus.sum())


def _sample_bases(count: int, j: int, beta: float, region: BoxRegion, rng) -> np.ndarray:
    """Base points from the diagonal-kernel density (uniform for periodic)."""
    if count == 0:
        return np.zeros((0, region.d))
    if region.boundary == PERIODIC:
        return rng.uniform(0, region.L, size=(count, region.d))
    # rejection from uniform against the diagonal Dirichlet kernel
    t = j * beta
    xs = np.linspace(region.L * 1e-4, region.L * (1 - 1e-4), 512)
    probe = np.zeros((512, region.d))
    out = np.empty((count, region.d))
    # per-coordinate factorized density: reject coordinate-wise
    from .regions import dirichlet_kernel_1d

    g = dirichlet_kernel_1d(xs, xs, region.L, t)
    gmax = g.max() * 1.0000001
    for k in range(region.d):
        need = count
        got = []
        while need > 0:
            cand = rng.uniform(0, region.L, size=max(2 * need, 64))
            acc = rng.uniform(0, gmax, size=cand.size) < dirichlet_kernel_1d(
                cand, cand, region.L, t
            )
            got.append(cand[acc])
            need = count - sum(len(gg) for gg in got)
        out[:, k] = np.concatenate(got)[:count]
    return out


def _fill_loop_paths(bases: np.ndarray, j: int, beta: float, region: BoxRegion, rng):
    """Paths for a batch of j-loops; returns (paths, images) with survival applied
    for Dirichlet walls (resampling rejected paths)."""
    count = bases.shape[0]
    n_int = j * region.n_slices
    dtau = beta / region.n_slices
    if region.boundary == PERIODIC:
        images = draw_winding_images(count, j, beta, region, rng)
        ends = bases + images * region.L
        paths = fill_bridges(bases, ends, n_int, dtau, rng)
        return paths, images
    images = np.zeros((count, region.d), dtype=int)
    paths = np.empty((count, n_int + 1, region.d))
    todo = np.arange(count)
    while todo.size:
        cand = fill_bridges(bases[todo], bases[todo], n_int, dtau, rng)
        logs = segment_survival_log(cand, region.L, dtau)
        acc = np.log(rng.uniform(size=todo.size)) < logs
        paths[todo[acc]] = cand[acc]
        todo = todo[~acc]
    return paths, images


def sample_free_poisson(
    z: float,
    beta: float,
    region: BoxRegion,
    rng_seed: int,
    j_max: int | None = None,
) -> LoopConfiguration:
    """One draw of the free loop-gas configuration."""
    return sample_free_poisson_batch(1, z, beta, region, rng_seed, j_max)[0]


def sample_free_poisson_batch(
    n_configs: int,
    z: float,
    beta: float,
    region: BoxRegion,
    rng_seed: int,
    j_max: int | None = None,
) -> list:
    """Batch of independent configurations; loops are generated vectorized per winding."""
    nus, jm = winding_masses(z, beta, region, j_max)
    rng = generator(rng_seed)
    configs = [LoopConfiguration() for _ in range(n_configs)]
    for j in range(1, nus.size + 1):
        counts = rng.poisson(nus[j - 1], size=n_configs)
        total = int(counts.sum())
        if total == 0:
            continue
        bases = _sample_bases(total, j, beta, region, rng)
        paths, images = _fill_loop_paths(bases, j, beta, region, rng)
        pos = 0
        for ci, k in enumerate(counts):
            for _ in range(k):
                configs[ci].loops.append(
                    BridgeLoop(
                        base=bases[pos].copy(),
                        winding=j,
                        path=paths[pos],
                        image=images[pos].copy(),
                    )
                )
                pos += 1
    return configs


def pairing(config: LoopConfiguration, f, beta: float, region: BoxRegion) -> float:
    """(phi, f) = sum_loops integral_0^{j beta} f(tau, omega(tau)) dtau (trapezoid)."""
    dtau = beta / region.n_slices
    total = 0.0
    for lp in config.loops:
        ts = dtau * np.arange(lp.path.shape[0])
        xs = lp.wrapped(region.L) if region.boundary == PERIODIC else lp.path
        vals = f(ts, xs)
        wgt = np.full(ts.size, dtau)
        wgt[0] = wgt[-1] = dtau / 2
        total += float((vals * wgt).sum())
    return total


def loop_time_integral(path: np.ndarray, f, beta: float, region: BoxRegion) -> float:
    """Trapezoid integral of f along one unwrapped path."""
    dtau = beta / region.n_slices
    ts = dtau * np.arange(path.shape[0])
    xs = wrap_positions(path, region)
    vals = f(ts, xs)
    wgt = np.full(ts.size, dtau)
    wgt[0] = wgt[-1] = dtau / 2
    return float((vals * wgt).sum())


def wrap_positions(path: np.ndarray, region: BoxRegion) -> np.ndarray:
    from .regions import wrap

    return wrap(path, region.L) if region.boundary == PERIODIC else path


def characteristic_functional(
    z: float,
    beta: float,
    region: BoxRegion,
    f,
    n_mc: int,
    seed: int = 0,
    j_max: int | None = None,
) -> dict:
    """The generating functional of the free measure, two independent ways.

    Route 'formula': exp sum_j nu_j E_bridge[exp(i I_f) - 1] with the bridge
    expectation estimated by Monte Carlo over per-winding loops.  Route
    'empirical': mean of exp(i (phi, f)) over sampled configurations.  The two
    agree within errors when the sampler matches the intensity.
    """
    nus, jm = winding_masses(z, beta, region, j_max)
    rng_formula = generator(derive_seed(seed, "cf-formula"))
    log_gamma = 0.0 + 0.0j
    log_var = 0.0
    for j in range(1, nus.size + 1):
        if nus[j - 1] < 1e-14:
            continue
        bases = _sample_bases(n_mc, j, beta, region, rng_formula)
        paths, _ = _fill_loop_paths(bases, j, beta, region, rng_formula)
        dtau = beta / region.n_slices
        ts = dtau * np.arange(paths.shape[1])
        wgt = np.full(ts.size, dtau)
        wgt[0] = wgt[-1] = dtau / 2
        vals = np.array(
            [
                (f(ts, wrap_positions(p, region)) * wgt).sum()
                for p in paths
            ]
        )
        term = np.exp(1j * vals) - 1.0
        log_gamma += nus[j - 1] * term.mean()
        log_var += (nus[j - 1] ** 2) * (term.real.var(ddof=1) + term.imag.var(ddof=1)) / n_mc
    formula = np.exp(log_gamma)
    formula_err = abs(formula) * np.sqrt(log_var)

    configs = sample_free_poisson_batch(
        n_mc, z, beta, region, derive_seed(seed, "cf-empirical"), j_max
    )
    phases = np.array([np.exp(1j * pairing(c, f, beta, region)) for c in configs])
    empirical = phases.mean()
    emp_err = np.sqrt(
        (phases.real.var(ddof=1) + phases.imag.var(ddof=1)) / n_mc
    )
    return {
        "formula": complex(formula),
        "formula_err": float(formula_err),
        "empirical": complex(empirical),
        "empirical_err": float(emp_err),
        "j_max": jm,
    }


def free_rdm(z: float, beta: float, region: BoxRegion, x, y, j_max: int | None = None) -> float:
    """Closed-form noninteracting one-particle kernel sum_j z^j p_{j beta}(x, y)."""
    nus, jm = winding_masses(z, beta, region, j_max)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = 0.0
    for j in range(1, jm + 1):
        total += z**j * float(kernel(x, y, region, j * beta)[0])
    return total
