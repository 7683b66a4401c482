"""Identity checks for the loop gas: integration by parts, the spectral/loop
trace identity, and boundary-condition independence.

Integration by parts.  For the free Poisson measure with intensity nu the
Skorokhod-type identity holds for cylindrical F, G:

    E[ :<phi,f> F:  G ] = integral nu(dw) I_f(w) E[ F(phi) (G(phi + d_w) - G(phi)) ]

where :<phi,f> F: = sum_{w in phi} I_f(w) F(phi - d_w) - E<phi,f> F(phi) is the
Charlier-centered product (for F = 1 it reduces to the centered pairing, and
both sides vanish when G = 1 as well).  Gibbs weights ride along inside G, so
the identity is checked at V = 0 and small V with the same machinery.

Trace identity.  At V = 0 the spectral route -sum_k ln(1 - z exp(-beta lam_k))
and the loop route sum_j (z^j / j) M_j(box) are independent closed forms (mode
sums versus image sums) that must agree to quadrature tolerance.  At small
activity with V switched on, the interaction correction to ln Z is compared at
order z^2 against the second expansion coefficient.
"""

import numpy as np

from ..rng import derive_seed, generator
from .energy import intra_energy, loop_in_config_energy
from .free import (
    _fill_loop_paths,
    _sample_bases,
    free_log_partition,
    free_rdm,
    loop_time_integral,
    pairing,
    sample_free_poisson_batch,
    winding_masses,
    wrap_positions,
)
from .loops import BridgeLoop, LoopConfiguration
from .potential import PairPotential
from .regions import DIRICHLET, PERIODIC, BoxRegion


# -- cylindrical functionals -------------------------------------------------------


class CylindricalFunctional:
    """Functionals of finitely many pairings, evaluable on configs with an
    added or removed loop (needed by the Charlier-centered product)."""

    def value(self, config, beta, region):
        raise NotImplementedError

    def value_with_extra(self, config, extra_pairings: dict, beta, region):
        """Value on config + delta_w given the extra loop's pairing increments."""
        raise NotImplementedError


class One(CylindricalFunctional):
    label = "1"

    def value(self, config, beta, region):
        return 1.0

    def value_with_extra(self, config, extra, beta, region):
        return 1.0

    def value_minus_loop(self, config, loop_idx, beta, region, cache):
        return 1.0


class Pairing(CylindricalFunctional):
    """(phi, g)"""

    def __init__(self, g, label="(phi,g)"):
        self.g, self.label = g, label

    def value(self, config, beta, region):
        return pairing(config, self.g, beta, region)

    def value_with_extra(self, config, extra, beta, region):
        return self.value(config, beta, region) + extra[id(self.g)]

    def value_minus_loop(self, config, loop_idx, beta, region, cache):
        return self.value(config, beta, region) - cache[(loop_idx, id(self.g))]


class PairingProduct(CylindricalFunctional):
    """(phi, g1)(phi, g2)"""

    def __init__(self, g1, g2, label="(phi,g1)(phi,g2)"):
        self.g1, self.g2, self.label = g1, g2, label

    def value(self, config, beta, region):
        return pairing(config, self.g1, beta, region) * pairing(config, self.g2, beta, region)

    def value_with_extra(self, config, extra, beta, region):
        a = pairing(config, self.g1, beta, region) + extra[id(self.g1)]
        b = pairing(config, self.g2, beta, region) + extra[id(self.g2)]
        return a * b

    def value_minus_loop(self, config, loop_idx, beta, region, cache):
        a = pairing(config, self.g1, beta, region) - cache[(loop_idx, id(self.g1))]
        b = pairing(config, self.g2, beta, region) - cache[(loop_idx, id(self.g2))]
        return a * b


class ExpPairing(CylindricalFunctional):
    """exp(i (phi, g)); complex-valued."""

    def __init__(self, g, label="e^{i(phi,g)}"):
        self.g, self.label = g, label

    def value(self, config, beta, region):
        return np.exp(1j * pairing(config, self.g, beta, region))

    def value_with_extra(self, config, extra, beta, region):
        return self.value(config, beta, region) * np.exp(1j * extra[id(self.g)])

    def value_minus_loop(self, config, loop_idx, beta, region, cache):
        return self.value(config, beta, region) * np.exp(-1j * cache[(loop_idx, id(self.g))])


def _loop_pairings(config, gs, beta, region) -> dict:
    """cache[(loop_idx, id(g))] = I_g(loop) for every loop and test function."""
    out = {}
    for i, lp in enumerate(config.loops):
        for g in gs:
            out[(i, id(g))] = loop_time_integral(lp.path, g, beta, region)
    return out


def _gather_gs(*fns) -> list:
    gs = []
    for F in fns:
        for attr in ("g", "g1", "g2"):
            if hasattr(F, attr):
                gs.append(getattr(F, attr))
    return gs


def mean_pairing(z, beta, region, f, n_mc, seed, j_max=None) -> tuple:
    """E<phi, f> = sum_j nu_j E_bridge[I_f] by per-winding bridge Monte Carlo."""
    nus, jm = winding_masses(z, beta, region, j_max)
    rng = generator(derive_seed(seed, "mean-pairing"))
    total, var = 0.0, 0.0
    for j in range(1, jm + 1):
        if nus[j - 1] < 1e-14:
            continue
        bases = _sample_bases(n_mc, j, beta, region, rng)
        paths, _ = _fill_loop_paths(bases, j, beta, region, rng)
        vals = np.array([loop_time_integral(p, f, beta, region) for p in paths])
        total += nus[j - 1] * vals.mean()
        var += nus[j - 1] ** 2 * vals.var(ddof=1) / n_mc
    return total, np.sqrt(var)


def integration_by_parts_check(
    z: float,
    beta: float,
    region: BoxRegion,
    V: PairPotential | None,
    f,
    F: CylindricalFunctional,
    G: CylindricalFunctional,
    n_mc: int,
    seed: int = 0,
    j_max: int | None = None,
) -> dict:
    """Both sides of the point-process integration-by-parts identity.

    Gibbs factors are absorbed into G: with V given, G_eff(phi) =
    G(phi) exp(-energy(phi)), and the added-loop shift includes the loop's
    interaction with the configuration.  Returns lhs, rhs, errors, and the
    sigma-distance between them.
    """
    gs = _gather_gs(F, G)
    ef, ef_err = mean_pairing(z, beta, region, f, 4 * n_mc, derive_seed(seed, "ef"), j_max)

    def gibbs(config):
        if V is None:
            return 1.0
        e = 0.0
        for i, lp in enumerate(config.loops):
            e += intra_energy(lp, V, beta, region)
            for other in config.loops[i + 1 :]:
                from .energy import pair_energy

                pe = pair_energy(lp, other, V, beta, region)
                if np.isinf(pe):
                    return 0.0
                e += pe
            if np.isinf(e):
                return 0.0
        return np.exp(-e)

    # lhs: E[ (sum_w I_f(w) F(phi - d_w) - E<phi,f> F(phi)) G_eff(phi) ]
    configs = sample_free_poisson_batch(n_mc, z, beta, region, derive_seed(seed, "lhs"), j_max)
    lhs_vals = np.empty(n_mc, dtype=complex)
    for m, cfg in enumerate(configs):
        cache = _loop_pairings(cfg, gs + [f], beta, region)
        skor = 0.0 + 0.0j
        for i, lp in enumerate(cfg.loops):
            If = cache[(i, id(f))]
            reduced = LoopConfiguration(loops=[q for k, q in enumerate(cfg.loops) if k != i])
            skor += If * F.value(reduced, beta, region)
        skor -= ef * F.value(cfg, beta, region)
        lhs_vals[m] = skor * G.value(cfg, beta, region) * gibbs(cfg)
    lhs = lhs_vals.mean()
    lhs_err = np.sqrt(
        (lhs_vals.real.var(ddof=1) + lhs_vals.imag.var(ddof=1)) / n_mc
        + (ef_err * abs(np.mean([F.value(c, beta, region) * G.value(c, beta, region) * gibbs(c) for c in configs[: min(200, n_mc)]]))) ** 2
    )

    # rhs: sum_j nu_j E_bridge[I_f (F(phi) (G_eff(phi + d_w) - G_eff(phi)))]
    nus, jm = winding_masses(z, beta, region, j_max)
    rngb = generator(derive_seed(seed, "rhs-bridges"))
    configs2 = sample_free_poisson_batch(n_mc, z, beta, region, derive_seed(seed, "rhs"), j_max)
    rhs = 0.0 + 0.0j
    rhs_var = 0.0
    for j in range(1, jm + 1):
        if nus[j - 1] < 1e-14:
            continue
        bases = _sample_bases(n_mc, j, beta, region, rngb)
        paths, images = _fill_loop_paths(bases, j, beta, region, rngb)
        terms = np.empty(n_mc, dtype=complex)
        for b in range(n_mc):
            cfg = configs2[b]
            w_loop = BridgeLoop(
                base=paths[b, 0].copy(), winding=j, path=paths[b], image=images[b].copy()
            )
            If = loop_time_integral(paths[b], f, beta, region)
            extra = {id(g): loop_time_integral(paths[b], g, beta, region) for g in gs}
            gw = gibbs(cfg)
            g_plain = G.value(cfg, beta, region) * gw
            if V is not None:
                de = loop_in_config_energy(w_loop, cfg, V, beta, region)
                g_shift = 0.0 if np.isinf(de) else G.value_with_extra(cfg, extra, beta, region) * gw * np.exp(-de)
            else:
                g_shift = G.value_with_extra(cfg, extra, beta, region) * gw
            terms[b] = If * F.value(cfg, beta, region) * (g_shift - g_plain)
        rhs += nus[j - 1] * terms.mean()
        rhs_var += nus[j - 1] ** 2 * (terms.real.var(ddof=1) + terms.imag.var(ddof=1)) / n_mc
    rhs_err = np.sqrt(rhs_var)
    diff = abs(lhs - rhs)
    sigma = diff / max(np.hypot(lhs_err, rhs_err), 1e-300)
    return {
        "lhs": complex(lhs),
        "lhs_err": float(lhs_err),
        "rhs": complex(rhs),
        "rhs_err": float(rhs_err),
        "sigma_distance": float(sigma),
        "mean_pairing": float(ef),
    }


# -- trace identity ---------------------------------------------------------------


def spectral_log_partition(beta: float, mu: float, region: BoxRegion, tol: float = 1e-16) -> float:
    """-sum_k ln(1 - exp(-beta (lam_k + mu))) over the box modes (mode-sum route)."""
    from math import pi

    if region.boundary == PERIODIC:
        m_max = int(np.sqrt(max(-np.log(tol) / beta, 1.0)) * region.L / (2 * pi)) + 2
        m = np.arange(-m_max, m_max + 1)
        lam1 = (2 * pi * m / region.L) ** 2
    else:
        n_max = int(np.sqrt(max(-np.log(tol) / beta, 1.0)) * region.L / pi) + 2
        n = np.arange(1, n_max + 1)
        lam1 = (pi * n / region.L) ** 2
    grids = np.meshgrid(*([lam1] * region.d), indexing="ij")
    lam = sum(grids).ravel()
    x = beta * (lam + mu)
    return float(-np.log(-np.expm1(-x)).sum())


def trace_identity_check(
    beta: float,
    mu: float,
    region: BoxRegion,
    n_mc: int = 0,
    V: PairPotential | None = None,
    seed: int = 0,
    expansion_b2=None,
) -> dict:
    """V = 0: spectral vs loop log-partition closed forms.  V != 0: the measured
    interaction correction ln E_P[e^(-energy)] against z^2 times the second
    expansion coefficient (slot provided by the caller)."""
    z = float(np.exp(-beta * mu))
    lhs = spectral_log_partition(beta, mu, region)
    rhs = free_log_partition(z, beta, region)
    rec = {"z": z, "spectral": lhs, "loop": rhs, "abs_diff": abs(lhs - rhs)}
    if V is None:
        return rec
    configs = sample_free_poisson_batch(n_mc, z, beta, region, derive_seed(seed, "ti"), None)
    w = np.empty(n_mc)
    for i, cfg in enumerate(configs):
        e = 0.0
        for a, lp in enumerate(cfg.loops):
            e += intra_energy(lp, V, beta, region)
            for other in cfg.loops[a + 1 :]:
                from .energy import pair_energy

                pe = pair_energy(lp, other, V, beta, region)
                e += pe
                if np.isinf(e):
                    break
            if np.isinf(e):
                break
        w[i] = 0.0 if np.isinf(e) else np.exp(-e)
    mean_w = w.mean()
    correction = float(np.log(mean_w))
    corr_err = float(w.std(ddof=1) / np.sqrt(n_mc) / mean_w)
    rec.update(interaction_correction=correction, correction_err=corr_err)
    if expansion_b2 is not None:
        pred = expansion_b2["delta_c2"] * z**2 * region.volume
        rec.update(order_z2_prediction=float(pred),
                   pred_err=float(expansion_b2.get("delta_c2_err", 0.0) * z**2 * region.volume))
    return rec


# -- sigma independence -------------------------------------------------------------


def _window_density_exact(z, beta, region, window) -> float:
    """V = 0 density averaged over a centered (or offset) window, from the kernel."""
    lo, hi = window
    xs = np.linspace(lo, hi, 9)
    pts = np.stack(np.meshgrid(*([xs] * region.d), indexing="ij"), axis=-1).reshape(-1, region.d)
    vals = [free_rdm(z, beta, region, p, p) for p in pts]
    return float(np.mean(vals))


def sigma_independence_check(
    z: float,
    beta: float,
    V: PairPotential | None,
    L_list,
    observable: str = "density",
    window_frac: float = 0.2,
    boundary_window: bool = False,
    n_mc: int = 2000,
    n_slices: int = 16,
    seed: int = 0,
    d: int = 3,
) -> dict:
    """Gap between periodic and absorbing-wall runs of one observable over
    growing boxes.

    Pass: the relative gap shrinks monotonically (within error) and ends below
    1 percent.  A window touching the wall is the negative control: its gap
    must not shrink.
    """
    rows = []
    for i, L in enumerate(L_list):
        per = BoxRegion(d=d, L=float(L), boundary=PERIODIC, n_slices=n_slices)
        dir_ = BoxRegion(d=d, L=float(L), boundary=DIRICHLET, n_slices=n_slices)
        if boundary_window:
            window = (0.02 * L, 0.02 * L + window_frac * L)
        else:
            window = (L * (0.5 - window_frac / 2), L * (0.5 + window_frac / 2))
        if V is None and observable == "density":
            a = _window_density_exact(z, beta, per, window)
            b = _window_density_exact(z, beta, dir_, window)
            err = 0.0
        else:
            from .gibbs import gibbs_sample

            def window_density(configs, region):
                lo, hi = window
                counts = []
                for cfg in configs:
                    c = 0.0
                    for lp in cfg.loops:
                        xs = wrap_positions(lp.path[:-1], region)
                        inside = np.ones(xs.shape[0], dtype=bool)
                        for ax in range(region.d):
                            inside &= (xs[:, ax] >= lo) & (xs[:, ax] < hi)
                        c += inside.mean() * lp.winding
                    counts.append(c)
                arr = np.array(counts) / (hi - lo) ** region.d
                return arr.mean(), arr.std(ddof=1) / np.sqrt(arr.size)

            run_a = gibbs_sample(z, beta, per, V, n_mc, derive_seed(seed, "per", i))
            run_b = gibbs_sample(z, beta, dir_, V, n_mc, derive_seed(seed, "dir", i))
            a, ea = window_density(run_a["configs"], per)
            b, eb = window_density(run_b["configs"], dir_)
            err = float(np.hypot(ea, eb))
        gap = abs(a - b)
        rel = gap / max(abs(a), 1e-300)
        rows.append({"L": float(L), "periodic": a, "dirichlet": b, "gap": gap,
                     "rel_gap": rel, "err": err})
    rels = [r["rel_gap"] for r in rows]
    errs = [r["err"] / max(abs(r["periodic"]), 1e-300) for r in rows]
    shrinking = all(b <= a + 3 * (ea + eb) for (a, b, ea, eb) in zip(rels, rels[1:], errs, errs[1:]))
    passed = shrinking and rels[-1] < 0.01
    return {"rows": rows, "shrinking": shrinking, "final_rel_gap": rels[-1], "passed": passed}
