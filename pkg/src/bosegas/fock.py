"""Brute-force traces on a truncated bosonic Fock space over finitely many modes.

Ground truth for small systems: the grand-canonical weight of an occupation
tuple (n_1..n_M) is exp(-beta [sum lam_k n_k + mu N + E_int(n)]) where the
gauge-invariant interaction enters only through its occupation-diagonal part

    E_int = Vhat(0) (N^2 - N) / (2|box|)
          + (1/(2|box|)) sum_{k != k'} Vhat(k - k') n_k n_k'.

Enumeration is exhaustive and lexicographic (vectorized in fixed-size chunks)
with compensated accumulation, so results are deterministic bit-for-bit.
"""

from dataclasses import dataclass
from math import fsum

import numpy as np

from .errors import ResourceBudgetError, TruncationError

STATE_BUDGET = 10_000_000
_CHUNK = 1 << 16


@dataclass(frozen=True)
class TruncatedFock:
    """Mode energies and a per-mode occupation cutoff."""

    energies: np.ndarray
    n_max: int

    def __post_init__(self):
        ev = np.asarray(self.energies, dtype=float)
        if ev.ndim != 1 or ev.size == 0 or not np.all(np.isfinite(ev)):
            raise ValueError("energies must be a finite 1-d list")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.state_count > STATE_BUDGET:
            raise ResourceBudgetError(
                f"(n_max+1)^M = {self.state_count} states exceed the budget {STATE_BUDGET}"
            )

    @property
    def n_modes(self) -> int:
        return len(self.energies)

    @property
    def state_count(self) -> int:
        return (self.n_max + 1) ** self.n_modes


@dataclass(frozen=True)
class DiagonalInteraction:
    """Fourier coefficients Vhat(k - k') on the mode grid, plus the box volume.

    vhat is the symmetric real (M, M) matrix of coefficients; its constant
    diagonal is Vhat(0).
    """

    vhat: np.ndarray
    volume: float

    def __post_init__(self):
        v = np.asarray(self.vhat, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("vhat must be a square matrix")
        if not np.allclose(v, v.T):
            raise ValueError("vhat must be symmetric (central potential)")
        if not np.allclose(np.diag(v), v[0, 0]):
            raise ValueError("diagonal of vhat must be the constant Vhat(0)")
        if self.volume <= 0:
            raise ValueError("volume must be positive")

    @property
    def vhat0(self) -> float:
        return float(self.vhat[0, 0])


def _occupation_chunks(fock: TruncatedFock):
    """Yield (chunk_index, occupations (chunk, M)) in lexicographic order."""
    M, base = fock.n_modes, fock.n_max + 1
    total = fock.state_count
    powers = base ** np.arange(M - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        occ = (idx[:, None] // powers[None, :]) % base
        yield occ


def _energies(fock: TruncatedFock, mu: float, interaction: DiagonalInteraction | None, occ):
    lam = np.asarray(fock.energies, dtype=float)
    occf = occ.astype(float)
    N = occf.sum(axis=1)
    E = occf @ lam + mu * N
    if interaction is not None:
        vol2 = 2.0 * interaction.volume
        E = E + interaction.vhat0 * (N**2 - N) / vol2
        # off-diagonal sum_{k != k'} Vhat n_k n_k' = n.Vhat.n - Vhat(0) sum n_k^2
        quad = np.einsum("ck,kl,cl->c", occf, interaction.vhat, occf)
        E = E + (quad - interaction.vhat0 * (occf**2).sum(axis=1)) / vol2
    return E, N


def exact_partition(
    fock: TruncatedFock,
    beta: float,
    mu: float,
    interaction: DiagonalInteraction | None = None,
    tail_tol: float = 1e-12,
) -> float:
    """Z as a compensated sum over all occupation tuples.

    Raises TruncationError when states with any occupation at the cutoff carry
    more than tail_tol of the total weight (cutoff too small).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    parts, boundary_parts = [], []
    for occ in _occupation_chunks(fock):
        E, _ = _energies(fock, mu, interaction, occ)
        w = np.exp(-beta * E)
        parts.append(fsum(w))
        at_cut = (occ == fock.n_max).any(axis=1)
        if at_cut.any():
            boundary_parts.append(fsum(w[at_cut]))
    Z = fsum(parts)
    boundary = fsum(boundary_parts)
    if boundary > tail_tol * Z:
        raise TruncationError(
            f"boundary states carry relative weight {boundary / Z:.3e} > {tail_tol:.1e}; raise n_max"
        )
    return Z


def exact_occupations(
    fock: TruncatedFock,
    beta: float,
    mu: float,
    interaction: DiagonalInteraction | None = None,
) -> np.ndarray:
    """Gibbs averages <n_k> over the same enumeration; sums to <N>."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    num = np.zeros(fock.n_modes)
    Z_parts = []
    for occ in _occupation_chunks(fock):
        E, _ = _energies(fock, mu, interaction, occ)
        w = np.exp(-beta * E)
        Z_parts.append(fsum(w))
        num += w @ occ.astype(float)
    return num / fsum(Z_parts)


def exact_zero_mode_statistics(
    fock: TruncatedFock,
    beta: float,
    mu: float,
    interaction: DiagonalInteraction | None = None,
) -> np.ndarray:
    """Full histogram P(n_0 = m), m = 0..n_max, for the lowest-energy mode."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    k0 = int(np.argmin(fock.energies))
    hist = np.zeros(fock.n_max + 1)
    for occ in _occupation_chunks(fock):
        E, _ = _energies(fock, mu, interaction, occ)
        w = np.exp(-beta * E)
        hist += np.bincount(occ[:, k0], weights=w, minlength=fock.n_max + 1)
    return hist / hist.sum()


def mean_particle_number(
    fock: TruncatedFock,
    beta: float,
    mu: float,
    interaction: DiagonalInteraction | None = None,
) -> float:
    return float(exact_occupations(fock, beta, mu, interaction).sum())


def solve_mu_for_number(
    fock: TruncatedFock,
    beta: float,
    n_target: float,
    interaction: DiagonalInteraction | None = None,
    bracket=(-50.0, 50.0),
) -> float:
    """mu with <N>(mu) = n_target under the exact trace (for fixed-density studies)."""
    from scipy.optimize import brentq

    f = lambda mu: mean_particle_number(fock, beta, mu, interaction) - n_target
    return float(brentq(f, bracket[0], bracket[1], rtol=1e-12))
