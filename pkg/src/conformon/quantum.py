"""Curvature-induced quantum potential and its exact stationary state.

An electron confined to the tube feels ``V_eff = (hbar^2 / 2 mu)(-k^2/4 + tau0^2/2)``.
After removing the constant torsion term by a gauge phase and rescaling
``(t, s) -> (4 mu u / hbar, sqrt(2) s1)`` the stationary problem reads

    -psi'' + V psi = E psi,     V(s1) = -k(s1)^2 / 2,

and for the lattice profile ``psi = k`` is an exact eigenfunction with
``E = -(C2 - tau0^2)``.  Everything below works in the rescaled variables with
``hbar = mu = 1``, except :func:`effective_potential_raw`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from conformon.elliptic import complete_K, jacobi_dn
from conformon.exceptions import DomainError, InfinitePeriodError
from conformon.rod import ConformonLattice, Solitary

MAX_DENSE_N = 4096


@dataclass(frozen=True)
class QuantumUnits:
    hbar: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0.0 and self.mu > 0.0):
            raise DomainError("hbar and mu must be positive")


@dataclass(frozen=True)
class SpectralResult:
    """Discrete spectrum of ``-d^2/ds1^2 + V``.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]`` and is normalized so
    that ``sum(v**2) * spacing == 1``.
    """

    grid: np.ndarray
    potential: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    spacing: float
    periodic: bool

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        """Ground eigenvector with the sign chosen positive."""
        v = self.eigenvectors[:, 0]
        return v if v.sum() >= 0 else -v


def effective_potential_raw(k, tau0: float, units: QuantumUnits = QuantumUnits()):
    """``(hbar^2 / 2 mu) (-k^2/4 + tau0^2/2)`` in physical units."""
    k = np.asarray(k, dtype=float)
    v = units.hbar**2 / (2.0 * units.mu) * (-0.25 * k * k + 0.5 * tau0 * tau0)
    return float(v) if v.ndim == 0 else v


def lattice_potential(profile: ConformonLattice, s):
    """``V(s) = -2 (C2 - tau0^2) / (2 - kappa^2) dn^2(alpha s, kappa)``, equal to ``-k^2/2``."""
    alpha = profile.alpha
    dn = jacobi_dn(alpha * np.asarray(s, dtype=float), profile.kappa)
    return -2.0 * alpha * alpha * dn * dn


def potential_minimum(profile: ConformonLattice) -> float:
    """Depth of the lattice potential, ``-(C2 - tau0^2) / (1 - kappa^2/2)``."""
    return -profile.excess / (1.0 - 0.5 * profile.kappa**2)


def exact_energy(profile: ConformonLattice) -> float:
    """Energy ``-(C2 - tau0^2)`` of the exact state; independent of kappa."""
    return -profile.excess


def exact_wavefunction(profile: ConformonLattice, s1, u=0.0):
    """``psi(s1, u) = k(s1) exp(i (C2 - tau0^2) u)``; the amplitude is the curvature itself."""
    k = np.asarray(profile.evaluate(s1)[0])
    psi = k * np.exp(1j * profile.excess * np.asarray(u, dtype=float))
    return complex(psi) if np.ndim(psi) == 0 else psi


def schrodinger_residual(profile: ConformonLattice, s1):
    """``k'' + k^3/2 + E k`` with ``E`` from :func:`exact_energy`."""
    k, _, k_ss = profile.evaluate(s1)
    return k_ss + 0.5 * k**3 + exact_energy(profile) * k


def delocalization_ratio(profile: ConformonLattice) -> float:
    """``min |psi|^2 / max |psi|^2`` over the line.

    The maximum of dn sits at ``s1 = 0`` and the minimum at half a period,
    which gives ``1 - kappa^2``; at ``kappa = 1`` the state is localized and
    the ratio is 0.
    """
    if profile.kappa == 1.0:
        return 0.0
    alpha = profile.alpha
    half = complete_K(profile.kappa) / alpha
    amp = np.abs(exact_wavefunction(profile, np.array([0.0, half])))
    return float(amp[1] ** 2 / amp[0] ** 2)


# --- discrete eigenproblems ---------------------------------------------------


def _laplacian_matrix(n: int, h: float, periodic: bool) -> np.ndarray:
    lap = np.zeros((n, n))
    idx = np.arange(n)
    lap[idx, idx] = 2.0
    lap[idx[:-1], idx[1:]] = -1.0
    lap[idx[1:], idx[:-1]] = -1.0
    if periodic:
        lap[0, -1] = lap[-1, 0] = -1.0
    return lap / (h * h)


def solve_schrodinger(potential: np.ndarray, h: float, periodic: bool = True):
    """Eigenpairs of the three-point discretization of ``-d^2/dx^2 + V``.

    ``periodic=False`` imposes zero Dirichlet values just outside the grid.
    Eigenvectors are scaled to unit discrete L2 norm ``sum(v**2) h = 1``.
    """
    potential = np.asarray(potential, dtype=float)
    n = len(potential)
    if n > MAX_DENSE_N:
        raise DomainError(f"dense eigensolver is limited to N <= {MAX_DENSE_N}, got {n}")
    H = _laplacian_matrix(n, h, periodic)
    H[np.diag_indices(n)] += potential
    w, v = eigh(H)
    return w, v / math.sqrt(h)


def solve_band_ground_state(profile: ConformonLattice, N: int = 1024) -> SpectralResult:
    """Spectrum of one period of the lattice potential with periodic boundaries.

    The period ``[0, 2 K(kappa) / alpha)`` is sampled at ``N`` cell centres.
    The lowest eigenvalue approaches :func:`exact_energy` as ``O(N^-2)``.

    Raises:
        InfinitePeriodError: for ``kappa = 1``; use
            :func:`solve_conformon_bound_state` instead.
    """
    if profile.kappa == 1.0:
        raise InfinitePeriodError("kappa = 1 has no finite period; use solve_conformon_bound_state")
    if N < 64:
        raise DomainError(f"grid size must be at least 64, got {N}")
    period = profile.period
    h = period / N
    grid = (np.arange(N) + 0.5) * h
    V = lattice_potential(profile, grid)
    w, v = solve_schrodinger(V, h, periodic=True)
    return SpectralResult(grid=grid, potential=V, eigenvalues=w, eigenvectors=v, spacing=h, periodic=True)


def solve_conformon_bound_state(
    profile: Solitary | ConformonLattice,
    N: int = 2048,
    half_width: float | None = None,
) -> SpectralResult:
    """Spectrum of the single sech^2 well on a truncated box ``[-S, S]``.

    ``V = -2 beta^2 sech^2(beta s1)`` holds exactly one bound state at
    ``E = -beta^2``.  The box defaults to ``S = 20 / beta`` with Dirichlet walls.
    """
    if isinstance(profile, ConformonLattice):
        if profile.kappa != 1.0:
            raise DomainError("bound-state mode needs kappa = 1; use solve_band_ground_state")
        profile = Solitary(profile.C2, profile.tau0)
    beta = profile.beta
    S = 20.0 / beta if half_width is None else half_width
    if S < 20.0 / beta:
        raise DomainError(f"box half-width must be at least 20/beta = {20.0 / beta}")
    if N < 64:
        raise DomainError(f"grid size must be at least 64, got {N}")
    h = 2.0 * S / N
    grid = -S + (np.arange(N) + 0.5) * h
    k = profile.evaluate(grid)[0]
    V = -0.5 * k * k
    w, v = solve_schrodinger(V, h, periodic=False)
    return SpectralResult(grid=grid, potential=V, eigenvalues=w, eigenvectors=v, spacing=h, periodic=False)


def ground_state_l2_error(result: SpectralResult, profile: ConformonLattice | Solitary) -> float:
    """Discrete L2 distance between the ground eigenvector and the normalized exact state."""
    exact = np.asarray(profile.evaluate(result.grid)[0], dtype=float)
    exact = exact / math.sqrt(np.sum(exact * exact) * result.spacing)
    diff = result.ground_state - exact
    return float(math.sqrt(np.sum(diff * diff) * result.spacing))
