"""Unit conventions, probe kinematics, lattice dispersion and form factors.

Unit system: lattice constant d = 1, recoil energy E_r = 1, scattering
length a_s = 1. Energies (J, U, E0, dispersions) are therefore pure
numbers in units of E_r, momenta in units of 1/d, and cross sections in
units of a_s^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParameterError, KinematicallyForbiddenError

# Benchmark defaults for a V0 = 15 E_r lattice.
DEFAULT_J = 0.0065
DEFAULT_V0 = 15.0
DEFAULT_E0 = 2.0
DEFAULT_MASS_RATIO = 1.0

# |sin(k/2)| below this triggers the removable-singularity branch of the
# interference sum, and a momentum this close to a reciprocal vector is
# treated as exactly Bragg-matched (perfect destructive interference for
# the inelastic channel).
RECIPROCAL_TOL = 1e-9


@dataclass(frozen=True)
class LatticeSpec:
    """Parameters of the Bose-Hubbard chain, all in recoil/lattice units.

    Attributes
    ----------
    L : int
        Number of sites (>= 2), periodic boundary conditions.
    V0 : float
        Optical lattice depth in E_r; only enters through the Gaussian
        on-site orbital.
    J : float
        Nearest-neighbour tunneling energy in E_r.
    U : float
        On-site interaction energy in E_r (repulsive, >= 0).
    n : float
        Mean filling factor N/L.
    """

    L: int
    n: float
    U: float = 0.0
    J: float = DEFAULT_J
    V0: float = DEFAULT_V0

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 2:
            raise BadParameterError(f"lattice needs an integer L >= 2, got {self.L!r}")
        if self.V0 <= 0:
            raise BadParameterError(f"lattice depth must be positive, got V0={self.V0}")
        if self.J <= 0:
            raise BadParameterError(f"tunneling must be positive, got J={self.J}")
        if self.U < 0:
            raise BadParameterError(f"interaction must be non-negative, got U={self.U}")
        if self.n <= 0:
            raise BadParameterError(f"filling must be positive, got n={self.n}")

    @property
    def N(self) -> int:
        """Particle number realized on the chain, N = round(n L)."""
        return int(round(self.n * self.L))

    @property
    def realized_n(self) -> float:
        """Filling actually realized by the integer particle number."""
        return self.N / self.L

    @property
    def u_dimensionless(self) -> float:
        """Interaction measured against the kinetic scale, Un/J."""
        return self.U * self.n / self.J


@dataclass(frozen=True)
class ProbeSpec:
    """Incoming probe particle: energy E0 (E_r), mass ratio m/M, angle theta."""

    E0: float
    theta: float
    mass_ratio: float = DEFAULT_MASS_RATIO

    def __post_init__(self):
        if self.E0 <= 0:
            raise BadParameterError(f"probe energy must be positive, got E0={self.E0}")
        if self.mass_ratio <= 0:
            raise BadParameterError(f"mass ratio must be positive, got {self.mass_ratio}")
        if not -np.pi / 2 <= self.theta <= np.pi / 2:
            raise BadParameterError(
                f"scattering angle must lie in [-pi/2, pi/2], got {self.theta}"
            )


def quasimomentum_grid(L: int) -> np.ndarray:
    """Allowed quasimomenta q_s = 2*pi*s/L for s = 1..L-1 (q = 0 excluded)."""
    if not isinstance(L, (int, np.integer)) or L < 2:
        raise BadParameterError(f"momentum grid needs an integer L >= 2, got {L!r}")
    return 2.0 * np.pi * np.arange(1, L) / L


def bloch_dispersion(q, J: float):
    """Lowest-band dispersion eps_q = 4 J sin^2(q/2); 2*pi-periodic, eps_0 = 0."""
    if J <= 0:
        raise BadParameterError(f"tunneling must be positive, got J={J}")
    return 4.0 * J * np.sin(np.asarray(q, dtype=float) / 2.0) ** 2


def kappa_elastic(probe: ProbeSpec) -> float:
    """Elastic momentum transfer along the lattice, kappa_el = -pi sin(theta) sqrt(E0 m/M)."""
    return -np.pi * np.sin(probe.theta) * np.sqrt(probe.E0 * probe.mass_ratio)


def kappa_transferred(probe: ProbeSpec, excitation_energy: float) -> float:
    """Momentum transfer when the target absorbs `excitation_energy`.

    Energy conservation rescales the elastic transfer:
    kappa = kappa_el * sqrt(1 - dE/E0). Channels with dE >= E0 are closed.
    """
    if excitation_energy < 0:
        raise BadParameterError(f"excitation energy must be >= 0, got {excitation_energy}")
    if excitation_energy >= probe.E0:
        raise KinematicallyForbiddenError(
            f"excitation energy {excitation_energy} is not below the probe energy {probe.E0}"
        )
    return kappa_elastic(probe) * np.sqrt(1.0 - excitation_energy / probe.E0)


def form_factor(kappa, V0: float):
    """Gaussian on-site form factor W(kappa) = exp(-(kappa d)^2 / (4 pi^2 sqrt(V0)))."""
    if V0 <= 0:
        raise BadParameterError(f"lattice depth must be positive, got V0={V0}")
    return np.exp(-np.asarray(kappa, dtype=float) ** 2 / (4.0 * np.pi**2 * np.sqrt(V0)))


def wannier_overlap(kappa: float, V0: float, separation: int) -> complex:
    """Overlap of two Gaussian site orbitals `separation` sites apart.

    Closed form for sites j and l = j + separation:
    W_jl(kappa) = W(kappa) * exp(i kappa (x_j + x_l)/2) * exp(-(j-l)^2 pi^2 sqrt(V0)/4),
    returned here with the separation-independent midpoint phase referenced
    to x_j = 0 (the magnitude is what enters the cross sections).
    """
    if separation == 0:
        raise BadParameterError("separation 0 is the on-site form factor; use form_factor")
    if V0 <= 0:
        raise BadParameterError(f"lattice depth must be positive, got V0={V0}")
    midpoint = separation / 2.0
    return (
        form_factor(kappa, V0)
        * np.exp(1j * kappa * midpoint)
        * np.exp(-(separation**2) * np.pi**2 * np.sqrt(V0) / 4.0)
    )


def lattice_sum_sq(k, L: int):
    """Squared interference sum |Sigma(k)|^2 = sin^2(kL/2) / sin^2(k/2).

    At the removable singularities k = 0 (mod 2*pi) the coherent value L^2
    is returned; the branch triggers for |sin(k/2)| < 1e-9.
    """
    if not isinstance(L, (int, np.integer)) or L < 2:
        raise BadParameterError(f"interference sum needs an integer L >= 2, got {L!r}")
    k = np.asarray(k, dtype=float)
    half_sin = np.sin(k / 2.0)
    singular = np.abs(half_sin) < RECIPROCAL_TOL
    denom = np.where(singular, 1.0, half_sin**2)
    out = np.where(singular, float(L * L), np.sin(k * L / 2.0) ** 2 / denom)
    return out if out.ndim else float(out)


def fold_to_zone(k):
    """Fold a momentum into the first zone [0, 2*pi)."""
    return np.mod(k, 2.0 * np.pi)


def is_reciprocal(kappa, tol: float = RECIPROCAL_TOL) -> bool:
    """True when kappa sits on a reciprocal lattice vector 2*pi*j (within tol).

    Used by every inelastic evaluator: at these momenta (theta = 0 included)
    the lattice phases interfere destructively and the inelastic signal is
    reported as exactly zero.
    """
    folded = fold_to_zone(kappa)
    return bool(min(folded, 2.0 * np.pi - folded) < tol)
