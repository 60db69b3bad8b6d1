"""Bogoliubov theory on the chain: depletion, dispersion, cross section.

The condensate fraction is found self-consistently from

    n = n0 + (1/L) sum_{q != 0} [ (eps_q + U n0) / (2 omega_q) - 1/2 ],

after which the quasiparticle dispersion omega_q feeds the analytic
inelastic cross section (one-quasiparticle channel) and the two-
quasiparticle diagnostic term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParameterError, ConvergenceError
from .model import (
    RECIPROCAL_TOL,
    LatticeSpec,
    ProbeSpec,
    bloch_dispersion,
    form_factor,
    is_reciprocal,
    kappa_elastic,
    lattice_sum_sq,
    quasimomentum_grid,
)

DEPLETION_RESIDUAL_TOL = 1e-12
_BISECTION_STEPS = 200


@dataclass(frozen=True)
class BogoliubovState:
    """Solved condensate for one lattice configuration.

    n0 is the condensate filling, mu the mean-field chemical potential,
    omega_table the quasiparticle energies over the q != 0 grid, and
    healing_ok the advisory healing-length validity flag.
    """

    lattice: LatticeSpec
    n0: float
    depletion_fraction: float
    mu: float
    omega_table: np.ndarray
    healing_ok: bool

    @property
    def Un0(self) -> float:
        return self.lattice.U * self.n0


def bogoliubov_dispersion(q, J: float, Un0: float):
    """Quasiparticle energy omega_q = sqrt(eps_q (eps_q + 2 U n0)).

    Written as eps*sqrt(1 + 2Un0/eps) so that Un0 = 0 reproduces the free
    dispersion bit-for-bit.  The condensate mode q = 0 (mod 2*pi) is
    outside the domain.
    """
    if Un0 < 0:
        raise BadParameterError(f"U n0 must be non-negative, got {Un0}")
    if np.any(np.abs(np.sin(np.asarray(q, dtype=float) / 2.0)) < RECIPROCAL_TOL):
        raise BadParameterError("q = 0 (mod 2*pi) is the condensate mode, not a quasiparticle")
    eps = bloch_dispersion(q, J)
    return eps * np.sqrt(1.0 + 2.0 * Un0 / eps)


def chemical_potential(U: float, n0: float, J: float) -> float:
    """Mean-field chemical potential mu = U n0 - 2J."""
    return U * n0 - 2.0 * J


def validity_check(lattice: LatticeSpec, n0: float):
    """Healing-length window on the repulsion, advisory only.

    Bogoliubov theory on the lattice wants the healing length near or above
    the lattice constant, which bounds U n0 / J to the open interval
    2(1 - E_r/(pi^2 J)) < U n0/J < 2(1 + E_r/(pi^2 J)) (lower bound clipped
    at zero).  Returns (ok, report) with both bounds in the report.
    """
    margin = 1.0 / (np.pi**2 * lattice.J)  # E_r / (pi^2 J) with E_r = 1
    lower = max(0.0, 2.0 * (1.0 - margin))
    upper = 2.0 * (1.0 + margin)
    value = lattice.U * n0 / lattice.J
    ok = lower < value < upper
    return ok, {"lower": lower, "upper": upper, "Un0_over_J": value}


def _depleted_filling(n0: float, U: float, eps: np.ndarray, L: int) -> float:
    """Total filling n(n0) implied by a trial condensate filling."""
    if U * n0 == 0.0:
        return n0
    omega = eps * np.sqrt(1.0 + 2.0 * U * n0 / eps)
    return n0 + float(np.sum((eps + U * n0) / (2.0 * omega) - 0.5)) / L


def solve_depletion(lattice: LatticeSpec) -> BogoliubovState:
    """Self-consistent condensate filling by bisection on n0 in (0, n].

    The depleted filling is strictly increasing in n0, so the bracket
    (1e-15 n, n] always contains the root; U = 0 short-circuits to n0 = n.
    The result is verified to reproduce n to 1e-12 relative.
    """
    L, n, U, J = lattice.L, lattice.n, lattice.U, lattice.J
    grid = quasimomentum_grid(L)
    eps = bloch_dispersion(grid, J)

    if U == 0.0:
        n0 = n
    else:
        lo, hi = 1e-15 * n, n
        flo = _depleted_filling(lo, U, eps, L) - n
        fhi = _depleted_filling(hi, U, eps, L) - n
        if flo > 0 or fhi < 0:
            raise ConvergenceError(
                f"no depletion root in ({lo:.3e}, {hi:.3e}]: "
                f"f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
            )
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if _depleted_filling(mid, U, eps, L) - n > 0:
                hi = mid
            else:
                lo = mid
        n0 = hi  # the side guaranteed to satisfy f >= 0 keeps n0 <= its root

    residual = abs(_depleted_filling(n0, U, eps, L) - n)
    if residual > DEPLETION_RESIDUAL_TOL * n:
        raise ConvergenceError(
            f"depletion solve left residual {residual:.3e} "
            f"(tolerance {DEPLETION_RESIDUAL_TOL * n:.3e})"
        )

    Un0 = U * n0
    omega = eps if Un0 == 0.0 else eps * np.sqrt(1.0 + 2.0 * Un0 / eps)
    ok, _ = validity_check(lattice, n0)
    return BogoliubovState(
        lattice=lattice,
        n0=n0,
        depletion_fraction=1.0 - n0 / n,
        mu=chemical_potential(U, n0, J),
        omega_table=omega,
        healing_ok=ok,
    )


def depletion_quadratic(lattice: LatticeSpec) -> float:
    """Small-interaction law delta n / n ~ alpha * u^2.

    alpha = (L^4 + 10 L^2 - 11) / (2880 N) with u = U n / J.  Valid only
    while the depletion is small; the caller owns that judgement.
    """
    L, N = lattice.L, lattice.N
    alpha = (L**4 + 10 * L**2 - 11) / (2880.0 * N)
    return alpha * lattice.u_dimensionless**2


def bog_inelastic_cs(state: BogoliubovState, probe: ProbeSpec, V0: float) -> float:
    """One-quasiparticle inelastic cross section per particle (1/(N a_s^2)).

    (1/L^2) sum over open modes (omega_q < E0) of
        sqrt(1 - omega_q/E0) (n0/n) (eps_q/omega_q) |Sigma(kappa_q - q)|^2 |W(kappa_q)|^2

    with kappa_q the energy-rescaled momentum transfer.  Returns exactly
    zero when kappa_el sits on a reciprocal lattice vector.
    """
    lattice = state.lattice
    kel = kappa_elastic(probe)
    if is_reciprocal(kel):
        return 0.0
    grid = quasimomentum_grid(lattice.L)
    eps = bloch_dispersion(grid, lattice.J)
    omega = state.omega_table
    open_mask = omega < probe.E0
    if not np.any(open_mask):
        return 0.0
    eps, omega, q = eps[open_mask], omega[open_mask], grid[open_mask]
    weight = 1.0 - omega / probe.E0
    kq = kel * np.sqrt(weight)
    contrib = (
        np.sqrt(weight)
        * (state.n0 / lattice.n)
        * (eps / omega)
        * lattice_sum_sq(kq - q, lattice.L)
        * form_factor(kq, V0) ** 2
    )
    return float(np.sum(contrib)) / lattice.L**2


def pair_coupling(eps_q, eps_p, Un0: float, same_mode):
    """Two-quasiparticle coupling f(q,q') entering the diagnostic term.

    f = [eps_q eps_p + U n0 (eps_q + eps_p) + 2 (U n0)^2 - omega_q omega_p]
        / [(1 + delta_{q,p}) omega_q omega_p]
    """
    omega_q = eps_q * np.sqrt(1.0 + 2.0 * Un0 / eps_q) if Un0 else eps_q
    omega_p = eps_p * np.sqrt(1.0 + 2.0 * Un0 / eps_p) if Un0 else eps_p
    numer = eps_q * eps_p + Un0 * (eps_q + eps_p) + 2.0 * Un0**2 - omega_q * omega_p
    return numer / ((1.0 + np.asarray(same_mode, dtype=float)) * omega_q * omega_p)


def two_qp_contribution(state: BogoliubovState, probe: ProbeSpec, V0: float) -> float:
    """Two-quasiparticle term (units a_s^2), diagnostic only.

    (1/2L^2) sum over open pairs (omega_q + omega_q' < E0) of
        sqrt(1 - (omega_q+omega_q')/E0) f(q,q')
        |Sigma(kappa - (q+q'))|^2 |W(kappa)|^2

    This stays of order one while the one-quasiparticle channel scales with
    N, which is why it is reported separately and never added to totals.
    """
    lattice = state.lattice
    kel = kappa_elastic(probe)
    if is_reciprocal(kel):
        return 0.0
    L = lattice.L
    grid = quasimomentum_grid(L)
    eps = bloch_dispersion(grid, lattice.J)
    omega = state.omega_table

    eq = eps[:, None]
    ep = eps[None, :]
    osum = omega[:, None] + omega[None, :]
    open_mask = osum < probe.E0
    if not np.any(open_mask):
        return 0.0
    weight = np.where(open_mask, 1.0 - osum / probe.E0, 0.0)
    kpair = kel * np.sqrt(weight)
    qsum = grid[:, None] + grid[None, :]
    same = np.eye(L - 1, dtype=bool)
    f = pair_coupling(eq, ep, state.Un0, same)
    contrib = np.where(
        open_mask,
        np.sqrt(weight) * f * lattice_sum_sq(kpair - qsum, L) * form_factor(kpair, V0) ** 2,
        0.0,
    )
    return float(np.sum(contrib)) / (2.0 * L**2)
