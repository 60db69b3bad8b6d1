"""Closed-form limiting cross sections and asymptotic laws.

Free-gas (superfluid) and strong-repulsion (Mott) limits, the L -> infinity
forms with their kinematic root, the weak-interaction decay slope, the
angles where the finite-size and infinite-size formulas cross, and the
angle-averaged deviation metric between two cross-section curves.

Every inelastic evaluator in this module returns exactly zero when the
elastic momentum transfer sits on a reciprocal lattice vector (theta = 0
included): the lattice phases interfere destructively there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .bogoliubov import BogoliubovState, bog_inelastic_cs, solve_depletion
from .errors import ConvergenceError, UndefinedDeviationError
from .model import (
    DEFAULT_J,
    DEFAULT_MASS_RATIO,
    DEFAULT_V0,
    RECIPROCAL_TOL,
    LatticeSpec,
    ProbeSpec,
    bloch_dispersion,
    fold_to_zone,
    form_factor,
    is_reciprocal,
    kappa_elastic,
    lattice_sum_sq,
    quasimomentum_grid,
)

ROOT_TOL = 1e-12

# Above this probe energy the kinematic corrections to the large-L forms
# are negligible and the shortcut expressions are used.
HIGH_E0_FACTOR = 100.0

# Deviation-average floor: angles where the reference curve falls below
# this fraction of its grid maximum are excluded (0/0 protection).
DEVIATION_FLOOR_FRACTION = 1e-12


def high_probe_energy(E0: float, J: float, u: float = 0.0) -> bool:
    """True when E0 dwarfs every quasiparticle energy scale (shortcut regime)."""
    return E0 > HIGH_E0_FACTOR * J * np.sqrt(1.0 + u / 2.0)


# ------------------------------------------------------------------ limits


def sf_inelastic(
    L: int,
    E0: float,
    theta: float,
    V0: float = DEFAULT_V0,
    mass_ratio: float = DEFAULT_MASS_RATIO,
    J: float = DEFAULT_J,
) -> float:
    """Free-gas inelastic cross section per particle (1/(N a_s^2)).

    (1/L^2) sum over q != 0 with eps_q < E0 of
        sqrt(1 - eps_q/E0) |Sigma(kappa_q - q)|^2 |W(kappa_q)|^2.

    Evaluated through the quasiparticle kernel at zero interaction, which
    reduces to this formula identically (same code path, so the two agree
    bit-for-bit).
    """
    state = solve_depletion(LatticeSpec(L=L, n=1.0, U=0.0, J=J))
    return bog_inelastic_cs(state, ProbeSpec(E0=E0, theta=theta, mass_ratio=mass_ratio), V0)


def elastic_cs(
    L: int,
    N: int,
    E0: float,
    theta: float,
    V0: float = DEFAULT_V0,
    mass_ratio: float = DEFAULT_MASS_RATIO,
) -> float:
    """Elastic cross section (a_s^2), common to both limits.

    N^2/L^2 |Sigma(kappa_el)|^2 |W(kappa_el)|^2: the coherent Bragg pattern.
    The off-diagonal orbital corrections that would distinguish the two
    limits are dropped (deep-lattice regime).
    """
    kel = kappa_elastic(ProbeSpec(E0=E0, theta=theta, mass_ratio=mass_ratio))
    return (
        (N / L) ** 2 * float(lattice_sum_sq(kel, L)) * float(form_factor(kel, V0)) ** 2
    )


def mi_inelastic(
    L: int,
    n: float,
    E0: float,
    theta: float,
    V0: float = DEFAULT_V0,
    mass_ratio: float = DEFAULT_MASS_RATIO,
    U: float = 0.0,
) -> float:
    """Strong-repulsion (insulating-limit) inelastic cross section per particle.

    n(n+1) C (1/L) sum_{j != l} |W_jl(kappa C)|^2 with C = sqrt(1 - U/E0);
    the only open channel costs the interaction energy U, so the channel
    closes (returns 0) once U >= E0.  Orbital overlaps fall off as
    exp(-(j-l)^2 pi^2 sqrt(V0)/2), so the pair sum is truncated at
    separation 3.
    """
    if U >= E0:
        return 0.0
    kel = kappa_elastic(ProbeSpec(E0=E0, theta=theta, mass_ratio=mass_ratio))
    if is_reciprocal(kel):
        return 0.0
    C = np.sqrt(1.0 - U / E0)
    kmi = kel * C
    w2 = float(form_factor(kmi, V0)) ** 2
    pair_sum = 0.0
    for m in range(1, min(3, L - 1) + 1):
        pair_sum += 2 * (L - m) * np.exp(-(m**2) * np.pi**2 * np.sqrt(V0) / 2.0)
    return n * (n + 1) * C * w2 * pair_sum / L


# ------------------------------------------------------- large-L formulas


def _kinematic_root(kel: float, E0: float, energy_of) -> float:
    """Solve kappa(q) = q with kappa(q) = kel*sqrt(1 - energy_of(q)/E0).

    Damped fixed-point iteration from q = kel; the excitation energies here
    are thousandths of E0, so the map is strongly contracting.  Falls back
    to bracketed root finding, and reports the bracket if even that fails.
    The returned root is the real (unfolded) solution; the energy function
    is 2*pi-periodic so folding plays no role in the iteration.
    """
    def residual(x):
        return kel * np.sqrt(max(0.0, 1.0 - energy_of(x) / E0)) - x

    x = kel
    for _ in range(200):
        en = energy_of(x)
        if en >= E0:
            break  # closed channel along the path; let the fallback decide
        target = kel * np.sqrt(1.0 - en / E0)
        if abs(target - x) < ROOT_TOL:
            return target
        x = 0.5 * (x + target)

    lo, hi = (kel, 0.0) if kel < 0 else (0.0, kel)
    try:
        root = scipy.optimize.brentq(residual, lo, hi, xtol=1e-14)
    except ValueError as exc:
        raise ConvergenceError(
            f"kinematic root not found in bracket [{lo:.6g}, {hi:.6g}]: {exc}"
        ) from exc
    if abs(residual(root)) > 1e-9:
        raise ConvergenceError(
            f"kinematic root in [{lo:.6g}, {hi:.6g}] has residual "
            f"{residual(root):.3e}"
        )
    return float(root)


def largeL_sf_inelastic(
    E0: float,
    theta: float,
    V0: float = DEFAULT_V0,
    mass_ratio: float = DEFAULT_MASS_RATIO,
    J: float = DEFAULT_J,
) -> float:
    """L -> infinity free-gas inelastic cross section per particle.

    In the high-probe-energy regime this collapses to |W(kappa_el)|^2 away
    from reciprocal vectors.  Otherwise the momentum sum concentrates on
    the single root q' of kappa_{q'} = q' and picks up the kinematic
    Jacobian denominator |1 + kel d J sin(q') / (E0 sqrt(1 - eps_{q'}/E0))|.
    """
    kel = kappa_elastic(ProbeSpec(E0=E0, theta=theta, mass_ratio=mass_ratio))
    if is_reciprocal(kel):
        return 0.0
    if high_probe_energy(E0, J):
        return float(form_factor(kel, V0)) ** 2

    root = _kinematic_root(kel, E0, lambda q: float(bloch_dispersion(q, J)))
    if is_reciprocal(root):
        return 0.0
    eps = float(bloch_dispersion(root, J))
    if eps >= E0:
        return 0.0
    weight = np.sqrt(1.0 - eps / E0)
    denom = abs(1.0 + kel * J * np.sin(root) / (E0 * weight))
    return weight * float(form_factor(root, V0)) ** 2 / denom


def largeL_bog_cs(state: BogoliubovState, probe: ProbeSpec, V0: float) -> float:
    """L -> infinity quasiparticle inelastic cross section per particle.

    High probe energy: (n0/n) (eps/omega) |W(kappa_el)|^2 with eps, omega
    taken at the zone-folded kappa_el.  Otherwise the root q~ of
    kappa_{q~} = q~ under the interacting dispersion is used, with the
    Jacobian denominator carrying the extra (eps + U n0)/omega factor from
    d(omega)/dq.
    """
    lattice = state.lattice
    kel = kappa_elastic(probe)
    if is_reciprocal(kel):
        return 0.0
    Un0 = state.Un0
    J = lattice.J

    def omega_of(q):
        eps = float(bloch_dispersion(q, J))
        return float(np.sqrt(eps * (eps + 2.0 * Un0)))

    if high_probe_energy(probe.E0, J, lattice.u_dimensionless):
        folded = fold_to_zone(kel)
        eps = float(bloch_dispersion(folded, J))
        omega = omega_of(folded)
        return (state.n0 / lattice.n) * (eps / omega) * float(form_factor(kel, V0)) ** 2

    root = _kinematic_root(kel, probe.E0, omega_of)
    if is_reciprocal(root):
        return 0.0
    eps = float(bloch_dispersion(root, J))
    omega = omega_of(root)
    if omega >= probe.E0:
        return 0.0
    weight = np.sqrt(1.0 - omega / probe.E0)
    denom = abs(
        1.0 + kel * J * np.sin(root) * (eps + Un0) / (probe.E0 * omega * weight)
    )
    return (state.n0 / lattice.n) * weight * (eps / omega) * float(
        form_factor(root, V0)
    ) ** 2 / denom


# ----------------------------------------------------------- decay slope


def lattice_sum_sq_derivative(k, L: int):
    """d/dk of the squared interference sum, with the removable singularity.

    Smooth branch: (L/2) sin(Lk)/sin^2(k/2) - |Sigma|^2 cot(k/2).
    Near k = 0 (mod 2*pi) the Taylor form -L^2(L^2-1) k~/6 takes over,
    with k~ the signed distance to the nearest reciprocal vector.
    """
    k = np.asarray(k, dtype=float)
    half = np.sin(k / 2.0)
    near = np.abs(half) < RECIPROCAL_TOL
    ktilde = k - 2.0 * np.pi * np.round(k / (2.0 * np.pi))
    safe_half = np.where(near, 1.0, half)
    sig2 = lattice_sum_sq(k, L)
    smooth = (L / 2.0) * np.sin(L * k) / safe_half**2 - sig2 * np.cos(k / 2.0) / safe_half
    taylor = -(L**2) * (L**2 - 1) / 6.0 * ktilde
    out = np.where(near, taylor, smooth)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SlopeResult:
    """Weak-interaction linear decay of the inelastic cross section.

    lambda_ is the decay rate per unit u = U n/J (trailing underscore only
    because of the Python keyword), gamma_sf the u = 0 intercept, and
    large_l_slope the L -> infinity rate |W(kappa_el)|^2/(4 sin^2(kappa_el/2))
    (infinite on reciprocal vectors, where the decay is fastest).
    """

    lambda_: float
    gamma_sf: float
    large_l_slope: float


def slope_lambda(
    L: int,
    E0: float,
    theta: float,
    V0: float = DEFAULT_V0,
    mass_ratio: float = DEFAULT_MASS_RATIO,
    J: float = DEFAULT_J,
) -> SlopeResult:
    """First-order decay rate of the quasiparticle cross section in u = Un/J.

    Lambda = (J / 2 L^2 E0) * sum over q != 0 (open channels) of
        (2E0 - eps_q)/(eps_q sqrt(1 - eps_q/E0)) * G(kappa_q)
        + kappa_el * dG/dkappa |_{kappa_q}

    with G(kappa) = |Sigma(kappa - q)|^2 |W(kappa)|^2 and
    kappa_q = kappa_el sqrt(1 - eps_q/E0); the kappa-derivative is taken
    analytically on the closed forms.
    """
    kel = kappa_elastic(ProbeSpec(E0=E0, theta=theta, mass_ratio=mass_ratio))
    gamma = sf_inelastic(L, E0, theta, V0, mass_ratio, J)

    if is_reciprocal(kel):
        # every interference factor |Sigma(kappa_q - q)|^2 vanishes
        # identically on the grid, so the slope is an exact zero while the
        # infinite-lattice reference diverges
        return SlopeResult(lambda_=0.0, gamma_sf=gamma, large_l_slope=np.inf)
    large_l = float(form_factor(kel, V0)) ** 2 / (4.0 * np.sin(kel / 2.0) ** 2)

    grid = quasimomentum_grid(L)
    eps = bloch_dispersion(grid, J)
    open_mask = eps < E0
    grid, eps = grid[open_mask], eps[open_mask]
    weight = np.sqrt(1.0 - eps / E0)
    kq = kel * weight
    sig2 = lattice_sum_sq(kq - grid, L)
    w2 = form_factor(kq, V0) ** 2
    G = sig2 * w2
    dG = lattice_sum_sq_derivative(kq - grid, L) * w2 + sig2 * (
        -kq / (np.pi**2 * np.sqrt(V0))
    ) * w2
    total = np.sum((2.0 * E0 - eps) / (eps * weight) * G + kel * dG)
    lam = J / (2.0 * L**2 * E0) * float(total)
    return SlopeResult(lambda_=lam, gamma_sf=gamma, large_l_slope=large_l)


def fit_small_u_slope(u_values, cs_values, degree: int = 4) -> float:
    """Slope d(cs)/du at u = 0 from a polynomial fit in t = u/max(u).

    A plain straight-line fit is biased by the curvature of the decay even
    on [1e-4, 1e-2]; fitting a quartic in the scaled variable and reading
    off the linear coefficient removes that bias without ill-conditioning.
    """
    u = np.asarray(u_values, dtype=float)
    cs = np.asarray(cs_values, dtype=float)
    umax = float(np.max(u))
    coeffs = np.polynomial.polynomial.polyfit(u / umax, cs, degree)
    return float(coeffs[1]) / umax


# ------------------------------------------------- marker angles, deviation


@dataclass(frozen=True)
class ExactAngleSet:
    """Angles where the finite-L and infinite-L formulas agree, plus window.

    angles[i] corresponds to s_values[i]; window is (theta_1, theta_{L-1})
    when both endpoints exist, else None.
    """

    angles: np.ndarray
    s_values: np.ndarray
    window: tuple | None


def exact_angles(
    L: int, E0: float, mass_ratio: float = DEFAULT_MASS_RATIO, j: int = 0
) -> ExactAngleSet:
    """Marker angles theta_s = arcsin(2 sqrt(1/(E0 mass_ratio)) (j + s/L)).

    s runs over 1..L-1; entries whose arcsine argument exceeds 1 are
    kinematically unreachable and dropped (possibly leaving an empty set).
    """
    s = np.arange(1, L)
    arg = 2.0 * np.sqrt(1.0 / (E0 * mass_ratio)) * (j + s / L)
    keep = arg <= 1.0
    angles = np.arcsin(arg[keep])
    s_kept = s[keep]
    window = None
    if keep[0] and keep[-1]:
        window = (float(angles[0]), float(angles[-1]))
    return ExactAngleSet(angles=angles, s_values=s_kept, window=window)


def deviation_delta_cs(exact_fn, bog_fn, angle_grid) -> float:
    """Angle-averaged relative deviation of bog_fn from exact_fn.

    mean over the grid of |bog - exact|/exact, excluding angles where the
    reference is below 1e-12 of its grid maximum (forward-angle 0/0).
    Raises when every angle is excluded.
    """
    grid = np.asarray(angle_grid, dtype=float)
    ref = np.array([float(exact_fn(t)) for t in grid])
    test = np.array([float(bog_fn(t)) for t in grid])
    floor = DEVIATION_FLOOR_FRACTION * float(np.max(ref, initial=0.0))
    keep = ref >= floor
    if floor <= 0.0 or not np.any(keep):
        raise UndefinedDeviationError(
            "reference cross section vanishes on the whole angle grid"
        )
    return float(np.mean(np.abs(test[keep] - ref[keep]) / ref[keep]))
