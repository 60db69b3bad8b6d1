"""Exact canonical diagonalization of the Bose-Hubbard chain.

Builds the fixed-N Fock basis, the dense Hamiltonian

    H = -J sum_<j,j'> c_j^dag c_j' + (U/2) sum_j n_j (n_j - 1),

its full spectrum, and the many-body cross section assembled from the
density matrix elements <e| n_j |g>.  The chemical-potential term is
dropped: at fixed N it shifts all eigenvalues equally and cancels from
every energy difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    BadParameterError,
    CapacityError,
    DegenerateGroundStateError,
    NumericalError,
)
from .model import (
    LatticeSpec,
    ProbeSpec,
    form_factor,
    is_reciprocal,
    kappa_elastic,
)

# Refuse basis sizes past this point: the dense solver needs all
# eigenpairs, and memory grows as dim^2.
BASIS_CAP = 30_000

# Ground-state gap below this fraction of the spectral range is treated
# as a degeneracy (the cross section presumes a unique ground state).
DEGENERACY_TOL = 1e-10

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class FockBasis:
    """Ordered occupation-number basis at fixed particle number.

    States are occupation vectors (n_1..n_L) in lexicographic order;
    ``index`` maps an occupation tuple back to its row for O(1) lookup.
    """

    N: int
    L: int
    states: np.ndarray
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def rank(self, occupation) -> int:
        return self.index[tuple(int(x) for x in occupation)]


def basis_dimension(N: int, L: int) -> int:
    """Number of N-particle states on L sites, C(N+L-1, N)."""
    return math.comb(N + L - 1, N)


def enumerate_basis(N: int, L: int, cap: int = BASIS_CAP) -> FockBasis:
    """All occupation vectors with sum N on L sites, lexicographically ordered."""
    if N < 1:
        raise BadParameterError(f"need at least one particle, got N={N}")
    if L < 2:
        raise BadParameterError(f"need at least two sites, got L={L}")
    dim = basis_dimension(N, L)
    if dim > cap:
        raise CapacityError(
            f"basis dimension {dim} = C({N + L - 1},{N}) exceeds the cap {cap} "
            f"(N={N}, L={L})"
        )

    states = np.zeros((dim, L), dtype=np.int64)
    occ = np.zeros(L, dtype=np.int64)

    # Fill site by site; descending occupation of the leading site gives
    # reverse-lexicographic order, so enumerate ascending instead.
    def fill(site: int, remaining: int, row: int) -> int:
        if site == L - 1:
            occ[site] = remaining
            states[row] = occ
            return row + 1
        for k in range(remaining + 1):
            occ[site] = k
            row = fill(site + 1, remaining - k, row)
        occ[site] = 0
        return row

    filled = fill(0, N, 0)
    assert filled == dim
    index = {tuple(map(int, s)): i for i, s in enumerate(states)}
    return FockBasis(N=N, L=L, states=states, index=index)


def build_hamiltonian(basis: FockBasis, J: float, U: float) -> np.ndarray:
    """Dense symmetric Bose-Hubbard matrix on the given basis.

    Hopping runs over the periodic bonds j -> j+1 mod L.  For L=2 the two
    wrap-around bonds connect the same pair of sites, so the effective
    hopping amplitude doubles to 2J there (this matches the two-site Bloch
    spectrum); L >= 3 is the recommended regime.
    """
    if J < 0:
        raise BadParameterError(f"tunneling must be non-negative, got J={J}")
    if U < 0:
        raise BadParameterError(f"interaction must be non-negative, got U={U}")
    dim, L = basis.states.shape
    hop = np.zeros((dim, dim))
    for row, occ in enumerate(basis.states):
        for j in range(L):
            l = (j + 1) % L
            nj = occ[j]
            if nj == 0:
                continue
            target = occ.copy()
            target[j] -= 1
            target[l] += 1
            col = basis.index[tuple(map(int, target))]
            hop[col, row] += -J * math.sqrt(nj * (occ[l] + 1))
    H = hop + hop.T
    diag = 0.5 * U * np.sum(basis.states * (basis.states - 1), axis=1)
    H[np.diag_indices(dim)] += diag
    return H


@dataclass
class SpectrumResult:
    """Full spectrum plus the density matrix elements against the ground state.

    ``density_elements[e, j]`` holds <e| n_j |g>; the ground row is the
    ground-state density profile.  ``eigenvectors`` is None when the result
    was reconstructed from a cache file (the cross section does not need it).
    Instances are treated as immutable once construction has filled them.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    ground_energy: float
    ground_index: int
    density_elements: np.ndarray | None = None


def full_spectrum(H: np.ndarray, basis: FockBasis | None = None) -> SpectrumResult:
    """All eigenpairs of a dense symmetric matrix, with sanity checks.

    Verifies the per-pair residual ||Hv - lambda v|| <= 1e-8 ||H|| and that
    the ground state is unique (gap above 1e-10 of the spectral range).
    When a basis is supplied the density matrix elements are filled in.
    """
    dim = H.shape[0]
    if H.shape != (dim, dim):
        raise BadParameterError(f"matrix must be square, got shape {H.shape}")
    if dim > BASIS_CAP:
        raise CapacityError(f"matrix dimension {dim} exceeds the cap {BASIS_CAP}")
    w, V = scipy.linalg.eigh(H)

    norm = max(abs(w[0]), abs(w[-1]), 1e-300)  # spectral norm of symmetric H
    worst = 0.0
    for start in range(0, dim, 512):
        block = slice(start, min(start + 512, dim))
        R = H @ V[:, block] - V[:, block] * w[block]
        worst = max(worst, float(np.max(np.linalg.norm(R, axis=0))))
    if worst > RESIDUAL_TOL * norm:
        raise NumericalError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e} * ||H|| = "
            f"{RESIDUAL_TOL * norm:.3e}"
        )

    if dim > 1:
        spread = w[-1] - w[0]
        gap = w[1] - w[0]
        if spread <= 0 or gap < DEGENERACY_TOL * spread:
            raise DegenerateGroundStateError(
                f"ground-state gap {gap:.3e} is below {DEGENERACY_TOL:.0e} of the "
                f"spectral range {spread:.3e}; cross section needs a unique ground state"
            )

    result = SpectrumResult(
        eigenvalues=w,
        eigenvectors=V,
        ground_energy=float(w[0]),
        ground_index=0,
    )
    if basis is not None:
        density_elements(result, basis)
    return result


def density_elements(result: SpectrumResult, basis: FockBasis) -> np.ndarray:
    """Table of <e| n_j |g> for every eigenstate e and site j.

    n_j is diagonal in the Fock basis, so the table is a single contraction
    of the (real) eigenvector matrix with the occupation table.  The ground
    row is checked against particle-number conservation and translation
    invariance of the unique ground state.
    """
    if result.density_elements is not None:
        return result.density_elements
    if result.eigenvectors is None:
        raise BadParameterError("spectrum carries no eigenvectors (cache-loaded?)")
    V = result.eigenvectors
    g = V[:, result.ground_index]
    occ = basis.states.astype(float)
    table = V.T @ (occ * g[:, None])

    N, L = basis.N, basis.L
    ground_row = table[result.ground_index]
    tol = 1e-10 * max(1.0, float(N))
    if abs(float(np.sum(ground_row)) - N) > tol:
        raise NumericalError(
            f"ground-state density sums to {np.sum(ground_row)!r}, expected N={N}"
        )
    if np.max(np.abs(ground_row - N / L)) > tol:
        raise NumericalError(
            "ground-state density profile is not uniform; "
            "translation symmetry looks broken"
        )
    result.density_elements = table
    return table


def diagonalize(lattice: LatticeSpec, cap: int = BASIS_CAP) -> SpectrumResult:
    """Basis, Hamiltonian, spectrum and density elements for one lattice."""
    basis = enumerate_basis(lattice.N, lattice.L, cap=cap)
    H = build_hamiltonian(basis, lattice.J, lattice.U)
    return full_spectrum(H, basis)


@dataclass(frozen=True)
class ExactCrossSection:
    """Elastic/inelastic cross section (units a_s^2) at one deflection angle."""

    theta: float
    elastic: float
    inelastic: float
    contributing_states: int


def exact_cross_section(
    spectrum: SpectrumResult, lattice: LatticeSpec, probe: ProbeSpec
) -> ExactCrossSection:
    """Many-body cross section from the full spectrum, diagonal orbital terms.

    elastic   = |W(k_el)|^2 |sum_j e^{i k_el x_j} <g|n_j|g>|^2
    inelastic = sum over states with dE < E0 of
                sqrt(1 - dE/E0) |W(k_e)|^2 |sum_j e^{i k_e x_j} <e|n_j|g>|^2

    with k_e the energy-rescaled momentum transfer.  When k_el sits on a
    reciprocal lattice vector (theta = 0 included) the lattice phases
    interfere destructively and the inelastic part is exactly zero.
    """
    if spectrum.density_elements is None:
        raise BadParameterError("spectrum has no density elements; diagonalize first")
    table = spectrum.density_elements
    L = lattice.L
    if table.shape[1] != L:
        raise BadParameterError(
            f"spectrum was computed for {table.shape[1]} sites, lattice has {L}"
        )
    x = np.arange(1, L + 1, dtype=float)
    kel = kappa_elastic(probe)

    ground_row = table[spectrum.ground_index]
    amp_el = np.sum(np.exp(1j * kel * x) * ground_row)
    elastic = float(form_factor(kel, lattice.V0) ** 2 * abs(amp_el) ** 2)

    dE = spectrum.eigenvalues - spectrum.ground_energy
    open_mask = dE < probe.E0
    open_mask[spectrum.ground_index] = False
    contributing = int(np.count_nonzero(open_mask))

    if is_reciprocal(kel) or contributing == 0:
        return ExactCrossSection(probe.theta, elastic, 0.0, contributing)

    weights = 1.0 - dE[open_mask] / probe.E0
    kappa_e = kel * np.sqrt(weights)
    phases = np.exp(1j * np.outer(kappa_e, x))
    amps = np.einsum("ej,ej->e", phases, table[open_mask])
    inelastic = float(
        np.sum(np.sqrt(weights) * form_factor(kappa_e, lattice.V0) ** 2 * np.abs(amps) ** 2)
    )
    return ExactCrossSection(probe.theta, elastic, inelastic, contributing)
