"""Parameter sweeps, CSV/JSON artifact emission, and the spectrum cache.

Every runner returns a rectangular ScanTable with an explicit provenance
column plus manifest metadata; the writers emit byte-deterministic CSV
(17 significant digits) whose first line points at the JSON run manifest.
Cross-section columns are normalized per particle (1/(N a_s^2)) so curves
of different provenance can be overlaid directly; elastic columns share
the same normalization.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bogoliubov import solve_depletion, bog_inelastic_cs, depletion_quadratic
from .errors import BadParameterError, CacheError, CapacityError
from .exact import (
    BASIS_CAP,
    SpectrumResult,
    basis_dimension,
    diagonalize,
    exact_cross_section,
)
from .limits import (
    deviation_delta_cs,
    elastic_cs,
    exact_angles,
    largeL_bog_cs,
    largeL_sf_inelastic,
    mi_inelastic,
    sf_inelastic,
    slope_lambda,
)
from .model import (
    DEFAULT_E0,
    DEFAULT_J,
    DEFAULT_MASS_RATIO,
    DEFAULT_V0,
    LatticeSpec,
    ProbeSpec,
    kappa_elastic,
)

PROVENANCES = ("exact", "bogoliubov", "sf-limit", "mi-limit", "largeL", "linear")

DEFAULT_THETA_POINTS = 181

# Probe energies at or above the band gap leave the single-band model;
# heatmap sweeps are clipped below this.
HEATMAP_E0_CAP = 6.0
HEATMAP_E0_POINTS = 41

# A slope value is flagged as near-divergent when the Bragg denominator
# 4 sin^2(kappa_el/2) drops below this.
SLOPE_FLAG_THRESHOLD = 0.1

_MAX_WORKERS = min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class ScanConfig:
    """Fully resolved parameters for one run (flags > config file > defaults)."""

    command: str
    L_values: tuple = (5,)
    n: float = 1.0
    N: int | None = None
    U_over_J: float = 0.0
    J: float = DEFAULT_J
    V0: float = DEFAULT_V0
    E0: float = DEFAULT_E0
    mass_ratio: float = DEFAULT_MASS_RATIO
    theta_values: tuple | None = None  # explicit angles; None -> uniform grid
    theta_points: int = DEFAULT_THETA_POINTS
    u_grid: tuple = (0.01, 0.1, 1.0, 5.0, 10.0, 20.0)
    provenance: tuple | None = None
    cache_dir: str | None = None
    out: str | None = None

    @property
    def L(self) -> int:
        return self.L_values[0]

    def particle_number(self) -> int:
        return self.N if self.N is not None else int(round(self.n * self.L))

    def filling(self) -> float:
        return self.particle_number() / self.L

    def lattice(self, U: float | None = None) -> LatticeSpec:
        return LatticeSpec(
            L=self.L,
            n=self.particle_number() / self.L,
            U=self.U_over_J * self.J if U is None else U,
            J=self.J,
            V0=self.V0,
        )

    def thetas(self) -> np.ndarray:
        if self.theta_values is not None:
            return np.asarray(self.theta_values, dtype=float)
        return np.linspace(0.0, np.pi / 2, self.theta_points)


@dataclass
class ScanTable:
    """Rectangular result table with a mandatory provenance column."""

    columns: list
    rows: list

    def __post_init__(self):
        if "provenance" not in self.columns:
            raise BadParameterError("scan table needs a provenance column")
        width = len(self.columns)
        pcol = self.columns.index("provenance")
        for row in self.rows:
            if len(row) != width:
                raise BadParameterError(
                    f"ragged row of width {len(row)}, expected {width}"
                )
            if row[pcol] not in PROVENANCES:
                raise BadParameterError(f"unknown provenance {row[pcol]!r}")

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


@dataclass
class RunManifest:
    """Everything needed to reproduce and audit one run."""

    command: str
    parameters: dict
    outputs: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    cache_hits: int = 0
    cache_misses: int = 0
    wall_time_s: float = 0.0
    version: str = __version__

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "outputs": self.outputs,
            "warnings": self.warnings,
            "metadata": self.metadata,
            "cache": {"hits": self.cache_hits, "misses": self.cache_misses},
            "wall_time_s": self.wall_time_s,
            "version": self.version,
        }


# ------------------------------------------------------------ spectrum cache

_CACHE_MAGIC = "LSCAT-SPEC"
_CACHE_VERSION = "v1"


def _cache_key(N: int, L: int, U_over_J: float, J: float) -> str:
    return f"N={N} L={L} U_over_J={U_over_J:.17g} J={J:.17g}"


def cache_path(cache_dir, lattice: LatticeSpec) -> Path:
    key = _cache_key(lattice.N, lattice.L, lattice.U / lattice.J, lattice.J)
    fname = "spec_" + key.replace(" ", "_").replace("=", "") + ".lspec"
    return Path(cache_dir) / fname


def save_spectrum(path, result: SpectrumResult, lattice: LatticeSpec) -> None:
    """Atomically write eigenvalues + density table behind a text header."""
    if result.density_elements is None:
        raise BadParameterError("refusing to cache a spectrum without density elements")
    path = Path(path)
    header = (
        f"{_CACHE_MAGIC} {_CACHE_VERSION} "
        f"{_cache_key(lattice.N, lattice.L, lattice.U / lattice.J, lattice.J)}\n"
    )
    payload = (
        result.eigenvalues.astype("<f8").tobytes()
        + result.density_elements.astype("<f8").tobytes()
    )
    _atomic_write_bytes(path, header.encode("ascii") + payload)


def load_spectrum(path, lattice: LatticeSpec) -> SpectrumResult:
    """Read a cached spectrum back, validating header and payload size."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise CacheError(f"cannot read spectrum cache {path}: {exc}") from exc
    nl = blob.find(b"\n")
    if nl < 0:
        raise CacheError(f"spectrum cache {path} has no header line")
    try:
        header = blob[:nl].decode("ascii")
    except UnicodeDecodeError as exc:
        raise CacheError(f"spectrum cache {path} header is not text") from exc
    parts = header.split()
    if len(parts) != 6 or parts[0] != _CACHE_MAGIC or parts[1] != _CACHE_VERSION:
        raise CacheError(f"spectrum cache {path} has bad magic/version: {header!r}")
    expected = _cache_key(lattice.N, lattice.L, lattice.U / lattice.J, lattice.J).split()
    if parts[2:] != expected:
        raise CacheError(
            f"spectrum cache {path} is keyed {parts[2:]}, expected {expected}"
        )
    dim = basis_dimension(lattice.N, lattice.L)
    body = blob[nl + 1 :]
    want = 8 * (dim + dim * lattice.L)
    if len(body) != want:
        raise CacheError(
            f"spectrum cache {path} payload is {len(body)} bytes, expected {want}"
        )
    values = np.frombuffer(body, dtype="<f8")
    eigenvalues = values[:dim].copy()
    table = values[dim:].reshape(dim, lattice.L).copy()
    return SpectrumResult(
        eigenvalues=eigenvalues,
        eigenvectors=None,
        ground_energy=float(eigenvalues[0]),
        ground_index=0,
        density_elements=table,
    )


def cache_spectrum(lattice: LatticeSpec, cache_dir, manifest: RunManifest | None = None):
    """Spectrum for a lattice, going through the on-disk cache.

    Corrupt cache entries are reported as warnings and transparently
    recomputed (and rewritten).  Returns the SpectrumResult.
    """
    if cache_dir is None:
        if manifest is not None:
            manifest.cache_misses += 1
        return diagonalize(lattice)
    os.makedirs(cache_dir, exist_ok=True)
    path = cache_path(cache_dir, lattice)
    if path.exists():
        try:
            result = load_spectrum(path, lattice)
            if manifest is not None:
                manifest.cache_hits += 1
            return result
        except CacheError as exc:
            if manifest is not None:
                manifest.warnings.append(f"recomputing spectrum: {exc}")
    result = diagonalize(lattice)
    save_spectrum(path, result, lattice)
    if manifest is not None:
        manifest.cache_misses += 1
    return result


# ------------------------------------------------------------------ writers


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, table: ScanTable, manifest_path) -> None:
    lines = [f"# manifest: {manifest_path}", ",".join(table.columns)]
    lines.extend(",".join(format_cell(v) for v in row) for row in table.rows)
    _atomic_write_bytes(Path(path), ("\n".join(lines) + "\n").encode("ascii"))


def write_manifest(path, manifest: RunManifest) -> None:
    body = json.dumps(manifest.as_dict(), indent=2, sort_keys=True) + "\n"
    _atomic_write_bytes(Path(path), body.encode("ascii"))


def output_paths(config: ScanConfig):
    out = config.out or f"{config.command}.csv"
    base = out[:-4] if out.endswith(".csv") else out
    return Path(base + ".csv"), Path(base + ".manifest.json")


# ------------------------------------------------------------------ runners


def _base_manifest(config: ScanConfig) -> RunManifest:
    params = {
        "L": list(config.L_values),
        "N": config.particle_number(),
        "n": config.n,
        "realized_n": config.filling(),
        "U_over_J": config.U_over_J,
        "J": config.J,
        "V0": config.V0,
        "E0": config.E0,
        "mass_ratio": config.mass_ratio,
        "theta_grid": [float(t) for t in config.thetas()],
        "u_grid": [float(u) for u in config.u_grid],
        "provenance": list(config.provenance or ()),
        "cache_dir": config.cache_dir,
        "normalization": "cross sections per particle, 1/(N a_s^2)",
    }
    return RunManifest(command=config.command, parameters=params)


def _require_provenance(config: ScanConfig, allowed, default, manifest: RunManifest):
    requested = config.provenance or default
    bad = [p for p in requested if p not in allowed]
    if bad:
        raise BadParameterError(
            f"{config.command} supports provenance {sorted(allowed)}, got {bad}"
        )
    manifest.parameters["provenance"] = list(requested)
    return tuple(requested)


def _guarded_spectrum(config: ScanConfig, lattice: LatticeSpec, manifest: RunManifest):
    dim = basis_dimension(lattice.N, lattice.L)
    if dim > BASIS_CAP:
        raise CapacityError(
            f"exact provenance needs basis dimension {dim} "
            f"(N={lattice.N}, L={lattice.L}) above the cap {BASIS_CAP}"
        )
    return cache_spectrum(lattice, config.cache_dir, manifest)


def run_theta_scan(config: ScanConfig):
    """Angle sweep of elastic/inelastic cross sections per provenance."""
    manifest = _base_manifest(config)
    kinds = _require_provenance(
        config,
        ("exact", "bogoliubov", "sf-limit", "mi-limit", "largeL", "linear"),
        ("bogoliubov",),
        manifest,
    )
    L, N = config.L, config.particle_number()
    n = config.filling()
    U = config.U_over_J * config.J
    u = U * n / config.J
    thetas = config.thetas()

    state = None
    if {"bogoliubov", "largeL"} & set(kinds):
        state = solve_depletion(config.lattice())
        manifest.metadata["depletion_fraction"] = state.depletion_fraction
    spectrum = None
    if "exact" in kinds:
        spectrum = _guarded_spectrum(config, config.lattice(), manifest)

    rows = []
    for theta in thetas:
        theta = float(theta)
        probe = ProbeSpec(E0=config.E0, theta=theta, mass_ratio=config.mass_ratio)
        shared_elastic = elastic_cs(L, N, config.E0, theta, config.V0, config.mass_ratio) / N
        for kind in kinds:
            if kind == "exact":
                cs = exact_cross_section(spectrum, config.lattice(), probe)
                rows.append([theta, kind, cs.elastic / N, cs.inelastic / N])
            elif kind == "bogoliubov":
                rows.append(
                    [theta, kind, shared_elastic, bog_inelastic_cs(state, probe, config.V0)]
                )
            elif kind == "sf-limit":
                rows.append(
                    [
                        theta,
                        kind,
                        shared_elastic,
                        sf_inelastic(L, config.E0, theta, config.V0, config.mass_ratio, config.J),
                    ]
                )
            elif kind == "mi-limit":
                rows.append(
                    [
                        theta,
                        kind,
                        shared_elastic,
                        mi_inelastic(L, n, config.E0, theta, config.V0, config.mass_ratio, U),
                    ]
                )
            elif kind == "largeL":
                rows.append([theta, kind, shared_elastic, largeL_bog_cs(state, probe, config.V0)])
            elif kind == "linear":
                sl = slope_lambda(L, config.E0, theta, config.V0, config.mass_ratio, config.J)
                rows.append([theta, kind, shared_elastic, sl.gamma_sf - sl.lambda_ * u])
    table = ScanTable(columns=["theta", "provenance", "elastic", "inelastic"], rows=rows)
    return table, manifest


def run_u_scan(config: ScanConfig):
    """Interaction sweep at fixed angle(s): decay of the inelastic signal."""
    manifest = _base_manifest(config)
    kinds = _require_provenance(
        config, ("exact", "bogoliubov", "linear"), ("exact", "bogoliubov", "linear"), manifest
    )
    n = config.filling()
    thetas = config.thetas() if config.theta_values is not None else np.array([np.pi / 4])
    manifest.parameters["theta_grid"] = [float(t) for t in thetas]

    slopes = {
        float(t): slope_lambda(config.L, config.E0, float(t), config.V0, config.mass_ratio, config.J)
        for t in thetas
    }

    rows = []
    for u in config.u_grid:
        u = float(u)
        U = u * config.J / n
        lattice = config.lattice(U=U)
        state = solve_depletion(lattice)
        spectrum = _guarded_spectrum(config, lattice, manifest) if "exact" in kinds else None
        for theta in thetas:
            theta = float(theta)
            probe = ProbeSpec(E0=config.E0, theta=theta, mass_ratio=config.mass_ratio)
            for kind in kinds:
                if kind == "exact":
                    cs = exact_cross_section(spectrum, lattice, probe)
                    value = cs.inelastic / lattice.N
                elif kind == "bogoliubov":
                    value = bog_inelastic_cs(state, probe, config.V0)
                else:
                    sl = slopes[theta]
                    value = sl.gamma_sf - sl.lambda_ * u
                rows.append([u, theta, kind, value, state.depletion_fraction])
    table = ScanTable(
        columns=["u", "theta", "provenance", "inelastic", "depletion"], rows=rows
    )
    return table, manifest


def run_heatmap(config: ScanConfig):
    """(E0, theta) map of the quasiparticle inelastic cross section."""
    manifest = _base_manifest(config)
    _require_provenance(config, ("bogoliubov",), ("bogoliubov",), manifest)
    top = config.E0
    if top >= HEATMAP_E0_CAP:
        manifest.warnings.append(
            f"E0 grid capped below {HEATMAP_E0_CAP} (band gap); requested top {top}"
        )
        top = HEATMAP_E0_CAP * (1 - 1e-9)
    e0_grid = np.linspace(0.2, top, HEATMAP_E0_POINTS)
    thetas = config.thetas()
    state = solve_depletion(config.lattice())
    manifest.metadata["depletion_fraction"] = state.depletion_fraction
    manifest.parameters["E0_grid"] = [float(e) for e in e0_grid]

    def one_row(e0: float):
        return [
            bog_inelastic_cs(
                state, ProbeSpec(E0=e0, theta=float(t), mass_ratio=config.mass_ratio), config.V0
            )
            for t in thetas
        ]

    with ThreadPoolExecutor(max_workers=_MAX_WORKERS) as pool:
        grids = list(pool.map(one_row, [float(e) for e in e0_grid]))
    rows = [
        [float(e0), float(t), "bogoliubov", grids[i][k]]
        for i, e0 in enumerate(e0_grid)
        for k, t in enumerate(thetas)
    ]
    table = ScanTable(columns=["E0", "theta", "provenance", "inelastic"], rows=rows)
    return table, manifest


def run_deviation_map(config: ScanConfig):
    """(n, U/J) map of the angle-averaged exact-vs-quasiparticle deviation."""
    manifest = _base_manifest(config)
    _require_provenance(config, ("bogoliubov",), ("bogoliubov",), manifest)
    L = config.L
    n_grid = [round(0.2 * k, 10) for k in range(1, int(config.n / 0.2 + 1e-9) + 1)]
    u_over_j_grid = [float(v) for v in config.u_grid]
    thetas = config.thetas()
    manifest.parameters["n_grid"] = n_grid
    manifest.metadata["deviation_floor"] = "1e-12 of grid maximum of the exact curve"

    def one_cell(cell):
        n, u_over_j = cell
        N = int(round(n * L))
        if N < 1:
            raise BadParameterError(f"cell n={n} realizes N=0 on L={L}")
        lattice = LatticeSpec(L=L, n=n, U=u_over_j * config.J, J=config.J, V0=config.V0)
        try:
            spectrum = _guarded_spectrum(config, lattice, manifest)
        except CapacityError as exc:
            raise CapacityError(f"deviation cell n={n}, U/J={u_over_j}: {exc}") from exc
        state = solve_depletion(lattice)

        def exact_fn(t):
            probe = ProbeSpec(E0=config.E0, theta=float(t), mass_ratio=config.mass_ratio)
            return exact_cross_section(spectrum, lattice, probe).inelastic / lattice.N

        def bog_fn(t):
            probe = ProbeSpec(E0=config.E0, theta=float(t), mass_ratio=config.mass_ratio)
            return bog_inelastic_cs(state, probe, config.V0)

        delta = deviation_delta_cs(exact_fn, bog_fn, thetas)
        return [n, u_over_j, "bogoliubov", delta, state.depletion_fraction]

    cells = [(n, u) for n in n_grid for u in u_over_j_grid]
    with ThreadPoolExecutor(max_workers=_MAX_WORKERS) as pool:
        rows = list(pool.map(one_cell, cells))
    table = ScanTable(
        columns=["n", "U_over_J", "provenance", "delta_cs", "depletion"], rows=rows
    )
    return table, manifest


def run_slope(config: ScanConfig):
    """Decay-slope curves Lambda(theta) per L, with the L -> infinity reference."""
    manifest = _base_manifest(config)
    _require_provenance(config, ("linear", "largeL"), ("linear", "largeL"), manifest)
    thetas = config.thetas()

    rows = []
    for theta in thetas:
        theta = float(theta)
        probe = ProbeSpec(E0=config.E0, theta=theta, mass_ratio=config.mass_ratio)
        kel = kappa_elastic(probe)
        flagged = 4 * math.sin(kel / 2) ** 2 < SLOPE_FLAG_THRESHOLD
        ref = None
        for L in config.L_values:
            sl = slope_lambda(L, config.E0, theta, config.V0, config.mass_ratio, config.J)
            ref = sl
            rows.append([theta, L, "linear", sl.lambda_, sl.gamma_sf, flagged])
        large_gamma = largeL_sf_inelastic(
            config.E0, theta, config.V0, config.mass_ratio, config.J
        )
        rows.append([theta, 0, "largeL", ref.large_l_slope, large_gamma, flagged])
    markers = {}
    for j in range(4):
        aset = exact_angles(config.L_values[-1], config.E0, config.mass_ratio, j)
        if aset.angles.size:
            markers[str(j)] = [float(a) for a in aset.angles]
    manifest.metadata["marker_angles"] = markers
    table = ScanTable(
        columns=["theta", "L", "provenance", "lambda", "gamma_sf", "flagged"], rows=rows
    )
    return table, manifest


def run_compare(config: ScanConfig):
    """Exact vs quasiparticle inelastic curves with per-angle deviation."""
    manifest = _base_manifest(config)
    _require_provenance(config, ("exact", "bogoliubov"), ("exact", "bogoliubov"), manifest)
    lattice = config.lattice()
    N = lattice.N
    spectrum = _guarded_spectrum(config, lattice, manifest)
    state = solve_depletion(lattice)
    manifest.metadata["depletion_fraction"] = state.depletion_fraction
    thetas = config.thetas()

    exact_by_theta, bog_by_theta, elastic_by_theta = {}, {}, {}
    for theta in map(float, thetas):
        probe = ProbeSpec(E0=config.E0, theta=theta, mass_ratio=config.mass_ratio)
        cs = exact_cross_section(spectrum, lattice, probe)
        exact_by_theta[theta] = cs.inelastic / N
        elastic_by_theta[theta] = cs.elastic / N
        bog_by_theta[theta] = bog_inelastic_cs(state, probe, config.V0)
    floor = 1e-12 * max(exact_by_theta.values(), default=0.0)

    rows = []
    for theta in map(float, thetas):
        ex, bog = exact_by_theta[theta], bog_by_theta[theta]
        dev = abs(bog - ex) / ex if floor > 0 and ex >= floor else float("nan")
        rows.append([theta, "exact", elastic_by_theta[theta], ex, 0.0])
        rows.append([theta, "bogoliubov", elastic_by_theta[theta], bog, dev])
    manifest.metadata["delta_cs"] = deviation_delta_cs(
        exact_by_theta.__getitem__, bog_by_theta.__getitem__, [float(t) for t in thetas]
    )
    table = ScanTable(
        columns=["theta", "provenance", "elastic", "inelastic", "deviation"], rows=rows
    )
    return table, manifest


def run_depletion(config: ScanConfig):
    """Condensate depletion versus interaction, with the quadratic law."""
    manifest = _base_manifest(config)
    _require_provenance(config, ("bogoliubov",), ("bogoliubov",), manifest)
    n = config.filling()
    rows = []
    for u in config.u_grid:
        u = float(u)
        lattice = config.lattice(U=u * config.J / n)
        state = solve_depletion(lattice)
        rows.append(
            [
                u,
                "bogoliubov",
                state.depletion_fraction,
                depletion_quadratic(lattice),
                state.healing_ok,
            ]
        )
    alpha = (config.L**4 + 10 * config.L**2 - 11) / (2880.0 * config.particle_number())
    manifest.metadata["alpha_quadratic"] = alpha
    table = ScanTable(
        columns=["u", "provenance", "depletion", "quadratic", "healing_ok"], rows=rows
    )
    return table, manifest


_RUNNERS = {
    "theta-scan": run_theta_scan,
    "u-scan": run_u_scan,
    "heatmap": run_heatmap,
    "deviation-map": run_deviation_map,
    "slope": run_slope,
    "compare": run_compare,
    "depletion": run_depletion,
}


def execute(config: ScanConfig):
    """Run one command and write its CSV + manifest pair.

    Returns (csv_path, manifest). The CSV is byte-deterministic for a given
    config; the manifest carries wall time and cache statistics.
    """
    if config.command not in _RUNNERS:
        raise BadParameterError(f"unknown command {config.command!r}")
    if config.command != "slope" and len(config.L_values) != 1:
        raise BadParameterError(
            f"{config.command} takes a single L, got {list(config.L_values)}"
        )
    start = time.perf_counter()
    table, manifest = _RUNNERS[config.command](config)
    manifest.wall_time_s = time.perf_counter() - start
    csv_path, manifest_path = output_paths(config)
    manifest.outputs = [str(csv_path)]
    write_csv(csv_path, table, manifest_path)
    write_manifest(manifest_path, manifest)
    return csv_path, manifest
