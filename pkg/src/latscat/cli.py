"""Command-line front end for lattice scattering scans.

Every subcommand shares one flag set; values are resolved with the
precedence flags > config file > built-in defaults and handed to the
runner as a frozen ScanConfig.  Exit codes: 0 success, 2 bad parameters,
3 basis-capacity refusal, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    BadParameterError,
    CacheError,
    CapacityError,
    NumericalError,
)
from .scans import PROVENANCES, ScanConfig, execute

_COMMANDS = (
    "theta-scan",
    "u-scan",
    "heatmap",
    "depletion",
    "deviation-map",
    "slope",
    "compare",
)

_COMMAND_HELP = {
    "theta-scan": "angle sweep of elastic/inelastic cross sections",
    "u-scan": "interaction sweep of the inelastic cross section at fixed angle",
    "heatmap": "(E0, theta) map of the quasiparticle inelastic cross section",
    "depletion": "condensate depletion vs interaction with the quadratic law",
    "deviation-map": "(n, U/J) map of the angle-averaged exact-vs-quasiparticle deviation",
    "slope": "linear decay slope Lambda(theta) per L with the large-L reference",
    "compare": "exact vs quasiparticle curves with per-angle deviation",
}

# config-file / flag keys that resolve_config understands
_KEYS = (
    "L",
    "N",
    "n",
    "U_over_J",
    "J",
    "V0",
    "E0",
    "mass_ratio",
    "theta_grid",
    "u_grid",
    "provenance",
    "cache_dir",
    "out",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latscat",
        description="Matter-wave scattering cross sections off lattice bosons.",
    )
    parser.add_argument("--version", action="version", version=f"latscat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=_COMMAND_HELP[name])
        p.add_argument("--L", help="lattice sites (slope accepts a comma list)")
        p.add_argument("--N", help="particle number (overrides --n)")
        p.add_argument("--n", help="filling; N = round(n*L)")
        p.add_argument("--U-over-J", dest="U_over_J", help="on-site repulsion over hopping")
        p.add_argument("--J", help="hopping in recoil units")
        p.add_argument("--V0", help="lattice depth in recoil units")
        p.add_argument("--E0", help="probe kinetic energy in recoil units")
        p.add_argument("--mass-ratio", dest="mass_ratio", help="probe/boson mass ratio")
        p.add_argument(
            "--theta-grid",
            dest="theta_grid",
            help="angle count on [0, pi/2], or comma-separated angles in radians",
        )
        p.add_argument(
            "--u-grid",
            dest="u_grid",
            help="interaction grid: lo:hi:count or comma-separated values",
        )
        p.add_argument(
            "--provenance", help=f"comma list from {{{', '.join(PROVENANCES)}}}"
        )
        p.add_argument("--cache-dir", dest="cache_dir", help="spectrum cache directory")
        p.add_argument("--out", help="output CSV path (manifest goes next to it)")
        p.add_argument("--config", help="key=value defaults file")
    return parser


def read_config_file(path) -> dict:
    """Parse a key=value file; '#' starts a comment, blank lines are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadParameterError(f"cannot read config file {path}: {exc}") from exc
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadParameterError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _KEYS:
            raise BadParameterError(f"{path}:{lineno}: unknown key {key!r}")
        table[key] = value.strip()
    return table


def _parse_int(name, text) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise BadParameterError(f"--{name} must be an integer, got {text!r}") from exc


def _parse_float(name, text) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise BadParameterError(f"--{name} must be a number, got {text!r}") from exc


def _parse_L(text) -> tuple:
    values = tuple(_parse_int("L", piece) for piece in text.split(","))
    for L in values:
        if L < 2:
            raise BadParameterError(f"--L must be at least 2, got {L}")
    return values


def _parse_theta_grid(text):
    """Integer -> uniform point count; comma floats -> explicit angles."""
    try:
        count = int(text)
    except ValueError:
        angles = tuple(_parse_float("theta-grid", piece) for piece in text.split(","))
        return None, angles
    if count < 2:
        raise BadParameterError(f"--theta-grid needs at least 2 points, got {count}")
    return count, None


def _parse_u_grid(text) -> tuple:
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise BadParameterError(f"--u-grid range must be lo:hi:count, got {text!r}")
        lo = _parse_float("u-grid", pieces[0])
        hi = _parse_float("u-grid", pieces[1])
        count = _parse_int("u-grid", pieces[2])
        if count < 1:
            raise BadParameterError(f"--u-grid count must be positive, got {count}")
        return tuple(float(v) for v in np.linspace(lo, hi, count))
    values = tuple(_parse_float("u-grid", piece) for piece in text.split(","))
    if not values:
        raise BadParameterError("--u-grid is empty")
    return values


def _parse_provenance(text) -> tuple:
    values = tuple(piece.strip() for piece in text.split(","))
    for p in values:
        if p not in PROVENANCES:
            raise BadParameterError(
                f"unknown provenance {p!r}; choose from {', '.join(PROVENANCES)}"
            )
    return values


def resolve_config(args) -> ScanConfig:
    """Merge flags over config-file values and build the run configuration."""
    raw = {}
    if args.config:
        raw.update(read_config_file(args.config))
    for key in _KEYS:
        flag = getattr(args, key)
        if flag is not None:
            raw[key] = flag

    fields = {"command": args.command}
    if "L" in raw:
        fields["L_values"] = _parse_L(raw["L"])
    L = fields.get("L_values", (5,))[0]
    if "N" in raw:
        fields["N"] = _parse_int("N", raw["N"])
        if fields["N"] < 1:
            raise BadParameterError(f"--N must be positive, got {fields['N']}")
        fields["n"] = fields["N"] / L
    if "n" in raw:
        n = _parse_float("n", raw["n"])
        if n <= 0:
            raise BadParameterError(f"--n must be positive, got {n}")
        fields["n"] = n
        if "N" in raw and int(round(n * L)) != fields["N"]:
            raise BadParameterError(
                f"--N {fields['N']} and --n {n} disagree on L={L} "
                f"(round(n*L) = {int(round(n * L))})"
            )
    for key, caster in (
        ("U_over_J", _parse_float),
        ("J", _parse_float),
        ("V0", _parse_float),
        ("E0", _parse_float),
        ("mass_ratio", _parse_float),
    ):
        if key in raw:
            fields[key] = caster(key.replace("_", "-"), raw[key])
    if "U_over_J" in fields and fields["U_over_J"] < 0:
        raise BadParameterError(f"--U-over-J must be nonnegative, got {fields['U_over_J']}")
    if "theta_grid" in raw:
        count, angles = _parse_theta_grid(raw["theta_grid"])
        if angles is not None:
            fields["theta_values"] = angles
        else:
            fields["theta_points"] = count
    if "u_grid" in raw:
        fields["u_grid"] = _parse_u_grid(raw["u_grid"])
    if "provenance" in raw:
        fields["provenance"] = _parse_provenance(raw["provenance"])
    if "cache_dir" in raw:
        fields["cache_dir"] = raw["cache_dir"]
    if "out" in raw:
        fields["out"] = raw["out"]
    return ScanConfig(**fields)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        csv_path, manifest = execute(config)
    except BadParameterError as exc:
        print(f"latscat: error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"latscat: capacity: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, CacheError) as exc:
        print(f"latscat: numerical failure: {exc}", file=sys.stderr)
        return 4
    for warning in manifest.warnings:
        print(f"latscat: warning: {warning}", file=sys.stderr)
    print(csv_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
