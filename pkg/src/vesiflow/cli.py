"""Command line front-end.

    vesiflow simulate <config>
    vesiflow verify <suite> [config]
    vesiflow snapshot-fields <file> --y <list> [--output DIR] [--config CFG]

Exit codes: 0 success, 2 configuration or input error, 3 the height left the
tubular neighbourhood, 4 a verification check failed.
"""

import argparse
import logging
import sys
from pathlib import Path


from . import __version__
from .bulk import field_table, parse_height
from .config import RunConfig, load_config
from .errors import AngleError, ConfigError, NoContraction, TubularViolation
from .evolution import DIAGNOSTIC_COLUMNS, simulate, step_count
from .io import SnapshotFormatError, read_snapshot, snapshot_name, write_csv, write_manifest, write_snapshot
from .params import MaterialParams
from .verify import REPORT_COLUMNS, SUITES, run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TUBULAR = 3
EXIT_VERIFY = 4

log = logging.getLogger("vesiflow")

DECISIONS = {
    "height_zero_mode": "frozen bit-exactly (volume gauge)",
    "pressure_gauge": "zero-mean pressure; xi = 0 pressure mode set to 0",
    "hydrodynamic_response": "normal-to-Dirichlet multiplier frozen at the flat reference with eta = 0",
    "bending_force": "fully nonlinear graph geometry, spectral derivatives, two-thirds dealiasing of products",
    "dissipation_column": "linearised surrogate sum M(xi) a(xi)^2 |hhat|^2 L^2, not the bulk integral",
    "area_column": "recorded only; no area projection",
    "step_control": "reject on tubular violation, halve dt, at most 8 halvings",
    "tail_fraction_warning": 0.1,
    "initial_amplitude_bound": "max|h0| < gamma/2",
}


def _params_dict(p: MaterialParams) -> dict:
    return {"mu_b": p.mu_b, "mu": p.mu, "kappa": p.kappa, "C0": p.C0, "eta": p.eta, "gamma": p.gamma,
            "alpha_scale": p.alpha_scale}


def cmd_simulate(config_path) -> int:
    try:
        cfg = load_config(config_path)
        h0 = cfg.initial_height()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows, snapshots = [], []

    def on_record(state, row):
        rows.append(row.as_tuple())
        snapshots.append(write_snapshot(out / snapshot_name(state.t), state.h).name)

    status, message = EXIT_OK, "completed"
    try:
        simulate(h0, cfg.params, cfg.integrator, cfg.dt, cfg.t_end, cfg.cadence, on_record=on_record,
                 **({"picard_tol": cfg.picard_tol, "picard_max_iter": cfg.picard_max_iter}
                    if cfg.integrator == "picard" else {}))
    except TubularViolation as exc:
        status, message = EXIT_TUBULAR, f"aborted: {exc}"
        print(f"tubular violation: {exc}", file=sys.stderr)
    except NoContraction as exc:
        status, message = EXIT_TUBULAR, f"aborted: {exc}"
        print(f"Picard iteration failed: {exc}", file=sys.stderr)
    write_csv(out / "diagnostics.csv", DIAGNOSTIC_COLUMNS, rows)
    write_manifest(out / "run_manifest.json", {
        "vesiflow_version": __version__,
        "config": cfg.raw,
        "resolved": {
            "n": cfg.n, "length": cfg.length, "params": _params_dict(cfg.params),
            "integrator": cfg.integrator, "dt": cfg.dt, "t_end": cfg.t_end, "cadence": cfg.cadence,
            "n_steps": step_count(cfg.dt, cfg.t_end),
        },
        "decisions": DECISIONS,
        "snapshot_format": "32-byte header (magic, int64 version, int64 N, float64 L), row-major float64 values",
        "snapshots": snapshots,
        "status": message,
    })
    return status


def cmd_verify(suite: str, config_path=None) -> int:
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(config_path) if config_path else RunConfig()
        rows = run_suite(suite, cfg)
    except (ConfigError, AngleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.verify.output)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "report.csv", REPORT_COLUMNS, [r.as_tuple() for r in rows])
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL {r.case} {r.quantity}: computed {r.computed:.6g}, reference {r.reference:.6g}, "
              f"rel error {r.rel_error:.3g} (tol {r.tolerance:.3g})", file=sys.stderr)
    print(f"{suite}: {len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _snapshot_params(snapshot: Path, config_path) -> MaterialParams:
    if config_path:
        return load_config(config_path).params
    manifest = snapshot.parent / "run_manifest.json"
    if manifest.exists():
        import json

        try:
            p = json.loads(manifest.read_text())["resolved"]["params"]
            return MaterialParams(**p)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"unreadable run manifest {manifest}: {exc}") from exc
    return MaterialParams()


def cmd_snapshot_fields(snapshot, y_list: str, output=None, config_path=None) -> int:
    snapshot = Path(snapshot)
    try:
        h = read_snapshot(snapshot)
        params = _snapshot_params(snapshot, config_path)
        tokens = [t for t in y_list.split(",") if t.strip()]
        if not tokens:
            raise ConfigError("--y needs at least one height")
        heights = [(t.strip(), parse_height(t)) for t in tokens]
    except (OSError, SnapshotFormatError, ConfigError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(output) if output else snapshot.parent
    out.mkdir(parents=True, exist_ok=True)
    for label, y in heights:
        table = field_table(h, y, params)
        write_csv(out / f"fields_{label}.csv", ("x1", "x2", "v1", "v2", "w", "pi"), [tuple(r) for r in table])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vesiflow", description="Relaxational membrane flow simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log step control and warnings")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="run a simulation from a config file")
    p.add_argument("config")
    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help="|".join(SUITES))
    p.add_argument("config", nargs="?")
    p = sub.add_parser("snapshot-fields", help="bulk fields of a height snapshot at given heights")
    p.add_argument("file")
    p.add_argument("--y", required=True, help="comma separated heights; 0+ and 0- select one-sided traces")
    p.add_argument("--output", help="output directory (default: the snapshot's directory)")
    p.add_argument("--config", help="config providing material parameters")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "simulate":
        return cmd_simulate(args.config)
    if args.command == "verify":
        return cmd_verify(args.suite, args.config)
    return cmd_snapshot_fields(args.file, args.y, args.output, args.config)


if __name__ == "__main__":
    sys.exit(main())
