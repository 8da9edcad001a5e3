"""Command-line entry point: ``uavnet {validate,geometry,schedule,sweep}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import DEFAULT_D_STAR, SeparationParams, check_network_geometry
from .network import NetworkError, bundled_path, load_network
from .scheduler import (ScheduleBook, Scheduler, plans_to_csv, read_requests, timelines_json,
                        verify_conflict_free)
from .simulator import SimConfig, run_experiment

CONFIG_SCHEMA_VERSION = 1
BUNDLED = {"unet": "unet42.json", "snet1": "snet1.json"}

SWEEP_DEFAULTS = {
    "network": "unet",
    "p_a": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "t_min": [5.0, 2.0],
    "trials": 7,
    "n_uav": 1000,
    "seed": 0,
    "V": 4.0,
    "T_delta": 1.0,
    "d_star": DEFAULT_D_STAR,
    "jobs": 1,
    "per_uav_csv": True,
}


def _network_file(name: str) -> Path:
    return bundled_path(BUNDLED[name]) if name in BUNDLED else Path(name)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(out_dir: Path, command: str, config: dict, network_path: Path, seeds,
                    started: str):
    manifest = {
        "command": command,
        "config": config,
        "network_file": str(network_path),
        "network_sha256": _digest(network_path),
        "seeds": seeds,
        "versions": {"uavnet": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "started": started,
        "finished": _now(),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


def _params(args) -> SeparationParams:
    return SeparationParams(args.d_sep, args.phi_star, args.v)


def _geometry_reports(args):
    path = _network_file(args.network)
    net = load_network(path)
    return net, check_network_geometry(net, _params(args), args.d_star)


def cmd_validate(args) -> int:
    try:
        net, reports = _geometry_reports(args)
    except (OSError, NetworkError) as exc:
        print(f"FAIL: {exc}")
        return 1
    bad = [r for r in reports if not r.ok]
    print(f"network: {len(net.nodes)} nodes, {len(net.edges)} edges, "
          f"{len(net.snets)} sNets, {len(net.terminals)} terminals")
    for r in bad:
        print(f"FAIL {r.message}")
    print("PASS" if not bad else f"FAIL: {len(bad)} node(s) violate the geometry")
    return 0 if not bad else 1


def cmd_geometry(args) -> int:
    try:
        _, reports = _geometry_reports(args)
    except (OSError, NetworkError) as exc:
        print(f"FAIL: {exc}")
        return 1
    need = math.sqrt(2) * args.d_sep
    print(f"{'node':>5} {'d_star':>7} {'|A_N|':>5} {'min_spacing':>11} {'levels':>6}  result "
          f"(need >= {need:.3f})")
    for r in reports:
        status = "pass" if r.ok else f"FAIL {r.message}"
        print(f"{r.node:>5} {r.d_star:>7.2f} {r.n_points:>5} {r.min_spacing:>11.3f} "
              f"{r.n_levels:>6}  {status}")
    return 0 if all(r.ok for r in reports) else 1


def cmd_schedule(args) -> int:
    started = _now()
    path = _network_file(args.network)
    try:
        net = load_network(path)
        requests = read_requests(Path(args.requests).read_text())
    except (OSError, NetworkError, ValueError) as exc:
        print(f"FAIL: {exc}")
        return 1
    book = ScheduleBook(args.t_min)
    sched = Scheduler(net, book, args.v, args.d_star)
    terminals = set(net.terminals)
    plans = []
    for req in requests:
        for end in (req.L_i, req.L_f):
            if end not in terminals:
                print(f"FAIL: request {req.k}: {end} is not a terminal")
                return 1
        try:
            plans.append(sched.schedule(req))
        except NetworkError as exc:
            print(f"FAIL: request {req.k}: {exc}")
            return 1
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "plans.csv").write_text(plans_to_csv(plans))
    (out / "timelines.json").write_text(timelines_json(book))
    ok, violations = verify_conflict_free(book)
    config = {"requests": str(args.requests), "t_min": args.t_min, "V": args.v,
              "d_star": args.d_star}
    _write_manifest(out, "schedule", config, path, [], started)
    delays = [p.delay for p in plans]
    print(f"scheduled {len(plans)} UAVs; max delay {max(delays, default=0):.3f} s; "
          f"{'conflict-free' if ok else f'{len(violations)} violations'}")
    return 0 if ok else 1


def _load_config(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    version = doc.pop("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ValueError(f"unsupported config schema_version {version!r}")
    unknown = set(doc) - set(SWEEP_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    return doc


def sweep_settings(args) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    settings = dict(SWEEP_DEFAULTS)
    if args.config:
        settings.update(_load_config(args.config))
    flags = {"network": args.network, "p_a": args.p_a, "t_min": args.t_min,
             "trials": args.trials, "n_uav": args.n_uav, "seed": args.seed, "jobs": args.jobs}
    settings.update({k: v for k, v in flags.items() if v is not None})
    for key in ("p_a", "t_min"):
        v = settings[key]
        settings[key] = [float(x) for x in (v if isinstance(v, list) else [v])]
    return settings


def cmd_sweep(args) -> int:
    started = _now()
    try:
        s = sweep_settings(args)
        path = _network_file(s["network"])
        load_network(path)
        config = SimConfig(T_delta=s["T_delta"], V=s["V"], n_uav=int(s["n_uav"]),
                           trials=int(s["trials"]), seed=int(s["seed"]),
                           network=str(path), d_star=s["d_star"], T_min=s["t_min"][0])
    except (OSError, NetworkError, ValueError, TypeError) as exc:
        print(f"FAIL: {exc}")
        return 1
    report = run_experiment(config, s["p_a"], s["t_min"], jobs=int(s["jobs"]))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.csv").write_text(report.trials_csv())
    (out / "summary.csv").write_text(report.summary_csv())
    if s["per_uav_csv"]:
        uav_dir = out / "uav"
        uav_dir.mkdir(exist_ok=True)
        for r in report.results:
            name = f"uav_tmin{r.T_min:g}_pa{r.p_a:g}_trial{r.trial}.csv"
            (uav_dir / name).write_text(r.uav_csv())
    seeds = [[config.seed, j] for j in range(config.trials)]
    _write_manifest(out, "sweep", s, path, seeds, started)
    print(report.summary_csv(), end="")
    return 0


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavnet", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def geometry_flags(p):
        p.add_argument("--network", default="unet",
                       help="network file, or a bundled name: unet, snet1")
        p.add_argument("--d-sep", type=float, default=20.0 * math.cos(3 * math.pi / 10),
                       help="minimum separation in m (default gives d_min = 20 m)")
        p.add_argument("--phi-star", type=float, default=3 * math.pi / 5,
                       help="maximum turn angle in radians")
        p.add_argument("--v", type=float, default=4.0, help="cruise speed in m/s")
        p.add_argument("--d-star", type=float, default=DEFAULT_D_STAR,
                       help="boundary circle radius in m")

    p = sub.add_parser("validate", help="load a network and check every node's geometry")
    geometry_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("geometry", help="per-node de-confliction geometry report")
    geometry_flags(p)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("schedule", help="FCFS-schedule a request file")
    p.add_argument("--network", default="unet")
    p.add_argument("--requests", required=True, help="CSV with columns k,L_i,L_f,ETA")
    p.add_argument("--t-min", type=float, default=5.0)
    p.add_argument("--v", type=float, default=4.0)
    p.add_argument("--d-star", type=float, default=DEFAULT_D_STAR)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("sweep", help="Monte Carlo delay sweep over p_a and T_min")
    p.add_argument("--config", help="JSON config; flags override it")
    p.add_argument("--network")
    p.add_argument("--p-a", type=_floats, help="comma list of arrival probabilities")
    p.add_argument("--t-min", type=_floats, help="comma list of T_min values in s")
    p.add_argument("--trials", type=int)
    p.add_argument("--n-uav", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for trials")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
