"""Command-line front end: one subcommand per experiment.

Every command reads a TOML config (or its built-in paper-calibrated preset),
runs with a fixed seed, and writes plot-ready CSV/JSON into --out.  Identical
config and seed give byte-identical outputs at any --workers level.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import (ConfigError, RunConfig, default_config, ideal_override,
                     load_config, serialize_config)
from .grover import GroverRun, box_cluster, protocol_rate, run_grover
from .modes import Arm
from .scans import ScanResult, he_scan, hom_scan, path_scan
from .source import BRANCH_LA_RB, BRANCH_RA_LB, emit_cluster
from .tomography import (bell_state, concurrence, fidelity, monte_carlo_errors,
                         reconstruct, simulate_counts, sixteen_settings)
from .witness import TABLE1, measure_witness, witness

COMMANDS = ("hom", "hescan", "pathscan", "tomo", "witness", "grover")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _scan_csv(path: Path, result: ScanResult) -> None:
    lines = ["delta_x_um,phi,theta,counts,accidentals,normalized"]
    for r in result.records:
        s = r.setting
        lines.append(",".join([repr(float(s.delta_x_um)), repr(float(s.phi)),
                               repr(float(s.theta)), repr(float(r.raw_counts)),
                               repr(float(r.accidentals)), repr(float(r.normalized))]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _scan_summary(result: ScanResult) -> dict:
    out = {
        "label": result.label,
        "kind": result.kind,
        "visibility": result.visibility,
        "visibility_err": result.visibility_err,
        "fit": {
            "baseline": result.fit.baseline,
            "extremum": result.fit.extremum,
            "center_um": result.fit.center_um,
            "width_um": result.fit.width_um,
        },
        "efficiency_asymmetric": any(r.efficiency_asymmetric for r in result.records),
    }
    if result.visibility_net is not None:
        out["visibility_net"] = result.visibility_net
    return out


def cmd_hom(cfg: RunConfig, out: Path, seed: int, workers: int | None,
            exact: bool = False) -> dict:
    delays = cfg.scan.delays()
    summary = {}
    for k, (arm, o0, acc) in enumerate((
        (Arm.A, cfg.hom.overlap_at_zero_a, cfg.hom.accidental_rate_a_hz),
        (Arm.B, cfg.hom.overlap_at_zero_b, cfg.hom.accidental_rate_b_hz),
    )):
        src = replace(cfg.source,
                      wavepacket=replace(cfg.source.wavepacket, overlap_at_zero=o0),
                      accidental_rate_hz=acc)
        res = hom_scan(src, arm, delays, cfg.hom.shots, seed=seed + k,
                       sample=not exact, max_workers=workers)
        _scan_csv(out / f"hom_bs_{arm.name.lower()}.csv", res)
        summary[f"bs_{arm.name.lower()}"] = _scan_summary(res)
    _write_json(out / "hom.json", {"seed": seed, "shots": cfg.hom.shots,
                                   "scans": summary})
    return summary


def cmd_hescan(cfg: RunConfig, out: Path, seed: int, workers: int | None,
               exact: bool = False) -> dict:
    results = he_scan(cfg.source, cfg.scan.delays(), cfg.hescan.shots, seed=seed,
                      sample=not exact, v_path_dip=cfg.hescan.v_path_dip,
                      v_path_peak=cfg.hescan.v_path_peak, max_workers=workers)
    summary = {}
    for (phi, theta), res in results.items():
        key = f"phi{round(phi / math.pi)}pi_theta{round(theta / math.pi)}pi"
        _scan_csv(out / f"hescan_{key}.csv", res)
        summary[key] = _scan_summary(res)
    _write_json(out / "hescan.json", {"seed": seed, "shots": cfg.hescan.shots,
                                      "scans": summary})
    return summary


def cmd_pathscan(cfg: RunConfig, out: Path, seed: int, workers: int | None,
                 exact: bool = False) -> dict:
    summary = {}
    for k, (phi, v, name) in enumerate(((0.0, cfg.pathscan.v_path_dip, "dip"),
                                        (math.pi, cfg.pathscan.v_path_peak, "peak"))):
        src = replace(cfg.source, v_path=v)
        res = path_scan(src, phi, cfg.scan.delays(), cfg.pathscan.shots,
                        seed=seed + k, sample=not exact, max_workers=workers)
        _scan_csv(out / f"pathscan_{name}.csv", res)
        summary[name] = _scan_summary(res)
    _write_json(out / "pathscan.json", {"seed": seed, "shots": cfg.pathscan.shots,
                                        "scans": summary})
    return summary


_BRANCHES = {"ra_lb": (BRANCH_RA_LB, "phi_plus"), "la_rb": (BRANCH_LA_RB, "phi_minus")}


def cmd_tomo(cfg: RunConfig, out: Path, seed: int, workers=None,
             exact: bool = False) -> dict:
    state = emit_cluster(cfg.source)
    summary = {}
    for k, (name, (branch, target_kind)) in enumerate(_BRANCHES.items()):
        settings = sixteen_settings(branch)
        records = simulate_counts(state, settings, cfg.tomo.shots_per_setting,
                                  seed=seed + k, sample=not exact)
        lines = ["projector_a,projector_b,branch,shots,counts"]
        for r in records:
            lines.append(",".join([r.setting.projector_a, r.setting.projector_b,
                                   name, str(r.shots), repr(float(r.counts))]))
        (out / f"tomo_counts_{name}.csv").write_text("\n".join(lines) + "\n",
                                                     encoding="utf-8")
        rho = reconstruct(records)
        target = bell_state(target_kind)
        entry = {
            "branch": name,
            "target": target_kind,
            "fidelity": fidelity(rho, target),
            "concurrence": concurrence(rho),
            "rho_real": [[float(x) for x in row] for row in rho.elements.real],
            "rho_imag": [[float(x) for x in row] for row in rho.elements.imag],
            "converged": rho.converged,
            "iterations": rho.iterations,
        }
        if cfg.tomo.monte_carlo:
            mc = monte_carlo_errors(records, target, cfg.tomo.n_resamples,
                                    seed=seed + 100 + k)
            entry["fidelity_sigma"] = mc.fidelity_sigma
            entry["concurrence_sigma"] = mc.concurrence_sigma
        summary[name] = entry
    _write_json(out / "tomo.json", {"seed": seed,
                                    "shots_per_setting": cfg.tomo.shots_per_setting,
                                    "branches": summary})
    return summary


def cmd_witness(cfg: RunConfig, out: Path, seed: int, workers=None,
                exact: bool = False, table1: bool = False,
                expectations_path: str | None = None) -> dict:
    if table1:
        report = witness(TABLE1)
        source = "table1"
    elif expectations_path:
        raw = json.loads(Path(expectations_path).read_text(encoding="utf-8"))
        report = witness({k: (float(v[0]), float(v[1])) for k, v in raw.items()})
        source = expectations_path
    else:
        state = emit_cluster(cfg.source)
        report = measure_witness(state, cfg.witness.shots, seed=seed,
                                 sample=not exact)
        source = "simulation"
    payload = {
        "source": source,
        "seed": seed,
        "expectations": {k: {"value": v, "sigma": s}
                         for k, (v, s) in report.expectations.items()},
        "W": report.w,
        "W_sigma": report.w_sigma,
        "fidelity_bound": report.fidelity_bound,
        "bound_sigma": report.bound_sigma,
    }
    _write_json(out / "witness.json", payload)
    return payload


def cmd_grover(cfg: RunConfig, out: Path, seed: int, workers=None,
               exact: bool = False) -> dict:
    state = box_cluster(emit_cluster(cfg.source))
    runs = {}
    for mode in cfg.grover.modes():
        per_tag = {}
        rates = []
        for tag in ((0, 0), (0, 1), (1, 0), (1, 1)):
            run = GroverRun(tag=tag, mode=mode, shots=cfg.grover.shots,
                            seed=seed + (0 if mode == "postselect" else 16))
            res = run_grover(state, run, sample=not exact)
            total = sum(res.histogram)
            per_tag[f"{tag[0]}{tag[1]}"] = {
                "item_probabilities": [h / total for h in res.histogram],
                "success_rate": res.success_rate,
                "success_sigma": res.success_sigma,
                "retained_fraction": res.retained_fraction,
                "protocol_rate_hz": protocol_rate(res, cfg.source.brightness_pairs_hz,
                                                  cfg.source.efficiencies),
            }
            rates.append(res.success_rate)
        per_tag["average_success"] = sum(rates) / len(rates)
        runs[mode] = per_tag
    payload = {"seed": seed, "shots": cfg.grover.shots, "modes": runs}
    _write_json(out / "grover.json", payload)
    return payload


_RUNNERS = {"hom": cmd_hom, "hescan": cmd_hescan, "pathscan": cmd_pathscan,
            "tomo": cmd_tomo, "witness": cmd_witness, "grover": cmd_grover}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathpol",
        description="Two-photon path-polarization chip experiments (simulated).")
    sub = parser.add_subparsers(dest="command", required=True)

    show = sub.add_parser("show-config", help="print the preset config for a command")
    show.add_argument("target", choices=COMMANDS)

    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="TOML config file (default: built-in preset)")
        p.add_argument("--seed", type=int, help="64-bit RNG seed override")
        p.add_argument("--out", default="pathpol_out", help="output directory")
        p.add_argument("--ideal", action="store_true", help="zero-noise override")
        p.add_argument("--exact", action="store_true",
                       help="expectation values instead of Poisson sampling")
        p.add_argument("--shots", type=int, help="override the shots setting")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel record evaluation (results identical)")
        if name == "witness":
            p.add_argument("--table1", action="store_true",
                           help="evaluate W from the published Table-1 values")
            p.add_argument("--expectations",
                           help="JSON file of {name: [value, sigma]} to combine")
    return parser


def _override_shots(cfg: RunConfig, command: str, shots: int) -> RunConfig:
    if shots <= 0:
        raise ConfigError("--shots must be positive")
    block = {"hom": "hom", "hescan": "hescan", "pathscan": "pathscan",
             "witness": "witness", "grover": "grover"}.get(command)
    if command == "tomo":
        return replace(cfg, tomo=replace(cfg.tomo, shots_per_setting=shots))
    return replace(cfg, **{block: replace(getattr(cfg, block), shots=shots)})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "show-config":
        sys.stdout.write(serialize_config(default_config(args.target)))
        return 0
    try:
        cfg = load_config(args.config) if args.config else default_config(args.command)
        if args.ideal:
            cfg = ideal_override(cfg)
        if args.shots is not None:
            cfg = _override_shots(cfg, args.command, args.shots)
        seed = args.seed if args.seed is not None else cfg.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        kwargs = {"exact": args.exact}
        if args.command == "witness":
            kwargs.update(table1=args.table1, expectations_path=args.expectations)
        result = _RUNNERS[args.command](cfg, out, seed, args.workers, **kwargs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_headline(args.command, result)
    return 0


def _print_headline(command: str, result: dict) -> None:
    if command in ("hom", "hescan", "pathscan"):
        for name, entry in result.items():
            print(f"{command} {name}: {entry['kind']} visibility "
                  f"{entry['visibility']:.4f} +- {entry['visibility_err']:.4f}")
    elif command == "tomo":
        for name, entry in result.items():
            print(f"tomo {name}: F({entry['target']}) = {entry['fidelity']:.4f}, "
                  f"C = {entry['concurrence']:.4f}")
    elif command == "witness":
        print(f"witness [{result['source']}]: W = {result['W']:.4f} "
              f"+- {result['W_sigma']:.4f}, F >= {result['fidelity_bound']:.4f}")
    elif command == "grover":
        for mode, per_tag in result["modes"].items():
            print(f"grover {mode}: average success {per_tag['average_success']:.4f}")


if __name__ == "__main__":
    sys.exit(main())
