"""Command-line driver.

    relaybeam sinr-vs-snr --config run.yaml --seed 3 --out results/
    relaybeam ber-vs-snr --mode estimated:16 --algorithms none,rgsrs --threads 4
    relaybeam trace --seed 5

Config files are flat YAML (or JSON) mappings using the keys written to
``manifest.json``; a previous manifest can be passed back as ``--config``.
Exit status: 0 on success, 1 for invalid configuration, 2 for runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np
import yaml

from . import rng as rngmod
from .beamformer import CovarianceModel
from .channel import ConfigError, NetworkConfig, draw_channels, source_powers
from .simulator import ALGORITHMS, ExperimentCurve, ExperimentSpec, spec_to_dict
from .simulator import run_experiment as simulate
from .selection import rgsrs

DEFAULT_GRIDS = {
    "sinr_vs_snr": [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0],
    "sinr_vs_m": [3, 4, 5, 6, 7, 8, 9, 10],
    "ber_vs_snr": [0.0, 5.0, 10.0, 15.0, 20.0],
}
SPEC_KEYS = {"kind", "x_grid", "algorithms", "trials", "bits", "mode", "relay_noise",
             "master_seed", "n_select", "n_coh"}
INT_KEYS = {"K", "M", "M_min", "trials", "bits", "master_seed", "n_select", "n_coh"}


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunManifest:
    spec: dict
    master_seed: int
    solver_calls: dict
    duration_s: float
    version: str

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "master_seed": self.master_seed,
            "solver_calls": self.solver_calls,
            "duration_s": self.duration_s,
            "version": self.version,
        }


def _load_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a key/value mapping")
    # a run manifest nests the reproducible settings under "spec"
    if "spec" in data and isinstance(data["spec"], dict):
        data = data["spec"]
    return data


def _as_list(value):
    if isinstance(value, str):
        return [v for v in value.replace(",", " ").split() if v]
    return list(value)


def parse_config(path=None, overrides: dict | None = None) -> ExperimentSpec:
    """Merge defaults, a config file and flag overrides into a spec."""
    raw = _load_file(path) if path else {}
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})

    net_keys = set(NetworkConfig.keys())
    unknown = set(raw) - net_keys - SPEC_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown key (accepted: {sorted(net_keys | SPEC_KEYS)})")

    kind = raw.get("kind")
    if kind is None:
        raise ConfigError("kind", "experiment kind is required")
    kind = str(kind).replace("-", "_")

    def typed(key, value):
        try:
            if key in INT_KEYS:
                if float(value) != int(float(value)):
                    raise ValueError
                return int(float(value))
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {value!r}") from None

    net = {k: typed(k, raw[k]) for k in net_keys if k in raw}
    base = NetworkConfig(**net)
    grid = raw.get("x_grid", DEFAULT_GRIDS.get(kind, []))
    grid = [typed("x_grid", x) for x in _as_list(grid)]
    if kind == "sinr_vs_m":
        grid = [int(x) for x in grid]
    try:
        model = CovarianceModel.parse(raw.get("mode", "exact"), str(raw.get("relay_noise", "independent")))
    except ValueError as exc:
        raise ConfigError("mode", str(exc)) from None
    algorithms = _as_list(raw.get("algorithms", list(ALGORITHMS)))
    return ExperimentSpec(
        kind=kind,
        base=base,
        x_grid=tuple(grid),
        algorithms=tuple(str(a) for a in algorithms),
        trials=typed("trials", raw.get("trials", 500)),
        bits=typed("bits", raw.get("bits", 100_000)),
        model=model,
        master_seed=typed("master_seed", raw.get("master_seed", 0)),
        n_select=typed("n_select", raw.get("n_select", 3)),
        n_coh=typed("n_coh", raw.get("n_coh", 100)),
    )


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> tuple[ExperimentCurve, RunManifest]:
    start = time.perf_counter()
    curve = simulate(spec, workers)
    manifest = RunManifest(
        spec=spec_to_dict(spec),
        master_seed=spec.master_seed,
        solver_calls=curve.metadata["solver_calls"],
        duration_s=time.perf_counter() - start,
        version=version(),
    )
    return curve, manifest


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def write_outputs(curve: ExperimentCurve, manifest: RunManifest, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "curve.csv"
        header = ["x"]
        for a in curve.y:
            header += [f"{a}_mean", f"{a}_stderr"]
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for i, x in enumerate(curve.x):
                row = [_fmt(x)]
                for a in curve.y:
                    row += [_fmt(curve.y[a][i]), _fmt(curve.stderr[a][i])]
                writer.writerow(row)
        man_path = out / "manifest.json"
        man_path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write outputs to {out}: {exc}") from exc
    return csv_path, man_path


def _trace(args) -> int:
    spec = parse_config(args.config, _overrides(args, "sinr_vs_snr"))
    cfg = spec.base
    p = source_powers(cfg)
    ch = draw_channels(cfg, rngmod.substream(spec.master_seed, 0, 0, rngmod.CHANNEL))
    res = rgsrs(cfg, ch, p, spec.model, (spec.master_seed, 0, 0))
    print(f"# seed={spec.master_seed} M={cfg.M} M_min={cfg.M_min} mode={spec.model}")
    print("iteration,removed,sinr_db,accepted")
    for r in res.trace:
        removed = "" if r.candidate_removed is None else r.candidate_removed
        print(f"{r.iteration},{removed},{_fmt(10 * np.log10(r.sinr))},{int(r.accepted)}")
    print(f"# mask={''.join(str(int(a)) for a in res.mask)} solver_calls={res.solver_calls}")
    for m, w in enumerate(res.solution.w_tilde):
        print(f"w[{m}] = {_fmt(w.real)} {'+' if w.imag >= 0 else '-'} {_fmt(abs(w.imag))}j")
    return 0


def _overrides(args, kind) -> dict:
    ov = {"kind": kind, "master_seed": args.seed, "mode": args.mode,
          "algorithms": args.algorithms, "x_grid": args.grid, "trials": args.trials,
          "bits": args.bits}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "--set expects KEY=VALUE")
        ov[key.strip()] = yaml.safe_load(value)
    return ov


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaybeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sinr-vs-snr", "sinr-vs-m", "ber-vs-snr", "trace"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML/JSON config or a previous manifest.json")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--mode", help="exact | estimated:N")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
        if name != "trace":
            sp.add_argument("--out", default="results", help="output directory")
            sp.add_argument("--threads", type=int, default=1, help="worker processes")
            sp.add_argument("--algorithms", help="comma list from none,rrrs,resrs,rgsrs")
            sp.add_argument("--grid", help="comma list of x values")
            sp.add_argument("--trials", type=int)
            sp.add_argument("--bits", type=int)
        else:
            sp.set_defaults(algorithms=None, grid=None, trials=None, bits=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "trace":
            return _trace(args)
        spec = parse_config(args.config, _overrides(args, args.command.replace("-", "_")))
        if args.threads < 1:
            raise ConfigError("threads", f"must be >= 1, got {args.threads}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        curve, manifest = run_experiment(spec, args.threads)
        csv_path, man_path = write_outputs(curve, manifest, args.out)
    except Exception as exc:  # noqa: BLE001 - report and map to exit code 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {csv_path} and {man_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
