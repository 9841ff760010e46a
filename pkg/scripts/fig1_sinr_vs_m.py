"""Mean SINR against the number of relays at a fixed SNR.

    python3 scripts/fig1_sinr_vs_m.py --out results/sinr_vs_m
"""

import argparse

from relaybeam.beamformer import CovarianceModel
from relaybeam.channel import NetworkConfig
from relaybeam.cli import run_experiment, write_outputs
from relaybeam.simulator import ExperimentSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/sinr_vs_m")
    ap.add_argument("--mode", default="estimated:16")
    ap.add_argument("--snr", type=float, default=10.0)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    spec = ExperimentSpec(
        "sinr_vs_m",
        base=NetworkConfig(snr_db=args.snr),
        x_grid=tuple(range(3, 11)),
        trials=args.trials,
        model=CovarianceModel.parse(args.mode),
        master_seed=args.seed,
    )
    curve, manifest = run_experiment(spec, args.threads)
    csv_path, _ = write_outputs(curve, manifest, args.out)
    for i, x in enumerate(curve.x):
        print(f"M={int(x):2d}  " + "  ".join(f"{a} {curve.y[a][i]:7.3f}" for a in spec.algorithms))
    print(f"wrote {csv_path}")


if __name__ == "__main__":
    main()
