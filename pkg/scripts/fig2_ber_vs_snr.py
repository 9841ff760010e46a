"""BER of coherent BPSK detection against source SNR.

    python3 scripts/fig2_ber_vs_snr.py --out results/ber_vs_snr --bits 100000
"""

import argparse

from relaybeam.beamformer import CovarianceModel
from relaybeam.cli import run_experiment, write_outputs
from relaybeam.simulator import ExperimentSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/ber_vs_snr")
    ap.add_argument("--mode", default="exact")
    ap.add_argument("--bits", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    spec = ExperimentSpec(
        "ber_vs_snr",
        x_grid=(0.0, 5.0, 10.0, 15.0, 20.0),
        bits=args.bits,
        model=CovarianceModel.parse(args.mode),
        master_seed=args.seed,
    )
    curve, manifest = run_experiment(spec, args.threads)
    csv_path, _ = write_outputs(curve, manifest, args.out)
    for i, x in enumerate(curve.x):
        print(f"{x:5.1f} dB  " + "  ".join(f"{a} {curve.y[a][i]:.2e}" for a in spec.algorithms))
    print(f"wrote {csv_path}")


if __name__ == "__main__":
    main()
