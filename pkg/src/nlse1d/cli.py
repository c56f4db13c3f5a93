"""Command-line entry point: `nlse1d simulate ...` and `nlse1d sweep ...`.

Exit codes: 0 success, 2 configuration error, 3 simulation divergence.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, SimulationDivergedError
from .experiment import PRESETS, load_config, run, sweep


def _seed_token(token: str):
    try:
        return int(token)
    except ValueError:
        return float(token)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlse1d",
        description="1D NLSE bright-soliton evolution under chaotic, random, "
        "and quasiperiodic perturbations of the nonlinearity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one configuration")
    sw = sub.add_parser("sweep", help="run a kind x epsilon x seed sweep")
    for p in (sim, sw):
        p.add_argument("--config", help="path to a 'section.key = value' config file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="scale preset applied under the config")
        p.add_argument("--out", help="output directory (overrides output.directory)")
    sim.add_argument("--seed", type=int, help="override perturbation.seed")
    sw.add_argument("--kinds", default="chaotic,random,quasiperiodic", help="comma-separated kinds")
    sw.add_argument("--epsilons", default="0.1,0.5", help="comma-separated strengths")
    sw.add_argument("--seeds", default="1,2,3", help="comma-separated seeds")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.out:
            overrides["output.directory"] = args.out
        if args.command == "simulate" and args.seed is not None:
            overrides["perturbation.seed"] = args.seed
        config = load_config(args.config, preset=args.preset, overrides=overrides)

        if args.command == "simulate":
            summary = run(config)
            rep = summary.error_report
            print(
                f"ok: power_error={summary.power_error:.3g} mean_abs={rep.mean_abs:.3g} "
                f"min_peak={summary.min_peak_height:.3g} "
                f"centroid_shift={summary.final_centroid_displacement:.3g} "
                f"-> {config.output.directory}"
            )
        else:
            kinds = [tok.strip() for tok in args.kinds.split(",") if tok.strip()]
            epsilons = [float(tok) for tok in args.epsilons.split(",") if tok.strip()]
            seeds = [_seed_token(tok.strip()) for tok in args.seeds.split(",") if tok.strip()]
            result = sweep(config, kinds, epsilons, seeds, jobs=args.jobs)
            for row in result.rows:
                print(
                    f"{row.kind} eps={row.epsilon:g} seed={row.seed}: {row.status} "
                    f"mean_abs={row.mean_abs:.3g} min_peak={row.min_peak_height:.3g}"
                )
            print(f"aggregate summary -> {config.output.directory}/summary.csv")
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except SimulationDivergedError as e:
        print(f"simulation diverged: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
