"""``fidelity`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys

from .runner import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    apply_seed_env,
    diagnostics,
    parse_override,
    preset_config,
    run_experiment,
)
from .states import MapParams, StateError

log = logging.getLogger("fidelity")

EXIT_INVALID = 1
EXIT_IO = 2


def _common(parser):
    parser.add_argument("--seed", type=int, help="overrides the config seed and $FIDELITY_SEED")
    parser.add_argument("--workers", type=int, help="worker threads")
    parser.add_argument("--out", help="output CSV path (JSON sidecar written next to it)")
    parser.add_argument("--t-max", type=int, dest="t_max", help="number of kicks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fidelity", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config file")
    run.add_argument("--config", required=True)
    _common(run)

    preset = sub.add_parser("preset", help=f"reproduce a figure: {', '.join(PRESETS)}")
    preset.add_argument("name")
    preset.add_argument("overrides", nargs="*", metavar="key=value")
    _common(preset)

    diag = sub.add_parser("diagnostics", help="potential correlators and diffusion coefficients")
    diag.add_argument("--k", type=float, required=True)
    diag.add_argument("--lags", type=int, required=True)
    diag.add_argument("--n", type=int, default=100, help="Hilbert dimension (sets hbar)")
    diag.add_argument("--epsilon", type=float, default=0.0)
    diag.add_argument("--samples", type=int, default=10000)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--workers", type=int, default=1)
    diag.add_argument("--out", default="diagnostics.csv")
    return parser


def _apply_flags(config: ExperimentConfig, args) -> ExperimentConfig:
    config = apply_seed_env(config)
    obj = config.to_json()
    for flag, key in (("seed", "seed"), ("workers", "workers"), ("out", "output_path"), ("t_max", "t_max")):
        value = getattr(args, flag, None)
        if value is not None:
            obj[key] = value
    return ExperimentConfig.from_json(obj)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "diagnostics":
            if args.lags < 0 or args.samples < 2:
                raise ConfigError("need --lags >= 0 and --samples >= 2")
            params = MapParams(args.n, args.k, args.epsilon)
            result = diagnostics(params, args.lags, args.samples, args.seed, args.out, args.workers)
            log.info("K_W=%.6g K_V=%.6g", result["summary"]["K_W"], result["summary"]["K_V"])
            return 0
        if args.command == "run":
            config = ExperimentConfig.load(args.config)
        else:
            config = preset_config(args.name, dict(parse_override(tok) for tok in args.overrides))
        config = _apply_flags(config, args)
        run_experiment(config)
        log.info("wrote %s", config.output_path)
        return 0
    except (ConfigError, StateError, ValueError) as exc:
        print(f"fidelity: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"fidelity: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
