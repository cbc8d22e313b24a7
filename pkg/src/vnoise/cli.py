"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config, resolve_config
from .errors import ConfigError, NumericalGuardError
from .presets import get_preset, list_presets
from .scenarios import apply_overrides, run_scenario

UNITS_NOTE = (
    "Units: times in fs; frequencies given in THz are angular rates, "
    "converted as value[THz] * 1e-3 -> rad/fs (pump rates to 1/fs)."
)


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default=".", help="directory for output files")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument(
        "--trajectories", type=int, default=None,
        help="override the trajectory / realization count",
    )
    p.add_argument("--workers", type=int, default=None, help="worker process count")
    p.add_argument(
        "--overwrite", action="store_true", help="allow overwriting existing outputs"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vnoise",
        description="Simulate a closed V system driven by noisy CW optical fields.",
        epilog=UNITS_NOTE,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run", help="run a scenario from a TOML config (or a manifest JSON)",
        epilog=UNITS_NOTE,
    )
    p_run.add_argument("config", help="path to a .toml config or a *_manifest.json")
    _add_run_options(p_run)

    p_preset = sub.add_parser("preset", help="run a named preset scenario")
    p_preset.add_argument("name", help="preset name (see list-presets)")
    _add_run_options(p_preset)

    sub.add_parser("list-presets", help="list preset scenarios and the figures they feed")
    return parser


def _execute(raw_configs, args) -> int:
    for raw in raw_configs:
        raw = apply_overrides(
            raw, seed=args.seed, trajectories=args.trajectories, workers=args.workers
        )
        cfg = resolve_config(raw)
        outputs = run_scenario(
            cfg, args.out_dir, overwrite=args.overwrite, workers=args.workers
        )
        files = ", ".join(sorted(outputs.values()))
        print(f"{cfg.prefix}: wrote {files}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            print(list_presets())
            return 0
        if args.command == "run":
            return _execute([load_config(args.config)], args)
        if args.command == "preset":
            try:
                preset = get_preset(args.name)
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
            # deep-copy preset configs so overrides never mutate the registry
            import json

            return _execute([json.loads(json.dumps(c)) for c in preset.configs], args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
