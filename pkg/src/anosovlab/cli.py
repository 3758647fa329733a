"""Command line front end.

    lab <subcommand> --config FILE [--seed INT] [--out DIR] [--workers INT]

Subcommands mirror the experiment kinds (mix, decay, correlate, spectrum,
contour, lyapunov) plus `presets`, which lists the shipped presets.
--config accepts either a path to an INI file or the name of a shipped
preset.  Exit codes: 0 success, 2 config error, 3 engine error.
"""

import argparse
import os
import sys

from .harness import KINDS, ConfigError, ExperimentConfig, run_experiment
from .presets import list_presets, preset_config


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="lab", description="deterministic experiment runner")
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        k = sub.add_parser(kind, help="run a [%s] experiment" % kind)
        k.add_argument("--config", required=True,
                       help="INI config file path or shipped preset name")
        k.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        k.add_argument("--out", default=None,
                       help="override the output directory")
        k.add_argument("--workers", type=int, default=None,
                       help="cap intra-experiment parallelism")
    sub.add_parser("presets", help="list shipped presets")
    return ap


def _load_config_text(ref):
    if os.path.exists(ref):
        with open(ref) as fh:
            return fh.read()
    try:
        return preset_config(ref)
    except KeyError:
        raise ConfigError("config %r is neither a file nor a preset name"
                          % ref)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "presets":
        for name, desc in list_presets():
            print("%-18s %s" % (name, desc))
        return 0
    try:
        text = _load_config_text(args.config)
        cfg = ExperimentConfig.from_text(
            text, overrides={"seed": args.seed, "out": args.out,
                             "workers": args.workers})
        if cfg.kind != args.command:
            raise ConfigError("config section [%s] does not match the "
                              "subcommand %r" % (cfg.kind, args.command))
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    try:
        manifest = run_experiment(cfg)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except Exception as e:
        print("engine error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 3
    for name in sorted(manifest.files):
        print("%s  %s" % (manifest.files[name][:12], name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
