"""Command line entry point.

Every flag can also be set through an environment variable named
KNESER_EKR_<FLAG> (for example KNESER_EKR_TRIALS=200); flags win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from .experiments import COMMANDS, ExperimentConfig, csv_rows

ENV_PREFIX = "KNESER_EKR_"


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _grid(text: str) -> list[float]:
    """'0,0.5,1' or 'start:stop:step' (inclusive)."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        count = int(round((stop - start) / step))
        return [round(start + i * step, 10) for i in range(count + 1)]
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kneser-ekr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = ExperimentConfig()
    help_text = {
        "hitting": "hitting-time campaign over independent labelings",
        "sweep": "estimate P(alpha = star size) and P(EKR) over a grid of p",
        "verify": "exhaustive and sampled checks of the deterministic structure results",
        "exact": "exact event probabilities by enumerating every edge subset",
        "certificate": "build and check certificates on random T1 families",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=help_text[name])
        sp.add_argument("--n", type=int, default=int(_env("n", defaults.n)))
        sp.add_argument("--k", type=int, default=int(_env("k", defaults.k)))
        sp.add_argument("--trials", type=int, default=int(_env("trials", defaults.trials)))
        sp.add_argument("--seed", type=int, default=int(_env("seed", defaults.seed)))
        sp.add_argument("--p-grid", type=_grid, default=_grid(_env("p-grid", "0:1:0.05")),
                        help="comma list or start:stop:step")
        sp.add_argument("--theta", type=float, default=float(_env("theta", defaults.theta)))
        sp.add_argument("--slack", type=float, default=float(_env("slack", defaults.slack)),
                        help="certificate slack sigma on |A3|")
        sp.add_argument("--max-tries", type=int, default=int(_env("max-tries", defaults.max_tries)))
        sp.add_argument("--delta", type=float, default=float(_env("delta", defaults.delta)))
        sp.add_argument("--workers", type=int, default=int(_env("workers", defaults.workers)))
        sp.add_argument("--out", default=_env("out", None), help="output file (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default=_env("format", "json"))
        sp.add_argument("--timings", action="store_true",
                        default=_env("timings", "0") not in ("0", "", "false"),
                        help="include wall-clock timings (output is then not reproducible)")
        sp.add_argument("--no-exact", dest="solve_exact", action="store_false",
                        help="hitting: skip stepping forward to exact tau_alpha / tau_ekr")
        sp.add_argument("--inject-fault", action="store_true",
                        help="verify: corrupt one edge count to exercise failure reporting")
        sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def render(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2) + "\n"
    header, rows = csv_rows(record)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    opts = vars(args).copy()
    command = opts.pop("command")
    opts.pop("verbose")
    try:
        cfg = ExperimentConfig(**opts)
        record = COMMANDS[command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(record, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    violations = record["checks"]["violations"]
    if violations:
        logging.getLogger("kneser_ekr").error("%d violation(s)", violations)
    return 0 if violations == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
