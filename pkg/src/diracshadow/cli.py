"""
Command-line entry point.

    diracshadow algebra-check [--out DIR] [--json]
    diracshadow evolve-1d | evolve-3d [--spec PATH|NAME] [--out DIR]
    diracshadow sweep | limit-compare | extfield --spec PATH|NAME [--out DIR] [--threads N] [--json]

``--spec`` accepts a file path or the name of a bundled experiment
(see ``diracshadow list-specs``).  Exit codes: 0 when every verdict passes,
1 on a failed check, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentSpec, load_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SPEC_KINDS = {
    "evolve-1d": ("evolve", 1),
    "evolve-3d": ("evolve", 3),
    "sweep": ("sweep", None),
    "limit-compare": ("limit-compare", None),
    "extfield": ("extfield", None),
}
DEFAULT_SPECS = {"evolve-1d": "evolve_1d", "evolve-3d": "evolve_3d"}


class UsageError(Exception):
    pass


def bundled_specs() -> list[str]:
    root = resources.files("diracshadow") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_spec(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    stem = name[:-5] if name.endswith(".yaml") else name
    candidate = resources.files("diracshadow") / "configs" / f"{stem}.yaml"
    if candidate.is_file():
        return Path(str(candidate))
    raise UsageError(f"spec {name!r} is neither a file nor a bundled experiment "
                     f"({', '.join(bundled_specs())})")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _cell(v):
    # repr of a Python float is the shortest round-trip form and ignores locale
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_csv(path: Path, columns, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])
    return path


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _emit(result, kind: str, out: Path | None, spec: ExperimentSpec | None, started: float,
          as_json: bool, plots: bool = True) -> int:
    from .plotting import render

    verdicts = dict(result.verdicts)
    summary = {"name": result.name, "verdicts": verdicts, **result.summary}
    files = []
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        files.append(write_csv(out / f"{result.name}.csv", result.columns, result.rows))
        files.append(write_json(out / f"{result.name}_summary.json", summary))
        if plots:
            files += render(result, kind, out)
        manifest = {
            "tool": "diracshadow",
            "version": __version__,
            "command": kind,
            "spec_hash": spec.spec_hash() if spec is not None else None,
            "spec": spec.to_dict() if spec is not None else None,
            "wall_clock_seconds": time.perf_counter() - started,
            "outputs": sorted(p.name for p in files) + ["manifest.json"],
            "verdicts": verdicts,
        }
        write_json(out / "manifest.json", manifest)
    if as_json:
        print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    else:
        for k, v in verdicts.items():
            print(f"{v:>12}  {k}")
    return EXIT_OK if result.ok else EXIT_FAIL


def _load_for(cmd: str, spec_arg: str | None) -> ExperimentSpec:
    if spec_arg is None:
        if cmd not in DEFAULT_SPECS:
            raise UsageError(f"{cmd} requires --spec")
        spec_arg = DEFAULT_SPECS[cmd]
    spec = load_spec(resolve_spec(spec_arg))
    kind, dim = SPEC_KINDS[cmd]
    if spec.kind != kind:
        raise UsageError(f"spec kind {spec.kind!r} does not match the {cmd} command")
    if dim is not None and spec.dimension != dim:
        raise UsageError(f"{cmd} needs a {dim}D spec, got dimension {spec.dimension}")
    return spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diracshadow", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=True):
        if spec:
            p.add_argument("--spec", metavar="PATH", help="experiment file or bundled experiment name")
        p.add_argument("--out", metavar="DIR", type=Path, help="directory for CSV, JSON, PNG and manifest")
        p.add_argument("--threads", type=int, default=1, metavar="N", help="worker cap for epsilon sweeps")
        p.add_argument("--json", action="store_true", help="print the JSON summary on stdout")
        p.add_argument("--no-plots", action="store_true", help="skip the PNG figures")

    alg = sub.add_parser("algebra-check", help="Clifford, eigenvector and helicity invariants")
    common(alg, spec=False)
    alg.add_argument("--tol", type=float, default=1e-12)
    alg.add_argument("--inject-fault", metavar="INVARIANT", default=None, help=argparse.SUPPRESS)
    for name, text in [("evolve-1d", "free 1D evolution, unitarity"),
                       ("evolve-3d", "free 3D evolution, unitarity"),
                       ("sweep", "epsilon sweep of pairings against the closed-form limit"),
                       ("limit-compare", "measured limit coefficients and the Fourier-side oracle"),
                       ("extfield", "external-field split-step runs")]:
        common(sub.add_parser(name, help=text))
    sub.add_parser("list-specs", help="names of the bundled experiment files")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    if args.command == "list-specs":
        print("\n".join(bundled_specs()))
        return EXIT_OK
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    from . import experiments

    try:
        if args.command == "algebra-check":
            result = experiments.run_algebra_check(args.tol, fault=args.inject_fault)
            code = _emit(result, "algebra-check", args.out, None, started, args.json, not args.no_plots)
            if code != EXIT_OK:
                print("failed invariants: " + ", ".join(result.summary["failed"]), file=sys.stderr)
            return code
        spec = _load_for(args.command, args.spec)
    except ConfigError as exc:
        for issue in exc.issues:
            print(f"config error [{issue.rule}] {issue.message}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = experiments.run(spec, threads=args.threads)
    return _emit(result, spec.kind, args.out, spec, started, args.json, not args.no_plots)


if __name__ == "__main__":
    sys.exit(main())
