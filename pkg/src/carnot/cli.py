"""Command-line interface: ``carnot <command> [<subcommand>] [options]``.

Exit codes: 0 ran to completion, 1 structural error, 2 usage or config
error, 3 statistical failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import build_free_nilpotent, build_l2_triple_truncation, heisenberg
from .errors import AlgebraLoadError, CarnotError, ConfigInvalid, StructuralError
from .harness import (
    null_probe,
    report_to_csv,
    report_to_json,
    run,
    summary_lines,
)
from .heat import HeatKernelSpec, exp_integral_check, scaling_check
from .measures import HaarBall, cac_truncated, choose_epsilons, dilate_measure, measure_from_dict, sample_many
from .metrics import HomogeneousGauge, calibrate_gauge
from .presets import SUITES, filtration_preset, load_algebra, suite_config
from .rng import SamplerStream
from .sets import set_from_dict

EXIT_OK, EXIT_STRUCTURAL, EXIT_CONFIG, EXIT_STATISTICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=_u64, help="root seed (u64); required when sampling")
    g.add_argument("--samples", type=_positive, help="sample / path count")
    g.add_argument("--threads", type=_positive, default=1, help="worker threads (default 1)")
    g.add_argument("--out", type=Path, help="output file (default: standard output)")
    g.add_argument("--strict", action="store_true",
                   help="exit 3 when any statistical check fails")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="carnot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"carnot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(subs, name, help_, func):
        p = subs.add_parser(name, help=help_, description=help_, parents=[common])
        p.set_defaults(func=func)
        return p

    alg = sub.add_parser("algebra", help="build or validate graded Lie algebras")
    asub = alg.add_subparsers(dest="action", required=True, metavar="ACTION")
    p = add(asub, "validate", "validate an algebra JSON file and echo it", cmd_algebra_validate)
    p.add_argument("source", help="JSON file or preset name")
    p = add(asub, "free", "free nilpotent algebra on RANK generators of STEP", cmd_algebra_free)
    p.add_argument("rank", type=_positive)
    p.add_argument("step", type=_positive)
    p = add(asub, "heisenberg", "Heisenberg algebra of dimension 2N+1", cmd_algebra_heisenberg)
    p.add_argument("n", type=_positive)
    p = add(asub, "l2triple", "K-block truncation of the l2 triple algebra", cmd_algebra_l2triple)
    p.add_argument("k", type=_positive)

    gauge = sub.add_parser("gauge", help="homogeneous gauges")
    gsub = gauge.add_subparsers(dest="action", required=True, metavar="ACTION")
    p = add(gsub, "calibrate", "calibrate layer weights for subadditivity", cmd_gauge_calibrate)
    p.add_argument("algebra", help="JSON file or preset name")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--safety", type=float, default=0.1)

    p = add(sub, "sample", "draw samples of a measure spec to CSV", cmd_sample)
    p.add_argument("spec", type=Path,
                   help='JSON {"algebra": ..., "measure": {...}, optional "gauge"}')
    p.add_argument("--start", type=int, default=0, help="index of the first sample")

    heat = sub.add_parser("heat", help="hypoelliptic heat kernel tools")
    hsub = heat.add_subparsers(dest="action", required=True, metavar="ACTION")
    for name, func, help_ in (
            ("endpoints", cmd_heat_endpoints, "simulate endpoints g_T to CSV"),
            ("scaling-check", cmd_heat_scaling, "test nu*nu against the sqrt(2) dilate of nu"),
            ("exp-integral", cmd_heat_exp_integral,
             "compare E f(xy) and E f(x+y) under a windowed Gauss x Haar law")):
        p = add(hsub, name, help_, func)
        p.add_argument("algebra", help="JSON file or preset name")
        p.add_argument("--covariance", type=json.loads, help="layer-1 covariance as JSON")
        if name != "exp-integral":
            p.add_argument("--T", type=float, default=1.0)
            p.add_argument("--steps", type=_positive, default=1000)
        if name == "scaling-check":
            p.add_argument("--alpha", type=float, default=0.01)
            p.add_argument("--dilation", type=float, default=2 ** 0.5)
        if name == "exp-integral":
            p.add_argument("--functions", type=Path, required=True,
                           help="JSON list of test functions")
            p.add_argument("--half-widths", type=json.loads, required=True,
                           help="JSON list of box half-widths for layers >= 2")

    cac = sub.add_parser("cac", help="convolutions of AC measures along a filtration")
    csub = cac.add_subparsers(dest="action", required=True, metavar="ACTION")
    for name, func, help_ in (
            ("build", cmd_cac_build, "emit the truncated CAC measure as a sample spec"),
            ("epsilons", cmd_cac_epsilons, "closed-form or certified dilation scales")):
        p = add(csub, name, help_, func)
        p.add_argument("filtration", help="l2triple-K, h1 or full:<algebra>")
        p.add_argument("--levels", type=_positive, default=10)
        p.add_argument("--radius", type=float, default=1.0, help="Haar ball radius per factor")
    p = add(csub, "probe", "mass table of a set under translated truncated CAC measures",
            cmd_cac_probe)
    p.add_argument("config", type=Path,
                   help='JSON {"indicator", "filtration", "translates", "levels"}')

    p = add(sub, "check", "run a named acceptance suite", cmd_check)
    p.add_argument("preset", choices=sorted(SUITES))
    p.add_argument("--csv", type=Path, help="also write a flattened CSV report")

    p = add(sub, "run", "run an experiment config", cmd_run)
    p.add_argument("config", type=Path)
    p.add_argument("--csv", type=Path, help="also write a flattened CSV report")
    return parser


# -- output helpers --------------------------------------------------------------


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8", newline="\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(X: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"g_{j + 1}" for j in range(X.shape[1])])
    for row in X:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command} requires --seed")
    return args.seed


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc


def _covariance(args, alg):
    d1 = alg.layer_dims[0]
    return np.eye(d1) if args.covariance is None else np.asarray(args.covariance, float)


# -- commands --------------------------------------------------------------------


def cmd_algebra_validate(args):
    alg = load_algebra(args.source)
    alg.validate()
    _emit(args, alg.to_json() + "\n")
    return EXIT_OK


def cmd_algebra_free(args):
    _emit(args, build_free_nilpotent(args.rank, args.step).to_json() + "\n")
    return EXIT_OK


def cmd_algebra_heisenberg(args):
    _emit(args, heisenberg(args.n).to_json() + "\n")
    return EXIT_OK


def cmd_algebra_l2triple(args):
    _emit(args, build_l2_triple_truncation(args.k).to_json() + "\n")
    return EXIT_OK


def cmd_gauge_calibrate(args):
    seed = _need_seed(args)
    alg = load_algebra(args.algebra)
    g = calibrate_gauge(alg, args.radius, args.samples or 10_000, args.safety, seed=seed,
                        threads=args.threads)
    _emit(args, g.to_json() + "\n")
    return EXIT_OK


def cmd_sample(args):
    seed = _need_seed(args)
    data = _read_json(args.spec)
    if "measure" not in data or "algebra" not in data:
        raise ConfigInvalid('sample spec needs "algebra" and "measure"')
    alg = load_algebra(data["algebra"], args.spec.parent)
    gauge = (HomogeneousGauge.from_dict(alg, data["gauge"]) if "gauge" in data
             else HomogeneousGauge.unit(alg))
    spec = measure_from_dict(data["measure"], alg, gauge)
    stream = SamplerStream(seed, int(data.get("stream", 0)))
    X = sample_many(spec, stream, args.samples or 1000, args.start, args.threads)
    _emit(args, _csv(X))
    return EXIT_OK


def cmd_heat_endpoints(args):
    seed = _need_seed(args)
    alg = load_algebra(args.algebra)
    spec = HeatKernelSpec(alg, _covariance(args, alg), args.T, args.steps)
    if spec.experimental:
        print("warning: heat kernel simulation on step >= 3 groups is experimental",
              file=sys.stderr)
    X = sample_many(spec, SamplerStream(seed), args.samples or 1000, threads=args.threads)
    _emit(args, _csv(X))
    return EXIT_OK


def cmd_heat_scaling(args):
    seed = _need_seed(args)
    alg = load_algebra(args.algebra)
    spec = HeatKernelSpec(alg, _covariance(args, alg), args.T, args.steps)
    rep = scaling_check(spec, args.samples or 10_000, SamplerStream(seed), alpha=args.alpha,
                        dilation=args.dilation, threads=args.threads)
    _emit(args, _json(rep))
    return EXIT_STATISTICAL if args.strict and not rep["pass"] else EXIT_OK


def cmd_heat_exp_integral(args):
    seed = _need_seed(args)
    alg = load_algebra(args.algebra)
    funcs = [set_from_dict(f) for f in _read_json(args.functions)]
    rep = exp_integral_check(alg, _covariance(args, alg), funcs, args.half_widths,
                             args.samples or 100_000, SamplerStream(seed))
    _emit(args, _json(rep))
    return EXIT_STATISTICAL if args.strict and not rep["pass"] else EXIT_OK


def _cac_parts(args):
    alg, filt = filtration_preset(args.filtration, args.levels)
    gauge = HomogeneousGauge.unit(alg)
    base = [HaarBall(H, args.radius, gauge) for H in filt]
    details = []
    eps = choose_epsilons(filt, base, gauge=gauge, stream=SamplerStream(args.seed or 0),
                          threads=args.threads, details=details)
    return alg, filt, base, eps, details


def cmd_cac_build(args):
    alg, filt, base, eps, _ = _cac_parts(args)
    conv = cac_truncated(filt, [dilate_measure(b, e) for b, e in zip(base, eps)])
    _emit(args, _json({"algebra": alg.to_dict(), "measure": conv.to_dict()}))
    return EXIT_OK


def cmd_cac_epsilons(args):
    _, _, _, eps, details = _cac_parts(args)
    _emit(args, _json({"filtration": args.filtration, "epsilons": eps, "details": details}))
    return EXIT_OK


def cmd_cac_probe(args):
    seed = _need_seed(args)
    cfg = _read_json(args.config)
    missing = [k for k in ("indicator", "filtration", "translates", "levels") if k not in cfg]
    if missing:
        raise ConfigInvalid(f"probe config is missing {missing}")
    table = null_probe(cfg["indicator"], cfg["filtration"], cfg["translates"], cfg["levels"],
                       args.samples or int(cfg.get("n", 10_000)), SamplerStream(seed),
                       float(cfg.get("radius", 1.0)), args.threads)
    _emit(args, _json({"advisory": True, "table": table}))
    return EXIT_OK


def _finish_report(args, report):
    _emit(args, report_to_json(report))
    if args.csv is not None:
        args.csv.write_text(report_to_csv(report), encoding="utf-8", newline="\n")
    for line in summary_lines(report):
        print(line, file=sys.stderr)
    verdict = "PASS" if report["pass"] else "FAIL"
    print(f"overall: {verdict} ({report['wall_time']:.1f} s)", file=sys.stderr)
    return EXIT_STATISTICAL if args.strict and not report["pass"] else EXIT_OK


def cmd_check(args):
    seed = _need_seed(args)
    return _finish_report(args, run(suite_config(args.preset, seed), args.threads))


def cmd_run(args):
    config = _read_json(args.config)
    if args.seed is not None:
        if not isinstance(config, dict):
            raise ConfigInvalid("config must be a JSON object")
        config["seed"] = args.seed
    return _finish_report(args, run(config, args.threads, args.config.parent))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConfigInvalid, AlgebraLoadError) as exc:
        print(f"carnot: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StructuralError, CarnotError, ValueError) as exc:
        print(f"carnot: structural error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
