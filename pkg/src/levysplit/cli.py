"""Command-line front end.

Exit codes: 0 success, 1 configuration/validation error (single-line
diagnostic naming the offending field), 2 a hard check failed (e.g. the
enumeration identity found a mismatch).  Given identical arguments and
seed, emitted files are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .conditioned import conditioned_bm_path, conditioning_transform
from .construct import split_at_directional_infimum, split_at_max_norm
from .core import (
    CompoundPoissonSpec,
    ExponentialJumps,
    ExponentialRate,
    FiniteSupportJumps,
    FixedHorizon,
    GaussianJumps,
    LevySpec,
    read_path_csv,
    write_path_csv,
)
from .sim import RngStream, sample_path


class ConfigError(ValueError):
    pass


def _require_keys(obj: dict, allowed: set, where: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}.{key}'" if where else f"unknown key '{key}'")


def parse_jump_law(obj: dict):
    _require_keys(obj, {"type", "atoms", "probs", "mean", "cov", "rate", "direction"}, "jumps.law")
    kind = obj.get("type")
    if kind == "finite":
        if "atoms" not in obj or "probs" not in obj:
            raise ConfigError("jumps.law of type 'finite' needs 'atoms' and 'probs'")
        return FiniteSupportJumps(np.asarray(obj["atoms"], dtype=float), np.asarray(obj["probs"], dtype=float))
    if kind == "gaussian":
        if "mean" not in obj or "cov" not in obj:
            raise ConfigError("jumps.law of type 'gaussian' needs 'mean' and 'cov'")
        return GaussianJumps(np.asarray(obj["mean"], dtype=float), np.asarray(obj["cov"], dtype=float))
    if kind == "exponential":
        if "rate" not in obj or "direction" not in obj:
            raise ConfigError("jumps.law of type 'exponential' needs 'rate' and 'direction'")
        return ExponentialJumps(float(obj["rate"]), np.asarray(obj["direction"], dtype=float))
    raise ConfigError(f"jumps.law.type must be finite, gaussian or exponential, got {kind!r}")


def parse_spec(obj: dict) -> LevySpec:
    """Parse the JSON process description; unknown keys are rejected by name."""
    _require_keys(obj, {"drift", "sigma", "jumps", "kill"}, "")
    if "drift" not in obj:
        raise ConfigError("missing key 'drift'")
    if "sigma" not in obj:
        raise ConfigError("missing key 'sigma'")
    jumps = None
    if obj.get("jumps") is not None:
        j = obj["jumps"]
        _require_keys(j, {"rate", "law"}, "jumps")
        if "rate" not in j or "law" not in j:
            raise ConfigError("jumps needs 'rate' and 'law'")
        jumps = CompoundPoissonSpec(rate=float(j["rate"]), law=parse_jump_law(j["law"]))
    kill = None
    if obj.get("kill") is not None:
        k = obj["kill"]
        _require_keys(k, {"type", "value"}, "kill")
        kind = k.get("type")
        if kind == "fixed":
            kill = FixedHorizon(float(k["value"]))
        elif kind == "exponential":
            kill = ExponentialRate(float(k["value"]))
        elif kind not in (None, "none"):
            raise ConfigError(f"kill.type must be fixed, exponential or none, got {kind!r}")
    try:
        return LevySpec(
            drift=np.asarray(obj["drift"], dtype=float),
            sigma=np.asarray(obj["sigma"], dtype=float),
            jumps=jumps,
            kill=kill,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_spec(path: str) -> LevySpec:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"spec: cannot read {path}: {exc}") from exc
    return parse_spec(obj)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"eta: cannot parse vector {text!r}") from exc


def _default_out(args, fallback: str) -> Path:
    out = Path(args.out) if args.out else Path(fallback)
    if out.suffix:
        out.parent.mkdir(parents=True, exist_ok=True)
    else:
        out.mkdir(parents=True, exist_ok=True)
    return out


PRESET_INCREMENTS = {
    "default1d": [([1.0], 0.5), ([-1.0], 0.5)],
    "default2d": [
        ([1.0, 0.0], 1.0 / 3.0),
        ([-1.0, 1.0], 1.0 / 3.0),
        ([0.0, -1.0], 1.0 / 3.0),
    ],
}


def _emit_report(report, args, emit_kde=False):
    outdir = _default_out(args, ".")
    if args.format == "json":
        dest = outdir / f"{report.name}_{report.master_seed}_report.json"
        report.write_json(dest)
        print(f"wrote {dest}")
    else:
        dest = outdir / f"{report.name}_{report.master_seed}_report.json"
        report.write_json(dest, include_samples=False)
        print(f"wrote {dest}")
        for f in report.write_samples_csv(outdir):
            print(f"wrote {f}")
    if emit_kde and "kde_prelimit" in report.samples:
        for f in experiments.write_max_norm_kde_csv(report, outdir):
            print(f"wrote {f}")


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    path = sample_path(spec, args.horizon, args.step, RngStream(args.seed))
    out = _default_out(args, "path.csv")
    if out.is_dir():
        out = out / "path.csv"
    write_path_csv(str(out), path)
    print(f"wrote {out}")
    return 0


def cmd_split(args) -> int:
    if args.path:
        path = read_path_csv(args.path)
    else:
        if not args.spec:
            raise ConfigError("split: need either 'path' or 'spec'")
        spec = load_spec(args.spec)
        path = sample_path(spec, args.horizon, args.step, RngStream(args.seed))
    if args.mode == "infimum":
        if not args.eta:
            raise ConfigError("split: 'eta' is required in infimum mode")
        pair = split_at_directional_infimum(path, _parse_vector(args.eta))
        eta_used = _parse_vector(args.eta)
    else:
        direction, pair = split_at_max_norm(path)
        eta_used = direction.eta
    outdir = _default_out(args, "split_out")
    if not outdir.is_dir():
        outdir = outdir.parent
    write_path_csv(str(outdir / "pre.csv"), pair.pre)
    write_path_csv(str(outdir / "post.csv"), pair.post)
    meta = {
        "mode": args.mode,
        "tau_index": pair.tau_index,
        "extremum_point": pair.extremum_point.tolist(),
        "eta": np.asarray(eta_used, dtype=float).tolist(),
        "seed": args.seed,
    }
    (outdir / "split.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    print(f"wrote {outdir}/pre.csv {outdir}/post.csv {outdir}/split.json")
    return 0


def _sigma_from_args(args) -> np.ndarray:
    if not -1.0 < args.rho < 1.0:
        raise ConfigError(f"rho: must lie in (-1, 1), got {args.rho}")
    if args.sigma1 <= 0 or args.sigma2 <= 0:
        raise ConfigError("sigma1/sigma2: must be positive")
    return np.array(
        [
            [args.sigma1**2, args.rho * args.sigma1 * args.sigma2],
            [args.rho * args.sigma1 * args.sigma2, args.sigma2**2],
        ]
    )


def cmd_condition(args) -> int:
    eta = _parse_vector(args.eta)
    sigma = _sigma_from_args(args)
    if eta.shape[0] != 2:
        raise ConfigError("eta: expected 2 components for the sigma1/sigma2/rho parameterization")
    transform = conditioning_transform(sigma, eta)
    if args.print_matrix:
        print(f"scale {transform.scale:.12g}")
        for row in transform.mr:
            print(" ".join(f"{x:.12g}" for x in row))
        return 0
    outdir = _default_out(args, "condition_out")
    if not outdir.is_dir():
        outdir = outdir.parent
    for k in range(args.paths):
        p = conditioned_bm_path(sigma, eta, args.horizon, args.step, RngStream(args.seed, k))
        write_path_csv(str(outdir / f"conditioned_{args.seed}_{k}.csv"), p)
    print(f"wrote {args.paths} path(s) to {outdir}")
    return 0


def cmd_check_enum(args) -> int:
    if args.increments in PRESET_INCREMENTS:
        incs = PRESET_INCREMENTS[args.increments]
    else:
        try:
            raw = json.loads(Path(args.increments).read_text())
            incs = [(v, w) for v, w in raw]
        except Exception as exc:
            raise ConfigError(f"increments: not a preset and not a readable JSON file ({exc})") from exc
    eta = _parse_vector(args.eta) if args.eta else None
    report = experiments.check_representation_enumeration(incs, args.n, eta)
    _emit_report(report, args)
    print(f"enumeration over {report.statistics['sequences']} sequences: {report.statistics['verdict']}")
    return 0 if report.statistics["verdict"] == "PASS" else 2


def cmd_check_sparre(args) -> int:
    report = experiments.check_sparre_andersen(args.n, args.n_mc, RngStream(args.seed))
    _emit_report(report, args)
    p = report.p_values["two_sample"]
    print(f"occupation vs argmax chi2 p={p:.4g}")
    return 0 if p >= 0.001 else 2


def cmd_experiment_zoom(args) -> int:
    spec = load_spec(args.spec)
    report = experiments.experiment_zoom_infimum(
        spec,
        _parse_vector(args.eta),
        args.n,
        args.step,
        args.n_rep,
        RngStream(args.seed),
        n_perm=args.n_perm,
        self_test=args.self_test,
        threads=args.threads,
    )
    _emit_report(report, args)
    print(f"zoom p-values: {report.p_values}")
    return 0


def cmd_experiment_maxnorm(args) -> int:
    report = experiments.experiment_max_norm(
        args.sigma1,
        args.sigma2,
        args.rho,
        args.n,
        args.step,
        args.n_rep,
        RngStream(args.seed),
        n_perm=args.n_perm,
        threads=args.threads,
    )
    _emit_report(report, args, emit_kde=True)
    frac = report.statistics.get("retained_fraction")
    print(f"retained fraction: {frac}")
    return 0


def cmd_experiment_initial_jump(args) -> int:
    spec = load_spec(args.spec)
    try:
        report = experiments.experiment_initial_jump_law(
            spec,
            _parse_vector(args.eta),
            args.horizon,
            args.step,
            args.n_rep,
            RngStream(args.seed),
            threads=args.threads,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit_report(report, args)
    print(f"initial-jump p-values: {report.p_values}")
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", type=str, default=None, help="output file or directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="report output format")
    p.add_argument("--threads", type=int, default=1, help="worker cap (results are schedule independent)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levysplit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample one grid path of a JSON process spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("split", help="split a path at an extremal point")
    p.add_argument("--mode", choices=["infimum", "maxnorm"], default="infimum")
    p.add_argument("--path", type=str, default=None, help="path CSV to split")
    p.add_argument("--spec", type=str, default=None, help="spec JSON to simulate when no path given")
    p.add_argument("--eta", type=str, default=None, help="direction, comma separated")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    _add_common(p)
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("condition", help="conditioned correlated Brownian motion (d=2)")
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--eta", type=str, required=True)
    p.add_argument("--print-matrix", action="store_true", help="print the linear map and exit")
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    _add_common(p)
    p.set_defaults(fn=cmd_condition)

    chk = sub.add_parser("check", help="exact and distributional self checks")
    chk_sub = chk.add_subparsers(dest="check_command", required=True)

    p = chk_sub.add_parser("enum", help="exhaustive splitting-identity check")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--increments", type=str, default="default1d", help="preset name or JSON file")
    p.add_argument("--eta", type=str, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_check_enum)

    p = chk_sub.add_parser("sparre", help="occupation count vs argmax index")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-mc", type=int, default=100000)
    _add_common(p)
    p.set_defaults(fn=cmd_check_sparre)

    exp = sub.add_parser("experiment", help="Monte Carlo verification experiments")
    exp_sub = exp.add_subparsers(dest="experiment_command", required=True)

    p = exp_sub.add_parser("zoom", help="zoom in at the directional infimum")
    p.add_argument("--spec", required=True)
    p.add_argument("--eta", type=str, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--n-rep", type=int, default=2000)
    p.add_argument("--n-perm", type=int, default=1999)
    p.add_argument("--self-test", action="store_true")
    _add_common(p)
    p.set_defaults(fn=cmd_experiment_zoom)

    p = exp_sub.add_parser("maxnorm", help="zoom in at the maximal distance from the origin")
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=-0.8)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--n-rep", type=int, default=5000)
    p.add_argument("--n-perm", type=int, default=999)
    _add_common(p)
    p.set_defaults(fn=cmd_experiment_maxnorm)

    p = exp_sub.add_parser("initial-jump", help="law of the first up-step for creeping-down specs")
    p.add_argument("--spec", required=True)
    p.add_argument("--eta", type=str, required=True)
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--n-rep", type=int, default=5000)
    _add_common(p)
    p.set_defaults(fn=cmd_experiment_initial_jump)

    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
