"""Command-line entry points: mask, impute, eval, sweep, convert.

Failures print one JSON object ``{"error": <type>, "message": <text>}`` on
stderr and exit with status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict

from . import io_config
from .errors import LrtcError, ParameterError
from .eval_harness import SweepGrid, run_sweep, score, split_masks
from .patterns import MissingSpec, Pattern, generate_mask
from .solver import SolverConfig, decayed_theta, missing_rate, solve
from .tensor_core import MaskTensor

# key=value config keys accepted by `impute --config` and `sweep --config`
SOLVER_KEYS = {
    "p": float,
    "theta0": float,
    "beta": float,
    "epsilon": float,
    "max_iters": int,
    "mu0": float,
    "mu_growth": float,
    "mu_cap": float,
    "alpha": io_config.float_list,
    "inner_iters": int,
    "inner_tol": float,
}

IMPUTE_DEFAULTS = {
    "p": 0.5,
    "theta0": 0.1,
    "beta": 2.0,
    "epsilon": 1e-4,
    "max_iters": 200,
    "mu0": 1e-5,
    "mu_growth": 1.05,
    "mu_cap": 1e5,
    "alpha": [1 / 3, 1 / 3, 1 / 3],
    "inner_iters": 10,
    "inner_tol": 1e-12,
}


def _solver_config(values, theta: float) -> SolverConfig:
    return SolverConfig(
        p=values["p"],
        theta=theta,
        alpha=tuple(values["alpha"]),
        mu0=values["mu0"],
        mu_growth=values["mu_growth"],
        mu_cap=values["mu_cap"],
        epsilon=values["epsilon"],
        max_iters=values["max_iters"],
        inner_iters=values["inner_iters"],
        inner_tol=values["inner_tol"],
    )


def _parse_config_values(raw, allowed):
    out = {}
    for key, text in raw.items():
        if key not in allowed:
            raise ParameterError(f"unknown config key {key!r}")
        try:
            out[key] = allowed[key](text)
        except ValueError:
            raise ParameterError(f"bad value for {key}: {text!r}") from None
    return out


def cmd_mask(args):
    dims = io_config.parse_dims(args.dims)
    generated = generate_mask(dims, MissingSpec(Pattern.parse(args.pattern), args.rate, args.seed))
    io_config.write_mask(args.out, generated)
    if args.score_out:
        native = io_config.read_mask(args.native_mask) if args.native_mask else MaskTensor.ones(dims)
        _, scored = split_masks(native, generated)
        io_config.write_mask(args.score_out, scored)


def cmd_impute(args):
    values = dict(IMPUTE_DEFAULTS)
    if args.config:
        values.update(_parse_config_values(io_config.read_key_values(args.config), SOLVER_KEYS))
    for key in SOLVER_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag

    data = io_config.read_tensor(args.data)
    mask = io_config.read_mask(args.mask)
    native = io_config.read_mask(args.native_mask) if args.native_mask else None
    observed = mask if native is None else mask & native

    psi = missing_rate(observed)
    cfg = _solver_config(values, decayed_theta(values["theta0"], values["beta"], psi))
    start = time.perf_counter()
    result = solve(data, observed, cfg)
    elapsed = time.perf_counter() - start
    io_config.write_tensor(args.out, result.X_hat)

    fields = {}
    if native is not None:
        _, scored = split_masks(native, mask)
        if scored.count():
            s = score(data, result.X_hat, scored)
            fields.update(mae=s.mae, rmse=s.rmse, masked_count=s.masked_count)
    fields.update(
        realized_missing_rate=psi,
        iterations=result.iterations,
        converged=result.converged,
        final_residual=result.residual_trace[-1],
        theta=cfg.theta,
        truncation_ranks=result.truncation_ranks,
        per_mode_spn=result.per_mode_spn,
        theta0=values["theta0"],
        beta=values["beta"],
        config={f"solver.{k}": v for k, v in asdict(cfg).items()},
        wall_time=elapsed,
    )
    if args.report:
        io_config.write_report(args.report, fields, as_json=args.json)


def cmd_eval(args):
    s = score(
        io_config.read_tensor(args.truth),
        io_config.read_tensor(args.imputed),
        io_config.read_mask(args.score_mask),
    )
    io_config.write_report(args.report, asdict(s), as_json=args.json)


SWEEP_KEYS = {
    "data": str,
    "native_mask": str,
    "p_values": io_config.float_list,
    "theta0_values": io_config.float_list,
    "beta_values": io_config.float_list,
    "rates": io_config.float_list,
    "patterns": lambda s: [Pattern.parse(x) for x in s.split(",") if x.strip()],
    "repetitions": int,
    "base_seed": int,
    "workers": int,
    **{k: v for k, v in SOLVER_KEYS.items() if k not in ("p", "theta0", "beta")},
}


def cmd_sweep(args):
    values = _parse_config_values(io_config.read_key_values(args.config), SWEEP_KEYS)
    base = os.path.dirname(os.path.abspath(args.config))

    def resolve(path):
        return path if os.path.isabs(path) else os.path.join(base, path)

    if "data" not in values:
        raise ParameterError("sweep config needs a data= entry")
    data = io_config.read_tensor(resolve(values["data"]))
    native = (
        io_config.read_mask(resolve(values["native_mask"]))
        if "native_mask" in values
        else MaskTensor.ones(data.dims)
    )
    try:
        grid = SweepGrid(
            p_values=values["p_values"],
            theta0_values=values["theta0_values"],
            beta_values=values["beta_values"],
            rates=values["rates"],
            patterns=values["patterns"],
            repetitions=values.get("repetitions", 1),
            base_seed=values.get("base_seed", 0),
        )
    except KeyError as exc:
        raise ParameterError(f"sweep config is missing {exc.args[0]}") from None
    solver_values = {**IMPUTE_DEFAULTS, **{k: v for k, v in values.items() if k in SOLVER_KEYS}}
    cfg = _solver_config(solver_values, theta=0.0)
    workers = args.workers if args.workers is not None else values.get("workers", 1)
    io_config.write_sweep_table(args.out, run_sweep(data, native, grid, cfg, workers=workers))


def cmd_convert(args):
    dims = io_config.parse_dims(args.dims) if args.dims else None
    tensor, native = io_config.ingest_csv(args.csv, dims)
    io_config.write_tensor(args.out_tensor, tensor)
    io_config.write_mask(args.out_mask, native)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrtc-tspn",
        description="Truncated tensor Schatten-p completion for spatiotemporal data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="generate a seeded missing-pattern mask")
    p.add_argument("--dims", required=True, help="n1,n2,n3")
    p.add_argument("--pattern", required=True, choices=[x.value for x in Pattern])
    p.add_argument("--rate", required=True, type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="observation mask, 1 = kept")
    p.add_argument("--native-mask", help="entries present in the source data")
    p.add_argument("--score-out", help="also write native & ~mask for scoring")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("impute", help="complete a tensor")
    p.add_argument("--data", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--native-mask")
    p.add_argument("--config", help="key=value file with solver settings")
    p.add_argument("--p", type=float)
    p.add_argument("--theta0", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--mu0", type=float)
    p.add_argument("--mu-growth", dest="mu_growth", type=float)
    p.add_argument("--mu-cap", dest="mu_cap", type=float)
    p.add_argument("--alpha", type=io_config.float_list, help="a1,a2,a3 summing to 1")
    p.add_argument("--inner-iters", dest="inner_iters", type=int)
    p.add_argument("--inner-tol", dest="inner_tol", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--json", action="store_true", help="write the report as JSON")
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("eval", help="score an imputed tensor")
    p.add_argument("--truth", required=True)
    p.add_argument("--imputed", required=True)
    p.add_argument("--score-mask", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="run a parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("convert", help="long CSV to tensor + native mask")
    p.add_argument("--csv", required=True)
    p.add_argument("--dims")
    p.add_argument("--out-tensor", required=True)
    p.add_argument("--out-mask", required=True)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (LrtcError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
