"""Command-line entry point: ``rlnc-reliability <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bounds import NONSYSTEMATIC, VARIANTS, CodeSpec, ConsistencyError
from .gf import FieldSpec
from .harness import (
    DEFAULT_METHODS,
    DEFAULT_TRIALS,
    FORMATS,
    METHODS,
    ConfigError,
    ExperimentConfig,
    bound_value,
    load_config,
    mse_report,
    parse_eps,
    preset,
    read_rows,
    rows_to_csv,
    rows_to_jsonl,
    run_sweep,
)
from .rankprob import joint_full_rank_bound, joint_full_rank_product_bound
from .sim import simulate_correlated_ensemble, simulate_multicast

SEED_ENV = "RLNC_RELIABILITY_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",")]


def _n_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


def _add_code_args(p: argparse.ArgumentParser, *, sweep: bool = False) -> None:
    if sweep:
        p.add_argument("--K", type=_int_list, help="comma list of source sizes")
        p.add_argument("--L", type=_int_list, help="comma list of user counts")
        p.add_argument("--q", type=_int_list, help="comma list of field sizes")
        p.add_argument("--eps", action="append", help="erasure spec; repeat for several")
        p.add_argument("--variant", action="append", choices=VARIANTS)
        p.add_argument("--N", type=_n_range, metavar="LO:HI", help="N offsets from K (default 0:10)")
    else:
        p.add_argument("--N", type=int, required=True)
        p.add_argument("--K", type=int, required=True)
        p.add_argument("--q", type=int, default=2)
        p.add_argument("--L", type=int, default=1)
        p.add_argument("--eps", default="0.1", help="0.1 | 0.01,0.05,... | linspace:lo:hi")
        p.add_argument("--variant", choices=VARIANTS, default=NONSYSTEMATIC)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlnc-reliability", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate analytical bounds at one point")
    _add_code_args(p)
    p.add_argument("--method", action="append", choices=METHODS)

    p = sub.add_parser("simulate", help="Monte Carlo estimate at one point")
    _add_code_args(p)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep", help="bounds vs simulation over a parameter grid")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="YAML experiment file")
    src.add_argument("--preset", help="name of a bundled experiment set (see README)")
    _add_code_args(p, sweep=True)
    p.add_argument("--method", action="append", choices=METHODS)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")

    p = sub.add_parser("mse", help="MSE of each bound per curve from sweep output")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")

    p = sub.add_parser("example2", help="three correlated 6x5 binary matrices")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_bound(a) -> None:
    code = CodeSpec(a.N, a.K, a.q, a.variant)
    net = parse_eps(a.eps, a.L)
    result = {"N": a.N, "K": a.K, "q": a.q, "L": a.L, "variant": a.variant, "eps": list(net.epsilons)}
    for m in a.method or DEFAULT_METHODS:
        result[m] = bound_value(m, code, net)
    print(json.dumps(result))


def _cmd_simulate(a) -> None:
    if a.trials < 1:
        raise ConfigError("trials must be >= 1")
    code = CodeSpec(a.N, a.K, a.q, a.variant)
    net = parse_eps(a.eps, a.L)
    seed = a.seed if a.seed is not None else _default_seed()
    est = simulate_multicast(code, net, a.trials, seed, workers=a.workers)
    print(json.dumps({"mean": est.mean, "half_width": est.half_width, "trials": est.trials, "seed": seed}))


def _cmd_sweep(a) -> None:
    if a.config:
        configs = load_config(a.config)
    elif a.preset:
        configs = preset(a.preset)
    else:
        configs = [ExperimentConfig()]
    overrides = {
        "K": a.K, "L": a.L, "q": a.q, "eps": a.eps, "variant": a.variant,
        "N_offsets": a.N, "methods": a.method, "trials": a.trials,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    seed = a.seed if a.seed is not None else (_default_seed() if os.environ.get(SEED_ENV) else None)
    if seed is not None:
        overrides["seed"] = seed
    rows = []
    for cfg in configs:
        merged = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
        merged.update(overrides)
        rows.extend(run_sweep(ExperimentConfig(**merged), workers=a.workers))
    _emit(rows_to_csv(rows) if a.format == "csv" else rows_to_jsonl(rows), a.out)


def _cmd_mse(a) -> None:
    entries = mse_report(read_rows(a.infile))
    lines = ["L,K,q,variant,eps_spec,method,mse,points"]
    for e in entries:
        lines.append(",".join(str(x) for x in (*e.group, e.method, repr(e.mse), e.points)))
    _emit("\n".join(lines) + "\n", a.out)


def _cmd_example2(a) -> None:
    seed = a.seed if a.seed is not None else _default_seed()
    m, mu, K = (6, 6, 6), 4, 5
    est = simulate_correlated_ensemble(3, mu, 1, 6, K, FieldSpec(1), a.trials, seed)
    print(json.dumps({
        "product_bound": joint_full_rank_product_bound(m, mu, K, 2),
        "improved_bound": joint_full_rank_bound(m, mu, K, 2),
        "simulated": est.mean,
        "half_width": est.half_width,
        "trials": a.trials,
        "seed": seed,
    }))


COMMANDS = {
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "mse": _cmd_mse,
    "example2": _cmd_example2,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
