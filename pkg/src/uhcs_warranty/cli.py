"""Command-line front end.

Exit codes: 0 success, 2 I/O error, 3 validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bayes import PosteriorChain, fit, predictive_quantile
from .censoring import UhcsScheme, classify, simulate
from .config import L_LEVEL, T_W_LEVEL, RunConfig, load_config
from .errors import NumericalError, ValidationError
from .fileio import (atomic_write_text, censored_from_dict, censored_to_dict,
                     dump_json, read_times, resolve_data_path, tsv)
from .lifetime import LogNormalParams
from .optimizer import optimize, sweep_a
from .warranty import WarrantyLengths, dissatisfaction, rebate

EXIT_IO, EXIT_VALIDATION, EXIT_NUMERICAL = 2, 3, 4
DEFAULT_A_VALUES = (0.01, 0.05, 0.09, 0.2, 0.5, 0.9)


def _millions(x: float) -> str:
    return f"{x:.2f} ({x / 1e6:.3f}M)"


def _args_hash(args: argparse.Namespace, keys) -> str:
    payload = json.dumps({k: getattr(args, k) for k in keys}, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _scheme_from_args(args) -> UhcsScheme:
    if args.config:
        return load_config(args.config).scheme_obj()
    values = {"n": args.n, "l": args.l, "r": args.r, "T1": args.t1, "T2": args.t2}
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise ValidationError(f"scheme flags missing: {', '.join(missing)} (or pass --config)")
    return UhcsScheme(**values)


def _load_chain(path) -> PosteriorChain:
    return PosteriorChain.from_csv(Path(path).read_text())


def _policy_for(cfg: RunConfig, chain: PosteriorChain | None):
    t_w = L = None
    if chain is not None:
        if cfg.policy.get("t_w") is None:
            t_w = predictive_quantile(chain, T_W_LEVEL)
        if cfg.policy.get("L") is None:
            L = predictive_quantile(chain, L_LEVEL)
    return cfg.policy_obj(t_w=t_w, L=L)


def _policy_record(policy) -> dict:
    return {"S": policy.S, "A2": policy.A2, "M": policy.M, "q1_dissat": policy.q1_dissat,
            "q2_dissat": policy.q2_dissat, "L": policy.L, "t_w": policy.t_w,
            "p_star": policy.p_star, "rebate_kind": policy.rebate_kind, "a": policy.a,
            "A1": policy.A1}


# -- commands -----------------------------------------------------------------


def cmd_classify(args) -> int:
    scheme = _scheme_from_args(args)
    times = read_times(resolve_data_path(args.data))
    sample = classify(np.sort(times), scheme)
    record = censored_to_dict(sample)
    record["config_hash"] = _args_hash(args, ("data", "n", "l", "r", "t1", "t2", "config"))
    atomic_write_text(args.out, dump_json(record))
    print(sample.summary())
    return 0


def cmd_simulate(args) -> int:
    scheme = _scheme_from_args(args)
    sample = simulate(scheme, LogNormalParams(args.mu, args.tau), args.seed)
    record = censored_to_dict(sample)
    record["seed"] = args.seed
    record["config_hash"] = _args_hash(args, ("n", "l", "r", "t1", "t2", "config", "mu", "tau"))
    atomic_write_text(args.out, dump_json(record))
    print(sample.summary())
    return 0


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    if args.censored:
        sample = censored_from_dict(json.loads(Path(args.censored).read_text()))
    else:
        if cfg.data_path is None:
            raise ValidationError("config has no data_path and --censored was not given")
        sample = classify(np.sort(read_times(cfg.data_path)), cfg.scheme_obj())
    chain = fit(sample, cfg.prior_obj(), cfg.sampler_obj())
    out = Path(cfg.output_dir)
    atomic_write_text(out / "chain.csv", chain.to_csv())
    diag = {
        "acceptance_rate": chain.acceptance_rate,
        "seed": cfg.seed,
        "N": chain.config.N,
        "N0": chain.config.N0,
        "proposal_scale": chain.config.proposal_scale,
        "proposal_scale_used": chain.proposal_scale_used,
        "draws": len(chain),
        "case": sample.case_label,
        "d": sample.d,
        "xi": sample.xi,
        "config_hash": cfg.hash(),
    }
    atomic_write_text(out / "diagnostics.json", dump_json(diag))
    print(f"{sample.summary()}; kept {len(chain)} draws, acceptance {chain.acceptance_rate:.3f}")
    print(f"wrote {out / 'chain.csv'} and {out / 'diagnostics.json'}")
    return 0


def cmd_predict(args) -> int:
    chain = _load_chain(args.chain)
    for p in args.p:
        print(f"quantile({p:g}) = {predictive_quantile(chain, p):.3f}")
    return 0


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    chain = _load_chain(args.chain)
    policy = _policy_for(cfg, chain)
    if args.rebate_kind:
        policy = policy.replace(rebate_kind=args.rebate_kind)
    if args.a is not None:
        policy = policy.replace(a=args.a)
    res = optimize(chain, policy, grid_density=int(cfg.optimizer["grid_density"]), seed=cfg.seed)
    record = {**res.as_dict(), "policy": _policy_record(policy), "seed": cfg.seed,
              "config_hash": cfg.hash()}
    path = Path(args.out) if args.out else Path(cfg.output_dir) / "optimize.json"
    atomic_write_text(path, dump_json(record))
    print(f"w1* = {res.w_star.w1:.3f}, w2* = {res.w_star.w2:.3f}, u* = {_millions(res.u_star)}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    chain = _load_chain(args.chain)
    policy = _policy_for(cfg, chain)
    rows = sweep_a(chain, policy, args.a, grid_density=int(cfg.optimizer["grid_density"]),
                   seed=cfg.seed)
    out = Path(cfg.output_dir)
    atomic_write_text(out / "sweep.tsv",
                      tsv(("a", "w1", "w2", "u_star"), [(r.a, r.w1, r.w2, r.u_star) for r in rows]))
    meta = {"rows": [vars(r) for r in rows], "policy": _policy_record(policy),
            "seed": cfg.seed, "config_hash": cfg.hash()}
    atomic_write_text(out / "sweep.json", dump_json(meta))
    for r in rows:
        print(f"a={r.a:g}\tw1*={r.w1:.3f}\tw2*={r.w2:.3f}\tu*={_millions(r.u_star)}")
    return 0


def cmd_plotdata(args) -> int:
    cfg = load_config(args.config)
    chain = _load_chain(args.chain) if args.chain else None
    policy = _policy_for(cfg, chain)
    if args.rebate_kind:
        policy = policy.replace(rebate_kind=args.rebate_kind)
    if args.a is not None:
        policy = policy.replace(a=args.a)
    w = WarrantyLengths(args.w1, args.w2)
    w.check_within(policy.L)
    upper = 1.1 * max(policy.L, w.w2)
    t = np.union1d(np.linspace(0.0, upper, args.points),
                   [w.w1, w.w2, 0.5 * (w.w1 + w.w2), policy.L])
    out = Path(cfg.output_dir)
    prefix = args.prefix
    atomic_write_text(out / f"{prefix}rebate.tsv",
                      tsv(("t", "value"), zip(t, rebate(t, w, policy))))
    atomic_write_text(out / f"{prefix}dissatisfaction.tsv",
                      tsv(("t", "value"), zip(t, dissatisfaction(t, w, policy))))
    meta = {"w1": w.w1, "w2": w.w2, "policy": _policy_record(policy), "seed": cfg.seed,
            "config_hash": cfg.hash()}
    atomic_write_text(out / f"{prefix}plotdata.json", dump_json(meta))
    print(f"wrote {prefix}rebate.tsv and {prefix}dissatisfaction.tsv to {out}")
    return 0


# -- parser -------------------------------------------------------------------


def _add_scheme_flags(p):
    p.add_argument("--config", help="JSON run config (its scheme section is used)")
    p.add_argument("--n", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)


def _add_policy_overrides(p):
    p.add_argument("--rebate-kind", choices=("linear", "nonlinear"))
    p.add_argument("--a", type=float, help="non-linearity of the pro-rata rebate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uhcs-warranty",
        description="Bayesian optimal FRW/PRW warranty lengths from hybrid-censored lifetimes.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="apply the censoring scheme to a complete sample")
    p.add_argument("--data", required=True,
                   help="failure times, one per line (or builtin:boeing_aircon)")
    _add_scheme_flags(p)
    p.add_argument("--out", default="censored.json")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="simulate censored log-normal data")
    _add_scheme_flags(p)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="simulated.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="sample the posterior; writes chain.csv and diagnostics.json")
    p.add_argument("--config", required=True)
    p.add_argument("--censored", help="censored-sample JSON to use instead of data_path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="posterior-predictive lifetime quantiles")
    p.add_argument("--chain", required=True)
    p.add_argument("--p", type=float, nargs="+", default=[0.1, 0.5])
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("optimize", help="optimal (w1, w2) for the configured policy")
    p.add_argument("--config", required=True)
    p.add_argument("--chain", required=True)
    p.add_argument("--out")
    _add_policy_overrides(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="optimise the non-linear policy for several a")
    p.add_argument("--config", required=True)
    p.add_argument("--chain", required=True)
    p.add_argument("--a", type=float, nargs="+", default=list(DEFAULT_A_VALUES))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plotdata", help="rebate and dissatisfaction curves as TSV")
    p.add_argument("--config", required=True)
    p.add_argument("--chain", help="needed only when the policy leaves t_w or L null")
    p.add_argument("--w1", type=float, required=True)
    p.add_argument("--w2", type=float, required=True)
    p.add_argument("--points", type=int, default=601)
    p.add_argument("--prefix", default="")
    _add_policy_overrides(p)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
