"""Command line interface.

Exit codes: 0 success, 1 solver/numerics failure, 2 configuration error,
3 verification property failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ConfigError, load_config
from .demos import (demo_counterexample_quadratic_growth,
                    demo_counterexample_royer, demo_nonconvex_generator)
from .finance import (FinanceError, GoodDealSpec, MarketSpec, exp_utility_solve,
                      gooddeal_bound, power_utility_solve)
from .generators import GeneratorError
from .measures import MeasureError
from .reports import CsvTable, write_json_report
from .solvers import SolverError, solve_lattice, solve_lsmc
from .verification import verify_suite

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
EXIT_PROPERTY = 3


def _out_paths(cfg, default_prefix):
    out = cfg.output or {}
    d = out.get("dir", ".")
    prefix = out.get("prefix", default_prefix)
    formats = out.get("formats", ["csv", "json"])
    os.makedirs(d, exist_ok=True)
    return d, prefix, formats


def _write_solution(sol, cfg, default_prefix):
    d, prefix, formats = _out_paths(cfg, default_prefix)
    written = []
    if "csv" in formats:
        path = os.path.join(d, f"{prefix}_summary.csv")
        sol.summary_table().write(path)
        written.append(path)
    if "json" in formats:
        path = os.path.join(d, f"{prefix}_result.json")
        payload = {"Y0": sol.Y0, "se_Y0": sol.se_Y0,
                   "backend": sol.backend,
                   "picard_iters_max": sol.picard_iters_max}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        written.append(path)
    return written


def _market_from_config(cfg):
    mkt = cfg.market
    if mkt is None:
        raise ConfigError("this command needs a market block in the config")
    d = int(mkt.get("d", 1))
    k = int(mkt.get("k", d))
    sigma = mkt.get("sigma")
    sigma = np.asarray(sigma, dtype=float) if sigma is not None else np.eye(k, d)
    return MarketSpec(d=d, k=k, sigma=sigma,
                      phi=np.atleast_1d(np.asarray(mkt.get("phi", 0.0),
                                                   dtype=float)),
                      beta=float(mkt.get("beta", 0.0)),
                      psi=mkt.get("psi", 0.0))


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    gen = cfg.generator_spec()
    grid, mm, zeta = cfg.grid(), cfg.mark_measure(), cfg.zeta()
    scfg = cfg.solve_config()
    backend = cfg.solver.get("backend", "lattice")
    if backend == "lattice":
        sol = solve_lattice(gen, cfg.terminal("lattice"), grid, mm, zeta, scfg)
    else:
        sol = solve_lsmc(gen, cfg.terminal("lsmc"), grid, mm, zeta,
                         int(cfg.model.get("d", 1)), scfg,
                         int(cfg.model.get("seed", 0)))
    written = _write_solution(sol, cfg, "solve")
    print(f"Y0 = {sol.Y0!r} (backend {sol.backend})")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_utility(args) -> int:
    cfg = load_config(args.config)
    market = _market_from_config(cfg)
    mkt = cfg.market
    grid, mm, zeta = cfg.grid(), cfg.mark_measure(), cfg.zeta()
    scfg = cfg.solve_config()
    seed = int(cfg.model.get("seed", 0))
    if "alpha" in mkt:
        sol, thetas, _ = exp_utility_solve(market, float(mkt["alpha"]),
                                           cfg.terminal("lsmc"), grid, mm,
                                           zeta, scfg, seed)
        theta0 = np.mean(thetas[0], axis=0)
        kind = "exponential"
    elif "gamma" in mkt:
        backend = cfg.solver.get("backend", "lattice")
        sol, Y, thetas, _ = power_utility_solve(
            market, float(mkt["gamma"]), cfg.terminal(backend), grid, mm, zeta,
            scfg, backend=backend, seed=seed)
        theta0 = np.mean(thetas[0], axis=0)
        kind = "power"
    else:
        raise ConfigError("market block needs alpha (exponential) or gamma "
                          "(power) for the utility command")
    written = _write_solution(sol, cfg, f"utility_{kind}")
    y0 = float(np.mean(Y[0])) if kind == "power" else sol.Y0
    print(f"{kind} utility: Y0 = {y0!r}, theta*(0) = {theta0.tolist()}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_gooddeal(args) -> int:
    cfg = load_config(args.config)
    market = _market_from_config(cfg)
    mkt = cfg.market
    if "K" not in mkt:
        raise ConfigError("market.K is required for the gooddeal command")
    grid, mm, zeta = cfg.grid(), cfg.mark_measure(), cfg.zeta()
    gd = GoodDealSpec(K=float(mkt["K"]), market=market, mm=mm, zeta=zeta,
                      T=grid.horizon)
    backend = cfg.solver.get("backend", "lattice")
    X = cfg.terminal(backend)
    scfg = cfg.solve_config()
    seed = int(cfg.model.get("seed", 0))
    up = gooddeal_bound(gd, X, "upper", grid, scfg, backend, seed, market.d)
    lo = gooddeal_bound(gd, X, "lower", grid, scfg, backend, seed, market.d)
    d, prefix, formats = _out_paths(cfg, "gooddeal")
    written = []
    if "csv" in formats:
        table = CsvTable(["side", "Y0", "se_Y0"])
        table.add("lower", lo.Y0, lo.se_Y0)
        table.add("upper", up.Y0, up.se_Y0)
        path = os.path.join(d, f"{prefix}_bounds.csv")
        table.write(path)
        written.append(path)
    if "json" in formats:
        path = os.path.join(d, f"{prefix}_bounds.json")
        with open(path, "w") as fh:
            json.dump({"lower": lo.Y0, "upper": up.Y0,
                       "se_lower": lo.se_Y0, "se_upper": up.se_Y0,
                       "K": float(mkt["K"]), "backend": backend}, fh, indent=2)
            fh.write("\n")
        written.append(path)
    print(f"good-deal bounds: [{lo.Y0!r}, {up.Y0!r}]")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_demo(args) -> int:
    name = args.name
    if name == "royer":
        table = demo_counterexample_royer([4, 16, 64])
    elif name == "growth":
        table = demo_counterexample_quadratic_growth()
    elif name == "nonconvex":
        table, cert = demo_nonconvex_generator()
        if cert is not None:
            print(f"# convexity violated at midpoint of u0={cert[0]!r}, "
                  f"u1={cert[1]!r}: excess {cert[2]!r}")
        else:
            print("# no midpoint convexity violation found")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown demo {name!r}")
    if args.out:
        table.write(args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(table.render())
    return EXIT_OK


def cmd_verify(args) -> int:
    reports = verify_suite(args.seed)
    for rep in reports:
        print(f"{rep.property_id}: {rep.status} "
              f"(statistic {rep.statistic:.6g}, tolerance {rep.tolerance:.6g})")
    if args.out:
        write_json_report(reports, args.out)
        print(f"wrote {args.out}")
    failed = [r for r in reports if r.status == "fail"]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed", file=sys.stderr)
        return EXIT_PROPERTY
    print(f"all {len(reports)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="jbsde",
        description="Solvers and verification tools for BSDEs with jumps")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve the BSDE described by a config")
    ps.add_argument("config")
    ps.set_defaults(fn=cmd_solve)

    pu = sub.add_parser("utility", help="exponential or power utility solve")
    pu.add_argument("config")
    pu.set_defaults(fn=cmd_utility)

    pg = sub.add_parser("gooddeal", help="good-deal valuation bounds")
    pg.add_argument("config")
    pg.set_defaults(fn=cmd_gooddeal)

    pd = sub.add_parser("demo", help="run a counterexample demonstration")
    pd.add_argument("name", choices=["royer", "growth", "nonconvex"])
    pd.add_argument("--out", default=None, help="write the CSV table here")
    pd.set_defaults(fn=cmd_demo)

    pv = sub.add_parser("verify", help="run the verification suite")
    pv.add_argument("--seed", type=int, default=42)
    pv.add_argument("--out", default=None, help="write a JSON report here")
    pv.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, GeneratorError, FinanceError, MeasureError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
