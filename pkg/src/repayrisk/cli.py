"""``repay-risk`` command line.

Subcommands ``prob``, ``simulate``, ``calibrate``, ``table`` and ``converge``
read a YAML config::

    arrivals: {kind: exponential, lambda: 1.0}   # rates per unit time
    severity: {alpha: 1.0}
    loan: {u: 1.0, c: 1.0}                        # currency, currency per unit time
    simulate: {t: 100, n: 100000, algorithm: 1}

Every result file starts with ``# repay-risk v<version> <command>``.  Exit
status is 0 on success, 2 for configuration or domain errors and 3 for
numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .closedform import default_curve, phi_erlang2
from .calibrate import (
    PremiumAdvisory,
    SolvencyTarget,
    generate_table,
    min_rate_bisection,
    min_rate_memoryless,
    min_rate_randomized,
    premium_split,
    table_csv,
)
from .errors import ConfigError, ConvergenceError, DomainError
from .fredholm import OperatorConfig, decay_bound, solve_psi_infinite
from .model import DisasterModel, LoanSpec, SeedSpec, loan_from_mapping, model_from_mapping
from .montecarlo import (
    ESTIMATE_HEADER,
    convergence_study,
    histogram_cashflow,
    simulate_algorithm1,
    simulate_algorithm2,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

TABLE_GRIDS = {
    "table1": ("memoryless", [1, 2, 3, 4, 5], [1, 2, 3, 4, 5, 6], "lambda", "table1_legacy"),
    "table2": ("randomized", [1, 3, 5, 7, 9], [1, 2, 3, 4, 5, 6, 7], "k", "default_at_most_eps"),
}

SECTION_KEYS = {
    "prob": {"method", "u_grid", "n_u"},
    "simulate": {"algorithm", "t", "n", "antithetic", "bins", "histogram_out"},
    "calibrate": {"epsilon", "convention", "method", "base_rate", "bracket"},
    "table": {"name", "family", "rows", "cols", "epsilon", "convention"},
    "converge": {"t_grid", "n"},
}
TOP_KEYS = {"arrivals", "severity", "loan", "seed", "workers", "output"} | set(SECTION_KEYS)


@dataclass
class RunConfig:
    """Parsed config plus command-line overrides."""

    raw: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    output: str | None = None

    def section(self, name) -> dict:
        sec = self.raw.get(name) or {}
        if not isinstance(sec, dict):
            raise ConfigError("must be a mapping", name)
        return sec

    def model(self) -> DisasterModel:
        return model_from_mapping(self.raw)

    def loan(self) -> LoanSpec:
        return loan_from_mapping(self.raw)

    def rate(self) -> float:
        loan = self.section("loan")
        if "c" not in loan:
            raise ConfigError("missing required key", "loan.c")
        return _num(loan["c"], "loan.c")


def _num(value, key, positive=True, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"must be positive, got {value!r}", key)
    if integer:
        if float(value) != int(value):
            raise ConfigError(f"expected an integer, got {value!r}", key)
        return int(value)
    return float(value)


def _num_list(value, key, allow_zero=False):
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra:
            raise ConfigError("unknown key", f"{key}.{sorted(extra)[0]}")
        for k in ("start", "stop", "num"):
            if k not in value:
                raise ConfigError("missing required key", f"{key}.{k}")
        start = _num(value["start"], f"{key}.start", positive=False)
        stop = _num(value["stop"], f"{key}.stop")
        num = _num(value["num"], f"{key}.num", integer=True)
        out = np.linspace(start, stop, num)
    else:
        if not isinstance(value, (list, tuple)):
            value = [value]
        out = np.array([_num(v, f"{key}[{i}]", positive=False) for i, v in enumerate(value)], dtype=float)
    if out.size == 0:
        raise ConfigError("must not be empty", key)
    if np.any(out < 0) or (not allow_zero and np.any(out == 0)):
        raise ConfigError("values must be " + ("nonnegative" if allow_zero else "positive"), key)
    return out


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}", str(path)) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", str(path))
    return data


def build_run_config(raw: dict, seed=None, workers=None, output=None) -> RunConfig:
    for key in raw:
        if key not in TOP_KEYS:
            raise ConfigError("unknown key", str(key))
    for name, allowed in SECTION_KEYS.items():
        sec = raw.get(name)
        if sec is None:
            continue
        if not isinstance(sec, dict):
            raise ConfigError("must be a mapping", name)
        for key in sec:
            if key not in allowed:
                raise ConfigError("unknown key", f"{name}.{key}")
    cfg = RunConfig(raw=raw)
    if "seed" in raw:
        s = raw["seed"]
        if isinstance(s, bool) or not isinstance(s, int):
            raise ConfigError(f"expected an integer, got {s!r}", "seed")
        cfg.seed = s
    if "workers" in raw:
        cfg.workers = _num(raw["workers"], "workers", integer=True)
    if "output" in raw:
        cfg.output = str(raw["output"])
    if seed is not None:
        cfg.seed = seed
    if workers is not None:
        if workers < 1:
            raise ConfigError("must be at least 1", "--workers")
        cfg.workers = workers
    if output is not None:
        cfg.output = output
    return cfg


# ----------------------------------------------------------------- commands

def _describe(model: DisasterModel) -> str:
    a = model.arrivals
    if a.kind == "randomized_exponential":
        arr = f"randomized(k={a.k:g},theta={a.theta:g})"
    elif a.kind == "erlang":
        arr = f"erlang(k={a.k},lam={a.lam:g})"
    else:
        arr = f"exponential(lam={a.lam:g})"
    return f"{arr}+severity(alpha={model.severity.alpha:g})"


def _fmt(x):
    return f"{x:.17g}"


def cmd_prob(cfg: RunConfig, args) -> list[str]:
    sec = cfg.section("prob")
    method = args.method or sec.get("method", "closed")
    if method not in ("closed", "fredholm"):
        raise ConfigError(f"must be 'closed' or 'fredholm', got {method!r}", "prob.method")
    model = cfg.model()
    c = cfg.rate()
    if args.u is not None:
        grid = np.array(args.u, dtype=float)
        if np.any(grid < 0):
            raise ConfigError("values must be nonnegative", "--u")
    elif "u_grid" in sec:
        grid = _num_list(sec["u_grid"], "prob.u_grid", allow_zero=True)
    else:
        grid = np.array([cfg.loan().u])
    if method == "closed":
        phi = default_curve(model, c)(grid)
        phi = np.atleast_1d(phi)
    else:
        n_u = _num(sec.get("n_u", 4097), "prob.n_u", integer=True)
        op = OperatorConfig.auto(model, c, extent=float(grid.max()), n_u=n_u, workers=cfg.workers)
        psi = solve_psi_infinite(model, c, op)
        phi = 1.0 - np.atleast_1d(psi(grid))
    lines = ["u,phi,psi"]
    lines += [f"{_fmt(u)},{_fmt(p)},{_fmt(1.0 - p)}" for u, p in zip(grid, phi)]
    return lines


def cmd_simulate(cfg: RunConfig, args) -> list[str]:
    sec = cfg.section("simulate")
    model, loan = cfg.model(), cfg.loan()
    algorithm = args.algorithm or sec.get("algorithm", 1)
    if algorithm not in (1, 2):
        raise ConfigError(f"must be 1 or 2, got {algorithm!r}", "simulate.algorithm")
    t = args.t if args.t is not None else sec.get("t")
    if t is None:
        raise ConfigError("missing required key", "simulate.t")
    t = _num(t, "simulate.t")
    n = _num(args.n if args.n is not None else sec.get("n", 100000), "simulate.n", integer=True)
    antithetic = bool(args.antithetic or sec.get("antithetic", False))
    bins = args.bins if args.bins is not None else sec.get("bins")
    seed = SeedSpec(cfg.seed)
    if bins is not None:
        bins = _num(bins, "simulate.bins", integer=True)
        if antithetic:
            raise ConfigError("histograms use plain sampling", "simulate.antithetic")
        hist = histogram_cashflow(model, loan, t, n, bins, seed, algorithm, cfg.workers)
        est = hist.estimate
    else:
        hist = None
        if algorithm == 1:
            est = simulate_algorithm1(model, loan, t, n, seed, cfg.workers, antithetic)
        else:
            if antithetic:
                raise ConfigError("antithetic sampling is only available for algorithm 1", "simulate.antithetic")
            est = simulate_algorithm2(model, loan, t, n, seed, cfg.workers)
    lines = [ESTIMATE_HEADER, est.csv_row()]
    if hist is not None:
        hist_lines = [f"# repay-risk v{__version__} simulate-histogram"] + list(hist.csv_lines())
        target = args.hist_out or sec.get("histogram_out")
        if target:
            with open(target, "w", newline="") as fh:
                fh.write("\n".join(hist_lines) + "\n")
        else:
            lines += [""] + hist_lines
    return lines


def cmd_calibrate(cfg: RunConfig, args) -> list[str]:
    sec = cfg.section("calibrate")
    eps = _num(args.epsilon if args.epsilon is not None else sec.get("epsilon", 1e-4), "calibrate.epsilon")
    convention = args.convention or sec.get("convention", "default_at_most_eps")
    try:
        target = SolvencyTarget(eps, convention)
    except DomainError as exc:
        raise ConfigError(str(exc), "calibrate.epsilon" if "epsilon" in str(exc) else "calibrate.convention") from None
    model = cfg.model()
    method = sec.get("method", "auto")
    if method not in ("auto", "closed", "bisection"):
        raise ConfigError(f"must be auto, closed or bisection, got {method!r}", "calibrate.method")
    kind = model.arrivals.kind
    alpha = model.severity.alpha
    if method in ("auto", "closed") and kind == "exponential":
        quote = min_rate_memoryless(model.arrivals.lam, alpha, target)
    elif method in ("auto", "closed") and kind == "randomized_exponential":
        quote = min_rate_randomized(model.arrivals.k, alpha, target, theta=model.arrivals.theta)
    elif method == "closed":
        raise ConfigError(f"no closed form for {kind} arrivals; use bisection", "calibrate.method")
    else:
        if convention != "default_at_most_eps":
            raise ConfigError("bisection supports default_at_most_eps only", "calibrate.convention")
        u = cfg.loan().u
        if kind == "erlang" and model.arrivals.shape == 2:
            phi = lambda c: phi_erlang2(model, u, c)
        elif kind in ("exponential", "randomized_exponential"):
            phi = lambda c: default_curve(model, c)(u)
        else:
            def phi(c):
                op = OperatorConfig.auto(model, c, extent=u, workers=cfg.workers)
                return 1.0 - float(solve_psi_infinite(model, c, op)(u))
        bracket = sec.get("bracket", [1e-3 * u, u])
        if not isinstance(bracket, list) or len(bracket) != 2:
            raise ConfigError("must be a list [lo, hi]", "calibrate.bracket")
        bracket = (_num(bracket[0], "calibrate.bracket[0]"), _num(bracket[1], "calibrate.bracket[1]"))
        quote = min_rate_bisection(phi, u, target, bracket, model=_describe(model))
    header = ["model", "epsilon", "convention", "method", "c_over_u"]
    row = [quote.model, _fmt(eps), convention, quote.method, _fmt(quote.rate)]
    base = args.base_rate if args.base_rate is not None else sec.get("base_rate")
    if base is not None:
        base = _num(base, "calibrate.base_rate")
        u = cfg.loan().u
        header += ["c_total", "c_base", "premium"]
        total = quote.rate * u
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", PremiumAdvisory)
            premium = premium_split(total, base)
        for w in caught:
            print(f"repay-risk calibrate: advisory: {w.message}", file=sys.stderr)
        row += [_fmt(total), _fmt(base), _fmt(premium)]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([header, row])
    return buf.getvalue().splitlines()


def cmd_table(cfg: RunConfig, args) -> list[str]:
    sec = cfg.section("table")
    name = args.name or sec.get("name")
    if name is not None:
        if name not in TABLE_GRIDS:
            raise ConfigError(f"must be one of {sorted(TABLE_GRIDS)}, got {name!r}", "table.name")
        family, rows, cols, row_name, convention = TABLE_GRIDS[name]
    else:
        family = sec.get("family", "memoryless")
        if family not in ("memoryless", "randomized"):
            raise ConfigError(f"must be memoryless or randomized, got {family!r}", "table.family")
        row_name = "lambda" if family == "memoryless" else "k"
        for key in ("rows", "cols"):
            if key not in sec:
                raise ConfigError("missing required key (or set table.name)", f"table.{key}")
        rows = list(_num_list(sec["rows"], "table.rows"))
        cols = list(_num_list(sec["cols"], "table.cols"))
        convention = "table1_legacy" if family == "memoryless" else "default_at_most_eps"
    convention = args.convention or sec.get("convention", convention)
    eps = _num(args.epsilon if args.epsilon is not None else sec.get("epsilon", 1e-4), "table.epsilon")
    try:
        target = SolvencyTarget(eps, convention)
    except DomainError as exc:
        raise ConfigError(str(exc), "table.convention") from None
    matrix = generate_table(rows, cols, target, family, workers=cfg.workers)
    return table_csv(matrix, rows, cols, row_name, "alpha").splitlines()


def cmd_converge(cfg: RunConfig, args) -> list[str]:
    sec = cfg.section("converge")
    model, loan = cfg.model(), cfg.loan()
    if args.t is not None:
        t_grid = np.array(args.t, dtype=float)
        if np.any(t_grid <= 0):
            raise ConfigError("values must be positive", "--t")
    elif "t_grid" in sec:
        t_grid = _num_list(sec["t_grid"], "converge.t_grid")
    else:
        raise ConfigError("missing required key", "converge.t_grid")
    n = _num(args.n if args.n is not None else sec.get("n", 100000), "converge.n", integer=True)
    rows = convergence_study(model, loan, t_grid, n, SeedSpec(cfg.seed), cfg.workers)
    try:
        phi_inf = float(default_curve(model, loan.c)(loan.u))
    except DomainError:
        op = OperatorConfig.auto(model, loan.c, extent=loan.u, workers=cfg.workers)
        phi_inf = 1.0 - float(solve_psi_infinite(model, loan.c, op)(loan.u))
    bound = decay_bound(model) if model.arrivals.kind == "exponential" else None
    lines = ["t,phi_hat,stderr,phi_inf,bound"]
    for t, p, se in rows:
        b = float(bound(t)) if bound is not None else math.nan
        lines.append(f"{_fmt(t)},{_fmt(p)},{_fmt(se)},{_fmt(phi_inf)},{_fmt(b)}")
    return lines


COMMANDS = {
    "prob": (cmd_prob, "closedform/fredholm"),
    "simulate": (cmd_simulate, "montecarlo"),
    "calibrate": (cmd_calibrate, "calibrate"),
    "table": (cmd_table, "calibrate"),
    "converge": (cmd_converge, "montecarlo"),
}


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    glob = argparse.ArgumentParser(add_help=False)
    glob.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="YAML run configuration")
    glob.add_argument("--seed", type=int, metavar="N", default=argparse.SUPPRESS,
                      help="master seed (overrides the config)")
    glob.add_argument("--workers", type=int, metavar="N", default=argparse.SUPPRESS,
                      help="worker threads; results do not depend on it")
    glob.add_argument("--out", metavar="PATH", default=argparse.SUPPRESS, help="output CSV (default stdout)")

    p = argparse.ArgumentParser(prog="repay-risk", parents=[glob],
                                description="Default probabilities and premium calibration for disaster-exposed loans.")
    p.add_argument("--version", action="version", version=f"repay-risk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("prob", parents=[glob], help="infinite-horizon default probability")
    sp.add_argument("--method", choices=["closed", "fredholm"])
    sp.add_argument("--u", type=_float_list, help="comma-separated loan sizes")

    sp = sub.add_parser("simulate", parents=[glob], help="Monte Carlo estimate at a finite horizon")
    sp.add_argument("--algorithm", type=int, choices=[1, 2])
    sp.add_argument("--t", type=float, help="horizon")
    sp.add_argument("--n", type=int, help="number of scenarios")
    sp.add_argument("--antithetic", action="store_true")
    sp.add_argument("--bins", type=int, help="also emit a histogram of U_t")
    sp.add_argument("--hist-out", metavar="PATH")

    sp = sub.add_parser("calibrate", parents=[glob], help="minimum repayment rate for a solvency target")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--convention", choices=["default_at_most_eps", "table1_legacy"])
    sp.add_argument("--base-rate", type=float, help="mortgage rate c0; adds the premium c* - c0")

    sp = sub.add_parser("table", parents=[glob], help="matrix of minimum c/u over a parameter grid")
    sp.add_argument("--name", choices=sorted(TABLE_GRIDS), help="built-in grid")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--convention", choices=["default_at_most_eps", "table1_legacy"])

    sp = sub.add_parser("converge", parents=[glob], help="finite-horizon estimates approaching the limit")
    sp.add_argument("--t", type=_float_list, help="comma-separated horizons")
    sp.add_argument("--n", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn, component = COMMANDS[args.command]
    try:
        raw = load_config(args.config) if getattr(args, "config", None) else {}
        cfg = build_run_config(raw, getattr(args, "seed", None), getattr(args, "workers", None),
                               getattr(args, "out", None))
        lines = fn(cfg, args)
    except (ConfigError, DomainError) as exc:
        print(f"repay-risk {args.command}: {component}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"repay-risk {args.command}: {component}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = "\n".join([f"# repay-risk v{__version__} {args.command}"] + lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
