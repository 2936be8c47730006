"""Command-line front end.

Every command writes a CSV (to ``--csv`` or standard output) whose rows echo
``n``, ``d``, ``seed`` and ``trials``; numbers are printed with 9 significant
digits so identical configurations give identical bytes for any ``--jobs``.
Exit status: 0 success, 2 invalid configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

from . import __version__
from .geom import Norm, critical_radius, sample_uniform
from .graphs import build_geometric_grid, format_edge_list
from .matching import BipartiteInstance, format_matching, solve
from .properties import PROPERTIES
from .rng import Stream
from .svg import line_plot
from .thresholds import (
    EXACT_MAX_N,
    bernoulli_containment_mc,
    bernoulli_fixed_matching_prob,
    bernoulli_union_bound,
    binomial_three_sigma,
    bottleneck_weights,
    containment_trial,
    estimate_threshold,
    matching_scaling,
    order_statistic,
    pilot_gamma,
    width_scaling,
)

COMMANDS = ("bottleneck", "threshold", "scaling", "containment", "bernoulli", "dump-graph")
METHODS = ("exact", "constructive", "brute", "sorted")

MATCHING_COLUMNS = ("n", "d", "p_norm", "method", "trials", "seed",
                    "median_Mn", "q10_Mn", "q90_Mn", "r_c", "median_ratio")
WIDTH_COLUMNS = ("n", "d", "property", "eps", "trials", "seed",
                 "r_lo", "r_hi", "width", "r_median", "r_c", "width_over_rc")
CONTAINMENT_COLUMNS = ("n", "d", "r", "gamma", "trials", "seed",
                       "frac_Mn_le_gamma", "frac_embedding_ok")
BERNOULLI_COLUMNS = ("n", "p", "P", "trials", "seed",
                     "mc_estimate", "closed_form", "abs_error", "three_sigma")
BOTTLENECK_COLUMNS = ("n", "d", "p_norm", "method", "trials", "seed", "trial", "weight")


class ConfigError(ValueError):
    def __init__(self, fld: str, message: str):
        super().__init__(f"--{fld}: {message}")
        self.field = fld


@dataclass
class ExperimentConfig:
    command: str
    n: Optional[int] = None
    n_list: Optional[list] = None
    d: int = 2
    property_name: str = "connectivity"
    eps: float = 0.1
    trials: int = 100
    seed: int = 0
    p_norm: float = 2.0
    method: str = "exact"
    experiment: str = "matching"
    r: Optional[float] = None
    r_over_rc: Optional[float] = None
    gamma: Optional[float] = None
    gamma_quantile: float = 0.9
    pilot_trials: int = 200
    p: Optional[float] = None
    P: Optional[float] = None
    csv: Optional[str] = None
    svg: Optional[str] = None
    loglog: bool = False
    out: Optional[str] = None
    jobs: Optional[int] = None

    @property
    def norm(self) -> Norm:
        return Norm(self.p_norm)

    def validate(self) -> "ExperimentConfig":
        c = self.command
        if c not in COMMANDS:
            raise ConfigError("command", f"unknown command {c!r}")
        if self.d < 1:
            raise ConfigError("d", "must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", "must lie in [0, 2^64)")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
        if not (self.p_norm > 1):
            raise ConfigError("p-norm", "must be > 1 (inf allowed)")
        if c == "scaling":
            self._validate_scaling()
        elif c in ("threshold", "bottleneck", "containment", "bernoulli", "dump-graph"):
            if self.n is None:
                raise ConfigError("n", "is required")
            if self.n < 1:
                raise ConfigError("n", "must be >= 1")
        if c == "threshold":
            self._validate_eps()
            self._validate_property()
            if self.trials < math.ceil(2 / self.eps):
                raise ConfigError("trials", f"eps={self.eps} needs at least {math.ceil(2 / self.eps)}")
        if c == "bottleneck":
            self._validate_method(self.n)
        if c in ("containment", "dump-graph"):
            self._validate_radius()
        if c == "containment":
            if self.gamma is not None and self.gamma < 0:
                raise ConfigError("gamma", "must be >= 0")
            if not 0 < self.gamma_quantile < 1:
                raise ConfigError("gamma-quantile", "must lie in (0, 1)")
            if self.pilot_trials < 1:
                raise ConfigError("pilot-trials", "must be >= 1")
            if self.d >= 2 and self.n > EXACT_MAX_N:
                raise ConfigError("n", f"containment uses the exact matcher, capped at {EXACT_MAX_N} for d >= 2")
        if c == "bernoulli":
            for name, val in (("p", self.p), ("P", self.P)):
                if val is None:
                    raise ConfigError(name, "is required")
                if not 0 <= val <= 1:
                    raise ConfigError(name, "must lie in [0, 1]")
        return self

    def _validate_eps(self) -> None:
        if not 0 < self.eps < 0.5:
            raise ConfigError("eps", "must lie in (0, 1/2)")

    def _validate_property(self) -> None:
        if self.property_name not in PROPERTIES:
            raise ConfigError("property", f"unknown property {self.property_name!r}; "
                              f"known: {', '.join(sorted(PROPERTIES))}")

    def _validate_method(self, n_max: int) -> None:
        if self.method not in METHODS:
            raise ConfigError("method", f"must be one of {', '.join(METHODS)}")
        if self.method == "exact" and self.d >= 2 and n_max > EXACT_MAX_N:
            raise ConfigError("n" if self.command != "scaling" else "n-list",
                              f"exact matching is capped at n <= {EXACT_MAX_N} for d >= 2")
        if self.method == "brute" and n_max > 8:
            raise ConfigError("method", "brute force is limited to n <= 8")
        if self.method == "sorted" and self.d != 1:
            raise ConfigError("method", "sorted pairing needs d = 1")

    def _validate_radius(self) -> None:
        if (self.r is None) == (self.r_over_rc is None):
            raise ConfigError("r", "give exactly one of --r and --r-over-rc")
        if self.r is not None and self.r < 0:
            raise ConfigError("r", "must be >= 0")
        if self.r_over_rc is not None:
            if self.r_over_rc < 0:
                raise ConfigError("r-over-rc", "must be >= 0")
            if self.n < 2:
                raise ConfigError("n", "r_c needs n >= 2")

    def _validate_scaling(self) -> None:
        if not self.n_list:
            raise ConfigError("n-list", "is required")
        ns = self.n_list
        if any(n < 2 for n in ns):
            raise ConfigError("n-list", "values must be >= 2")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("n-list", "values must be strictly ascending")
        if self.experiment == "matching":
            if len(ns) < 2:
                raise ConfigError("n-list", "matching scaling needs at least 2 values")
            self._validate_method(ns[-1])
        elif self.experiment == "width":
            if len(ns) < 3:
                raise ConfigError("n-list", "width scaling needs at least 3 values")
            self._validate_eps()
            self._validate_property()
            if self.trials < math.ceil(2 / self.eps):
                raise ConfigError("trials", f"eps={self.eps} needs at least {math.ceil(2 / self.eps)}")
        else:
            raise ConfigError("experiment", "must be 'matching' or 'width'")

    def radius(self) -> float:
        if self.r is not None:
            return self.r
        return self.r_over_rc * critical_radius(self.n, self.d)


# ------------------------------------------------------------------ output


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def csv_text(columns: Sequence[str], rows: Sequence[dict]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(row[c]) for c in columns) for row in rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_csv(cfg: ExperimentConfig, columns, rows) -> None:
    text = csv_text(columns, rows)
    if cfg.csv and cfg.csv != "-":
        write_atomic(cfg.csv, text)
    else:
        sys.stdout.write(text)


def _summary(cfg: ExperimentConfig, line: str) -> None:
    # keep stdout clean for the CSV when no file was requested
    stream = sys.stdout if cfg.csv and cfg.csv != "-" else sys.stderr
    print(line, file=stream, flush=True)


def _emit_svg(cfg: ExperimentConfig, series: dict, title: str, xlabel: str, ylabel: str) -> None:
    if cfg.svg:
        write_atomic(cfg.svg, line_plot(series, title=title, xlabel=xlabel,
                                        ylabel=ylabel, loglog=cfg.loglog))


# ---------------------------------------------------------------- commands


def _cmd_bottleneck(cfg: ExperimentConfig) -> None:
    weights = bottleneck_weights(cfg.n, cfg.d, cfg.trials, cfg.method, cfg.seed, cfg.norm, cfg.jobs)
    rows = [dict(n=cfg.n, d=cfg.d, p_norm=cfg.p_norm, method=cfg.method, trials=cfg.trials,
                 seed=cfg.seed, trial=t, weight=w) for t, w in enumerate(weights)]
    _emit_csv(cfg, BOTTLENECK_COLUMNS, rows)
    if cfg.out:
        stream = Stream(cfg.seed, 0)
        inst = BipartiteInstance(sample_uniform(cfg.n, cfg.d, stream),
                                 sample_uniform(cfg.n, cfg.d, stream), cfg.norm)
        write_atomic(cfg.out, format_matching(inst, solve(inst, cfg.method)))
    _emit_svg(cfg, {"M_n": (list(range(cfg.trials)), weights)},
              f"bottleneck weights n={cfg.n} d={cfg.d}", "trial", "M_n")
    _summary(cfg, f"bottleneck n={cfg.n} d={cfg.d} method={cfg.method} trials={cfg.trials} "
                  f"median={fmt(order_statistic(weights, 0.5))} max={fmt(max(weights))}")


def _cmd_threshold(cfg: ExperimentConfig) -> None:
    est = estimate_threshold(cfg.property_name, cfg.n, cfg.d, cfg.eps, cfg.trials, cfg.seed,
                             cfg.norm, cfg.jobs)
    rc = critical_radius(cfg.n, cfg.d) if cfg.n >= 2 else math.nan
    row = dict(n=est.n, d=est.d, property=est.property, eps=est.eps, trials=est.trials,
               seed=est.seed, r_lo=est.r_lo, r_hi=est.r_hi, width=est.width,
               r_median=est.r_median, r_c=rc, width_over_rc=est.width / rc)
    _emit_csv(cfg, WIDTH_COLUMNS, [row])
    _summary(cfg, f"threshold {cfg.property_name} n={cfg.n} d={cfg.d} eps={fmt(cfg.eps)} "
                  f"r_lo={fmt(est.r_lo)} r_hi={fmt(est.r_hi)} width={fmt(est.width)} "
                  f"ratio={fmt(est.ratio)}")


def _cmd_scaling(cfg: ExperimentConfig) -> None:
    ns = cfg.n_list
    if cfg.experiment == "matching":
        res = matching_scaling(ns, cfg.d, cfg.trials, cfg.method, cfg.seed, cfg.norm, cfg.jobs)
        rows = [dict(n=r.n, d=r.d, p_norm=r.p_norm, method=r.method, trials=r.trials,
                     seed=r.seed, median_Mn=r.median, q10_Mn=r.q10, q90_Mn=r.q90,
                     r_c=r.r_c, median_ratio=r.median_ratio) for r in res.rows]
        _emit_csv(cfg, MATCHING_COLUMNS, rows)
        _emit_svg(cfg, {"median M_n": (ns, [r.median for r in res.rows]),
                        "r_c": (ns, [r.r_c for r in res.rows])},
                  f"bottleneck matching d={cfg.d} ({cfg.method})", "n", "M_n")
        spread = res.ratio_spread()
        _summary(cfg, f"scaling matching d={cfg.d} method={cfg.method} n={ns[0]}..{ns[-1]} "
                      f"trials={cfg.trials} slope={fmt(res.slope)} ratio_spread={fmt(spread)}")
    else:
        res = width_scaling(cfg.property_name, ns, cfg.d, cfg.eps, cfg.trials, cfg.seed, cfg.norm, cfg.jobs)
        rows = res.rows()
        _emit_csv(cfg, WIDTH_COLUMNS, rows)
        _emit_svg(cfg, {"width": (ns, [r["width"] for r in rows]),
                        "r_c": (ns, [r["r_c"] for r in rows])},
                  f"threshold width {cfg.property_name} d={cfg.d} eps={cfg.eps:g}", "n", "width")
        _summary(cfg, f"scaling width {cfg.property_name} d={cfg.d} eps={fmt(cfg.eps)} "
                      f"n={ns[0]}..{ns[-1]} trials={cfg.trials} slope={fmt(res.slope)}")


def _cmd_containment(cfg: ExperimentConfig) -> None:
    r = cfg.radius()
    gamma = cfg.gamma
    if gamma is None:
        gamma = pilot_gamma(cfg.n, cfg.d, cfg.gamma_quantile, cfg.pilot_trials, cfg.seed,
                            cfg.norm, cfg.jobs)
    rep = containment_trial(cfg.n, cfg.d, r, gamma, cfg.trials, cfg.seed, cfg.norm, cfg.jobs)
    row = dict(n=rep.n, d=rep.d, r=rep.r, gamma=rep.gamma, trials=rep.trials, seed=rep.seed,
               frac_Mn_le_gamma=rep.frac_matching_ok, frac_embedding_ok=rep.frac_embedding_ok)
    _emit_csv(cfg, CONTAINMENT_COLUMNS, [row])
    _summary(cfg, f"containment n={cfg.n} d={cfg.d} r={fmt(r)} gamma={fmt(gamma)} "
                  f"matched={rep.count_matching_ok}/{rep.trials} failures={rep.failures}")
    if rep.failures:
        raise RuntimeError(f"{rep.failures} embedding verification failures")


def _cmd_bernoulli(cfg: ExperimentConfig) -> None:
    mc = bernoulli_containment_mc(cfg.n, cfg.p, cfg.P, cfg.trials, cfg.seed, cfg.jobs)
    exact = bernoulli_fixed_matching_prob(cfg.n, cfg.p, cfg.P)
    row = dict(n=cfg.n, p=cfg.p, P=cfg.P, trials=cfg.trials, seed=cfg.seed, mc_estimate=mc,
               closed_form=exact, abs_error=abs(mc - exact),
               three_sigma=binomial_three_sigma(exact, cfg.trials))
    _emit_csv(cfg, BERNOULLI_COLUMNS, [row])
    _summary(cfg, f"bernoulli n={cfg.n} p={fmt(cfg.p)} P={fmt(cfg.P)} mc={fmt(mc)} "
                  f"closed_form={fmt(exact)} union_bound={fmt(bernoulli_union_bound(cfg.n, cfg.p, cfg.P))}")


def _cmd_dump_graph(cfg: ExperimentConfig) -> None:
    r = cfg.radius()
    graph = build_geometric_grid(sample_uniform(cfg.n, cfg.d, cfg.seed), r, cfg.norm)
    text = format_edge_list(graph)
    target = cfg.out or cfg.csv
    if target and target != "-":
        write_atomic(target, text)
        print(f"dump-graph n={cfg.n} d={cfg.d} r={fmt(r)} edges={graph.num_edges}")
    else:
        sys.stdout.write(text)


_DISPATCH = {
    "bottleneck": _cmd_bottleneck,
    "threshold": _cmd_threshold,
    "scaling": _cmd_scaling,
    "containment": _cmd_containment,
    "bernoulli": _cmd_bernoulli,
    "dump-graph": _cmd_dump_graph,
}


def run(cfg: ExperimentConfig) -> int:
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        _DISPATCH[cfg.command](cfg)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


# ------------------------------------------------------------------ parsing


def _n_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _p_norm(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgg-lab", description="Random geometric graph threshold experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, trials: int = 100) -> None:
        p.add_argument("--d", type=int, default=2, help="dimension (default 2)")
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--p-norm", type=_p_norm, default=2.0, help="l_p norm, p > 1 or 'inf'")
        p.add_argument("--csv", help="CSV output path (default: standard output)")
        p.add_argument("--jobs", type=int, help="worker processes (default: $RGG_LAB_JOBS or CPU count)")

    p = sub.add_parser("bottleneck", help="bottleneck weights of random bipartite instances")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=METHODS, default="exact")
    p.add_argument("--out", help="write the trial-0 matching dump here")
    p.add_argument("--svg")
    p.add_argument("--loglog", action="store_true")
    common(p, trials=10)

    p = sub.add_parser("threshold", help="estimate r(n, eps), r(n, 1 - eps) and the width")
    p.add_argument("--property", dest="property_name", default="connectivity",
                   help=", ".join(sorted(PROPERTIES)))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    common(p, trials=200)

    p = sub.add_parser("scaling", help="matching or width scaling across n")
    p.add_argument("--experiment", choices=("matching", "width"), default="matching")
    p.add_argument("--n-list", type=_n_list, required=True, help="comma-separated ascending n")
    p.add_argument("--method", choices=METHODS, default="exact")
    p.add_argument("--property", dest="property_name", default="connectivity")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--svg", help="SVG plot output path")
    p.add_argument("--loglog", action="store_true", help="log-log axes in the SVG")
    common(p)

    p = sub.add_parser("containment", help="embed G(V; r) into G(V'; r + 2 gamma)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--r-over-rc", type=float, help="radius as a multiple of r_c")
    p.add_argument("--gamma", type=float, help="default: pilot-run quantile of M_n")
    p.add_argument("--gamma-quantile", type=float, default=0.9)
    p.add_argument("--pilot-trials", type=int, default=200)
    common(p)

    p = sub.add_parser("bernoulli", help="G(n,p) inside G(n,P) under a fixed matching")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--P", type=float, required=True)
    common(p, trials=100000)

    p = sub.add_parser("dump-graph", help="write the edge list of one G(X; r)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--r-over-rc", type=float)
    p.add_argument("--out", help="edge-list output path (default: standard output)")
    common(p, trials=1)
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    values = {k: v for k, v in vars(ns).items() if k in known and v is not None}
    return ExperimentConfig(**values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
