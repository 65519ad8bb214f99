"""Command-line front end: configure a problem, run bounds, print tables.

Methods:
  quantile  Monte Carlo exit times -> d_p estimates and eigenvalue bounds
  dv        mean-exit-time solve -> classical 1/sup w bound
  oracle    reference survival functions -> exact quantile bounds

Problems are presets (interval01, ou-interval, disk-bm) or inline 1-D
definitions with coefficient expressions, e.g.
  {"problem": {"interval": [-1, 1], "a": "1", "V": "0.5*x^2"}}
in a JSON config file.  Flags override config-file values.  Exit status is
0 on success (undersampled quantiles only flag rows), 2 on configuration
errors, 3 on horizon errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .baseline import MeanExitSolution, analytic_mean_exit, solve_mean_exit_1d
from .errors import (ConfigurationError, EllipticityError, ExitBoundError,
                     ExpressionError, GeometryError, HorizonError,
                     UnsupportedDimensionError)
from .estimator import (QuantileBoundReport, REPORT_JSON_FIELDS, estimate_d_p,
                        quantile_bound, sup_over_starts)
from .expressions import parse_expression
from .model import (Domain, EllipticProblem, PRESET_NAMES, make_problem,
                    preset_center, preset_problem, to_sde)
from .reference import PdeSurvivalOracle, oracle_quantile, preset_oracle
from .sde import SimConfig, simulate_batch, write_sample

_CONFIG_ERRORS = (ConfigurationError, GeometryError, EllipticityError,
                  ExpressionError, UnsupportedDimensionError, ValueError,
                  KeyError, TypeError)

AUTO_GRID_POINTS = 9
T_MAX_OVER_MEAN_BOUND = 50.0


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs; JSON-serializable for --config files."""

    problem: str | dict
    method: str = "quantile"
    p_list: tuple[float, ...] = (0.1,)
    starts: str | tuple = "auto"
    n_paths: int = 10_000
    dt: float = 1e-4
    t_max: float | None = None
    master_seed: int = 20240801
    confidence: float = 0.95
    output: str = "table"
    mesh_h: float = 1e-4
    workers: int = 1

    def to_dict(self) -> dict:
        starts = self.starts
        if starts != "auto":
            starts = [list(s) for s in starts]
        return {
            "problem": self.problem, "method": self.method,
            "p_list": list(self.p_list), "starts": starts,
            "n_paths": self.n_paths, "dt": self.dt, "t_max": self.t_max,
            "master_seed": self.master_seed, "confidence": self.confidence,
            "output": self.output, "mesh_h": self.mesh_h, "workers": self.workers,
        }

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        known = {f: data[f] for f in RunConfig.__dataclass_fields__ if f in data}
        extra = set(data) - set(known)
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        if "p_list" in known:
            known["p_list"] = tuple(float(p) for p in known["p_list"])
        if "starts" in known and known["starts"] != "auto":
            known["starts"] = tuple(tuple(float(c) for c in s) for s in known["starts"])
        return RunConfig(**known)


@dataclass
class RunResult:
    status: int
    method: str
    rows: list[dict]
    reports: list[QuantileBoundReport] = field(default_factory=list)
    summaries: list[QuantileBoundReport] = field(default_factory=list)
    mean_exit: MeanExitSolution | None = None
    samples: list = field(default_factory=list)


def build_problem(spec) -> EllipticProblem:
    """Materialize a preset name or an inline 1-D expression definition."""
    if isinstance(spec, str):
        return preset_problem(spec)
    if not isinstance(spec, dict):
        raise ConfigurationError(f"problem must be a preset name or a mapping, got {spec!r}")
    if "interval" not in spec:
        raise ConfigurationError("inline problems must define 'interval': [left, right]")
    left, right = (float(v) for v in spec["interval"])
    a_field = parse_expression(str(spec.get("a", "1")))
    v_field = parse_expression(str(spec.get("V", "0")))
    name = spec.get("name", f"interval[{left},{right}]")
    return make_problem(Domain.interval(left, right), a_field, v_field, name=str(name))


def resolve_starts(config: RunConfig, problem: EllipticProblem) -> list[tuple[float, ...]]:
    if config.starts == "auto":
        if problem.name in PRESET_NAMES:
            return [tuple(preset_center(problem.name))]
        left, right = problem.domain.interval_bounds
        grid = np.linspace(left, right, AUTO_GRID_POINTS + 2)[1:-1]
        return [(float(x),) for x in grid]
    starts = [tuple(float(c) for c in s) for s in config.starts]
    for s in starts:
        if not problem.domain.contains(np.asarray(s)):
            raise ConfigurationError(f"start point {s} is not inside the domain")
    return starts


def _dv_solution(problem: EllipticProblem, mesh_h: float) -> MeanExitSolution:
    if problem.name == "disk-bm":
        return analytic_mean_exit("disk-bm")
    return solve_mean_exit_1d(problem, mesh_h)


def default_t_max(problem: EllipticProblem, mesh_h: float) -> float:
    """Censoring horizon heuristic: 50 / (mean-exit eigenvalue bound)."""
    coarse = max(mesh_h, problem.domain.diameter / 2000.0)
    return T_MAX_OVER_MEAN_BOUND / _dv_solution(problem, coarse).dv_bound


def _build_oracle(config: RunConfig, problem: EllipticProblem):
    if problem.name in PRESET_NAMES:
        return preset_oracle(problem.name)
    return PdeSurvivalOracle(problem)


def _oracle_start_coord(problem: EllipticProblem, start: tuple[float, ...]):
    return start[0] if problem.domain.dimension == 1 else np.asarray(start)


def run(config: RunConfig) -> RunResult:
    """Execute one configuration and collect printable rows."""
    if config.method not in ("quantile", "dv", "oracle"):
        raise ConfigurationError(f"unknown method {config.method!r}")
    if config.output not in ("table", "csv", "json"):
        raise ConfigurationError(f"unknown output format {config.output!r}")
    problem = build_problem(config.problem)

    if config.method == "dv":
        solution = _dv_solution(problem, config.mesh_h)
        row = {"role": "dv", "problem": solution.problem, "mesh_h": config.mesh_h,
               "sup_w": solution.sup_w, "argmax": solution.argmax,
               "dv_bound": solution.dv_bound}
        return RunResult(status=0, method="dv", rows=[row], mean_exit=solution)

    if not config.p_list:
        raise ConfigurationError("p_list must be nonempty for quantile/oracle methods")
    if any(not 0.0 < p < 1.0 for p in config.p_list):
        raise ConfigurationError("all p values must lie strictly in (0, 1)")
    starts = resolve_starts(config, problem)

    if config.method == "oracle":
        oracle = _build_oracle(config, problem)
        rows, reports = [], []
        for start in starts:
            coord = _oracle_start_coord(problem, start)
            for p in config.p_list:
                d = oracle_quantile(oracle, coord, p)
                b = quantile_bound(d, p)
                rep = QuantileBoundReport(
                    problem=problem.name, start=start, p=p, d_p=d, d_lo=d, d_hi=d,
                    bound=b, certified_bound=b, censored_fraction=0.0,
                    confidence=config.confidence)
                reports.append(rep)
                rows.append({"role": "report", **rep.to_json_dict()})
        summaries = _summaries(reports, config.p_list)
        rows += [{"role": "sup", **r.to_json_dict()} for r in summaries]
        return RunResult(status=0, method="oracle", rows=rows, reports=reports,
                         summaries=summaries)

    # quantile: one simulated batch per start, reused across every p
    t_max = config.t_max if config.t_max is not None else default_t_max(problem, config.mesh_h)
    fld = to_sde(problem)
    rows, reports, samples = [], [], []
    for idx, start in enumerate(starts):
        sim = SimConfig(dt=config.dt, t_max=t_max, n_paths=config.n_paths,
                        master_seed=config.master_seed + idx, start_point=start)
        sample = simulate_batch(fld, problem.domain, sim, problem_id=problem.name,
                                workers=config.workers)
        samples.append(sample)
        for p in config.p_list:
            rep = estimate_d_p(sample, p, confidence=config.confidence)
            reports.append(rep)
            rows.append({"role": "report", **rep.to_json_dict()})
    summaries = _summaries(reports, config.p_list)
    rows += [{"role": "sup", **r.to_json_dict()} for r in summaries]
    return RunResult(status=0, method="quantile", rows=rows, reports=reports,
                     summaries=summaries, samples=samples)


def _summaries(reports: list[QuantileBoundReport], p_list) -> list[QuantileBoundReport]:
    out = []
    for p in p_list:
        group = [r for r in reports if r.p == p]
        out.append(sup_over_starts(group))
    return out


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    if isinstance(value, (list, tuple)):
        return ",".join(f"{v:.4g}" for v in value)
    return str(value)


def format_table(result: RunResult) -> str:
    if result.method == "dv":
        row = result.rows[0]
        lines = [f"problem {row['problem']}: mean-exit bound",
                 f"  sup_w    = {_fmt(row['sup_w'])} (attained near x = {_fmt(row['argmax'])})",
                 f"  dv_bound = {_fmt(row['dv_bound'])}"]
        return "\n".join(lines)
    header = ["role", "p", "start", "d_p", "d_lo", "d_hi", "bound", "certified", "flag"]
    table = [header]
    for rep, role in ([(r, "report") for r in result.reports] +
                      [(r, "sup") for r in result.summaries]):
        table.append([
            role, _fmt(rep.p), _fmt(rep.start), _fmt(rep.d_p), _fmt(rep.d_lo),
            "-" if np.isinf(rep.d_hi) else _fmt(rep.d_hi), _fmt(rep.bound),
            _fmt(rep.certified_bound), "!" if rep.warning else "",
        ])
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in table]
    flagged = [r for r in result.reports if r.warning]
    if flagged:
        lines.append("")
        lines.append("flagged rows:")
        for r in flagged:
            lines.append(f"  p={_fmt(r.p)} start={_fmt(r.start)}: {r.warning}")
    return "\n".join(lines)


def format_csv(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if result.method == "dv":
        row = result.rows[0]
        writer.writerow(["role", "problem", "mesh_h", "sup_w", "argmax", "dv_bound"])
        writer.writerow([row["role"], row["problem"], repr(row["mesh_h"]),
                         repr(row["sup_w"]), repr(row["argmax"]), repr(row["dv_bound"])])
        return buf.getvalue()
    writer.writerow(["role", *REPORT_JSON_FIELDS])
    for row in result.rows:
        writer.writerow([row["role"]] + [
            ";".join(repr(c) for c in row[f]) if f == "start" else
            ("" if row[f] is None else repr(row[f]))
            for f in REPORT_JSON_FIELDS])
    return buf.getvalue()


def format_json(result: RunResult) -> str:
    if result.method == "dv":
        return json.dumps({"method": "dv", "rows": result.rows}, indent=2)
    return json.dumps({"method": result.method, "rows": result.rows}, indent=2)


def render(result: RunResult, output: str) -> str:
    if output == "table":
        return format_table(result)
    if output == "csv":
        return format_csv(result)
    return format_json(result)


def _parse_starts(text: str):
    if text.strip() == "auto":
        return "auto"
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        points.append(tuple(float(c) for c in chunk.split(",")))
    if not points:
        raise ConfigurationError("empty --starts specification")
    return tuple(points)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exitbound",
        description="Eigenvalue lower bounds from exit-time quantiles")
    parser.add_argument("--problem", help="preset name (interval01, ou-interval, disk-bm)")
    parser.add_argument("--method", choices=["quantile", "dv", "oracle"])
    parser.add_argument("--p", help="comma-separated quantile levels, e.g. 0.5,0.1,0.01")
    parser.add_argument("--paths", type=int, help="number of Monte Carlo paths")
    parser.add_argument("--dt", type=float, help="Euler-Maruyama time step")
    parser.add_argument("--tmax", type=float, help="censoring horizon (default: 50/dv_bound)")
    parser.add_argument("--seed", type=int, help="master seed for reproducible streams")
    parser.add_argument("--starts", help="'auto' or points 'x1;x2' (coords comma-separated)")
    parser.add_argument("--confidence", type=float, help="CI level for d_p (default 0.95)")
    parser.add_argument("--output", choices=["table", "csv", "json"])
    parser.add_argument("--mesh-h", type=float, dest="mesh_h",
                        help="mesh spacing for mean-exit solves (default 1e-4)")
    parser.add_argument("--workers", type=int, help="parallel workers for path simulation")
    parser.add_argument("--dump-samples", metavar="PATH",
                        help="write raw exit-time records (TSV) to PATH")
    parser.add_argument("--dump-config", metavar="PATH",
                        help="write the resolved run configuration (JSON) to PATH")
    parser.add_argument("--config", metavar="PATH", help="JSON config file to start from")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            config = RunConfig.from_dict(json.load(fh))
    else:
        if not args.problem:
            raise ConfigurationError("--problem (or --config) is required")
        config = RunConfig(problem=args.problem)

    overrides = {}
    if args.problem:
        overrides["problem"] = args.problem
    if args.method:
        overrides["method"] = args.method
    if args.p:
        overrides["p_list"] = tuple(float(v) for v in args.p.split(","))
    if args.paths is not None:
        overrides["n_paths"] = args.paths
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.tmax is not None:
        overrides["t_max"] = args.tmax
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.starts:
        overrides["starts"] = _parse_starts(args.starts)
    if args.confidence is not None:
        overrides["confidence"] = args.confidence
    if args.output:
        overrides["output"] = args.output
    if args.mesh_h is not None:
        overrides["mesh_h"] = args.mesh_h
    if args.workers is not None:
        overrides["workers"] = args.workers
    return replace(config, **overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        problem = build_problem(config.problem)
        if config.t_max is None and config.method == "quantile":
            config = replace(config, t_max=default_t_max(problem, config.mesh_h))
        if args.dump_config:
            with open(args.dump_config, "w") as fh:
                json.dump(config.to_dict(), fh, indent=2)
                fh.write("\n")
        result = run(config)
    except HorizonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExitBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(render(result, config.output))
    if args.dump_samples and result.samples:
        for idx, sample in enumerate(result.samples):
            path = args.dump_samples if len(result.samples) == 1 \
                else f"{args.dump_samples}.start{idx}"
            write_sample(sample, path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
