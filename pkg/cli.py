#!/usr/bin/env python3
"""
Command line front end
Runs the checkers and solvers from flags or a JSON config, prints a JSON report
on stdout and exits 0 on pass/convergence, 1 on failure, 2 on usage errors.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from admissibility import ContractionSpec, ContractionVariant, alpha_by_name, check_contraction
from applications import kernel_mass, problem_by_name, solve_integral_equation, solve_periodic
from complex_order import parse_complex
from config import get_settings
from cvms_core import ComplexMetric, check_metric_axioms, metric_by_name
from errors import ConfigError, DivergenceError, FixpointError, UsageError
from fixpoint_engine import SolverConfig, iterate_pair, power_map
from log_config import configure_logging, get_logger
from named_maps import resolve_map
from result_storage import ResultStore, dump_report, write_trace_csv
from simulation import check_simulation_axioms, parse_simulation

logger = get_logger(__name__)

PROG = "cvms-fixpoint"
SCHEMA_VERSION = 1

# per-verb option defaults; config files may set exactly these keys
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "check-metric": {"metric": "d1", "k": 0.0, "a": 1.0, "b": 2.0, "grid": 101, "n": 1, "samples": 10000},
    "check-simulation": {"xi": "xi1:lambda=0.5", "samples": 10000, "tail": 1000},
    "check-contraction": {"variant": "plain", "lambda": None, "xi": "xi1:lambda=0.6", "alpha": "one",
                          "metric": "d1", "k": 0.0, "map": "halfshift", "map_t": None, "samples": 10000},
    "iterate": {"map": "halfshift", "map_t": None, "start": "0+0i", "metric": "d1", "k": 0.0,
                "power": 1, "grid": 2001, "eta": None, "n": 1, "tol": None, "max_iter": None,
                "window": None},
    "solve-integral": {"a": 1.0, "b": 2.0, "grid": 2001, "tol": None, "max_iter": None, "window": None},
    "solve-periodic": {"problem": "periodic", "f": "drift", "eta": None, "a": None, "n": 1,
                       "grid": 2001, "tol": None, "max_iter": None, "window": None},
    "kernel-mass": {"t": 0.5, "a": 1.0, "eta": 1.0, "grid": 2001, "tolerance": 1e-6},
}


# config keys that only accept a fixed set of values
CONFIG_CHOICES: Dict[str, Dict[str, Tuple[str, ...]]] = {
    "solve-periodic": {"problem": ("periodic",)},
}


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def setup_parser() -> argparse.ArgumentParser:
    """Set up command line argument parser"""
    parser = argparse.ArgumentParser(prog=PROG, description="Fixed points in complex valued metric spaces")
    parser.add_argument("--log-level", help="Override FIXPOINT_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True, help="Available commands")

    def common(sub):
        sub.add_argument("--config", help="JSON file with option values (flags override it)")
        sub.add_argument("--seed", type=int, help="Random seed for samplers")
        sub.add_argument("--store", help="Archive the run under this directory")
        return sub

    def solver_flags(sub):
        sub.add_argument("--tol", type=float, help="Stop when the last deltas drop below this")
        sub.add_argument("--max-iter", type=int, help="Iteration cap")
        sub.add_argument("--window", type=int, help="Number of trailing deltas that must be below tol")
        sub.add_argument("--output", "-o", help="Write the iteration trace CSV here")

    p = common(subparsers.add_parser("check-metric", help="Falsify the metric axioms"))
    p.add_argument("--metric", choices=["d1", "d2", "d3", "integral_equation", "periodic", "broken"])
    p.add_argument("--k", type=float, help="Angle of d2")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--grid", type=int, help="Grid nodes for the scaled sup metrics")
    p.add_argument("--n", type=int, help="Value dimension of the periodic metric")
    p.add_argument("--samples", type=int)

    p = common(subparsers.add_parser("check-simulation", help="Falsify the simulation function axioms"))
    p.add_argument("--xi", help="xi1:lambda=L | xi2:psi=scale(c),phi=identity | xi3")
    p.add_argument("--samples", type=int)
    p.add_argument("--tail", type=int, help="Tail length for the limsup axiom")

    p = common(subparsers.add_parser("check-contraction", help="Check the contraction clauses of (S, T)"))
    p.add_argument("--variant", choices=[v.value for v in ContractionVariant])
    p.add_argument("--lambda", dest="lambda", type=float, help="λ of the m_type variant")
    p.add_argument("--xi")
    p.add_argument("--alpha")
    p.add_argument("--metric", choices=["d1", "d2", "d3"])
    p.add_argument("--k", type=float)
    p.add_argument("--map", help="S (and T unless --map-t is given)")
    p.add_argument("--map-t")
    p.add_argument("--samples", type=int)

    p = common(subparsers.add_parser("iterate", help="Alternating Picard iteration"))
    p.add_argument("--map")
    p.add_argument("--map-t")
    p.add_argument("--start", help="Complex start a+bi")
    p.add_argument("--metric", choices=["d1", "d2", "d3"])
    p.add_argument("--k", type=float)
    p.add_argument("--power", type=int, help="Iterate T^power instead of T")
    p.add_argument("--grid", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--n", type=int)
    solver_flags(p)

    p = common(subparsers.add_parser("solve-integral", help="Volterra integral equation"))
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--solution-output", help="Write the solution grid function CSV here")
    solver_flags(p)

    p = common(subparsers.add_parser("solve-periodic", help="Periodic boundary value problem"))
    p.add_argument("--f", help="drift | log_damped | zero | linear(k,c)")
    p.add_argument("--eta", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--solution-output", help="Write the solution grid function CSV here")
    solver_flags(p)

    p = common(subparsers.add_parser("kernel-mass", help="∫_0^a H(t,s) ds against 1/η"))
    p.add_argument("--t", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--tolerance", type=float)
    return parser


def merge_options(command: str, args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults, then the config file, then explicit flags"""
    options = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise UsageError("--config", f"no such file: {path}")
        except json.JSONDecodeError as e:
            raise UsageError("--config", f"invalid JSON: {e}")
        if not isinstance(loaded, dict):
            raise UsageError("--config", "expected a JSON object")
        loaded = dict(loaded)
        loaded.pop("seed", None)
        unknown = sorted(set(loaded) - set(options))
        if unknown:
            raise UsageError("--config", f"unknown keys for {command}: {', '.join(unknown)}")
        for key, choices in CONFIG_CHOICES.get(command, {}).items():
            if key in loaded and loaded[key] not in choices:
                raise UsageError("--config", f"{key}: expected one of {', '.join(choices)}, got {loaded[key]!r}")
        options.update(loaded)
    for key in options:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if "seed" in loaded:
            return int(loaded["seed"])
    return 0


def _cast(options: Dict[str, Any], key: str, cast: Callable, check: Callable[[Any], bool] = None,
          requirement: str = "") -> Any:
    value = options[key]
    try:
        value = cast(value)
    except (TypeError, ValueError):
        raise UsageError(_flag(key), f"expected {cast.__name__}, got {value!r}")
    if check is not None and not check(value):
        raise UsageError(_flag(key), f"{requirement}, got {value!r}")
    return value


def _samples(options) -> int:
    return _cast(options, "samples", int, lambda v: v >= 1, "must be >= 1")


def _grid(options) -> int:
    return _cast(options, "grid", int, lambda v: v >= 3, "must be >= 3")


def _eta(options) -> Optional[float]:
    if options.get("eta") is None:
        return None
    return _cast(options, "eta", float, lambda v: v > 1, "must be > 1")


def _solver_config(options) -> SolverConfig:
    overrides = {}
    if options.get("tol") is not None:
        overrides["tol"] = _cast(options, "tol", float, lambda v: v > 0, "must be > 0")
    if options.get("max_iter") is not None:
        overrides["max_iter"] = _cast(options, "max_iter", int, lambda v: v >= 1, "must be >= 1")
    if options.get("window") is not None:
        overrides["cauchy_window"] = _cast(options, "window", int, lambda v: v >= 1, "must be >= 1")
    return SolverConfig.from_settings(**overrides)


def _metric(options) -> ComplexMetric:
    k = _cast(options, "k", float)
    try:
        return metric_by_name(options["metric"], k)
    except ValueError as e:
        raise UsageError("--metric", str(e))


def _map(options, key: str, **kwargs):
    try:
        return resolve_map(str(options[key]), **kwargs)
    except ValueError as e:
        raise UsageError(_flag(key), str(e))


def _broken_metric(x, y):
    return abs(complex(x)) - abs(complex(y))


def run_check_metric(options, seed) -> Dict[str, Any]:
    samples = _samples(options)
    name = options["metric"]
    if name in ("integral_equation", "periodic"):
        grid = _grid(options)
        a = _cast(options, "a", float, lambda v: v > 0, "must be > 0")
        if name == "integral_equation":
            b = _cast(options, "b", float, lambda v: v > a, "must exceed --a")
            metric = ComplexMetric.integral_equation_metric(a, b, grid)
        else:
            n = _cast(options, "n", int, lambda v: v >= 1, "must be >= 1")
            metric = ComplexMetric.periodic_metric(a, grid, n)
    elif name == "broken":
        metric = ComplexMetric.custom("broken", _broken_metric)
    else:
        metric = _metric(options)
    report = check_metric_axioms(metric, samples, seed)
    return {"passed": report.passed, "report": report.to_dict()}


def run_check_simulation(options, seed) -> Dict[str, Any]:
    try:
        xi = parse_simulation(str(options["xi"]))
    except ValueError as e:
        raise UsageError("--xi", str(e))
    tail = _cast(options, "tail", int, lambda v: v >= 10, "must be >= 10")
    report = check_simulation_axioms(xi, _samples(options), tail, seed)
    return {"passed": report.passed, "report": report.to_dict()}


def run_check_contraction(options, seed) -> Dict[str, Any]:
    try:
        variant = ContractionVariant(options["variant"])
    except ValueError:
        raise UsageError("--variant", f"unknown variant {options['variant']!r}")
    lam = None
    if variant is ContractionVariant.M_TYPE:
        if options["lambda"] is None:
            raise UsageError("--lambda", "required for the m_type variant")
        lam = _cast(options, "lambda", float, lambda v: 0 < v < 1, "must lie in (0, 1)")
    try:
        xi = parse_simulation(str(options["xi"]))
    except ValueError as e:
        raise UsageError("--xi", str(e))
    try:
        alpha = alpha_by_name(str(options["alpha"]))
    except ValueError as e:
        raise UsageError("--alpha", str(e))

    spec = ContractionSpec(variant, xi, alpha, _metric(options), lam)
    S = _map(options, "map")
    T = _map(options, "map_t") if options["map_t"] else S
    if S.on_grid or T.on_grid:
        raise UsageError("--map", "check-contraction works on complex-point maps")
    report = check_contraction(spec, S, T, _samples(options), seed)
    return {"passed": report.passed, "spec": spec.to_dict(), "report": report.to_dict()}


def _run_solver(solve: Callable[[], Any], options, output: Optional[str]):
    """Run a solver; DivergenceError becomes a failed report"""
    try:
        outcome = solve()
    except DivergenceError as e:
        if output and e.trace is not None:
            write_trace_csv(e.trace, output)
        deltas = e.trace.deltas if e.trace is not None else []
        return None, {
            "passed": False,
            "diverged": True,
            "error": str(e),
            "iterations": len(deltas),
            "final_delta": deltas[-1] if deltas else None,
        }
    return outcome, None


def run_iterate(options, seed, args) -> Dict[str, Any]:
    cfg = _solver_config(options)
    eta = _eta(options)
    grid = _grid(options)
    n = _cast(options, "n", int, lambda v: v >= 1, "must be >= 1")
    power = _cast(options, "power", int, lambda v: v >= 1, "must be >= 1")
    S = _map(options, "map", grid=grid, eta=eta, n=n)
    T = _map(options, "map_t", grid=grid, eta=eta, n=n) if options["map_t"] else S

    if S.on_grid:
        if T is not S:
            raise UsageError("--map-t", "grid maps are iterated on their own")
        metric, x0 = S.metric, S.start
    else:
        if T.on_grid:
            raise UsageError("--map-t", "cannot pair a complex map with a grid map")
        metric = _metric(options)
        try:
            x0 = parse_complex(str(options["start"])).to_complex()
        except ValueError as e:
            raise UsageError("--start", str(e))

    s_map = power_map(S, power) if power > 1 else S
    t_map = power_map(T, power) if power > 1 else T
    result, failure = _run_solver(lambda: iterate_pair(s_map, t_map, x0, metric, cfg), options, args.output)
    if failure:
        return failure
    if args.output:
        write_trace_csv(result.trace, args.output)
    args._trace = result.trace
    return {"passed": result.converged, "result": result.to_dict()}


def run_solve_integral(options, seed, args) -> Dict[str, Any]:
    cfg = _solver_config(options)
    grid = _grid(options)
    a = _cast(options, "a", float, lambda v: v > 0, "must be > 0")
    b = _cast(options, "b", float, lambda v: v > a, "must exceed --a")
    solution, failure = _run_solver(lambda: solve_integral_equation(a, b, grid, cfg), options, args.output)
    if failure:
        return failure
    if args.output:
        write_trace_csv(solution.result.trace, args.output)
    if args.solution_output:
        solution.solution.to_csv(args.solution_output)
    args._trace, args._solution = solution.result.trace, solution.solution
    return {"passed": solution.result.converged, "result": solution.to_dict()}


def run_solve_periodic(options, seed, args) -> Dict[str, Any]:
    cfg = _solver_config(options)
    grid = _grid(options)
    eta = _eta(options)
    n = _cast(options, "n", int, lambda v: v >= 1, "must be >= 1")
    a = None
    if options.get("a") is not None:
        a = _cast(options, "a", float, lambda v: v > 0, "must be > 0")
    try:
        problem = problem_by_name(str(options["f"]), eta=eta, a=a, n=n)
    except ValueError as e:
        raise UsageError("--f", str(e))

    solution, failure = _run_solver(lambda: solve_periodic(problem, grid, cfg), options, args.output)
    if failure:
        return failure
    if args.output:
        write_trace_csv(solution.result.trace, args.output)
    if args.solution_output:
        solution.solution.to_csv(args.solution_output)
    args._trace, args._solution = solution.result.trace, solution.solution
    return {"passed": solution.result.converged, "result": solution.to_dict()}


def run_kernel_mass(options, seed) -> Dict[str, Any]:
    a = _cast(options, "a", float, lambda v: v > 0, "must be > 0")
    t = _cast(options, "t", float, lambda v: 0 <= v <= a, "must lie in [0, a]")
    eta = _cast(options, "eta", float, lambda v: v > 0, "must be > 0")
    grid = _grid(options)
    tolerance = _cast(options, "tolerance", float, lambda v: v > 0, "must be > 0")
    value = kernel_mass(t, a, eta, grid)
    error = abs(value - 1.0 / eta)
    return {"passed": error <= tolerance, "value": value, "expected": 1.0 / eta, "error": error}


def _dispatch(command: str, options: Dict[str, Any], seed: int, args: argparse.Namespace) -> Dict[str, Any]:
    if command == "check-metric":
        return run_check_metric(options, seed)
    if command == "check-simulation":
        return run_check_simulation(options, seed)
    if command == "check-contraction":
        return run_check_contraction(options, seed)
    if command == "iterate":
        return run_iterate(options, seed, args)
    if command == "solve-integral":
        return run_solve_integral(options, seed, args)
    if command == "solve-periodic":
        return run_solve_periodic(options, seed, args)
    return run_kernel_mass(options, seed)


def run(args: argparse.Namespace) -> int:
    """Execute one parsed command; returns the exit status"""
    command = args.command
    options = merge_options(command, args)
    seed = _seed(args)

    try:
        body = _dispatch(command, options, seed, args)
    except (UsageError, ConfigError):
        raise
    except (FixpointError, ValueError, ArithmeticError) as e:
        # input was accepted; the computation itself failed
        logger.error("command failed", command=command, error=str(e), error_type=type(e).__name__)
        print(f"{PROG}: error: {e}", file=sys.stderr)
        body = {"passed": False, "error": str(e), "error_type": type(e).__name__}

    report = {"schema": SCHEMA_VERSION, "command": command, "config": options, "seed": seed, **body}
    sys.stdout.write(dump_report(report))

    if args.store:
        ResultStore(args.store).store_run(
            command, report, getattr(args, "_trace", None), getattr(args, "_solution", None)
        )
    return 0 if report["passed"] else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = setup_parser()
    args = parser.parse_args(argv)
    try:
        settings = get_settings()
        configure_logging(args.log_level or settings.log_level, settings.log_file)
        return run(args)
    except (UsageError, ConfigError) as e:
        if isinstance(e, UsageError):
            print(e.one_line(PROG), file=sys.stderr)
        else:
            print(f"{PROG}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
