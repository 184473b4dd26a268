"""
Fixed-point engine
Alternating Picard iteration x1 = S x0, x2 = T x1, x3 = S x2, ... for a pair
(S, T), single-map iteration, uniqueness probing and commuting families.
"""

import math
import statistics
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from complex_order import ONE, as_scalar, format_complex, precsim
from config import get_settings
from cvms_core import (
    COMPLEX_PLANE, ComplexMetric, GridFunction, Point, PointDomain, cauchy_tail, distance, sample_points,
)
from errors import DivergenceError, NonFiniteValueError
from log_config import get_logger
from reports import CheckReport, ReportBuilder, to_jsonable

logger = get_logger(__name__)

SelfMap = Callable[[Any], Any]

RESIDUAL_FACTOR = 10.0


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 10_000
    cauchy_window: int = 2
    divergence_bound: float = 1e12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.cauchy_window < 1:
            raise ValueError(f"cauchy_window must be >= 1, got {self.cauchy_window}")
        if not self.divergence_bound > 0:
            raise ValueError(f"divergence_bound must be > 0, got {self.divergence_bound}")

    @classmethod
    def from_settings(cls, **overrides) -> "SolverConfig":
        """Defaults from FIXPOINT_* settings; None-valued overrides are ignored"""
        settings = get_settings()
        base = cls(
            tol=settings.tol,
            max_iter=settings.max_iter,
            cauchy_window=settings.cauchy_window,
            divergence_bound=settings.divergence_bound,
        )
        return replace(base, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tol": self.tol,
            "max_iter": self.max_iter,
            "cauchy_window": self.cauchy_window,
            "divergence_bound": self.divergence_bound,
        }


@dataclass
class IterationTrace:
    """points[0] is the start; deltas[n] = |d(points[n], points[n+1])|"""

    points: List[Point] = field(default_factory=list)
    deltas: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.points and len(self.deltas) != len(self.points) - 1:
            raise ValueError("A trace needs exactly one delta per step")

    def append(self, point: Point, delta: float) -> None:
        self.points.append(point)
        self.deltas.append(float(delta))

    @property
    def iterations(self) -> int:
        return len(self.deltas)

    def rows(self) -> List[Dict[str, Any]]:
        """One row per step: iter, delta, and point for complex-point traces"""
        rows = []
        for n, delta in enumerate(self.deltas):
            row: Dict[str, Any] = {"iter": n + 1, "delta": delta}
            point = self.points[n + 1]
            if not isinstance(point, GridFunction):
                row["point"] = format_complex(point)
            rows.append(row)
        return rows


@dataclass
class FixpointResult:
    point: Point
    trace: IterationTrace
    converged: bool
    residuals: Tuple[float, float]
    component_residuals: Dict[str, float] = field(default_factory=dict)
    advisories: List[str] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.trace.iterations

    @property
    def contraction_rate(self) -> Optional[float]:
        return observed_contraction_rate(self.trace)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "point": to_jsonable(self.point),
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_s": self.residuals[0],
            "residual_t": self.residuals[1],
            "final_delta": self.trace.deltas[-1] if self.trace.deltas else None,
            "observed_rate": self.contraction_rate,
        }
        if self.component_residuals:
            data["component_residuals"] = dict(self.component_residuals)
        if self.advisories:
            data["advisories"] = list(self.advisories)
        return data


def _magnitude(point: Point) -> float:
    if isinstance(point, GridFunction):
        return point.sup_norm()
    z = as_scalar(point)
    return max(abs(z.re), abs(z.im))


def _step(fn: SelfMap, point: Point, trace: IterationTrace, cfg: SolverConfig) -> Point:
    try:
        image = fn(point)
        size = _magnitude(image)
    except (NonFiniteValueError, OverflowError) as e:
        raise DivergenceError(f"Non-finite iterate after {trace.iterations} steps: {e}", trace)
    if not math.isfinite(size) or size > cfg.divergence_bound:
        raise DivergenceError(
            f"Iterate magnitude {size:.3g} exceeds {cfg.divergence_bound:.3g} after {trace.iterations} steps",
            trace,
        )
    return image


def iterate_pair(S: SelfMap, T: SelfMap, x0: Point, metric: ComplexMetric,
                 cfg: Optional[SolverConfig] = None) -> FixpointResult:
    """x_{2n+1} = S x_{2n}, x_{2n+2} = T x_{2n+1} until the delta tail drops below tol"""
    cfg = cfg or SolverConfig.from_settings()
    distance(metric, x0, x0)  # rejects starts outside the metric's domain
    trace = IterationTrace([x0], [])
    current = x0
    logger.debug("iteration started", metric=metric.name, tol=cfg.tol, max_iter=cfg.max_iter)

    # a common fixed point needs no steps
    s0 = _step(S, x0, trace, cfg)
    if abs(distance(metric, s0, x0)) == 0.0:
        t_residual = 0.0 if T is S else abs(distance(metric, _step(T, x0, trace, cfg), x0))
        if t_residual == 0.0:
            logger.info("start is a common fixed point", iterations=0)
            return FixpointResult(x0, trace, True, (0.0, 0.0))

    tail_reached = False
    for n in range(cfg.max_iter):
        fn = S if n % 2 == 0 else T
        nxt = s0 if n == 0 else _step(fn, current, trace, cfg)
        trace.append(nxt, abs(distance(metric, current, nxt)))
        current = nxt
        if cauchy_tail(trace.deltas, cfg.tol, cfg.cauchy_window):
            tail_reached = True
            break

    residuals = (abs(distance(metric, S(current), current)), abs(distance(metric, T(current), current)))
    limit = RESIDUAL_FACTOR * cfg.tol
    converged = tail_reached and residuals[0] <= limit and residuals[1] <= limit
    logger.info("iteration finished", iterations=trace.iterations, final_delta=trace.deltas[-1],
                converged=converged)
    if not converged:
        logger.warning("iteration did not converge", iterations=trace.iterations,
                       tail_reached=tail_reached, residual_s=residuals[0], residual_t=residuals[1])
    return FixpointResult(current, trace, converged, residuals)


def iterate_single(T: SelfMap, x0: Point, metric: ComplexMetric,
                   cfg: Optional[SolverConfig] = None) -> FixpointResult:
    return iterate_pair(T, T, x0, metric, cfg)


def _agree(metric: ComplexMetric, p: Point, q: Point, tol: float) -> bool:
    return abs(distance(metric, p, q)) <= tol


def uniqueness_probe(S: SelfMap, T: SelfMap, starts: Sequence[Point], metric: ComplexMetric,
                     cfg: Optional[SolverConfig] = None) -> CheckReport:
    """Solve from every start; pass iff all runs converge to one point"""
    if len(starts) < 2:
        raise ValueError("uniqueness_probe needs at least two starts")
    cfg = cfg or SolverConfig.from_settings()
    limit = RESIDUAL_FACTOR * cfg.tol
    report = ReportBuilder("uniqueness")

    limits: List[Point] = []
    for i, x0 in enumerate(starts):
        report.samples_tested += 1
        try:
            result = iterate_pair(S, T, x0, metric, cfg)
        except DivergenceError as e:
            report.violation("diverged", i, {"start": x0}, {"error": str(e)})
            continue
        if not result.converged:
            report.violation("not_converged", i, {"start": x0}, {"point": result.point})
            continue
        for j, other in enumerate(limits):
            if not _agree(metric, result.point, other, limit):
                report.violation("distinct_limits", i, {"start": x0},
                                 {"point": result.point, "other_point": other, "other_index": j})
                break
        limits.append(result.point)
    return report.build()


def compose_family(maps: Sequence[SelfMap]) -> SelfMap:
    """x -> S1(S2(...Sn(x)))"""
    if len(maps) == 0:
        raise ValueError("compose_family needs at least one map")
    members = list(maps)
    return lambda x: reduce(lambda acc, fn: fn(acc), reversed(members), x)


def power_map(T: SelfMap, n: int) -> SelfMap:
    """T^n"""
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    return compose_family([T] * n)


def _points_close(p: Point, q: Point, tolerance: float) -> bool:
    if isinstance(p, GridFunction):
        scale = max(1.0, p.sup_norm())
        return float(np.max(np.abs(p.values - q.values))) <= tolerance * scale
    a, b = as_scalar(p), as_scalar(q)
    return abs(a - b) <= tolerance * max(1.0, abs(a))


def check_pairwise_commuting(family_s: Sequence[SelfMap], family_t: Sequence[SelfMap],
                             sample_count: int, seed: int, tolerance: Optional[float] = None,
                             box: Optional[float] = None,
                             domain: PointDomain = COMPLEX_PLANE) -> CheckReport:
    """S_i S_j = S_j S_i, T_i T_j = T_j T_i and S_i T_j = T_j S_i on sampled points"""
    settings = get_settings()
    tolerance = settings.check_tolerance if tolerance is None else tolerance
    box = settings.sample_box if box is None else box
    rng = np.random.default_rng(seed)
    report = ReportBuilder("pairwise_commuting")

    pairs = []
    for i, si in enumerate(family_s):
        for j, sj in enumerate(family_s[i + 1:], start=i + 1):
            pairs.append((f"S{i + 1}S{j + 1}", si, sj))
    for i, ti in enumerate(family_t):
        for j, tj in enumerate(family_t[i + 1:], start=i + 1):
            pairs.append((f"T{i + 1}T{j + 1}", ti, tj))
    for i, si in enumerate(family_s):
        for j, tj in enumerate(family_t):
            pairs.append((f"S{i + 1}T{j + 1}", si, tj))

    for k, x in enumerate(sample_points(domain, sample_count, rng, box)):
        report.samples_tested += 1
        for clause, f, g in pairs:
            fg, gf = f(g(x)), g(f(x))
            if not _points_close(fg, gf, tolerance):
                report.violation(clause, k, {"x": x}, {"fg(x)": fg, "gf(x)": gf})
                break
        if report.failed:
            break
    return report.build()


def family_fixed_point(family_s: Sequence[SelfMap], family_t: Sequence[SelfMap], x0: Point,
                       metric: ComplexMetric, cfg: Optional[SolverConfig] = None,
                       commuting_samples: int = 200, seed: int = 0) -> FixpointResult:
    """Common fixed point of the composites, with every member's residual"""
    cfg = cfg or SolverConfig.from_settings()
    commuting = check_pairwise_commuting(family_s, family_t, commuting_samples, seed,
                                         domain=metric.domain)
    result = iterate_pair(compose_family(family_s), compose_family(family_t), x0, metric, cfg)

    u = result.point
    for i, fn in enumerate(family_s):
        result.component_residuals[f"S{i + 1}"] = abs(distance(metric, fn(u), u))
    for j, fn in enumerate(family_t):
        result.component_residuals[f"T{j + 1}"] = abs(distance(metric, fn(u), u))

    if not commuting.passed:
        clause = commuting.witness.clause
        result.advisories.append(f"families do not commute ({clause})")
        logger.warning("families do not commute", clause=clause)
    return result


def observed_contraction_rate(trace: IterationTrace) -> Optional[float]:
    """Median of successive delta ratios; None when fewer than two positive deltas"""
    ratios = [
        later / earlier
        for earlier, later in zip(trace.deltas, trace.deltas[1:])
        if earlier > 0 and later > 0
    ]
    if not ratios:
        return None
    return statistics.median(ratios)


def diagnose_hypotheses(spec, S: SelfMap, T: SelfMap, x0: Point, cfg: Optional[SolverConfig] = None,
                        sample_count: int = 1000, seed: int = 0,
                        probe_starts: int = 4) -> Dict[str, CheckReport]:
    """One report per hypothesis of the common fixed point theorem"""
    from admissibility import check_contraction, check_regularity, check_triangular_orbital

    cfg = cfg or SolverConfig.from_settings()
    domain = spec.metric.domain
    reports: Dict[str, CheckReport] = {
        "contraction": check_contraction(spec, S, T, sample_count, seed),
        "triangular_orbital": check_triangular_orbital(spec.alpha, S, T, sample_count, seed, domain=domain),
    }

    start = ReportBuilder("start_condition")
    start.samples_tested = 1
    sx0 = S(x0)
    forward, backward = spec.alpha(x0, sx0), spec.alpha(sx0, x0)
    if not precsim(ONE, forward):
        start.violation("alpha(x0,Sx0)", 0, {"x0": x0}, {"alpha(x0,Sx0)": forward})
    elif not precsim(ONE, backward):
        start.violation("alpha(Sx0,x0)", 0, {"x0": x0}, {"alpha(Sx0,x0)": backward})
    reports["start_condition"] = start.build()

    try:
        result = iterate_pair(S, T, x0, spec.metric, cfg)
        reports["regularity"] = check_regularity(spec.alpha, result.trace.points, result.point)
    except DivergenceError as e:
        failed = ReportBuilder("regularity")
        failed.violation("diverged", 0, {"x0": x0}, {"error": str(e)})
        reports["regularity"] = failed.build()

    rng = np.random.default_rng(seed)
    starts = [x0] + sample_points(domain, probe_starts, rng, get_settings().sample_box)
    reports["uniqueness"] = uniqueness_probe(S, T, starts, spec.metric, cfg)

    logger.info("hypotheses diagnosed", **{name: r.passed for name, r in reports.items()})
    return reports
