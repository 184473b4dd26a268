"""
α-admissibility and contraction hypotheses
α-maps, the admissibility and regularity predicates, and sampling checkers for
the plain, M-type and N-type contraction conditions of a pair (S, T).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from complex_order import ONE, ComplexScalar, OrderConfig, Scalar, as_scalar, in_cone, in_cone_within, precsim
from config import get_settings
from cvms_core import COMPLEX_PLANE, ComplexMetric, MetricKind, Point, distance, metric_by_name, sample_points
from errors import ConeViolationError
from log_config import get_logger
from reports import CheckReport, ReportBuilder
from simulation import SimulationFn, evaluate, parse_simulation

logger = get_logger(__name__)

SelfMap = Callable[[Any], Any]


class AlphaKind(Enum):
    CONSTANT = "constant"
    INDICATOR = "indicator"
    CUSTOM = "custom"


@dataclass(frozen=True)
class AlphaMap:
    """α: X x X -> S"""

    kind: AlphaKind
    name: str
    fn: Callable[[Any, Any], Scalar]

    def __call__(self, x: Point, y: Point) -> ComplexScalar:
        value = as_scalar(self.fn(x, y))
        if not in_cone(value):
            raise ConeViolationError(f"alpha {self.name} left the cone: {value}")
        return value

    @classmethod
    def constant(cls, value: Scalar, name: Optional[str] = None) -> "AlphaMap":
        c = as_scalar(value)
        if not in_cone(c):
            raise ConeViolationError(f"constant alpha must lie in the cone, got {c}")
        return cls(AlphaKind.CONSTANT, name or f"constant({c})", lambda x, y: c)

    @classmethod
    def indicator(cls, name: str, region: Callable[[Any, Any], bool]) -> "AlphaMap":
        """1 on the region, 0 elsewhere"""
        return cls(AlphaKind.INDICATOR, name, lambda x, y: 1.0 if region(x, y) else 0.0)

    @classmethod
    def custom(cls, name: str, fn: Callable[[Any, Any], Scalar]) -> "AlphaMap":
        return cls(AlphaKind.CUSTOM, name, fn)


def _upper_half_plane(x, y) -> bool:
    return complex(x).imag >= 0 and complex(y).imag >= 0


def _modulus_ordered(x, y) -> bool:
    return abs(complex(x)) <= abs(complex(y))


ALPHA_REGISTRY: Dict[str, Callable[[], AlphaMap]] = {
    "one": lambda: AlphaMap.constant(1.0, "one"),
    "zero": lambda: AlphaMap.constant(0.0, "zero"),
    "upper_half_plane": lambda: AlphaMap.indicator("upper_half_plane", _upper_half_plane),
    "modulus_ordered": lambda: AlphaMap.indicator("modulus_ordered", _modulus_ordered),
}


def alpha_by_name(name: str) -> AlphaMap:
    try:
        return ALPHA_REGISTRY[name]()
    except KeyError:
        raise ValueError(f"Unknown alpha {name!r} (known: {', '.join(sorted(ALPHA_REGISTRY))})")


class ContractionVariant(Enum):
    PLAIN = "plain"
    M_TYPE = "m_type"
    N_TYPE = "n_type"


@dataclass(frozen=True)
class ContractionSpec:
    variant: ContractionVariant
    xi: SimulationFn
    alpha: AlphaMap
    metric: ComplexMetric
    lam: Optional[float] = None

    def __post_init__(self):
        if self.variant is ContractionVariant.M_TYPE:
            if self.lam is None or not 0 < self.lam < 1:
                raise ValueError(f"m_type contraction needs 0 < lambda < 1, got {self.lam}")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"variant": self.variant.value}
        if self.variant is ContractionVariant.M_TYPE:
            data["lambda"] = self.lam
        data["xi"] = self.xi.describe()
        data["alpha"] = self.alpha.name
        data["metric"] = self.metric.kind.value
        if self.metric.kind is MetricKind.D2:
            data["k"] = self.metric.k
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ContractionSpec":
        variant = ContractionVariant(data.get("variant", "plain"))
        return cls(
            variant=variant,
            xi=parse_simulation(data.get("xi", "xi1:lambda=0.5")),
            alpha=alpha_by_name(data.get("alpha", "one")),
            metric=metric_by_name(data.get("metric", "d1"), float(data.get("k", 0.0))),
            lam=float(data["lambda"]) if "lambda" in data else None,
        )


def _mod(m: ComplexMetric, p: Point, q: Point) -> float:
    return abs(distance(m, p, q))


def m_value(x: Point, y: Point, S: SelfMap, T: SelfMap, metric: ComplexMetric, lam: float) -> float:
    """λ·max{|d(x,y)|, |d(x,Sx)|, |d(y,Ty)|, (|d(x,Ty)| + |d(y,Sx)|)/2}"""
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    sx, ty = S(x), T(y)
    return lam * max(
        _mod(metric, x, y),
        _mod(metric, x, sx),
        _mod(metric, y, ty),
        (_mod(metric, x, ty) + _mod(metric, y, sx)) / 2,
    )


def n_value(x: Point, y: Point, S: SelfMap, T: SelfMap, metric: ComplexMetric) -> float:
    """max{|d(x,y)|, (|d(x,Sx)||d(y,Ty)| + |d(x,Ty)||d(y,Sx)|)/(1 + |d(x,y)|)}"""
    sx, ty = S(x), T(y)
    dxy = _mod(metric, x, y)
    cross = _mod(metric, x, sx) * _mod(metric, y, ty) + _mod(metric, x, ty) * _mod(metric, y, sx)
    return max(dxy, cross / (1.0 + dxy))


def _comparison_value(spec: ContractionSpec, x: Point, y: Point, S: SelfMap, T: SelfMap) -> ComplexScalar:
    if spec.variant is ContractionVariant.PLAIN:
        return distance(spec.metric, x, y)
    if spec.variant is ContractionVariant.M_TYPE:
        return ComplexScalar.real(m_value(x, y, S, T, spec.metric, spec.lam))
    return ComplexScalar.real(n_value(x, y, S, T, spec.metric))


def _defaults(tolerance: Optional[float], box: Optional[float]):
    settings = get_settings()
    return (
        settings.check_tolerance if tolerance is None else tolerance,
        settings.sample_box if box is None else box,
    )


def check_contraction(spec: ContractionSpec, S: SelfMap, T: SelfMap, sample_count: int, seed: int,
                      tolerance: Optional[float] = None, box: Optional[float] = None) -> CheckReport:
    """Sample pairs (x, y) and test the three contraction clauses"""
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    tolerance, box = _defaults(tolerance, box)
    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"contraction[{spec.variant.value}]")

    for i in range(sample_count):
        x, y = sample_points(spec.metric.domain, 2, rng, box)
        report.samples_tested += 1
        inputs = {"x": x, "y": y}
        try:
            alpha_value = spec.alpha(x, y)
        except ConeViolationError as e:
            report.violation("clause_i", i, inputs, {"alpha": str(e)})
            break
        weighted = alpha_value * distance(spec.metric, S(x), T(y))
        second = _comparison_value(spec, x, y, S, T)
        cfg = OrderConfig(tolerance * max(1.0, abs(second), abs(weighted)))

        if not in_cone_within(weighted, cfg):
            report.violation("clause_i", i, inputs, {"alpha*d(Sx,Ty)": weighted})
            break
        # xi is only defined on the cone
        if not in_cone_within(second, cfg):
            report.violation("clause_ii", i, inputs, {"second": second, "reason": "comparison value outside the cone"})
            break
        # rounding may push a boundary value a hair outside the cone
        weighted_in = ComplexScalar(max(weighted.re, 0.0), max(weighted.im, 0.0))
        second_in = ComplexScalar(max(second.re, 0.0), max(second.im, 0.0))
        value = evaluate(spec.xi, weighted_in, second_in)
        if not in_cone_within(value, cfg):
            report.violation("clause_ii", i, inputs,
                             {"alpha*d(Sx,Ty)": weighted, "second": second, "xi": value})
            break
        modulus_value = evaluate(spec.xi, abs(weighted), abs(second))
        if not in_cone_within(modulus_value, cfg):
            report.violation("clause_iii", i, inputs,
                             {"|alpha*d(Sx,Ty)|": abs(weighted), "|second|": abs(second), "xi": modulus_value})
            break

    result = report.build()
    logger.info("contraction checked", variant=spec.variant.value, passed=result.passed,
                samples=result.samples_tested)
    return result


def _at_least_one(value: ComplexScalar) -> bool:
    return precsim(ONE, value)


def check_pair_admissible(alpha: AlphaMap, S: SelfMap, T: SelfMap, sample_count: int, seed: int,
                          box: Optional[float] = None, domain=COMPLEX_PLANE) -> CheckReport:
    """1 ≾ α(x,y) implies 1 ≾ α(Sx,Ty) and 1 ≾ α(Tx,Sy)"""
    _, box = _defaults(None, box)
    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"pair_admissible[{alpha.name}]")
    report.premise_hits = 0

    for i in range(sample_count):
        x, y = sample_points(domain, 2, rng, box)
        report.samples_tested += 1
        if not _at_least_one(alpha(x, y)):
            continue
        report.count_premise()
        a_st, a_ts = alpha(S(x), T(y)), alpha(T(x), S(y))
        if not _at_least_one(a_st):
            report.violation("alpha(Sx,Ty)", i, {"x": x, "y": y}, {"alpha(Sx,Ty)": a_st})
        elif not _at_least_one(a_ts):
            report.violation("alpha(Tx,Sy)", i, {"x": x, "y": y}, {"alpha(Tx,Sy)": a_ts})
        if report.failed:
            break
    return report.build()


def check_alpha_admissible(alpha: AlphaMap, T: SelfMap, sample_count: int, seed: int,
                           box: Optional[float] = None, domain=COMPLEX_PLANE) -> CheckReport:
    """Single map: 1 ≾ α(x,y) implies 1 ≾ α(Tx,Ty)"""
    _, box = _defaults(None, box)
    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"alpha_admissible[{alpha.name}]")
    report.premise_hits = 0

    for i in range(sample_count):
        x, y = sample_points(domain, 2, rng, box)
        report.samples_tested += 1
        if not _at_least_one(alpha(x, y)):
            continue
        report.count_premise()
        a_tt = alpha(T(x), T(y))
        if not _at_least_one(a_tt):
            report.violation("alpha(Tx,Ty)", i, {"x": x, "y": y}, {"alpha(Tx,Ty)": a_tt})
            break
    return report.build()


def check_triangular_orbital(alpha: AlphaMap, S: SelfMap, T: SelfMap, sample_count: int, seed: int,
                             box: Optional[float] = None, domain=COMPLEX_PLANE) -> CheckReport:
    """Orbital implications along S and T, then the two triangular implications"""
    _, box = _defaults(None, box)
    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"triangular_orbital[{alpha.name}]")
    report.premise_hits = 0

    for i in range(sample_count):
        x, y = sample_points(domain, 2, rng, box)
        report.samples_tested += 1
        sx, tx = S(x), T(x)
        sy, ty = S(y), T(y)

        # each entry: premise holds -> list of (clause, value that must dominate 1)
        checks = []
        if _at_least_one(alpha(x, sx)):
            checks.append([("alpha(Sx,TSx)", alpha(sx, T(sx))), ("alpha(Tx,SSx)", alpha(tx, S(sx)))])
        if _at_least_one(alpha(x, tx)):
            checks.append([("alpha(Sx,TTx)", alpha(sx, T(tx))), ("alpha(Tx,STx)", alpha(tx, S(tx)))])
        if _at_least_one(alpha(x, y)) and _at_least_one(alpha(y, sy)):
            checks.append([("alpha(x,Sy)", alpha(x, sy))])
        if _at_least_one(alpha(x, y)) and _at_least_one(alpha(y, ty)):
            checks.append([("alpha(x,Ty)", alpha(x, ty))])

        for conclusions in checks:
            report.count_premise()
            for clause, value in conclusions:
                if not _at_least_one(value):
                    report.violation(clause, i, {"x": x, "y": y}, {clause: value})
                    break
            if report.failed:
                break
        if report.failed:
            break
    return report.build()


def check_regularity(alpha: AlphaMap, trace: Sequence[Point], limit: Point,
                     fraction: Optional[float] = None) -> CheckReport:
    """Enough trace indices n with 1 ≾ α(x_n, limit) and 1 ≾ α(limit, x_n)"""
    if len(trace) == 0:
        raise ValueError("check_regularity needs a nonempty trace")
    fraction = get_settings().regularity_fraction if fraction is None else fraction
    required = math.ceil(fraction * len(trace))

    qualifying = [
        n for n, point in enumerate(trace)
        if _at_least_one(alpha(point, limit)) and _at_least_one(alpha(limit, point))
    ]
    report = ReportBuilder(f"regularity[{alpha.name}]")
    report.samples_tested = len(trace)
    report.premise_hits = len(qualifying)
    if len(qualifying) < required:
        report.violation("subsequence", len(trace) - 1, {"limit": limit},
                         {"qualifying": len(qualifying), "required": required})
    return report.build()


def check_banach(T: SelfMap, lam: float, metric: ComplexMetric, sample_count: int, seed: int,
                 tolerance: Optional[float] = None, box: Optional[float] = None) -> CheckReport:
    """d(Tx,Ty) ≾ λ·d(x,y) componentwise"""
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    tolerance, box = _defaults(tolerance, box)
    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"banach[{metric.name}]")

    for i in range(sample_count):
        x, y = sample_points(metric.domain, 2, rng, box)
        report.samples_tested += 1
        image = distance(metric, T(x), T(y))
        bound = distance(metric, x, y) * lam
        if not precsim(image, bound, OrderConfig(tolerance * max(1.0, abs(bound)))):
            report.violation("banach", i, {"x": x, "y": y}, {"d(Tx,Ty)": image, "lambda*d(x,y)": bound})
            break
    return report.build()

