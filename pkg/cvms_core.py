"""
Complex valued metric spaces
Point domains (complex points, grid functions), the complex valued metrics
d1, d2, d3 and the scaled sup metric, a sampling-based axiom checker and the
modulus-Cauchy stopping criterion.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from complex_order import (
    ComplexScalar,
    OrderConfig,
    Scalar,
    as_scalar,
    in_cone,
    in_cone_within,
    precsim,
)
from errors import DomainMismatchError, NonFiniteValueError
from log_config import get_logger
from reports import CheckReport, ReportBuilder

logger = get_logger(__name__)


class DomainKind(Enum):
    COMPLEX_POINT = "complex_point"
    GRID_FUNCTION = "grid_function"


@dataclass(frozen=True)
class PointDomain:
    kind: DomainKind
    a: float = 0.0
    b: float = 1.0
    node_count: int = 2
    value_dimension: int = 1

    def __post_init__(self):
        if self.kind is DomainKind.GRID_FUNCTION:
            if not self.a < self.b:
                raise ValueError(f"Grid interval needs a < b, got [{self.a}, {self.b}]")
            if self.node_count < 2:
                raise ValueError(f"Grid needs at least 2 nodes, got {self.node_count}")
            if self.value_dimension < 1:
                raise ValueError(f"Value dimension must be >= 1, got {self.value_dimension}")

    @classmethod
    def grid(cls, a: float, b: float, node_count: int, value_dimension: int = 1) -> "PointDomain":
        return cls(DomainKind.GRID_FUNCTION, float(a), float(b), int(node_count), int(value_dimension))

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.node_count)


COMPLEX_PLANE = PointDomain(DomainKind.COMPLEX_POINT)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of u: [a, b] -> R^n at N uniform nodes, stored as an N x n array"""

    a: float
    b: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise ValueError(f"Grid values must be N x n, got shape {values.shape}")
        if values.shape[0] < 2:
            raise ValueError("A grid function needs at least 2 nodes")
        if not self.a < self.b:
            raise ValueError(f"Grid interval needs a < b, got [{self.a}, {self.b}]")
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueError("Grid function contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, a: float, b: float, node_count: int, value: float, dimension: int = 1) -> "GridFunction":
        return cls(a, b, np.full((node_count, dimension), float(value)))

    @classmethod
    def from_function(cls, a: float, b: float, node_count: int,
                      fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Sample a vectorised fn(t) on the uniform grid"""
        t = np.linspace(a, b, node_count)
        return cls(a, b, fn(t))

    @property
    def node_count(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.node_count - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.node_count)

    @property
    def domain(self) -> PointDomain:
        return PointDomain.grid(self.a, self.b, self.node_count, self.dimension)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.a == other.a
            and self.b == other.b
            and self.values.shape == other.values.shape
        )

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.a, self.b, values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Header t,u_1,...,u_n; one row per node; 17 significant digits"""
        path = Path(path)
        header = ",".join(["t"] + [f"u_{j + 1}" for j in range(self.dimension)])
        table = np.column_stack([self.nodes, self.values])
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header, comments="")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "GridFunction":
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(table[0, 0], table[-1, 0], table[:, 1:])


Point = Union[complex, float, ComplexScalar, GridFunction]


class MetricKind(Enum):
    D1 = "d1"
    D2 = "d2"
    D3 = "d3"
    SCALED_SUP = "scaled_sup"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ComplexMetric:
    kind: MetricKind
    domain: PointDomain = COMPLEX_PLANE
    k: float = 0.0
    scale: Optional[ComplexScalar] = None
    fn: Optional[Callable[[Any, Any], Scalar]] = None
    name: str = ""

    def __post_init__(self):
        if self.kind is MetricKind.SCALED_SUP:
            if self.scale is None or not in_cone(self.scale) or self.scale.is_zero():
                raise ValueError(f"Scaled sup metric needs a nonzero scale in the cone, got {self.scale}")
            if self.domain.kind is not DomainKind.GRID_FUNCTION:
                raise DomainMismatchError("Scaled sup metric is defined on grid functions")
        elif self.kind in (MetricKind.D1, MetricKind.D2, MetricKind.D3):
            if self.domain.kind is not DomainKind.COMPLEX_POINT:
                raise DomainMismatchError(f"{self.kind.value} is defined on complex points")
        elif self.kind is MetricKind.CUSTOM and self.fn is None:
            raise ValueError("Custom metric needs a distance function")
        if self.kind is MetricKind.D2 and not 0.0 <= self.k <= math.pi / 2:
            logger.warning("d2 angle leaves the cone, axiom (i) may fail", k=self.k)

    @classmethod
    def d1(cls) -> "ComplexMetric":
        return cls(MetricKind.D1, name="d1")

    @classmethod
    def d2(cls, k: float) -> "ComplexMetric":
        return cls(MetricKind.D2, k=float(k), name=f"d2(k={k})")

    @classmethod
    def d3(cls) -> "ComplexMetric":
        return cls(MetricKind.D3, name="d3")

    @classmethod
    def scaled_sup(cls, scale: Scalar, domain: PointDomain, name: str = "scaled_sup") -> "ComplexMetric":
        return cls(MetricKind.SCALED_SUP, domain=domain, scale=as_scalar(scale), name=name)

    @classmethod
    def integral_equation_metric(cls, a: float, b: float, node_count: int) -> "ComplexMetric":
        """max|x - y| * sqrt(a^2 + b^2)/a * e^{i atan(b/a)} on C([a, b], R)"""
        if not 0 < a < b:
            raise ValueError(f"integral equation metric needs 0 < a < b, got [{a}, {b}]")
        scale = cmath.rect(math.hypot(a, b) / a, math.atan(b / a))
        return cls.scaled_sup(scale, PointDomain.grid(a, b, node_count, 1), name="integral_equation")

    @classmethod
    def periodic_metric(cls, a: float, node_count: int, dimension: int = 1) -> "ComplexMetric":
        """max||u - v|| * sqrt(1 + a^2) * e^{i atan a} on C([0, a], R^n)"""
        scale = cmath.rect(math.sqrt(1.0 + a * a), math.atan(a))
        return cls.scaled_sup(scale, PointDomain.grid(0.0, a, node_count, dimension), name="periodic")

    @classmethod
    def custom(cls, name: str, fn: Callable[[Any, Any], Scalar],
               domain: PointDomain = COMPLEX_PLANE) -> "ComplexMetric":
        return cls(MetricKind.CUSTOM, domain=domain, fn=fn, name=name)


def _as_complex(p: Point) -> complex:
    if isinstance(p, GridFunction):
        raise DomainMismatchError("Expected a complex point, got a grid function")
    if isinstance(p, ComplexScalar):
        return p.to_complex()
    return complex(p)


def _check_grid_point(m: ComplexMetric, p: Point) -> GridFunction:
    if not isinstance(p, GridFunction):
        raise DomainMismatchError(f"Metric {m.name} expects grid functions, got {type(p).__name__}")
    dom = m.domain
    if (p.a, p.b, p.node_count, p.dimension) != (dom.a, dom.b, dom.node_count, dom.value_dimension):
        raise DomainMismatchError(
            f"Grid function on [{p.a}, {p.b}] with {p.node_count}x{p.dimension} values "
            f"does not belong to the domain of {m.name}"
        )
    return p


def distance(m: ComplexMetric, p: Point, q: Point) -> ComplexScalar:
    """d(p, q) as a complex number"""
    if m.kind is MetricKind.CUSTOM:
        return as_scalar(m.fn(p, q))

    if m.domain.kind is DomainKind.GRID_FUNCTION:
        u, v = _check_grid_point(m, p), _check_grid_point(m, q)
        sup = float(np.max(np.abs(u.values - v.values)))
        return ComplexScalar(sup * m.scale.re, sup * m.scale.im)

    z1, z2 = _as_complex(p), _as_complex(q)
    if m.kind is MetricKind.D1:
        return ComplexScalar(abs(z1 - z2), 0.0)
    if m.kind is MetricKind.D2:
        return ComplexScalar.from_complex(cmath.rect(abs(z1 - z2), m.k))
    if m.kind is MetricKind.D3:
        return ComplexScalar(abs(z1.real - z2.real), abs(z1.imag - z2.imag))
    raise DomainMismatchError(f"Metric kind {m.kind.value} cannot measure complex points")


def sample_points(domain: PointDomain, count: int, rng: np.random.Generator,
                  box: float = 10.0) -> list:
    """Complex points uniform on [-box, box]^2, or random low-order polynomials plus noise"""
    if domain.kind is DomainKind.COMPLEX_POINT:
        re = rng.uniform(-box, box, count)
        im = rng.uniform(-box, box, count)
        return [complex(x, y) for x, y in zip(re, im)]

    t = np.linspace(-1.0, 1.0, domain.node_count)
    points = []
    for _ in range(count):
        degree = int(rng.integers(0, 4))
        coeffs = rng.normal(0.0, box / 4, size=(degree + 1, domain.value_dimension))
        smooth = np.polynomial.polynomial.polyval(t, coeffs).T.reshape(domain.node_count, -1)
        noise = rng.normal(0.0, box / 100, size=(domain.node_count, domain.value_dimension))
        points.append(GridFunction(domain.a, domain.b, smooth + noise))
    return points


def _same_point(p: Point, q: Point) -> bool:
    if isinstance(p, GridFunction) and isinstance(q, GridFunction):
        return p.same_grid(q) and np.array_equal(p.values, q.values)
    return p == q


def check_metric_axioms(m: ComplexMetric, sample_count: int, seed: int,
                        tolerance: Optional[float] = None, box: Optional[float] = None) -> CheckReport:
    """Falsify the three metric axioms on random triples"""
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    from config import get_settings

    settings = get_settings()
    tolerance = settings.check_tolerance if tolerance is None else tolerance
    box = settings.sample_box if box is None else box

    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"metric_axioms[{m.name}]")
    for i in range(sample_count):
        x, y, z = sample_points(m.domain, 3, rng, box)
        report.samples_tested += 1
        dxx = distance(m, x, x)
        dxy = distance(m, x, y)
        dyx = distance(m, y, x)
        dxz = distance(m, x, z)
        dzy = distance(m, z, y)
        cfg = OrderConfig(tolerance * max(1.0, abs(dxz) + abs(dzy)))
        inputs = {"x": x, "y": y, "z": z}

        if not dxx.is_zero(cfg.eq_tolerance):
            report.violation("identity", i, inputs, {"d(x,x)": dxx})
        elif not in_cone_within(dxy, cfg):
            report.violation("nonnegativity", i, inputs, {"d(x,y)": dxy})
        elif dxy.is_zero(cfg.eq_tolerance) and not _same_point(x, y):
            report.violation("identity", i, inputs, {"d(x,y)": dxy})
        elif not (dxy - dyx).is_zero(cfg.eq_tolerance):
            report.violation("symmetry", i, inputs, {"d(x,y)": dxy, "d(y,x)": dyx})
        elif not precsim(dxy, dxz + dzy, cfg):
            report.violation("triangle", i, inputs, {"d(x,y)": dxy, "d(x,z)+d(z,y)": dxz + dzy})

        if report.failed:
            break

    result = report.build()
    logger.info("metric axioms checked", metric=m.name, passed=result.passed,
                samples=result.samples_tested)
    return result


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    iterations: int
    final_delta: float


def cauchy_tail(deltas: Sequence[float], tol: float, window: int) -> bool:
    """True iff the last `window` moduli are all <= tol"""
    if len(deltas) == 0:
        raise ValueError("cauchy_tail needs a nonempty sequence")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if len(deltas) < window:
        return False
    return all(d <= tol for d in deltas[-window:])


def convergence_report(deltas: Sequence[float], tol: float, window: int) -> ConvergenceReport:
    return ConvergenceReport(
        converged=cauchy_tail(deltas, tol, window),
        iterations=len(deltas),
        final_delta=float(deltas[-1]),
    )


def modulus_convergence(points: Sequence[Point], limit: Point, m: ComplexMetric,
                        tol: float, window: int = 1) -> ConvergenceReport:
    """Convergence of points to limit through |d(x_n, limit)| -> 0"""
    moduli = [abs(distance(m, p, limit)) for p in points]
    return convergence_report(moduli, tol, window)


def metric_by_name(name: str, k: float = 0.0) -> ComplexMetric:
    """Complex-point metrics by config name: d1, d2 (with k), d3"""
    if name == "d1":
        return ComplexMetric.d1()
    if name == "d2":
        return ComplexMetric.d2(k)
    if name == "d3":
        return ComplexMetric.d3()
    raise ValueError(f"Unknown metric {name!r} (expected d1, d2 or d3)")
