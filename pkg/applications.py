"""
Analytic applications
The Volterra integral equation x(t) = 2 + ∫_a^t (x(s) + s³) e^{1-2s} ds and the
periodic problem u' = f(t, u), u(0) = u(a), both discretised on uniform grids
and solved with the fixed-point engine.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from cvms_core import ComplexMetric, GridFunction
from errors import DomainMismatchError
from fixpoint_engine import FixpointResult, SolverConfig, iterate_single
from log_config import get_logger
from reports import CheckReport, ReportBuilder

logger = get_logger(__name__)

# f(t, u) on the whole grid: t has shape (N,), u has shape (N, n)
Forcing = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ---------------------------------------------------------------- Volterra


def volterra_contraction_estimate(a: float, b: float) -> float:
    """λ = (b - a) / e^{2a-1}"""
    return (b - a) / math.exp(2 * a - 1)


def volterra_operator(x: GridFunction, a: float, b: float) -> GridFunction:
    """t ↦ 2 + ∫_a^t (x(s) + s³) e^{1-2s} ds by cumulative trapezoid"""
    if (x.a, x.b) != (float(a), float(b)):
        raise DomainMismatchError(f"Grid function lives on [{x.a}, {x.b}], operator on [{a}, {b}]")
    if x.dimension != 1:
        raise DomainMismatchError(f"Volterra operator acts on scalar functions, got dimension {x.dimension}")
    s = x.nodes
    integrand = (x.values[:, 0] + s ** 3) * np.exp(1.0 - 2.0 * s)
    return x.with_values(2.0 + cumulative_trapezoid(integrand, s, initial=0.0))


@dataclass
class IntegralEquationSolution:
    result: FixpointResult
    a: float
    b: float
    contraction_estimate: float

    @property
    def solution(self) -> GridFunction:
        return self.result.point

    def to_dict(self) -> Dict[str, Any]:
        data = self.result.to_dict()
        data.update({"a": self.a, "b": self.b, "contraction_estimate": self.contraction_estimate})
        return data


def solve_integral_equation(a: float, b: float, node_count: int,
                            cfg: Optional[SolverConfig] = None) -> IntegralEquationSolution:
    if node_count < 3:
        raise ValueError(f"grid needs at least 3 nodes, got {node_count}")
    if not 0 < a < b:
        raise ValueError(f"interval needs 0 < a < b, got [{a}, {b}]")
    if a <= 1:
        logger.warning("integral equation analysed for a > 1", a=a)
    lam = volterra_contraction_estimate(a, b)
    if lam >= 1:
        logger.warning("contraction estimate is not below 1", contraction_estimate=lam, a=a, b=b)

    metric = ComplexMetric.integral_equation_metric(a, b, node_count)
    x0 = GridFunction.constant(a, b, node_count, 2.0)
    result = iterate_single(lambda x: volterra_operator(x, a, b), x0, metric, cfg)
    return IntegralEquationSolution(result, float(a), float(b), lam)


# ---------------------------------------------------------------- periodic problem


@dataclass(frozen=True)
class PeriodicProblem:
    """u'(t) = f(t, u(t)) on [0, a] with u(0) = u(a), shifted by η"""

    f: Forcing
    a: float
    eta: float
    n: int = 1
    name: str = "custom"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"period a must be > 0, got {self.a}")
        if not self.eta > 1:
            raise ValueError(f"eta must be > 1, got {self.eta}")
        if self.n < 1:
            raise ValueError(f"dimension n must be >= 1, got {self.n}")

    def forcing(self, t: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.f(t, u), dtype=float), u.shape)

    def to_dict(self) -> Dict[str, Any]:
        return {"f": self.name, "a": self.a, "eta": self.eta, "n": self.n}


def green_kernel(t: float, s: float, a: float, eta: float) -> float:
    """H(t, s); the first branch covers s = t"""
    if not (0 <= t <= a and 0 <= s <= a):
        raise ValueError(f"kernel arguments must lie in [0, {a}], got t={t}, s={s}")
    if not eta > 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    denominator = math.expm1(eta * a)
    if s <= t:
        return math.exp(eta * (a + s - t)) / denominator
    return math.exp(eta * (s - t)) / denominator


def kernel_mass(t: float, a: float, eta: float, node_count: int) -> float:
    """∫_0^a H(t, s) ds, trapezoid on [0, t] and [t, a] separately"""
    if node_count < 3:
        raise ValueError(f"grid needs at least 3 nodes, got {node_count}")
    if not 0 <= t <= a:
        raise ValueError(f"t must lie in [0, {a}], got {t}")
    denominator = math.expm1(eta * a)
    mass = 0.0
    if t > 0:
        s = np.linspace(0.0, t, node_count)
        mass += trapezoid(np.exp(eta * (a + s - t)) / denominator, s)
    if t < a:
        s = np.linspace(t, a, node_count)
        mass += trapezoid(np.exp(eta * (s - t)) / denominator, s)
    return float(mass)


def _check_periodic_grid(u: GridFunction, p: PeriodicProblem) -> None:
    if u.a != 0.0 or u.b != float(p.a):
        raise DomainMismatchError(f"Grid function lives on [{u.a}, {u.b}], problem on [0, {p.a}]")
    if u.dimension != p.n:
        raise DomainMismatchError(f"Problem has dimension {p.n}, grid function {u.dimension}")


def periodic_operator(u: GridFunction, p: PeriodicProblem) -> GridFunction:
    """(Tu)(t_i) = ∫_0^a H(t_i, s) [f(s, u(s)) + η u(s)] ds, split at s = t_i"""
    _check_periodic_grid(u, p)
    eta, a = p.eta, p.a
    s = u.nodes
    g = p.forcing(s, u.values) + eta * u.values

    # H factors as coeff(t) * e^{η(s-a)} on each side of s = t
    weighted = np.exp(eta * (s - a))[:, None] * g
    running = cumulative_trapezoid(weighted, s, axis=0, initial=0.0)
    norm = -math.expm1(-eta * a)
    left = (np.exp(eta * (a - s)) / norm)[:, None]
    right = (np.exp(-eta * s) / norm)[:, None]
    return u.with_values(left * running + right * (running[-1] - running))


def residual_periodic(u: GridFunction, p: PeriodicProblem) -> float:
    """Centered-difference ODE defect on interior nodes plus the periodicity gap"""
    if u.node_count < 3:
        raise ValueError(f"residual needs at least 3 nodes, got {u.node_count}")
    _check_periodic_grid(u, p)
    t, values = u.nodes, u.values
    derivative = (values[2:] - values[:-2]) / (2.0 * u.h)
    defect = derivative - p.forcing(t[1:-1], values[1:-1])
    ode_part = float(np.max(np.abs(defect)))
    gap = float(np.max(np.abs(values[0] - values[-1])))
    return ode_part + gap


def check_periodic_lipschitz(p: PeriodicProblem, sample_count: int = 1000, seed: int = 0,
                             box: float = 10.0, tolerance: float = 1e-12) -> CheckReport:
    """‖f(t,u) + ηu - f(t,v) - ηv‖ ≤ ‖u - v‖ on random (t, u, v)"""
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, p.a, sample_count)
    u = rng.uniform(-box, box, (sample_count, p.n))
    v = rng.uniform(-box, box, (sample_count, p.n))
    lhs = np.max(np.abs(p.forcing(t, u) + p.eta * u - p.forcing(t, v) - p.eta * v), axis=1)
    rhs = np.max(np.abs(u - v), axis=1)

    report = ReportBuilder(f"periodic_lipschitz[{p.name}]")
    report.samples_tested = sample_count
    bad = np.flatnonzero(lhs > rhs * (1.0 + tolerance))
    if bad.size:
        i = int(bad[0])
        report.violation("lipschitz", i, {"t": t[i], "u": u[i], "v": v[i]},
                         {"lhs": lhs[i], "rhs": rhs[i]})
        logger.warning("eta outside the verified Lipschitz range", problem=p.name, eta=p.eta)
    return report.build()


@dataclass
class PeriodicSolution:
    result: FixpointResult
    problem: PeriodicProblem
    residual: float
    lipschitz: CheckReport

    @property
    def solution(self) -> GridFunction:
        return self.result.point

    def to_dict(self) -> Dict[str, Any]:
        data = self.result.to_dict()
        data.update({
            "problem": self.problem.to_dict(),
            "residual": self.residual,
            "contraction_estimate": 1.0 / self.problem.eta,
            "lipschitz": self.lipschitz.to_dict(),
        })
        return data


def solve_periodic(p: PeriodicProblem, node_count: int,
                   cfg: Optional[SolverConfig] = None) -> PeriodicSolution:
    if node_count < 3:
        raise ValueError(f"grid needs at least 3 nodes, got {node_count}")
    lipschitz = check_periodic_lipschitz(p)
    metric = ComplexMetric.periodic_metric(p.a, node_count, p.n)
    u0 = GridFunction.constant(0.0, p.a, node_count, 0.0, p.n)
    result = iterate_single(lambda u: periodic_operator(u, p), u0, metric, cfg)
    residual = residual_periodic(result.point, p)
    logger.info("periodic problem solved", problem=p.name, converged=result.converged, residual=residual)
    return PeriodicSolution(result, p, residual, lipschitz)


# ---------------------------------------------------------------- named problems


def drift_exact(t):
    """u(t) = t - 1 + e^{-t} / (1 - e^{-1}), the periodic solution of u' = t - u on [0, 1]"""
    t = np.asarray(t, dtype=float)
    return t - 1.0 + np.exp(-t) / (-math.expm1(-1.0))


def drift_problem(eta: float = 1.5, n: int = 1) -> PeriodicProblem:
    """u' = t - u componentwise, period 1"""
    return PeriodicProblem(lambda t, u: t[:, None] - u, 1.0, eta, n, "drift")


def log_damped_problem(eta: float = 2.5, n: int = 1) -> PeriodicProblem:
    """u' = -ln(10 + t²) u, period 2"""
    return PeriodicProblem(lambda t, u: -np.log(10.0 + t ** 2)[:, None] * u, 2.0, eta, n, "log_damped")


def zero_forcing(a: float = 1.0, eta: float = 1.5, n: int = 1) -> PeriodicProblem:
    return PeriodicProblem(lambda t, u: np.zeros_like(u), a, eta, n, "zero")


def linear_problem(k: float, c: float = 0.0, a: float = 1.0, eta: float = 1.5, n: int = 1) -> PeriodicProblem:
    """u' = -k u + c"""
    return PeriodicProblem(lambda t, u: -k * u + c, a, eta, n, f"linear({k!r},{c!r})")


# names used by existing configs
PROBLEM_ALIASES = {"example32": "drift", "example33": "log_damped"}


def problem_by_name(name: str, eta: Optional[float] = None, a: Optional[float] = None,
                    n: int = 1) -> PeriodicProblem:
    """drift | log_damped | zero | linear(k,c)"""
    name = PROBLEM_ALIASES.get(name.strip(), name.strip())
    if name == "drift":
        return drift_problem(1.5 if eta is None else eta, n)
    if name == "log_damped":
        return log_damped_problem(2.5 if eta is None else eta, n)
    if name == "zero":
        return zero_forcing(1.0 if a is None else a, 1.5 if eta is None else eta, n)
    if name.startswith("linear(") and name.endswith(")"):
        args = [float(v) for v in name[len("linear("):-1].split(",")]
        k, c = (args + [0.0])[:2]
        return linear_problem(k, c, 1.0 if a is None else a, 1.5 if eta is None else eta, n)
    raise ValueError(f"Unknown problem {name!r} (expected drift, log_damped, zero or linear(k,c))")
