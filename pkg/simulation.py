"""
C-simulation functions
ξ: S x S -> C with ξ(0,0) = 0, ξ(t,s) ⪇ s - t and a negative limsup along
sequences of equal positive limit. Three built-in families plus a falsifier.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional

import numpy as np

from complex_order import ZERO, ComplexScalar, Scalar, as_scalar, format_complex, in_cone, precnsim, precsim
from errors import ConeViolationError
from log_config import get_logger
from reports import CheckReport, ReportBuilder

logger = get_logger(__name__)

# ⪇ 0 at the limit: every tail component <= +LIMIT_SLACK, tail modulus >= LIMIT_SLACK
LIMIT_SLACK = 1e-12
# tails start once the test perturbations have decayed below this size
TAIL_RESOLUTION = 1e-13


@dataclass(frozen=True)
class ConeMap:
    """Named map of the cone into itself"""

    name: str
    fn: Callable[[ComplexScalar], ComplexScalar]

    def __call__(self, t: Scalar) -> ComplexScalar:
        return as_scalar(self.fn(as_scalar(t)))

    @classmethod
    def identity(cls) -> "ConeMap":
        return cls("identity", lambda t: t)

    @classmethod
    def scale(cls, c: float) -> "ConeMap":
        if not c > 0:
            raise ValueError(f"scale factor must be > 0, got {c}")
        return cls(f"scale({c!r})", lambda t: t * c)


_SCALE = re.compile(r"^scale\((?P<c>[^)]+)\)$")


def parse_cone_map(text: str) -> ConeMap:
    text = text.strip()
    if text == "identity":
        return ConeMap.identity()
    match = _SCALE.match(text)
    if match:
        return ConeMap.scale(float(match.group("c")))
    raise ValueError(f"Unknown cone map {text!r} (expected identity or scale(c))")


class SimulationKind(Enum):
    LINEAR = "xi1"
    PSI_PHI = "xi2"
    IMAG_PENALTY = "xi3"
    CUSTOM = "custom"


def _validate_cone_maps(psi: ConeMap, phi: ConeMap, samples: int = 64) -> None:
    """ψ(t) ⪇ t ≾ φ(t) and both land in the cone, on a fixed sample of t != 0"""
    rng = np.random.default_rng(0)
    probes = [ComplexScalar(1.0, 0.0), ComplexScalar(0.0, 1.0)]
    probes += [ComplexScalar(x, y) for x, y in rng.uniform(0.0, 10.0, size=(samples, 2))]
    for t in probes:
        pt, ft = psi(t), phi(t)
        if not (in_cone(pt) and in_cone(ft)):
            raise ConeViolationError(f"{psi.name}/{phi.name} leave the cone at t={format_complex(t)}")
        if not precnsim(pt, t):
            raise ValueError(f"psi={psi.name} fails psi(t) ⪇ t at t={format_complex(t)}")
        if not precsim(t, ft):
            raise ValueError(f"phi={phi.name} fails t ≾ phi(t) at t={format_complex(t)}")


@dataclass(frozen=True)
class SimulationFn:
    kind: SimulationKind
    lam: Optional[float] = None
    psi: Optional[ConeMap] = None
    phi: Optional[ConeMap] = None
    fn: Optional[Callable[[ComplexScalar, ComplexScalar], Scalar]] = None
    name: str = ""

    def __post_init__(self):
        if self.kind is SimulationKind.LINEAR:
            if self.lam is None or not 0 < self.lam < 1:
                raise ValueError(f"xi1 needs 0 < lambda < 1, got {self.lam}")
        elif self.kind is SimulationKind.PSI_PHI:
            if self.psi is None or self.phi is None:
                raise ValueError("xi2 needs both psi and phi")
            _validate_cone_maps(self.psi, self.phi)
        elif self.kind is SimulationKind.CUSTOM and self.fn is None:
            raise ValueError("custom simulation function needs fn")
        if not self.name:
            object.__setattr__(self, "name", self.describe())

    @classmethod
    def linear(cls, lam: float) -> "SimulationFn":
        return cls(SimulationKind.LINEAR, lam=float(lam))

    @classmethod
    def psi_phi(cls, psi: ConeMap, phi: ConeMap) -> "SimulationFn":
        return cls(SimulationKind.PSI_PHI, psi=psi, phi=phi)

    @classmethod
    def imag_penalty(cls) -> "SimulationFn":
        return cls(SimulationKind.IMAG_PENALTY)

    @classmethod
    def custom(cls, name: str, fn: Callable[[ComplexScalar, ComplexScalar], Scalar]) -> "SimulationFn":
        return cls(SimulationKind.CUSTOM, fn=fn, name=name)

    def describe(self) -> str:
        """Config form, e.g. xi1:lambda=0.5"""
        if self.kind is SimulationKind.LINEAR:
            return f"xi1:lambda={self.lam!r}"
        if self.kind is SimulationKind.PSI_PHI:
            return f"xi2:psi={self.psi.name},phi={self.phi.name}"
        if self.kind is SimulationKind.IMAG_PENALTY:
            return "xi3"
        return self.name or "custom"


def parse_simulation(text: str) -> SimulationFn:
    """xi1:lambda=0.5 | xi2:psi=scale(0.5),phi=identity | xi3"""
    head, _, tail = text.strip().partition(":")
    params: Dict[str, str] = {}
    if tail:
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"Malformed simulation parameter {item!r} in {text!r}")
            params[key.strip()] = value.strip()

    if head == "xi1":
        if "lambda" not in params:
            raise ValueError("xi1 needs lambda=...")
        return SimulationFn.linear(float(params["lambda"]))
    if head == "xi2":
        return SimulationFn.psi_phi(
            parse_cone_map(params.get("psi", "scale(0.5)")),
            parse_cone_map(params.get("phi", "identity")),
        )
    if head == "xi3":
        return SimulationFn.imag_penalty()
    raise ValueError(f"Unknown simulation function {text!r}")


def evaluate(xi: SimulationFn, t: Scalar, s: Scalar) -> ComplexScalar:
    t, s = as_scalar(t), as_scalar(s)
    if not in_cone(t):
        raise ConeViolationError(f"t={format_complex(t)} is outside the cone")
    if not in_cone(s):
        raise ConeViolationError(f"s={format_complex(s)} is outside the cone")

    if xi.kind is SimulationKind.LINEAR:
        return s * xi.lam - t
    if xi.kind is SimulationKind.PSI_PHI:
        return xi.psi(s) - xi.phi(t)
    if xi.kind is SimulationKind.IMAG_PENALTY:
        return ComplexScalar(s.re - t.re, s.im - t.im - abs(t))
    return as_scalar(xi.fn(t, s))


def _random_cone_point(rng: np.random.Generator, box: float) -> ComplexScalar:
    """Nonzero cone point; a quarter of draws sit on one of the two boundary rays"""
    re_part, im_part = rng.uniform(0.0, box, 2)
    roll = rng.integers(0, 8)
    if roll == 0:
        im_part = 0.0
    elif roll == 1:
        re_part = 0.0
    if re_part == 0.0 and im_part == 0.0:
        re_part = box / 2
    return ComplexScalar(re_part, im_part)


def _tail_indices(decay: str, rate: float, amplitude: float, tail_length: int) -> np.ndarray:
    if decay == "geometric":
        start = math.ceil(math.log(TAIL_RESOLUTION / amplitude) / math.log(rate))
    else:
        start = math.ceil((amplitude / TAIL_RESOLUTION) ** (1.0 / rate))
    return float(start) + np.arange(tail_length, dtype=float)


def check_simulation_axioms(xi: SimulationFn, sample_count: int, tail_length: int, seed: int,
                            box: float = 10.0) -> CheckReport:
    """Falsifier for the three C-simulation axioms"""
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    if tail_length < 10:
        raise ValueError(f"tail_length must be >= 10, got {tail_length}")

    rng = np.random.default_rng(seed)
    report = ReportBuilder(f"simulation_axioms[{xi.name}]")

    origin = evaluate(xi, ZERO, ZERO)
    if not (origin.re == 0.0 and origin.im == 0.0):
        report.violation("axiom_i", 0, {"t": ZERO, "s": ZERO}, {"xi(0,0)": origin})

    for i in range(sample_count):
        t, s = _random_cone_point(rng, box), _random_cone_point(rng, box)
        report.samples_tested += 1
        value = evaluate(xi, t, s)
        if not precnsim(value, s - t):
            report.violation("axiom_ii", i, {"t": t, "s": s}, {"xi(t,s)": value, "s-t": s - t})
            break

    sequences = max(4, sample_count // tail_length)
    for j in range(sequences):
        limit = float(rng.uniform(0.1, box))
        amplitude = float(rng.uniform(0.0, min(0.05, limit / 2))) + 1e-3
        if j % 2 == 0:
            decay, rate = "geometric", float(rng.uniform(0.5, 0.95))
        else:
            decay, rate = "algebraic", float(rng.choice([1.0, 2.0, 3.0]))
        n = _tail_indices(decay, rate, amplitude, tail_length)
        profile = rate ** n if decay == "geometric" else n ** (-rate)
        a_n = rng.choice([-1.0, 1.0]) * amplitude * profile
        b_n = rng.choice([-1.0, 1.0]) * amplitude * rng.uniform(0.5, 1.0) * profile

        values = [
            evaluate(xi, ComplexScalar.real(limit + a), ComplexScalar.real(limit + b))
            for a, b in zip(a_n, b_n)
        ]
        limsup = ComplexScalar(max(v.re for v in values), max(v.im for v in values))
        last = values[-1]
        if limsup.re > LIMIT_SLACK or limsup.im > LIMIT_SLACK or abs(last) < LIMIT_SLACK:
            report.violation(
                "axiom_iii",
                j,
                {"limit": limit, "decay": decay, "rate": rate, "tail_start": float(n[0])},
                {"limsup": limsup, "tail_value": last},
            )
            break

    result = report.build()
    logger.info("simulation axioms checked", xi=xi.name, passed=result.passed,
                failed_clauses=list(result.failed_clauses))
    return result
