"""
Built-in maps addressable by name from configs and the command line
"""

import re
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

from applications import PROBLEM_ALIASES, periodic_operator, problem_by_name, volterra_operator
from complex_order import parse_complex
from cvms_core import ComplexMetric, GridFunction, Point

_CALL = re.compile(r"^(?P<head>[a-z_0-9]+)(?:\((?P<args>[^)]*)\))?$")


@dataclass(frozen=True)
class NamedMap:
    """A self-map plus, for grid maps, the metric and start it is solved with"""

    name: str
    fn: Callable[[Any], Any]
    metric: Optional[ComplexMetric] = None
    start: Optional[Point] = None

    def __call__(self, x):
        return self.fn(x)

    @property
    def on_grid(self) -> bool:
        return self.metric is not None


COMPLEX_MAPS: Dict[str, Callable[[complex], complex]] = {
    "halfshift": lambda z: (z + 1j) / 2,
    "identity": lambda z: z,
    "halve": lambda z: z / 2,
    "double": lambda z: 2 * z,
    "double_plus_one": lambda z: 2 * z + 1,
    "conjugate": lambda z: complex(z).conjugate(),
    "square": lambda z: z * z,
    "increment": lambda z: z + 1,
    "thirdshift": lambda z: (z + 2j) / 3,
    # not contractive itself, but its square is constant
    "swap_double": lambda z: complex(2 * complex(z).imag, 0.0),
}


def resolve_map(text: str, grid: int = 2001, eta: Optional[float] = None, n: int = 1) -> NamedMap:
    """halfshift, translate(c), volterra(a,b), drift, log_damped, ..."""
    text = text.strip().replace(" ", "")
    if text in COMPLEX_MAPS:
        return NamedMap(text, COMPLEX_MAPS[text])

    match = _CALL.match(text)
    if not match:
        raise ValueError(f"Unknown map {text!r}")
    head, args = match.group("head"), match.group("args")

    if head == "translate" and args:
        c = parse_complex(args).to_complex()
        return NamedMap(text, lambda z: z + c)
    if head == "volterra":
        a, b = (float(v) for v in (args or "1,2").split(","))
        if not 0 < a < b:
            raise ValueError(f"volterra(a,b) needs 0 < a < b, got ({a}, {b})")
        return NamedMap(
            text,
            lambda x: volterra_operator(x, a, b),
            ComplexMetric.integral_equation_metric(a, b, grid),
            GridFunction.constant(a, b, grid, 2.0),
        )
    if head in ("drift", "log_damped") or head in PROBLEM_ALIASES:
        problem = problem_by_name(head, eta=eta, n=n)
        return NamedMap(
            text,
            lambda u: periodic_operator(u, problem),
            ComplexMetric.periodic_metric(problem.a, grid, problem.n),
            GridFunction.constant(0.0, problem.a, grid, 0.0, problem.n),
        )
    raise ValueError(f"Unknown map {text!r} (known: {', '.join(sorted(COMPLEX_MAPS))}, "
                     "translate(c), volterra(a,b), drift, log_damped)")
