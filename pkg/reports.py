"""
Verdicts shared by every randomized checker
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from complex_order import ComplexScalar, format_complex


def to_jsonable(value: Any) -> Any:
    """Render checker inputs/values for JSON: complex numbers as "a+bi" """
    if isinstance(value, (ComplexScalar, complex)):
        return format_complex(value)
    if hasattr(value, "values") and hasattr(value, "node_count"):
        return {
            "interval": [value.a, value.b],
            "nodes": value.node_count,
            "sup_norm": float(np.max(np.abs(value.values))),
        }
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class Witness:
    """First counterexample found by a checker"""

    clause: str
    sample_index: int
    inputs: Dict[str, Any] = field(default_factory=dict)
    values: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "clause": self.clause,
            "sample_index": self.sample_index,
            "inputs": to_jsonable(self.inputs),
            "values": to_jsonable(self.values),
        }


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    samples_tested: int
    witness: Optional[Witness] = None
    failed_clauses: Tuple[str, ...] = ()
    premise_hits: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        if self.passed and self.witness is not None:
            raise ValueError("A passing report cannot carry a witness")

    @property
    def vacuous(self) -> bool:
        return self.passed and self.premise_hits == 0

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "passed": self.passed,
            "samples_tested": self.samples_tested,
            "witness": self.witness.to_dict() if self.witness else None,
            "failed_clauses": list(self.failed_clauses),
        }
        if self.name:
            data["name"] = self.name
        if self.premise_hits is not None:
            data["premise_hits"] = self.premise_hits
        return data


class ReportBuilder:
    """Collects violations while a checker loops over samples"""

    def __init__(self, name: str = ""):
        self.name = name
        self.samples_tested = 0
        self.premise_hits: Optional[int] = None
        self.witness: Optional[Witness] = None
        self._failed: List[str] = []

    def count_premise(self) -> None:
        self.premise_hits = (self.premise_hits or 0) + 1

    def violation(self, clause: str, sample_index: int, inputs=None, values=None) -> None:
        if clause not in self._failed:
            self._failed.append(clause)
        if self.witness is None:
            self.witness = Witness(clause, sample_index, dict(inputs or {}), dict(values or {}))

    @property
    def failed(self) -> bool:
        return self.witness is not None

    def build(self) -> CheckReport:
        return CheckReport(
            passed=self.witness is None,
            samples_tested=self.samples_tested,
            witness=self.witness,
            failed_clauses=tuple(self._failed),
            premise_hits=self.premise_hits,
            name=self.name,
        )
