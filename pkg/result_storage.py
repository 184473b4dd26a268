"""
Result storage
Trace and report writers plus an on-disk archive of runs
"""

import csv
import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from cvms_core import GridFunction
from fixpoint_engine import IterationTrace
from log_config import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def write_trace_csv(trace: IterationTrace, path: PathLike) -> Path:
    """Columns iter, delta (and point for complex-point traces)"""
    path = Path(path)
    rows = trace.rows()
    fieldnames = ["iter", "delta"]
    if rows and "point" in rows[0]:
        fieldnames.append("point")
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "delta": repr(row["delta"])})
    return path


def read_trace_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def dump_report(report: Dict[str, Any]) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline"""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.write_text(dump_report(report), encoding="utf-8")
    return path


def config_hash(config: Dict[str, Any]) -> str:
    return hashlib.md5(json.dumps(config, sort_keys=True).encode()).hexdigest()


class ResultStore:
    """Archive of runs: one directory per run and an index.json"""

    def __init__(self, base_path: PathLike = "results"):
        self.base_path = Path(base_path)
        self.runs_path = self.base_path / "runs"
        self.runs_path.mkdir(parents=True, exist_ok=True)
        self.index_file = self.base_path / "index.json"
        self.index = self._load_index()

    def _load_index(self) -> Dict[str, Any]:
        if self.index_file.exists():
            with open(self.index_file, "r", encoding="utf-8") as f:
                return json.load(f)
        return {"runs": {}, "last_updated": None}

    def _save_index(self) -> None:
        self.index["last_updated"] = datetime.now().isoformat()
        with open(self.index_file, "w", encoding="utf-8") as f:
            json.dump(self.index, f, indent=2, sort_keys=True)

    def store_run(self, command: str, report: Dict[str, Any], trace: Optional[IterationTrace] = None,
                  solution: Optional[GridFunction] = None) -> Dict[str, Any]:
        """Write report, trace, solution and metadata; re-running the same config overwrites"""
        digest = config_hash({"command": command, "config": report.get("config"), "seed": report.get("seed")})
        run_id = f"{command}_{digest[:12]}"
        run_dir = self.runs_path / run_id
        run_dir.mkdir(parents=True, exist_ok=True)

        files = {"report": str(write_report(report, run_dir / "report.json"))}
        if trace is not None:
            files["trace"] = str(write_trace_csv(trace, run_dir / "trace.csv"))
        if solution is not None:
            files["solution"] = str(solution.to_csv(run_dir / "solution.csv"))

        metadata = {
            "run_id": run_id,
            "command": command,
            "config_hash": digest,
            "passed": report.get("passed"),
            "stored_at": datetime.now().isoformat(),
            "files": files,
        }
        files["metadata"] = str(write_report(metadata, run_dir / "metadata.json"))
        self.index["runs"][run_id] = {
            "command": command,
            "passed": report.get("passed"),
            "path": str(run_dir),
        }
        self._save_index()
        logger.info("run stored", run_id=run_id, path=str(run_dir))
        return {"run_id": run_id, "storage_path": str(run_dir), "files": files}

    def get_run(self, run_id: str) -> Dict[str, Any]:
        if run_id not in self.index["runs"]:
            raise KeyError(f"Unknown run {run_id!r}")
        run_dir = Path(self.index["runs"][run_id]["path"])
        with open(run_dir / "report.json", "r", encoding="utf-8") as f:
            report = json.load(f)
        with open(run_dir / "metadata.json", "r", encoding="utf-8") as f:
            metadata = json.load(f)
        return {"report": report, "metadata": metadata}

    def search_runs(self, command: Optional[str] = None, passed: Optional[bool] = None) -> List[str]:
        return sorted(
            run_id for run_id, entry in self.index["runs"].items()
            if (command is None or entry["command"] == command)
            and (passed is None or entry["passed"] == passed)
        )
