from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union
import logging
import math

from models.run_spec import GoldenRecord, RunSpec, load_golden_records
from utils.exceptions import BoseGasError
from utils.progress import ProgressInfo, ProgressReporter
from .base_service import Service
from .runners import run

logger = logging.getLogger(__name__)


@dataclass
class GoldenOutcome:
    """Comparison of one rerun record against its pinned values."""
    record: GoldenRecord
    actual: Dict[str, Optional[float]] = field(default_factory=dict)
    deltas: Dict[str, Optional[float]] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        return all(delta is not None and delta <= self.record.tolerances[key]
                   for key, delta in self.deltas.items())

    def rows(self) -> List[Dict[str, Any]]:
        if self.error is not None:
            return [{"record": self.record.label, "key": "", "expected": None, "actual": None,
                     "delta": None, "tolerance": None, "passed": False, "error": self.error}]
        return [{"record": self.record.label, "key": key, "expected": self.record.expected[key],
                 "actual": self.actual.get(key), "delta": delta, "tolerance": self.record.tolerances[key],
                 "passed": delta is not None and delta <= self.record.tolerances[key], "error": ""}
                for key, delta in self.deltas.items()]


@dataclass
class GoldenReport:
    outcomes: List[GoldenOutcome]

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    @property
    def n_failed(self) -> int:
        return sum(not outcome.passed for outcome in self.outcomes)

    def rows(self) -> List[Dict[str, Any]]:
        return [row for outcome in self.outcomes for row in outcome.rows()]

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "n_records": len(self.outcomes), "n_failed": self.n_failed}


class GoldenService(Service):
    """Reruns golden records through the subcommand runners and compares the results."""

    def __init__(self, threads: Optional[int] = 0):
        super().__init__(threads)

    def start(self) -> None:
        super().start()

    def stop(self) -> None:
        super().stop()

    def check_record(self, record: GoldenRecord) -> GoldenOutcome:
        outcome = GoldenOutcome(record)
        try:
            spec = RunSpec(record.subcommand, dict(record.parameters), threads=1, deterministic=True)
            payload = run(spec).payload
        except BoseGasError as e:
            outcome.error = f"{type(e).__name__}: {e}"
            logger.error(f"Golden record '{record.label}' failed to run: {e}")
            return outcome
        for key, expected in record.expected.items():
            value = payload.get(key)
            if isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value):
                outcome.actual[key] = float(value)
                outcome.deltas[key] = abs(float(value) - expected)
            else:
                outcome.actual[key] = None
                outcome.deltas[key] = None
        if not outcome.passed:
            logger.warning(f"Golden record '{record.label}' differs: {outcome.deltas}")
        return outcome

    def check(self, records: Union[str, Path, Sequence[GoldenRecord]],
              progress: Optional[Callable[[ProgressInfo], None]] = None) -> GoldenReport:
        """Rerun every record; records run concurrently and are reported in file order."""
        if isinstance(records, (str, Path)):
            records = load_golden_records(records)
        records = list(records)
        reporter = ProgressReporter("golden", total_steps=len(records), callback=progress)
        reporter.start(f"Checking {len(records)} golden record(s)")
        futures = [self.submit(self.check_record, record) for record in records]
        outcomes = []
        for future in futures:
            outcomes.append(future.result())
            reporter.increment()
        report = GoldenReport(outcomes)
        reporter.complete(f"{len(records) - report.n_failed}/{len(records)} golden record(s) passed")
        logger.info(f"Golden check: {report.n_failed} of {len(records)} record(s) failed")
        return report
