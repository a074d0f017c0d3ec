"""
Append-only execution log.

Every run of an application can be recorded with its environment, processor
count and elapsed time. The log is a line-delimited JSON file whose first
line is a format header; later profile refits read it back.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .profile import ApplicationProfile, TimeUnit, TimingObservation, fit_profile

logger = logging.getLogger(__name__)

FORMAT_NAME = "burstadvisor-execution-log"
FORMAT_VERSION = 1


class LogStoreError(OSError):
    """Exception raised when the execution log cannot be read or written"""
    pass


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class ExecutionRecord:
    """One finished run"""
    environment: str
    processors: int
    elapsed: float
    unit: TimeUnit = TimeUnit.HOURS
    timestamp: datetime = field(default_factory=_utcnow)
    job_tag: Optional[str] = None

    def __post_init__(self):
        # validation is shared with the profile's observation type
        observation = TimingObservation(self.processors, self.elapsed, self.unit)
        object.__setattr__(self, "processors", int(observation.processors))
        object.__setattr__(self, "elapsed", float(observation.elapsed))
        object.__setattr__(self, "unit", observation.unit)
        if not self.environment:
            raise ValueError("environment label must not be empty")
        ts = self.timestamp
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        object.__setattr__(self, "timestamp", ts.astimezone(timezone.utc))

    def to_observation(self) -> TimingObservation:
        return TimingObservation(self.processors, self.elapsed, self.unit)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "environment": self.environment,
            "processors": self.processors,
            "elapsed": self.elapsed,
            "unit": self.unit.value,
            "timestamp": self.timestamp.isoformat(),
            "job_tag": self.job_tag,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExecutionRecord":
        return cls(
            environment=data["environment"],
            processors=int(data["processors"]),
            elapsed=float(data["elapsed"]),
            unit=TimeUnit.parse(data.get("unit", TimeUnit.HOURS)),
            timestamp=datetime.fromisoformat(data["timestamp"]),
            job_tag=data.get("job_tag"),
        )


class LogStore:
    """
    Line-delimited JSON execution log.

    Single writer, many readers: concurrent appends from several processes
    must be serialized by the caller.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        if path is None:
            from .config import get_config_manager
            path = get_config_manager().log_store_path()
        self.path = Path(path)

    def _header(self) -> str:
        return json.dumps({"format": FORMAT_NAME, "version": FORMAT_VERSION})

    def append(self, record: ExecutionRecord) -> int:
        """
        Append ``record``; returns the number of records now stored.

        Raises:
            LogStoreError: If the log location is not writable
        """
        line = json.dumps(record.to_dict(), sort_keys=True)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            new_file = not self.path.exists() or self.path.stat().st_size == 0
            with open(self.path, "a", encoding="utf-8") as f:
                if new_file:
                    f.write(self._header() + "\n")
                f.write(line + "\n")
        except OSError as e:
            raise LogStoreError(f"Could not append to execution log {self.path}: {e}") from e
        logger.debug(f"Appended {record.environment} P={record.processors} to {self.path}")
        return self.count()

    def scan(self, environment: Optional[str] = None) -> List[ExecutionRecord]:
        """All records in insertion order, optionally for one environment."""
        if not self.path.exists():
            return []
        records = []
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                for lineno, line in enumerate(f, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    data = json.loads(line)
                    if "format" in data:
                        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
                            raise LogStoreError(f"Unsupported execution log header in {self.path}: {data}")
                        continue
                    record = ExecutionRecord.from_dict(data)
                    if environment is None or record.environment == environment:
                        records.append(record)
        except LogStoreError:
            raise
        except OSError as e:
            raise LogStoreError(f"Could not read execution log {self.path}: {e}") from e
        except (json.JSONDecodeError, KeyError) as e:
            raise LogStoreError(f"Corrupt execution log {self.path} at line {lineno}: {e}") from e
        return records

    def count(self, environment: Optional[str] = None) -> int:
        return len(self.scan(environment))

    def environments(self) -> List[str]:
        return sorted({r.environment for r in self.scan()})

    def refit(self, environment: str, unit=TimeUnit.HOURS) -> ApplicationProfile:
        """
        Fit a profile from the logged runs of ``environment``.

        Raises:
            InsufficientDataError: Fewer than two runs are logged for the environment
        """
        observations = [r.to_observation() for r in self.scan(environment)]
        logger.info(f"Refitting '{environment}' from {len(observations)} logged runs")
        return fit_profile(observations, unit=unit)
