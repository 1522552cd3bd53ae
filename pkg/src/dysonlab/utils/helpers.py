#
# This file is part of Dyson Lab.
#
# Dyson Lab is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# Dyson Lab is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with Dyson Lab.  If not, see <https://www.gnu.org/licenses/>.
#
"""
Utility functions for Dyson Lab.

This module provides reproducible random streams, the worker pool used for
embarrassingly parallel loops, run statistics for the command line summary,
and the CSV/JSON persistence helpers shared by every subcommand.
"""

import csv
import io
import json
import logging
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
import psutil

from dysonlab.__version__ import __version__
from dysonlab.core.config import config
from dysonlab.core.constants import CSV_METADATA_PREFIX, DEFAULT_ENCODING
from dysonlab.core.exceptions import ConfigError

# Configure logging
logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream.

    The pair (seed, stream_index), together with the chain of parent
    indices, fully determines the generated sequence.
    """

    seed: int
    stream_index: int = 0
    parent: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise ConfigError(f"stream_index must be nonnegative, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        """Return a fresh numpy Generator positioned at the start of the stream."""
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=self.parent + (self.stream_index,)
        )
        return np.random.default_rng(sequence)

    def spawn(self, index: int) -> "RngStream":
        """Derive the child stream with the given index."""
        return RngStream(self.seed, index, self.parent + (self.stream_index,))


RngLike = Union[RngStream, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Coerce a stream, a seed or a Generator into a numpy Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def as_stream(rng: RngLike) -> RngStream:
    """Coerce a seed or a stream into an RngStream.

    A Generator is turned into a stream by drawing a seed from it, so callers
    that pass generators still get per-path child streams.
    """
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, np.random.Generator):
        return RngStream(int(rng.integers(0, 2**63 - 1)))
    if rng is None:
        return RngStream(int(np.random.SeedSequence().entropy % (2**63)))
    return RngStream(int(rng))


def worker_count() -> int:
    """Number of worker threads, capped by DYSON_LAB_THREADS."""
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    cap = config.get("threads")
    if cap:
        return max(1, min(int(cap), cores))
    return max(1, cores)


def parallel_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply func to every item, preserving order.

    Runs inline when a single worker is available or there is at most one
    item; numpy releases the GIL inside the heavy kernels, so threads are
    enough for the row-wise loops this is used for.
    """
    values = list(items)
    n_workers = workers or worker_count()
    if n_workers <= 1 or len(values) <= 1:
        return [func(v) for v in values]
    with ThreadPoolExecutor(max_workers=min(n_workers, len(values))) as pool:
        return list(pool.map(func, values))


class RunStats:
    """Track run statistics for the command line summary."""

    def __init__(self) -> None:
        self.start_time = time.time()
        self.operations: Dict[str, int] = defaultdict(int)
        self.checks_run = 0
        self.checks_failed = 0
        self.artifacts: List[str] = []
        self.lock = threading.Lock()

    def record_operation(self, name: str) -> None:
        """Record an operation call."""
        with self.lock:
            self.operations[name] += 1

    def record_check(self, name: str, passed: bool) -> None:
        """Record the outcome of an embedded check."""
        with self.lock:
            self.operations[f"check:{name}"] += 1
            self.checks_run += 1
            if not passed:
                self.checks_failed += 1

    def record_artifact(self, path: Union[str, Path]) -> None:
        """Record a written result file."""
        with self.lock:
            self.artifacts.append(str(path))

    def reset(self) -> None:
        """Clear all counters and restart the clock."""
        with self.lock:
            self.start_time = time.time()
            self.operations = defaultdict(int)
            self.checks_run = 0
            self.checks_failed = 0
            self.artifacts = []

    def get_stats(self) -> Dict[str, Any]:
        """Get current statistics."""
        with self.lock:
            elapsed = time.time() - self.start_time
            return {
                "elapsed_seconds": elapsed,
                "elapsed_formatted": format_duration(elapsed),
                "checks_run": self.checks_run,
                "checks_passed": self.checks_run - self.checks_failed,
                "checks_failed": self.checks_failed,
                "operations": dict(self.operations),
                "artifacts": list(self.artifacts),
            }


def format_duration(seconds: float) -> str:
    """Format a duration in human readable form."""
    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    secs = seconds % 60

    if hours > 0:
        return f"{hours}h {minutes}m {int(secs)}s"
    elif minutes > 0:
        return f"{minutes}m {int(secs)}s"
    else:
        return f"{secs:.2f}s"


# Global stats instance
_run_stats = RunStats()


def get_run_stats() -> RunStats:
    """Get the global run statistics instance."""
    return _run_stats


def metadata_line(seed: Optional[int]) -> str:
    """The trailing metadata comment written after every CSV table."""
    return f"{CSV_METADATA_PREFIX}seed={seed if seed is not None else 'none'}, version={__version__}"


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    seed: Optional[int] = None,
) -> Path:
    """Write a CSV table with a header row and a trailing metadata line.

    Rows may be ragged (configurations of different sizes); floats are
    written with repr precision so re-reading is lossless.
    """
    target = Path(path)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        # An empty configuration is written as one quoted empty cell.
        writer.writerow([_format_cell(v) for v in row] or [""])
    buffer.write(metadata_line(seed) + "\n")
    encoding = config.get("encoding", DEFAULT_ENCODING)
    target.write_text(buffer.getvalue(), encoding=encoding)
    _run_stats.record_artifact(target)
    logger.debug(f"Wrote CSV {target}")
    return target


def write_json(path: Union[str, Path], payload: Any) -> Path:
    """Write a JSON document with sorted keys."""
    target = Path(path)
    encoding = config.get("encoding", DEFAULT_ENCODING)
    target.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n",
        encoding=encoding,
    )
    _run_stats.record_artifact(target)
    logger.debug(f"Wrote JSON {target}")
    return target


def read_configurations(path: Union[str, Path]) -> List[List[float]]:
    """Read a list of point lists from a .json or .csv file.

    JSON files hold either one configuration (an array of numbers) or a
    law (an array of arrays). CSV files hold one configuration per row;
    a header row and '#' comment lines are skipped.

    Raises:
        ConfigError: If the file is missing, has an unknown suffix or is malformed
    """
    source = Path(path)
    if not source.is_file():
        raise ConfigError(f"Input file not found: {source}")
    encoding = config.get("encoding", DEFAULT_ENCODING)
    suffix = source.suffix.lower()

    if suffix == ".json":
        try:
            data = json.loads(source.read_text(encoding=encoding))
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed JSON in {source}: {e}")
        if isinstance(data, list) and all(isinstance(v, (int, float)) for v in data):
            return [[float(v) for v in data]]
        if isinstance(data, list) and all(isinstance(m, list) for m in data):
            try:
                return [[float(v) for v in member] for member in data]
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Non-numeric coordinate in {source}: {e}")
        raise ConfigError(f"{source} must hold an array of numbers or an array of arrays")

    if suffix == ".csv":
        members: List[List[float]] = []
        reader = csv.reader(io.StringIO(source.read_text(encoding=encoding)))
        for line_number, row in enumerate(reader):
            if not row or row[0].startswith("#"):
                continue
            cells = [c.strip() for c in row if c.strip() != ""]
            try:
                members.append([float(c) for c in cells])
            except ValueError:
                if line_number == 0:
                    continue  # header
                raise ConfigError(f"Non-numeric value on line {line_number + 1} of {source}")
        return members

    raise ConfigError(f"Unsupported input format '{suffix}' for {source} (expected .json or .csv)")


def input_format(path: Union[str, Path]) -> str:
    """The format tag of an input file, derived from its suffix."""
    return Path(path).suffix.lower().lstrip(".")


def _format_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return value


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
