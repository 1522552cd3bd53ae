"""
Utility helpers for Dyson Lab: random streams, workers, statistics, I/O.
"""

from .helpers import (
    RngStream,
    RunStats,
    as_generator,
    as_stream,
    get_run_stats,
    parallel_map,
    read_configurations,
    worker_count,
    write_csv,
    write_json,
)

__all__ = [
    "RngStream",
    "RunStats",
    "as_generator",
    "as_stream",
    "get_run_stats",
    "parallel_map",
    "read_configurations",
    "worker_count",
    "write_csv",
    "write_json",
]
