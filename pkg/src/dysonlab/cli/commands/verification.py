"""
Verification subcommands: verify, rigidity.
"""

import logging

from dysonlab.__version__ import __version__
from dysonlab.core.exceptions import ConfigError
from dysonlab.services.reports import publish, report, sweep
from dysonlab.services.rigidity import (
    DEFAULT_WINDOW_K,
    count_variance_profile,
    sample_windows,
    shell_occupancy_stats,
)
from dysonlab.services.suites import CLOSED_FORM, SUITES, SuiteSizes, run_suite
from dysonlab.utils.helpers import RngStream

from .schema import FLOATS, INT, STR, CommandResult, CommandSpec, ExperimentConfig, Parameter

logger = logging.getLogger(__name__)

_SIZES = SuiteSizes()


def run_verify(experiment: ExperimentConfig) -> CommandResult:
    """Run a verification suite and tabulate every check."""
    sizes = SuiteSizes(
        paths=experiment["paths"],
        samples=experiment["samples"],
        pairs=experiment["pairs"],
        pathwise_paths=experiment["pathwise_paths"],
        pathwise_steps=experiment["pathwise_steps"],
        window_k=experiment["window_k"],
    )
    if min(sizes.paths, sizes.samples, sizes.pairs, sizes.pathwise_paths, sizes.pathwise_steps) < 2:
        raise ConfigError("Suite sizes must be at least 2")
    results = run_suite(experiment["suite"], experiment.seed, sizes)
    records = [r.to_dict() for r in results]
    return CommandResult(
        header=("name", "label", "residual", "tolerance", "statistical_error", "pass"),
        rows=[(r.name, r.label, r.residual, r.tolerance, r.statistical_error, r.passed) for r in results],
        payload={"suite": experiment["suite"], "seed": experiment.seed, "version": __version__, "checks": records},
        checks=results,
        summary={"suite": experiment["suite"]},
    )


def run_rigidity(experiment: ExperimentConfig) -> CommandResult:
    """Shell occupancy table and, with samples, the count-variance profile."""
    kernel, n = experiment["kernel"], experiment["samples"]
    if n < 0:
        raise ConfigError(f"Sample count must be nonnegative, got {n}")
    stream = RngStream(experiment.seed)
    shells = shell_occupancy_stats(kernel, experiment["shells"], n, stream.spawn(0), experiment["window_k"])
    checks = [
        publish(
            report(
                "shell_occupancy_bound",
                min(row.probability - row.bound for row in shells),
                1e-9,
                parameters={"kernel": kernel, "shells": len(shells)},
            )
        )
    ]
    payload = {"kernel": kernel, "shells": [row.to_dict() for row in shells]}

    if n >= 2 and kernel == "sine":
        widths = experiment["half_widths"]
        samples = sample_windows(kernel, n, max(widths), stream.spawn(1), experiment["window_k"])
        profile = count_variance_profile(samples, widths, kernel)
        payload["count_variance"] = [row.to_dict() for row in profile]
        checks.append(
            publish(
                sweep(
                    "count_sub_poissonian",
                    [
                        report(
                            "count_sub_poissonian",
                            row.mean - row.variance,
                            0.0,
                            (row.mean_error**2 + row.variance_error**2) ** 0.5,
                            {"half_width": row.half_width},
                        )
                        for row in profile
                    ],
                )
            )
        )
    logger.info(f"🐚 {kernel} shell table: {len(shells)} shells, partial sum {shells[-1].partial_sum:.4f}")
    header = ("shell", "left", "right", "probability", "bound", "partial_sum", "frequency", "standard_error")
    return CommandResult(
        header=header,
        rows=[tuple(row.to_dict()[h] for h in header) for row in shells],
        payload=payload,
        checks=checks,
        summary={"shells": len(shells)},
    )


COMMANDS = (
    CommandSpec(
        "verify",
        "run the closed-form or Monte Carlo verification suite",
        {
            "suite": Parameter(STR, CLOSED_FORM, "suite to run", choices=SUITES),
            "paths": Parameter(INT, _SIZES.paths, "paths per Monte Carlo ensemble"),
            "samples": Parameter(INT, _SIZES.samples, "window samples"),
            "pairs": Parameter(INT, _SIZES.pairs, "pairs per extension level"),
            "pathwise_paths": Parameter(INT, _SIZES.pathwise_paths, "coupled paths for the pathwise check"),
            "pathwise_steps": Parameter(INT, _SIZES.pathwise_steps, "base steps for the pathwise check"),
            "window_k": Parameter(INT, _SIZES.window_k, "GUE size behind window samples"),
        },
        run_verify,
        default_format="json",
    ),
    CommandSpec(
        "rigidity",
        "shell occupancy and count-variance diagnostics",
        {
            "kernel": Parameter(STR, "sine", "kernel", choices=("sine", "airy")),
            "shells": Parameter(INT, 20, "number of shells"),
            "samples": Parameter(INT, 0, "window samples for Monte Carlo frequencies"),
            "half_widths": Parameter(FLOATS, [0.5, 1.0, 2.0], "half-widths L of the count windows [-L, L)"),
            "window_k": Parameter(INT, DEFAULT_WINDOW_K, "GUE size behind window samples"),
        },
        run_rigidity,
        default_format="json",
    ),
)
