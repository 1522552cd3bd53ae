"""
Configuration-space subcommands: dist, wasserstein, extension.
"""

import logging
import math
from pathlib import Path
from typing import Any, List

from dysonlab.core.constants import LIPSCHITZ_SLACK
from dysonlab.core.exceptions import ConfigError
from dysonlab.services.reports import publish, report, sweep
from dysonlab.space.configspace import EmpiricalLaw
from dysonlab.space.extension import FAMILIES, lipschitz_ladder
from dysonlab.space.matching import matching_distance, partial_matching_distance
from dysonlab.space.transport import Ground, optimal_plan, wasserstein
from dysonlab.utils.helpers import RngStream, input_format, parallel_map, read_configurations

from .schema import BOOL, FLOAT, INT, PATH, STR, CommandResult, CommandSpec, ExperimentConfig, Parameter

logger = logging.getLogger(__name__)


def _json_number(value: float) -> Any:
    # JSON has no infinity.
    return value if math.isfinite(value) else "inf"


def _read_pair(left: Path, right: Path) -> tuple:
    if input_format(left) != input_format(right):
        raise ConfigError(
            f"Inputs have different formats: {left.name} ({input_format(left)}) vs {right.name} ({input_format(right)})"
        )
    return read_configurations(left), read_configurations(right)


def _ground(experiment: ExperimentConfig) -> Ground:
    if experiment["ground"] == "full":
        return Ground.full()
    if experiment["radius"] is None:
        raise ConfigError("The partial ground needs --radius")
    if experiment["p"] != 2.0:
        raise ConfigError("The partial ground is defined for p = 2 only")
    return Ground.partial(experiment["radius"])


def run_dist(experiment: ExperimentConfig) -> CommandResult:
    """Matrix of matching distances between the configurations of two files."""
    left, right = _read_pair(experiment["file_a"], experiment["file_b"])
    ground, p = _ground(experiment), experiment["p"]

    def row(gamma: List[float]) -> List[float]:
        if ground.kind == "full":
            return [float(matching_distance(gamma, eta, p)) for eta in right]
        return [partial_matching_distance(gamma, eta, ground.radius) for eta in right]

    matrix = parallel_map(row, left)
    logger.info(f"📏 {len(left)}×{len(right)} distance matrix ({ground.kind} ground, p={p})")
    return CommandResult(
        header=("left", *(f"right_{j}" for j in range(len(right)))),
        rows=[(i, *values) for i, values in enumerate(matrix)],
        payload={
            "p": p,
            "ground": ground.kind,
            "radius": ground.radius,
            "distances": [[_json_number(d) for d in values] for values in matrix],
        },
        summary={"shape": [len(left), len(right)]},
    )


def run_wasserstein(experiment: ExperimentConfig) -> CommandResult:
    """W_p between the empirical laws held by two files."""
    left, right = _read_pair(experiment["file_a"], experiment["file_b"])
    law_a, law_b = EmpiricalLaw(left), EmpiricalLaw(right)
    p, ground = experiment["p"], _ground(experiment)
    distance = float(wasserstein(law_a, law_b, p, ground))
    payload = {
        "p": p,
        "ground": ground.kind,
        "radius": ground.radius,
        "members": len(law_a),
        "distance": _json_number(distance),
    }
    rows = [(p, ground.kind, distance)]
    if experiment["plan"] and math.isfinite(distance):
        payload["assignment"] = optimal_plan(law_a, law_b, p, ground).assignment.tolist()
    logger.info(f"📏 W_{p:g} = {distance:.6g} over {len(law_a)} members ({ground.kind} ground)")
    return CommandResult(header=("p", "ground", "distance"), rows=rows, payload=payload, summary={"distance": payload["distance"]})


def run_extension(experiment: ExperimentConfig) -> CommandResult:
    """Empirical Lipschitz ladder of a parallel-extension family."""
    rows = lipschitz_ladder(
        experiment["family"],
        experiment["k"],
        experiment["lmax"],
        experiment["pairs"],
        RngStream(experiment.seed).generator(),
        experiment["radius"],
    )
    checks = [
        report(
            "extension_ladder",
            row.bound - row.estimate,
            LIPSCHITZ_SLACK,
            parameters={"family": row.family, "k": row.k, "level": row.level, "estimate": row.estimate},
        )
        for row in rows
    ]
    return CommandResult(
        header=("family", "k", "level", "points", "estimate", "bound", "pass"),
        rows=[(r.family, r.k, r.level, r.points, r.estimate, r.bound, r.passed) for r in rows],
        payload=[
            {"family": r.family, "k": r.k, "level": r.level, "points": r.points, "estimate": r.estimate, "bound": r.bound, "pass": r.passed}
            for r in rows
        ],
        checks=[publish(sweep("extension_ladder", checks, {"family": experiment["family"], "k": experiment["k"]}))],
    )


_PAIR_INPUTS = {
    "file_a": Parameter(PATH, help="first input (.json or .csv)", required=True, positional=True, metavar="fileA"),
    "file_b": Parameter(
        PATH, help="second input, same format as the first", required=True, positional=True, metavar="fileB"
    ),
    "p": Parameter(FLOAT, 2.0, "matching exponent (>= 1)"),
    "ground": Parameter(STR, "full", "ground metric", choices=("full", "partial")),
    "radius": Parameter(FLOAT, None, "window radius r of the partial ground"),
}

COMMANDS = (
    CommandSpec(
        "dist",
        "matching distance between configurations, row by row",
        dict(_PAIR_INPUTS),
        run_dist,
        stochastic=False,
    ),
    CommandSpec(
        "wasserstein",
        "Wasserstein distance between two empirical laws",
        {**_PAIR_INPUTS, "plan": Parameter(BOOL, False, "include the optimal assignment")},
        run_wasserstein,
        stochastic=False,
        default_format="json",
    ),
    CommandSpec(
        "extension",
        "Lipschitz ladder of the parallel-extension operator",
        {
            "family": Parameter(STR, "winding", "test family", choices=tuple(sorted(FAMILIES))),
            "k": Parameter(INT, 2, "number of points of the base function (1-4)"),
            "lmax": Parameter(INT, 3, "highest extension level"),
            "pairs": Parameter(INT, 10_000, "random pairs per level"),
            "radius": Parameter(FLOAT, 1.0, "window radius"),
        },
        run_extension,
    ),
)
