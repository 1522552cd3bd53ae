"""
Ensemble subcommands: sample, evolve, fredholm.
"""

import logging
import math
from typing import List

import numpy as np

from dysonlab.core.config import config
from dysonlab.core.constants import CLOSED_FORM_TOLERANCE, MIN_MCMC_ACCEPTANCE
from dysonlab.core.exceptions import ConfigError
from dysonlab.ensembles.dpp import KernelSpec, discretize, generating_function, spectrum_in_unit_interval
from dysonlab.ensembles.dynamics import FULL, HALF, SdeConfig, evolve_coupled_batch, evolve_paths
from dysonlab.ensembles.models import BULK, EDGE, ModelSpec
from dysonlab.ensembles.sampling import run_mcmc, sample_airy_window, sample_mu_k_ensemble, sample_sine_window
from dysonlab.services.inequalities import pathwise_contraction_violations
from dysonlab.services.reports import publish, report
from dysonlab.space.configspace import Window
from dysonlab.utils.helpers import RngStream

from .schema import BOOL, FLOAT, INT, STR, CommandResult, CommandSpec, ExperimentConfig, Parameter

logger = logging.getLogger(__name__)

SAMPLE_MODELS = (BULK, EDGE, "sine", "airy")


def _positive(experiment: ExperimentConfig, *names: str) -> None:
    for name in names:
        if experiment[name] is not None and not experiment[name] > 0:
            raise ConfigError(f"Parameter '{name}' must be positive, got {experiment[name]}")


def run_sample(experiment: ExperimentConfig) -> CommandResult:
    """Draw n configurations: μ^k for bulk/edge, windowed point processes for sine/airy."""
    _positive(experiment, "n", "k", "window")
    name, n = experiment["model"], experiment["n"]
    stream = RngStream(experiment.seed)
    checks = []

    if name in ("sine", "airy"):
        sampler = sample_sine_window if name == "sine" else sample_airy_window
        window = Window(experiment["window"])
        generator = stream.generator()
        members: List[List[float]] = [sampler(experiment["k"], window, generator).tolist() for _ in range(n)]
        header = ("points",)
    else:
        model = ModelSpec(name, experiment["k"])
        if experiment["method"] == "mcmc":
            chains = run_mcmc(model, experiment["steps"], experiment["step_size"], stream, chains=n)
            minimum = float(config.get("sampling.min_acceptance", MIN_MCMC_ACCEPTANCE))
            checks.append(
                publish(
                    report(
                        "mcmc_acceptance",
                        chains.mean_acceptance - minimum,
                        0.0,
                        parameters={"acceptance": chains.mean_acceptance, "regime": model.regime, "k": model.k},
                    )
                )
            )
            states = chains.states
        else:
            states = sample_mu_k_ensemble(model, n, stream, experiment["method"])
        members = np.asarray(states, dtype=float).tolist()
        header = tuple(f"x{i + 1}" for i in range(model.k))

    logger.info(f"🎲 Drew {n} {name} sample(s)")
    return CommandResult(header=header, rows=members, payload=members, checks=checks, summary={"samples": n})


def _sde_config(experiment: ExperimentConfig) -> SdeConfig:
    half_speed = experiment["half_speed"]
    return SdeConfig.from_config(
        dt=experiment["dt"],
        speed=None if half_speed is None else (HALF if half_speed else FULL),
        max_substeps=experiment["max_substeps"],
        literal_drift=experiment["literal_drift"],
    )


def run_evolve(experiment: ExperimentConfig) -> CommandResult:
    """Integrate the Dyson SDE from equilibrium or from the spread state.

    With coupled=true two independent equilibrium draws per path are
    driven by the same noise and the coupled distance is tabulated; the
    embedded check asserts it never grows.
    """
    _positive(experiment, "paths", "k")
    model = ModelSpec(experiment["model"], experiment["k"])
    cfg, t, n = _sde_config(experiment), experiment["t"], experiment["paths"]
    if t < 0:
        raise ConfigError(f"Time must be nonnegative, got {t}")
    stream = RngStream(experiment.seed)

    if experiment["coupled"]:
        x0 = sample_mu_k_ensemble(model, n, stream.spawn(0), "exact")
        y0 = sample_mu_k_ensemble(model, n, stream.spawn(1), "exact")
        batch = evolve_coupled_batch(model, x0, y0, t, cfg, stream.spawn(2))
        violations = pathwise_contraction_violations(batch.distances, cfg.dt)
        check = publish(report("pathwise_contraction", -float(violations), 0.0, parameters={"k": model.k, "paths": n}))
        rows = [
            (float(time), float(np.mean(d)), float(np.max(d)))
            for time, d in zip(batch.times, batch.distances)
        ]
        return CommandResult(
            header=("t", "mean_distance", "max_distance"),
            rows=rows,
            payload={"times": batch.times, "distances": batch.distances, "violations": violations},
            checks=[check],
            summary={"paths": n, "violations": violations},
        )

    if experiment["start"] == "spread":
        x0 = np.repeat(model.spread_state()[None, :], n, axis=0)
    else:
        x0 = sample_mu_k_ensemble(model, n, stream.spawn(0))
    terminal = evolve_paths(model, x0, t, cfg, stream.spawn(1))
    members = terminal.tolist()
    logger.info(f"🌊 Evolved {n} {model.regime} path(s) of k={model.k} to t={t}")
    return CommandResult(
        header=tuple(f"x{i + 1}" for i in range(model.k)),
        rows=members,
        payload=members,
        summary={"paths": n},
    )


def run_fredholm(experiment: ExperimentConfig) -> CommandResult:
    """G_r(t) = det(I + (t - 1) K_r) on (-r, r) with tr K_r and the bound exp((t - 1) tr K_r)."""
    spec = KernelSpec.from_name(experiment["kernel"])
    r, t, nodes = experiment["radius"], experiment["t"], experiment["nodes"]
    value = generating_function(spec, r, t, nodes)
    op = discretize(spec, -r, r, nodes)
    trace = op.trace
    bound = math.exp((t - 1.0) * trace)
    eigenvalues = op.eigenvalues
    checks = [
        publish(
            report(
                "nystrom_spectrum",
                0.0 if spectrum_in_unit_interval(op) else -1.0,
                0.0,
                parameters={"min": float(eigenvalues.min()), "max": float(eigenvalues.max())},
            )
        ),
        publish(
            report(
                "generating_function_bound",
                bound - value,
                CLOSED_FORM_TOLERANCE * max(1.0, bound),
                parameters={"kernel": spec.kind, "radius": r, "t": t},
            )
        ),
    ]
    payload = {"value": value, "trace": trace, "bound": bound, "nodes": op.size}
    logger.info(f"🧮 {spec.kind} kernel on (-{r}, {r}): G({t:.6g}) = {value:.6g}, tr K = {trace:.6g}")
    return CommandResult(
        header=("value", "trace", "bound", "nodes"),
        rows=[(value, trace, bound, op.size)],
        payload=payload,
        checks=checks,
        summary={"value": value},
    )


COMMANDS = (
    CommandSpec(
        "sample",
        "draw configurations from μ^k or the sine/Airy windows",
        {
            "model": Parameter(STR, BULK, "bulk/edge μ^k or the sine/airy point process", choices=SAMPLE_MODELS),
            "k": Parameter(INT, 4, "number of particles"),
            "n": Parameter(INT, 1, "number of samples"),
            "window": Parameter(FLOAT, 5.0, "window radius R for sine and airy"),
            "method": Parameter(STR, "auto", "μ^k sampling method", choices=("auto", "exact", "mcmc")),
            "steps": Parameter(INT, None, "MCMC steps"),
            "step_size": Parameter(FLOAT, None, "MCMC step size"),
        },
        run_sample,
    ),
    CommandSpec(
        "evolve",
        "integrate the finite Dyson SDE",
        {
            "model": Parameter(STR, BULK, "model regime", choices=(BULK, EDGE)),
            "k": Parameter(INT, 4, "number of particles"),
            "paths": Parameter(INT, 1, "number of paths"),
            "t": Parameter(FLOAT, 1.0, "time horizon"),
            "start": Parameter(STR, "equilibrium", "initial law", choices=("equilibrium", "spread")),
            "dt": Parameter(FLOAT, None, "base step"),
            "half_speed": Parameter(BOOL, None, "Half-speed time normalization (default: dynamics.speed)"),
            "max_substeps": Parameter(INT, None, "maximum bridge-halving depth"),
            "literal_drift": Parameter(BOOL, None, "use the doubled confinement gradient"),
            "coupled": Parameter(BOOL, False, "synchronously coupled pairs"),
        },
        run_evolve,
    ),
    CommandSpec(
        "fredholm",
        "generating function det(I + (t - 1) K) of the sine and Airy kernels on (-R, R)",
        {
            "kernel": Parameter(STR, "sine", "kernel", choices=("sine", "airy")),
            "radius": Parameter(FLOAT, 1.0, "half-width R of the window"),
            "t": Parameter(FLOAT, math.sqrt(2.0), "argument of the generating function"),
            "nodes": Parameter(INT, None, "Gauss-Legendre nodes"),
        },
        run_fredholm,
        stochastic=False,
        default_format="json",
    ),
)
