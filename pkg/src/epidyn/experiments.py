"""Preset experiments, config files, and run orchestration.

Four presets ship with the package:

- ``test1-self-inertia``: two agents with symmetric inertia alpha, constant
  likelihood, pure social learning.  Sweeping alpha shows geometric
  convergence to shared knowledge, fastest at alpha = 0.5 and frozen at
  alpha = 1.
- ``test2-professor``: one dominant source and four students.  With a
  constant likelihood the blend is set by structure alone; with the
  concept-peaked likelihood the source's conceptualization also scores far
  higher and the population snaps to it.
- ``test3-creation``: ten newborn agents with individual exploration
  (tau > 0) discovering the high-likelihood function; tracked by the
  relative-entropy score.
- ``test4-language``: two two-agent communities with weak cross links slowly
  merging their conventions.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import spectral
from .dynamics import (
    ConfigError,
    PopulationState,
    RunResult,
    SimulationConfig,
    run,
)
from .influence import compute_credibility, compute_social_learning
from .knowledge import (
    ConstantLikelihood,
    GaussianPeakLikelihood,
    KnowledgeError,
    KnowledgeFunction,
    KnowledgeSetting,
    LikelihoodLandscape,
    concepts_from_dict,
    grid_setting,
    landscape_from_dict,
)
from .metrics import equilibrium_shift

PRESET_NAMES = (
    "test1-self-inertia",
    "test2-professor",
    "test3-creation",
    "test4-language",
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_CONFIG_KEYS = {
    "name",
    "tau",
    "sample_size",
    "sigma_e",
    "sigma_c",
    "c_min",
    "horizon",
    "seed",
    "replicates",
    "metric_variant",
    "drop_zero_social",
    "gamma",
    "likelihood",
    "initial",
    "experiences",
    "concepts",
    "re_target",
    "notes",
}


@dataclass(frozen=True, eq=False)
class ExperimentSetup:
    """Everything a run needs: config, structure, landscape, initial state."""

    name: str
    config: SimulationConfig
    structure: np.ndarray
    landscape: LikelihoodLandscape
    initial: PopulationState
    re_target: Optional[np.ndarray] = None
    notes: tuple = ()

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "tau": self.config.tau,
            "sample_size": self.config.sample_size,
            "sigma_e": self.config.sigma_e,
            "sigma_c": self.config.sigma_c,
            "c_min": self.config.c_min,
            "horizon": self.config.horizon,
            "seed": self.config.seed,
            "replicates": self.config.replicates,
            "metric_variant": self.config.metric_variant,
            "drop_zero_social": self.config.drop_zero_social,
            "gamma": np.asarray(self.structure).tolist(),
            "likelihood": self.landscape.to_dict(),
            "experiences": self.initial.setting.experiences.tolist(),
            "concepts": self.initial.setting.concepts.to_dict(),
            "initial": self.initial.values.tolist(),
        }
        if self.re_target is not None:
            doc["re_target"] = np.asarray(self.re_target).tolist()
        if self.notes:
            doc["notes"] = list(self.notes)
        return doc


def setup_from_dict(doc: dict) -> ExperimentSetup:
    """Build a validated setup from a plain config mapping.

    Unknown keys are rejected; every violated invariant is reported.
    """
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    problems = []
    for key in ("gamma", "likelihood", "initial", "experiences", "concepts"):
        if key not in doc:
            problems.append(f"missing required key {key!r}")
    if problems:
        raise ConfigError("; ".join(problems))

    config_kwargs = {
        k: doc[k]
        for k in (
            "tau",
            "sample_size",
            "sigma_e",
            "sigma_c",
            "c_min",
            "horizon",
            "seed",
            "replicates",
            "metric_variant",
            "drop_zero_social",
        )
        if k in doc
    }
    try:
        config = SimulationConfig(**config_kwargs).validate()
        setting = KnowledgeSetting(doc["experiences"], concepts_from_dict(doc["concepts"]))
        landscape = landscape_from_dict(doc["likelihood"])
        initial = PopulationState.from_values(
            setting, _value_table(doc["initial"], setting)
        )
        gamma = np.asarray(doc["gamma"], dtype=float)
        if gamma.shape != (initial.n_agents, initial.n_agents):
            raise ConfigError(
                f"gamma must be {initial.n_agents}x{initial.n_agents}, "
                f"got {gamma.shape}"
            )
        re_target = None
        if "re_target" in doc:
            re_target = _target_table(doc["re_target"], setting)
    except (ConfigError, KnowledgeError, ValueError) as err:
        raise ConfigError(str(err)) from err
    return ExperimentSetup(
        name=str(doc.get("name", "custom")),
        config=config,
        structure=gamma,
        landscape=landscape,
        initial=initial,
        re_target=re_target,
        notes=tuple(doc.get("notes", ())),
    )


def _value_table(raw, setting) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[1:] != (setting.n_experiences, setting.concept_dim):
        raise ConfigError(
            "initial must be an (agents, experiences[, concept_dim]) table"
        )
    return arr


def _target_table(raw, setting) -> np.ndarray:
    if np.isscalar(raw):
        return np.full((setting.n_experiences, setting.concept_dim), float(raw))
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (setting.n_experiences, setting.concept_dim):
        raise ConfigError("re_target must match (experiences, concept_dim)")
    return arr


def load_config(path) -> ExperimentSetup:
    """Parse and validate a JSON config file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}: parse error at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from err
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return setup_from_dict(doc)


def dump_config(setup: ExperimentSetup, path) -> None:
    with open(path, "w") as fh:
        json.dump(setup.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def preset(name: str, alpha: Optional[float] = None, likelihood: Optional[str] = None,
           **overrides) -> ExperimentSetup:
    """Instantiate one of the shipped experiments.

    ``alpha`` sets the self-inertia of the two-agent preset; ``likelihood``
    selects "constant" or "concave" for the professor preset.  Remaining
    keyword overrides are SimulationConfig fields.
    """
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}"
        )
    if alpha is not None and name != "test1-self-inertia":
        raise ConfigError("alpha only applies to test1-self-inertia")
    if likelihood is not None and name != "test2-professor":
        raise ConfigError("likelihood variant only applies to test2-professor")

    if name == "test1-self-inertia":
        setup = _preset_self_inertia(0.5 if alpha is None else alpha)
    elif name == "test2-professor":
        setup = _preset_professor("concave" if likelihood is None else likelihood)
    elif name == "test3-creation":
        setup = _preset_creation()
    else:
        setup = _preset_language()

    return _with_overrides(setup, overrides)


def _with_overrides(setup: ExperimentSetup, overrides: dict) -> ExperimentSetup:
    if not overrides:
        return setup
    bad = sorted(set(overrides) - set(SimulationConfig.__dataclass_fields__))
    if bad:
        raise ConfigError(f"unknown config overrides: {', '.join(bad)}")
    return ExperimentSetup(
        name=setup.name,
        config=replace(setup.config, **overrides).validate(),
        structure=setup.structure,
        landscape=setup.landscape,
        initial=setup.initial,
        re_target=setup.re_target,
        notes=setup.notes,
    )


def _preset_self_inertia(alpha: float) -> ExperimentSetup:
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    setting = grid_setting(5)
    initial = PopulationState(
        [
            KnowledgeFunction.constant(setting, 2.0),
            KnowledgeFunction.constant(setting, 6.0),
        ]
    )
    return ExperimentSetup(
        name="test1-self-inertia",
        config=SimulationConfig(
            tau=0.0,
            sample_size=50,
            c_min=0.1,
            horizon=25,
            replicates=100,
        ),
        structure=np.array([[alpha, 1.0 - alpha], [1.0 - alpha, alpha]]),
        landscape=ConstantLikelihood(1.0),
        initial=initial,
        notes=(f"alpha={alpha}",),
    )


def _preset_professor(variant: str) -> ExperimentSetup:
    if variant not in ("constant", "concave"):
        raise ConfigError(
            f"likelihood variant must be 'constant' or 'concave', got {variant!r}"
        )
    setting = grid_setting(5)
    initial = PopulationState(
        [KnowledgeFunction.constant(setting, 5.0)]
        + [KnowledgeFunction.constant(setting, 1.0) for _ in range(4)]
    )
    gamma = np.full((5, 5), 0.1)
    gamma[0] = 0.01
    gamma[:, 0] = 1.0
    notes = (f"likelihood={variant}",)
    if variant == "concave":
        landscape = GaussianPeakLikelihood(center=[6.0], width=10.0)
        notes += (
            "concave likelihood uses a decaying concept peak exp(-(c-6)^2/10); "
            "a growing exponential would leave [0, 1]",
        )
    else:
        landscape = ConstantLikelihood(1.0)
    return ExperimentSetup(
        name="test2-professor",
        config=SimulationConfig(
            tau=0.0,
            sample_size=50,
            c_min=0.0,
            horizon=25,
            replicates=100,
        ),
        structure=gamma,
        landscape=landscape,
        initial=initial,
        notes=notes,
    )


def _preset_creation() -> ExperimentSetup:
    setting = grid_setting(25)
    initial = PopulationState(
        [KnowledgeFunction.zero(setting) for _ in range(10)]
    )
    return ExperimentSetup(
        name="test3-creation",
        config=SimulationConfig(
            tau=0.02,
            sample_size=20,
            sigma_e=1.0,
            sigma_c=0.1,
            c_min=0.0,
            horizon=25000,
            replicates=20,
        ),
        structure=np.ones((10, 10)),
        landscape=GaussianPeakLikelihood(center=[1.0], width=1.0),
        initial=initial,
        re_target=np.ones((25, 1)),
        notes=("target is the constant-one function, the likelihood peak",),
    )


def _preset_language() -> ExperimentSetup:
    setting = grid_setting(5)
    initial = PopulationState(
        [KnowledgeFunction.constant(setting, 5.0) for _ in range(2)]
        + [KnowledgeFunction.constant(setting, 7.0) for _ in range(2)]
    )
    gamma = np.full((4, 4), 0.01)
    gamma[:2, :2] = 1.0
    gamma[2:, 2:] = 1.0
    return ExperimentSetup(
        name="test4-language",
        config=SimulationConfig(
            tau=0.0,
            sample_size=50,
            c_min=0.1,
            horizon=400,
            replicates=20,
        ),
        structure=gamma,
        landscape=ConstantLikelihood(1.0),
        initial=initial,
    )


def fit_decay_rate(distances, times=None) -> float:
    """Per-step contraction estimate from a distance trace.

    Least-squares slope of ln d(t) over the largest prefix with d > 1e-6;
    returns exp(slope).  Requires at least three usable points.
    """
    d = np.asarray(distances, dtype=float)
    t = np.arange(len(d)) if times is None else np.asarray(times, dtype=float)
    usable = 0
    while usable < len(d) and d[usable] > 1e-6:
        usable += 1
    if usable < 3:
        raise ValueError(
            f"need at least 3 points with distance > 1e-6, got {usable}"
        )
    slope = np.polyfit(t[:usable], np.log(d[:usable]), 1)[0]
    return float(np.exp(slope))


def _git_blob_sha1(payload: bytes) -> str:
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(payload))
    h.update(payload)
    return h.hexdigest()


def build_manifest(setup: ExperimentSetup) -> dict:
    """Run manifest: resolved config, initial-state spectral report, and a
    content hash of the resolved inputs.  The timestamp is the only
    run-to-run varying field."""
    doc = setup.to_dict()
    payload = json.dumps(doc, sort_keys=True).encode()
    cred = compute_credibility(
        setup.initial.functions, setup.landscape, setup.config.c_min
    )
    learning = compute_social_learning(setup.structure, cred)
    return {
        "name": setup.name,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": doc,
        "spectral": spectral.analyze(learning).to_dict(),
        "input_hash": _git_blob_sha1(payload),
    }


def _metric_column(setup: ExperimentSetup) -> str:
    return (
        "d_consensus"
        if setup.config.metric_variant == "consensus-projection"
        else "d_nearest"
    )


def summarize(setup: ExperimentSetup, result: RunResult) -> str:
    """Human-readable closing summary: final distances, fitted rate, and the
    per-agent initial-to-equilibrium shifts."""
    mean = result.trace.mean_rows()
    column = _metric_column(setup)
    series = result.trace.mean_column(column)
    lines = [
        f"experiment: {setup.name}",
        f"replicates: {setup.config.replicates}   steps: {setup.config.horizon}",
        f"final mean d_consensus: {mean[-1, 1]:.6g}",
        f"final mean d_nearest:   {mean[-1, 2]:.6g}",
    ]
    if setup.re_target is not None:
        lines.append(f"final mean relative_entropy: {mean[-1, 3]:.6g}")
    try:
        rate = fit_decay_rate(series)
        lines.append(f"fitted per-step rate of {column}: {rate:.6g}")
    except ValueError as err:
        lines.append(f"fitted per-step rate of {column}: n/a ({err})")
    shifts = mean_equilibrium_shifts(setup, result)
    lines.append("mean initial-to-equilibrium shift per agent:")
    for i, s in enumerate(shifts):
        lines.append(f"  agent {i}: {s:.6g}")
    return "\n".join(lines) + "\n"


def mean_equilibrium_shifts(setup: ExperimentSetup, result: RunResult) -> np.ndarray:
    """Replicate-averaged distance between each agent's initial function and
    the final shared function of its replicate."""
    setting = setup.initial.setting
    shifts = np.zeros(setup.initial.n_agents)
    equilibria = result.equilibria()
    for eq in equilibria:
        k_eq = KnowledgeFunction(setting, _into_space(eq, setting))
        for i, k0 in enumerate(setup.initial.functions):
            shifts[i] += equilibrium_shift(k0, k_eq)
    return shifts / len(equilibria)


def _into_space(values: np.ndarray, setting: KnowledgeSetting) -> np.ndarray:
    # Across-agent means can fall marginally outside a discrete space; snap
    # to the nearest listed point (boxes just clip).
    concepts = setting.concepts
    if hasattr(concepts, "clip"):
        return concepts.clip(values)
    d2 = np.sum((values[:, None, :] - concepts.points[None, :, :]) ** 2, axis=-1)
    return concepts.points[np.argmin(d2, axis=1)]


def run_experiment(
    target,
    out_dir,
    overrides: Optional[dict] = None,
    n_jobs: Optional[int] = None,
    quiet: bool = False,
) -> int:
    """Resolve, run and write out one experiment.

    ``target`` is a preset name, a config file path, or an ExperimentSetup.
    Writes trace.csv, mean.csv, manifest.json and summary.txt into
    ``out_dir``.  Returns 0 on success, 2 on validation failure, 3 on a
    runtime failure.
    """
    try:
        setup = resolve_target(target, overrides)
    except (ConfigError, KnowledgeError, OSError) as err:
        if not quiet:
            print(f"error: {err}")
        return EXIT_VALIDATION
    if n_jobs is None:
        n_jobs = max(1, int(os.environ.get("EPIDYN_THREADS", "1")))
    try:
        result = run(
            setup.config,
            setup.structure,
            setup.landscape,
            setup.initial,
            re_target=setup.re_target,
            n_jobs=n_jobs,
        )
        os.makedirs(out_dir, exist_ok=True)
        result.trace.to_csv(os.path.join(out_dir, "trace.csv"))
        result.trace.mean_to_csv(os.path.join(out_dir, "mean.csv"))
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(build_manifest(setup), fh, indent=2, sort_keys=True)
            fh.write("\n")
        summary = summarize(setup, result)
        with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
            fh.write(summary)
    except Exception as err:  # runtime failure, distinct exit code
        if not quiet:
            print(f"runtime failure: {err}")
        return EXIT_RUNTIME
    if not quiet:
        print(summary, end="")
    return EXIT_OK


def resolve_target(target, overrides: Optional[dict] = None) -> ExperimentSetup:
    """Preset name, config path or ready setup -> validated setup."""
    overrides = dict(overrides or {})
    alpha = overrides.pop("alpha", None)
    likelihood = overrides.pop("likelihood", None)
    if isinstance(target, str) and target in PRESET_NAMES:
        return preset(target, alpha=alpha, likelihood=likelihood, **overrides)
    if alpha is not None or likelihood is not None:
        raise ConfigError("alpha/likelihood overrides require a preset name")
    setup = target if isinstance(target, ExperimentSetup) else load_config(target)
    return _with_overrides(setup, overrides)
