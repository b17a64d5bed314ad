"""The stochastic learning dynamic.

Each step rebuilds credibility and the learning matrix from the current
population, draws one sample of experience/concept pairs per agent (social
draws copy another agent's table entry, individual draws perturb the agent's
own), and replaces every agent's table by the per-experience least-squares
fit of its sample.  All agents update synchronously from the time-t snapshot.

Randomness is drawn from counter-based Philox streams derived as
SeedSequence(seed, spawn_key=(replicate, agent)), so each agent's stream is
independent of every other agent's and of the replicate count; within one
stream, draws are consumed in step order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .influence import (
    compute_social_learning,
    credibility_from_values,
    validate_structure,
)
from .knowledge import (
    BoxConcepts,
    DiscreteConcepts,
    KnowledgeFunction,
    KnowledgeSetting,
    LikelihoodLandscape,
)
from .metrics import MetricTrace, trace_record

METRIC_VARIANTS = ("consensus-projection", "nearest-individual")

# Rejection rounds for box-truncated Gaussian concept draws before clamping.
MAX_TRUNCATION_ATTEMPTS = 64


class ConfigError(ValueError):
    """Raised when a simulation configuration violates its invariants."""


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs of the learning dynamic.

    tau is the probability that a sampled pair comes from individual
    exploration rather than from another agent; sigma_e and sigma_c are the
    exploration widths over experiences and concepts.
    """

    tau: float = 0.0
    sample_size: int = 50
    sigma_e: float = 1.0
    sigma_c: float = 0.1
    c_min: float = 0.0
    horizon: int = 25
    seed: int = 0
    replicates: int = 1
    metric_variant: str = "nearest-individual"
    drop_zero_social: bool = False

    def validate(self) -> "SimulationConfig":
        problems = []
        if not 0.0 <= self.tau <= 1.0:
            problems.append(f"tau must lie in [0, 1], got {self.tau}")
        if self.sample_size < 1:
            problems.append(f"sample_size must be >= 1, got {self.sample_size}")
        if self.sigma_e <= 0.0:
            problems.append(f"sigma_e must be positive, got {self.sigma_e}")
        if self.sigma_c <= 0.0:
            problems.append(f"sigma_c must be positive, got {self.sigma_c}")
        if self.c_min < 0.0:
            problems.append(f"c_min must be nonnegative, got {self.c_min}")
        if self.horizon < 1:
            problems.append(f"horizon must be >= 1, got {self.horizon}")
        if self.replicates < 1:
            problems.append(f"replicates must be >= 1, got {self.replicates}")
        if self.metric_variant not in METRIC_VARIANTS:
            problems.append(
                f"metric_variant must be one of {METRIC_VARIANTS}, "
                f"got {self.metric_variant!r}"
            )
        if problems:
            raise ConfigError("; ".join(problems))
        return self


@dataclass(frozen=True, eq=False)
class PopulationState:
    """N knowledge functions plus the time index."""

    functions: Tuple[KnowledgeFunction, ...]
    t: int = 0

    def __init__(self, functions: Sequence[KnowledgeFunction], t: int = 0):
        functions = tuple(functions)
        if not functions:
            raise ConfigError("population must contain at least one agent")
        setting = functions[0].setting
        if any(k.setting is not setting for k in functions[1:]):
            raise ConfigError("all agents must share one knowledge setting")
        if t < 0:
            raise ConfigError("time index must be nonnegative")
        object.__setattr__(self, "functions", functions)
        object.__setattr__(self, "t", t)

    @property
    def n_agents(self) -> int:
        return len(self.functions)

    @property
    def setting(self) -> KnowledgeSetting:
        return self.functions[0].setting

    @property
    def values(self) -> np.ndarray:
        """(N, n_experiences, l) stack of all agents' tables."""
        cached = self.__dict__.get("_values")
        if cached is None:
            cached = np.stack([k.values for k in self.functions])
            cached.setflags(write=False)
            object.__setattr__(self, "_values", cached)
        return cached

    @classmethod
    def from_values(cls, setting, values, t: int = 0) -> "PopulationState":
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[:, :, None]
        return cls([KnowledgeFunction(setting, v) for v in values], t)


@dataclass(frozen=True, eq=False)
class Sample:
    """m experience/concept observations for one agent's update."""

    experience_indices: np.ndarray
    concepts: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.experience_indices, dtype=np.intp)
        con = np.asarray(self.concepts, dtype=float)
        if con.ndim == 1:
            con = con[:, None]
        if len(idx) != len(con):
            raise ConfigError("one concept per experience index required")
        object.__setattr__(self, "experience_indices", idx)
        object.__setattr__(self, "concepts", con)

    def __len__(self) -> int:
        return len(self.experience_indices)

    def pairs(self):
        for e, c in zip(self.experience_indices, self.concepts):
            yield int(e), c


def agent_streams(seed: int, replicate: int, n_agents: int) -> list:
    """One independent Philox generator per agent."""
    return [
        np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replicate, a)))
        )
        for a in range(n_agents)
    ]


def experience_kernel(setting: KnowledgeSetting, sigma_e: float) -> np.ndarray:
    """Gaussian affinity between experience points,
    K[a, b] = exp(-||e_a - e_b||^2 / (2 sigma_e^2))."""
    E = setting.experiences
    d2 = np.sum((E[:, None, :] - E[None, :, :]) ** 2, axis=-1)
    return np.exp(-d2 / (2.0 * sigma_e**2))


def _categorical(rng, cumulative: np.ndarray, size: int) -> np.ndarray:
    u = rng.random(size)
    return np.minimum(
        np.searchsorted(cumulative, u, side="right"), len(cumulative) - 1
    )


def draw_social(i: int, state: PopulationState, learning, rng) -> Tuple[int, np.ndarray]:
    """One social observation for agent i: pick a source agent from row i of
    the learning matrix, pick an experience uniformly, and report that
    agent's concept there (including the zero concept)."""
    learning = np.asarray(learning, dtype=float)
    j = _categorical(rng, np.cumsum(learning[i]), 1)[0]
    e = int(rng.integers(0, state.setting.n_experiences))
    return e, state.functions[j].values[e].copy()


def _individual_weights(kernel: np.ndarray, support: np.ndarray) -> np.ndarray:
    w = kernel @ support.astype(float)
    total = w.sum()
    if total <= 0.0:
        # Newborn fallback: nothing conceptualized yet, explore uniformly.
        return np.full(len(w), 1.0 / len(w))
    return w / total


def _truncated_gaussian(rng, centers: np.ndarray, sigma_c: float, box: BoxConcepts) -> np.ndarray:
    out = centers + sigma_c * rng.standard_normal(centers.shape)
    bad = ~box.contains(out)
    attempts = 1
    while bad.any() and attempts < MAX_TRUNCATION_ATTEMPTS:
        redraw = centers[bad] + sigma_c * rng.standard_normal((bad.sum(), centers.shape[1]))
        out[bad] = redraw
        bad = ~box.contains(out)
        attempts += 1
    if bad.any():
        out[bad] = box.clip(out[bad])
    return out


def _discrete_gaussian(rng, centers: np.ndarray, sigma_c: float, concepts: DiscreteConcepts) -> np.ndarray:
    d2 = np.sum((centers[:, None, :] - concepts.points[None, :, :]) ** 2, axis=-1)
    logits = -d2 / (2.0 * sigma_c**2)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    cum = np.cumsum(w, axis=1)
    u = rng.random(len(centers)) * cum[:, -1]
    picks = np.array(
        [np.searchsorted(cum[k], u[k], side="right") for k in range(len(centers))]
    )
    picks = np.minimum(picks, len(concepts) - 1)
    return concepts.points[picks]


def draw_individual(
    i: int, state: PopulationState, sigma_e: float, sigma_c: float, rng
) -> Tuple[int, np.ndarray]:
    """One self-exploration observation for agent i.

    The experience is drawn with weight proportional to its Gaussian
    affinity to the experiences the agent already conceptualizes (uniform
    for a newborn); the concept is a Gaussian perturbation of the agent's
    current concept there, confined to the concept space.
    """
    setting = state.setting
    kernel = experience_kernel(setting, sigma_e)
    weights = _individual_weights(kernel, state.functions[i].support())
    e = int(_categorical(rng, np.cumsum(weights), 1)[0])
    center = state.functions[i].values[e][None, :]
    if isinstance(setting.concepts, DiscreteConcepts):
        c = _discrete_gaussian(rng, center, sigma_c, setting.concepts)[0]
    else:
        c = _truncated_gaussian(rng, center, sigma_c, setting.concepts)[0]
    return e, c


def draw_sample(
    i: int,
    state: PopulationState,
    config: SimulationConfig,
    learning,
    rng,
    kernel: Optional[np.ndarray] = None,
) -> Sample:
    """m observations for agent i; each is individual with probability tau,
    social otherwise.  Zero-concept social observations are kept unless the
    configuration drops them."""
    setting = state.setting
    values = state.values
    learning = np.asarray(learning, dtype=float)
    m = config.sample_size

    individual = rng.random(m) < config.tau
    n_ind = int(individual.sum())
    n_soc = m - n_ind

    e_idx = np.empty(m, dtype=np.intp)
    concepts = np.empty((m, setting.concept_dim))
    social = ~individual

    if n_soc:
        js = _categorical(rng, np.cumsum(learning[i]), n_soc)
        es = rng.integers(0, setting.n_experiences, size=n_soc)
        e_idx[social] = es
        concepts[social] = values[js, es]

    if n_ind:
        if kernel is None:
            kernel = experience_kernel(setting, config.sigma_e)
        weights = _individual_weights(kernel, np.any(values[i] != 0.0, axis=-1))
        es = _categorical(rng, np.cumsum(weights), n_ind)
        centers = values[i, es]
        if isinstance(setting.concepts, DiscreteConcepts):
            drawn = _discrete_gaussian(rng, centers, config.sigma_c, setting.concepts)
        else:
            drawn = _truncated_gaussian(rng, centers, config.sigma_c, setting.concepts)
        e_idx[individual] = es
        concepts[individual] = drawn

    if config.drop_zero_social and n_soc:
        keep = individual | np.any(concepts != 0.0, axis=-1)
        return Sample(e_idx[keep], concepts[keep])
    return Sample(e_idx, concepts)


def least_squares_update(k_prev: KnowledgeFunction, sample: Sample) -> KnowledgeFunction:
    """Per-experience least-squares fit of the sample.

    Experiences present in the sample take the minimizer of the summed
    squared distance to their observations: the observation mean for a box
    space (clamped as a numerical safety), the listed point nearest the mean
    for a discrete space (exact ties resolved to the lowest concept index).
    Experiences absent from the sample keep their previous value, the
    minimizer closest to the old table.
    """
    if len(sample) == 0:
        return k_prev
    setting = k_prev.setting
    n_exp, dim = k_prev.values.shape
    idx = sample.experience_indices
    counts = np.bincount(idx, minlength=n_exp).astype(float)
    if dim == 1:
        sums = np.bincount(idx, weights=sample.concepts[:, 0], minlength=n_exp)[:, None]
    else:
        sums = np.stack(
            [
                np.bincount(idx, weights=sample.concepts[:, d], minlength=n_exp)
                for d in range(dim)
            ],
            axis=1,
        )
    seen = counts > 0.0
    means = sums[seen] / counts[seen, None]
    # identical observations must reproduce their value bit for bit, so that
    # a consensus population is exactly absorbing; summed means round
    rep = np.zeros((n_exp, dim))
    rep[idx] = sample.concepts
    mismatch = np.any(sample.concepts != rep[idx], axis=-1)
    divided = np.bincount(idx, weights=mismatch, minlength=n_exp) > 0.0
    unanimous = ~divided[seen]
    means[unanimous] = rep[seen][unanimous]

    new_values = np.array(k_prev.values, copy=True)
    concepts = setting.concepts
    if isinstance(concepts, DiscreteConcepts):
        d2 = np.sum(
            (means[:, None, :] - concepts.points[None, :, :]) ** 2, axis=-1
        )
        new_values[seen] = concepts.points[np.argmin(d2, axis=1)]
    else:
        # componentwise means of box points stay inside; clip is numerical
        # safety only, so the trusted constructor applies
        new_values[seen] = concepts.clip(means)
    return KnowledgeFunction._trusted(setting, new_values)


def step(
    state: PopulationState,
    config: SimulationConfig,
    structure,
    landscape: LikelihoodLandscape,
    rngs: Sequence[np.random.Generator],
    kernel: Optional[np.ndarray] = None,
) -> PopulationState:
    """One synchronous update of the whole population from its time-t
    snapshot: rebuild credibility and the learning matrix, then resample and
    refit every agent."""
    G = validate_structure(structure)
    n = state.n_agents
    if G.shape[0] != n:
        raise ConfigError(
            f"structure matrix is {G.shape[0]}x{G.shape[0]} for {n} agents"
        )
    if len(rngs) != n:
        raise ConfigError("one random stream per agent required")
    cred = credibility_from_values(
        state.setting, state.values, landscape, config.c_min
    )
    learning = compute_social_learning(G, cred)
    if kernel is None and config.tau > 0.0:
        kernel = experience_kernel(state.setting, config.sigma_e)
    samples = [
        draw_sample(i, state, config, learning, rngs[i], kernel=kernel)
        for i in range(n)
    ]
    return _refit_population(state, samples)


def _refit_population(state: PopulationState, samples) -> PopulationState:
    """Batched equivalent of applying :func:`least_squares_update` to every
    agent; one pass of array ops over the agents' samples stacked with
    disjoint index offsets."""
    setting = state.setting
    n, n_exp, dim = state.values.shape
    new_values = np.array(state.values, copy=True)

    idx_parts = []
    con_parts = []
    for a, sample in enumerate(samples):
        if len(sample):
            idx_parts.append(sample.experience_indices + a * n_exp)
            con_parts.append(sample.concepts)
    if idx_parts:
        gidx = np.concatenate(idx_parts)
        gcon = np.concatenate(con_parts)
        total = n * n_exp
        counts = np.bincount(gidx, minlength=total).astype(float)
        seen = counts > 0.0
        if dim == 1:
            sums = np.bincount(gidx, weights=gcon[:, 0], minlength=total)[:, None]
        else:
            sums = np.stack(
                [
                    np.bincount(gidx, weights=gcon[:, d], minlength=total)
                    for d in range(dim)
                ],
                axis=1,
            )
        means = sums[seen] / counts[seen, None]
        rep = np.zeros((total, dim))
        rep[gidx] = gcon
        mismatch = np.any(gcon != rep[gidx], axis=-1)
        divided = np.bincount(gidx, weights=mismatch, minlength=total) > 0.0
        unanimous = ~divided[seen]
        means[unanimous] = rep[seen][unanimous]

        flat = new_values.reshape(total, dim)
        concepts = setting.concepts
        if isinstance(concepts, DiscreteConcepts):
            d2 = np.sum(
                (means[:, None, :] - concepts.points[None, :, :]) ** 2, axis=-1
            )
            flat[seen] = concepts.points[np.argmin(d2, axis=1)]
        else:
            flat[seen] = concepts.clip(means)

    new_values.setflags(write=False)
    updated = [KnowledgeFunction._trusted(setting, v) for v in new_values]
    out = PopulationState(updated, state.t + 1)
    object.__setattr__(out, "_values", new_values)
    return out


def run(
    config: SimulationConfig,
    structure,
    landscape: LikelihoodLandscape,
    initial: PopulationState,
    re_target: Optional[np.ndarray] = None,
    observer: Optional[Callable[[int, PopulationState], None]] = None,
    n_jobs: int = 1,
) -> "RunResult":
    """Replicated simulation producing the metric trace.

    Each replicate runs the dynamic for ``config.horizon`` steps from the
    initial state and records the metrics at t = 0 and after every step.
    Replicate streams are derived independently from (seed, replicate), so
    the trace is identical for a given configuration regardless of how many
    replicates run or in what order.  ``observer`` is called as
    observer(replicate, state) at every recorded point and forces
    single-process execution.
    """
    config.validate()
    validate_structure(structure)
    args = (config, np.asarray(structure, dtype=float), landscape, initial, re_target)
    reps = range(config.replicates)
    if n_jobs > 1 and observer is None:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_replicate, [(r, *args) for r in reps]))
    else:
        results = [_run_replicate((r, *args), observer) for r in reps]
    rows = np.concatenate([rows for rows, _ in results])
    finals = np.stack([final for _, final in results])
    return RunResult(MetricTrace(rows), finals)


@dataclass(frozen=True, eq=False)
class RunResult:
    """Metric trace plus the final (replicates, N, n_experiences, l) value
    tensor, one final population per replicate."""

    trace: MetricTrace
    final_values: np.ndarray

    def equilibria(self) -> np.ndarray:
        """Across-agent mean function of each replicate's final state."""
        return self.final_values.mean(axis=1)


def _run_replicate(packed, observer=None):
    r, config, structure, landscape, initial, re_target = packed
    state = initial
    rngs = agent_streams(config.seed, r, state.n_agents)
    kernel = (
        experience_kernel(state.setting, config.sigma_e) if config.tau > 0.0 else None
    )
    rows = [trace_record(0, r, state, re_target)]
    if observer is not None:
        observer(r, state)
    for _ in range(config.horizon):
        state = step(state, config, structure, landscape, rngs, kernel=kernel)
        rows.append(trace_record(state.t, r, state, re_target))
        if observer is not None:
            observer(r, state)
    return np.asarray(rows, dtype=float), state.values
