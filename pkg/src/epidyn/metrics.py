"""Convergence functionals and the per-step metric trace.

Two population-to-consensus distances are recorded side by side: the exact
Euclidean projection onto the consensus diagonal, and the nearest-individual
form that matches the published trajectories.  The plotted default is the
nearest-individual variant; the projection is always co-recorded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .knowledge import KnowledgeFunction, knowledge_distance

TRACE_COLUMNS = ("t", "replicate", "d_consensus", "d_nearest", "relative_entropy")


def _value_tensor(state) -> np.ndarray:
    # Accepts a PopulationState or a plain (N, E, l) array.
    values = getattr(state, "values", state)
    return np.asarray(values, dtype=float)


def consensus_distance(state) -> float:
    """Exact Euclidean distance to the set of shared-knowledge states.

    The projection of a population onto that set assigns every agent the
    across-agent mean function.
    """
    V = _value_tensor(state)
    return float(np.linalg.norm(V - V.mean(axis=0)))


def nearest_individual_distance(state) -> float:
    """Distance to the nearest constant tuple built from one agent's own
    function: min over j of sqrt(sum_i d(k_i, k_j)^2)."""
    V = _value_tensor(state)
    diffs = V[:, None] - V[None, :]
    totals = np.einsum("ijel,ijel->j", diffs, diffs)
    return float(np.sqrt(totals.min()))


def equilibrium_shift(initial: KnowledgeFunction, equilibrium: KnowledgeFunction) -> float:
    """Distance from an agent's initial function to the shared equilibrium."""
    return knowledge_distance(initial, equilibrium)


def relative_entropy(state, target) -> float:
    """Nonpositive closeness score of the population to a target function.

    Minus the population mean of the per-agent root-mean-square deviation
    from the target over experiences; zero exactly when every agent equals
    the target.  (Sign convention of the source model, not the
    information-theoretic quantity.)
    """
    V = _value_tensor(state)
    g = np.asarray(getattr(target, "values", target), dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    n_exp = V.shape[1]
    per_agent = np.sqrt(np.sum((V - g[None]) ** 2, axis=(1, 2)) / n_exp)
    return float(-per_agent.mean())


@dataclass(frozen=True, eq=False)
class MetricTrace:
    """Per-step metric records across replicates.

    ``rows`` has one row per (replicate, t) with columns
    t, replicate, d_consensus, d_nearest, relative_entropy.
    """

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(TRACE_COLUMNS):
            raise ValueError(f"trace rows must have columns {TRACE_COLUMNS}")
        object.__setattr__(self, "rows", rows)

    @property
    def times(self) -> np.ndarray:
        return np.unique(self.rows[:, 0]).astype(int)

    @property
    def n_replicates(self) -> int:
        return len(np.unique(self.rows[:, 1]))

    def replicate(self, r: int) -> np.ndarray:
        sel = self.rows[self.rows[:, 1] == r]
        return sel[np.argsort(sel[:, 0])]

    def mean_rows(self) -> np.ndarray:
        """Per-t averages over replicates: columns t, d_consensus, d_nearest,
        relative_entropy."""
        ts = self.times
        out = np.empty((len(ts), 4))
        for k, t in enumerate(ts):
            sel = self.rows[self.rows[:, 0] == t]
            out[k, 0] = t
            out[k, 1:] = sel[:, 2:].mean(axis=0)
        return out

    def mean_column(self, name: str) -> np.ndarray:
        idx = {"d_consensus": 1, "d_nearest": 2, "relative_entropy": 3}[name]
        return self.mean_rows()[:, idx]

    def to_csv(self, path) -> None:
        _write_csv(path, TRACE_COLUMNS, self.rows, int_cols=(0, 1))

    def mean_to_csv(self, path) -> None:
        header = ("t", "d_consensus", "d_nearest", "relative_entropy")
        _write_csv(path, header, self.mean_rows(), int_cols=(0,))


def _write_csv(path, header, rows, int_cols=()) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [
                str(int(x)) if k in int_cols else f"{x:.17g}"
                for k, x in enumerate(row)
            ]
            fh.write(",".join(cells) + "\n")


def trace_record(
    t: int, replicate: int, state, re_target: Optional[np.ndarray]
) -> list:
    """One trace row for the current state."""
    re = (
        relative_entropy(state, re_target)
        if re_target is not None
        else float("nan")
    )
    return [
        float(t),
        float(replicate),
        consensus_distance(state),
        nearest_individual_distance(state),
        re,
    ]
