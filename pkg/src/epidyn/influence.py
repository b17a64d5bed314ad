"""Structure, credibility and social-learning matrices.

Entry (i, j) of every matrix here reads "how much j acts on i": gamma_ij is
the structural influence of agent j on agent i, c_ij the credibility i grants
j, and lambda_ij the resulting row-stochastic sampling weight.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .knowledge import (
    DiscreteConcepts,
    KnowledgeFunction,
    LikelihoodLandscape,
    usage_penalty,
)

# Row sums below this are treated as zero; products of many likelihoods can
# denormalize long before reaching exact zero.
ZERO_ROW_GUARD = 1e-300

ROW_SUM_TOL = 1e-12


class MatrixError(ValueError):
    """Raised on malformed matrix inputs (shape, sign or stochasticity)."""


def _square(A, name: str) -> np.ndarray:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise MatrixError(f"{name} must be square, got shape {M.shape}")
    return M


def validate_structure(gamma) -> np.ndarray:
    M = _square(gamma, "structure matrix")
    if np.any(M < 0.0):
        raise MatrixError("structure matrix entries must be nonnegative")
    return M


def validate_stochastic(A, tol: float = 1e-9) -> np.ndarray:
    M = _square(A, "stochastic matrix")
    if np.any(M < -tol):
        raise MatrixError("stochastic matrix entries must be nonnegative")
    if np.any(np.abs(M.sum(axis=1) - 1.0) > tol):
        raise MatrixError("rows must sum to 1")
    return M


def compute_credibility(
    population: Sequence[KnowledgeFunction],
    landscape: LikelihoodLandscape,
    c_min: float,
) -> np.ndarray:
    """Credibility matrix of a population under a likelihood landscape.

    The raw credibility i grants j is the product of the likelihoods of j's
    concepts over the experiences i has conceptualized, damped by a parsimony
    penalty on the variety of concepts j uses across those same experiences
    (no self-penalty).  An agent that conceptualizes nothing grants everyone
    the empty product 1.  Entries are floored at ``c_min``.

    Likelihood products are accumulated in log space with an explicit zero
    state, so exact-zero factors survive and long products do not underflow
    pairwise.
    """
    if c_min < 0.0:
        raise MatrixError("c_min must be nonnegative")
    ks = list(population)
    if not ks:
        raise MatrixError("population must contain at least one agent")
    values = np.stack([k.values for k in ks])
    return credibility_from_values(ks[0].setting, values, landscape, c_min)


def credibility_from_values(setting, values: np.ndarray, landscape, c_min: float) -> np.ndarray:
    """Tensor form of :func:`compute_credibility` for a prestacked
    (N, n_experiences, l) value array."""
    support = np.any(values != 0.0, axis=-1)
    lik = landscape.per_population(setting, values)

    positive = lik > 0.0
    safe_log = np.where(positive, np.log(np.where(positive, lik, 1.0)), 0.0)
    sup = support.astype(float)
    log_prod = sup @ safe_log.T
    hit_zero = (sup @ (~positive).astype(float).T) > 0.0
    prod = np.exp(log_prod)
    prod[hit_zero] = 0.0

    raw = prod / (1.0 + _pairwise_penalty(setting, values, support))
    return np.maximum(raw, c_min)


def _pairwise_penalty(setting, values: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Penalty of agent j as seen by agent i: variety of j's nonzero concepts
    over the experiences i has conceptualized.  Diagonal is zero."""
    n = len(values)
    pen = np.zeros((n, n))
    concepts = setting.concepts
    if not isinstance(concepts, DiscreteConcepts) and concepts.dim == 1:
        v1 = values[:, :, 0]
        hidden = ~support
        lows = np.where(hidden, np.inf, v1)
        highs = np.where(hidden, -np.inf, v1)
        sel = support[:, None, :]
        hi = np.where(sel, highs[None, :, :], -np.inf).max(axis=2)
        lo = np.where(sel, lows[None, :, :], np.inf).min(axis=2)
        span = hi - lo
        pen = np.where(np.isfinite(span), np.maximum(span, 0.0), 0.0)
    else:
        for i in range(n):
            sel = support[i]
            for j in range(n):
                if i == j or not sel.any():
                    continue
                pen[i, j] = usage_penalty(values[j][sel], concepts)
    np.fill_diagonal(pen, 0.0)
    return pen


def compute_social_learning(gamma, credibility) -> np.ndarray:
    """Row-stochastic learning matrix from structure and credibility.

    lambda_ij is gamma_ij * c_ij over its row sum; rows whose sum vanishes
    fall back to the uniform row 1/N.
    """
    G = validate_structure(gamma)
    C = _square(credibility, "credibility matrix")
    if G.shape != C.shape:
        raise MatrixError(
            f"dimension mismatch: structure {G.shape} vs credibility {C.shape}"
        )
    w = G * C
    sums = w.sum(axis=1)
    n = len(w)
    out = np.empty_like(w)
    dead = sums <= ZERO_ROW_GUARD
    out[dead] = 1.0 / n
    live = ~dead
    out[live] = w[live] / sums[live, None]
    return out


def normalize_rows(M) -> np.ndarray:
    """Divide each row by its sum; zero rows become the uniform row."""
    A = _square(M, "matrix")
    if np.any(A < 0.0):
        raise MatrixError("entries must be nonnegative")
    sums = A.sum(axis=1)
    n = len(A)
    out = np.empty_like(A)
    dead = sums == 0.0
    out[dead] = 1.0 / n
    live = ~dead
    out[live] = A[live] / sums[live, None]
    return out


def write_matrix_csv(M, path) -> None:
    """Row-major CSV with header row j0,j1,..."""
    A = np.asarray(M, dtype=float)
    header = ",".join(f"j{j}" for j in range(A.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in A:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("j0"):
            raise MatrixError(f"missing j0,j1,... header in {path}")
        rows = [
            [float(x) for x in line.split(",")]
            for line in fh.read().splitlines()
            if line
        ]
    return np.asarray(rows, dtype=float)
