"""Experience/concept spaces, knowledge functions and likelihood landscapes.

A knowledge setting couples a finite list of experience points with a concept
space that contains a distinguished zero concept (the origin).  An agent's
knowledge is a tabular map from experience indices to concept points; the zero
concept marks experiences the agent has never conceptualized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np


class KnowledgeError(ValueError):
    """Raised when a setting, function or landscape violates its invariants."""


def _as_points(points, name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise KnowledgeError(f"{name} must be a nonempty 2d array of points")
    return arr


@dataclass(frozen=True, eq=False)
class BoxConcepts:
    """Axis-aligned concept box containing the origin.

    ``lo`` and ``hi`` are length-l vectors with lo <= 0 <= hi componentwise.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise KnowledgeError("box bounds must be vectors of equal length")
        if not (np.all(lo <= 0.0) and np.all(hi >= 0.0)):
            raise KnowledgeError("concept box must contain the origin (lo <= 0 <= hi)")
        if not np.all(lo <= hi):
            raise KnowledgeError("box bounds must satisfy lo <= hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def contains(self, values: np.ndarray) -> np.ndarray:
        """Componentwise membership test for an (n, l) array of points."""
        v = np.asarray(values, dtype=float)
        return np.all((v >= self.lo) & (v <= self.hi), axis=-1)

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.lo, self.hi)

    def to_dict(self) -> dict:
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class DiscreteConcepts:
    """Finite labeled concept points; index 0 is the zero concept (origin)."""

    points: np.ndarray
    labels: Optional[tuple] = None

    def __init__(self, points, labels=None):
        pts = _as_points(points, "concept points")
        if not np.all(pts[0] == 0.0):
            raise KnowledgeError("concept point at index 0 must be the origin")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise KnowledgeError("duplicate concept points")
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != len(pts):
                raise KnowledgeError("one label per concept point required")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def index_of(self, values: np.ndarray) -> np.ndarray:
        """Map an (n, l) array of concept points to concept indices.

        Every row must match one of the listed points exactly.
        """
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        eq = np.all(v[:, None, :] == self.points[None, :, :], axis=-1)
        ok = eq.any(axis=1)
        if not ok.all():
            raise KnowledgeError("value is not one of the listed concept points")
        return np.argmax(eq, axis=1)

    def contains(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        eq = np.all(v[:, None, :] == self.points[None, :, :], axis=-1)
        return eq.any(axis=1)

    def to_dict(self) -> dict:
        doc = {"type": "discrete", "points": self.points.tolist()}
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        return doc


ConceptSpace = Union[BoxConcepts, DiscreteConcepts]


def concepts_from_dict(doc: dict) -> ConceptSpace:
    kind = doc.get("type")
    if kind == "box":
        return BoxConcepts(doc["lo"], doc["hi"])
    if kind == "discrete":
        return DiscreteConcepts(doc["points"], doc.get("labels"))
    raise KnowledgeError(f"unknown concept space type: {kind!r}")


@dataclass(frozen=True, eq=False)
class KnowledgeSetting:
    """Finite experience list plus a concept space with a zero concept."""

    experiences: np.ndarray
    concepts: ConceptSpace

    def __init__(self, experiences, concepts: ConceptSpace):
        exp = _as_points(experiences, "experiences")
        if len(np.unique(exp, axis=0)) != len(exp):
            raise KnowledgeError("duplicate experience points")
        exp.setflags(write=False)
        object.__setattr__(self, "experiences", exp)
        object.__setattr__(self, "concepts", concepts)

    @property
    def n_experiences(self) -> int:
        return self.experiences.shape[0]

    @property
    def concept_dim(self) -> int:
        return self.concepts.dim

    def to_dict(self) -> dict:
        return {
            "experiences": self.experiences.tolist(),
            "concepts": self.concepts.to_dict(),
        }


def setting_from_dict(doc: dict) -> KnowledgeSetting:
    return KnowledgeSetting(doc["experiences"], concepts_from_dict(doc["concepts"]))


def grid_setting(n: int, lo: float = -10.0, hi: float = 10.0) -> KnowledgeSetting:
    """Setting with experiences 1..n and a scalar concept box [lo, hi]."""
    return KnowledgeSetting(
        np.arange(1.0, n + 1.0)[:, None], BoxConcepts([lo], [hi])
    )


@dataclass(frozen=True, eq=False)
class KnowledgeFunction:
    """Tabular map from experience indices to concept points."""

    setting: KnowledgeSetting
    values: np.ndarray

    def __init__(self, setting: KnowledgeSetting, values):
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape != (setting.n_experiences, setting.concept_dim):
            raise KnowledgeError(
                f"values must have shape ({setting.n_experiences}, "
                f"{setting.concept_dim}), got {v.shape}"
            )
        if not setting.concepts.contains(v).all():
            raise KnowledgeError("values must lie in the concept space")
        v.setflags(write=False)
        object.__setattr__(self, "setting", setting)
        object.__setattr__(self, "values", v)

    def evaluate(self, e: int) -> np.ndarray:
        """Concept point assigned to experience index ``e``."""
        if not 0 <= e < self.setting.n_experiences:
            raise IndexError(f"experience index {e} out of range")
        return self.values[e]

    def conceptualizes(self, e: int) -> bool:
        """True iff the value at ``e`` differs from the zero concept."""
        return bool(np.any(self.evaluate(e) != 0.0))

    def support(self) -> np.ndarray:
        """Boolean mask of experiences mapped to a nonzero concept."""
        return np.any(self.values != 0.0, axis=-1)

    def usage_penalty(self, mask: Optional[np.ndarray] = None) -> float:
        """Parsimony penalty for the variety of nonzero concepts used.

        Discrete concepts: number of distinct nonzero concepts minus one,
        floored at zero.  Box concepts: Lebesgue measure of the convex hull
        of the distinct nonzero values (zero when at most one distinct
        value is used).  ``mask`` restricts the tally to a subset of
        experience indices.
        """
        values = self.values if mask is None else self.values[mask]
        return usage_penalty(values, self.setting.concepts)

    def with_values(self, values) -> "KnowledgeFunction":
        return KnowledgeFunction(self.setting, values)

    @classmethod
    def _trusted(cls, setting: KnowledgeSetting, values: np.ndarray) -> "KnowledgeFunction":
        # Skips membership validation; callers must guarantee the values
        # already lie in the concept space (clipped or selected from it).
        self = object.__new__(cls)
        values.setflags(write=False)
        object.__setattr__(self, "setting", setting)
        object.__setattr__(self, "values", values)
        return self

    @classmethod
    def constant(cls, setting: KnowledgeSetting, point) -> "KnowledgeFunction":
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(setting, np.tile(point, (setting.n_experiences, 1)))

    @classmethod
    def zero(cls, setting: KnowledgeSetting) -> "KnowledgeFunction":
        return cls(setting, np.zeros((setting.n_experiences, setting.concept_dim)))

    def to_dict(self) -> dict:
        doc = self.setting.to_dict()
        doc["values"] = self.values.tolist()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def function_from_dict(doc: dict) -> KnowledgeFunction:
    return KnowledgeFunction(setting_from_dict(doc), doc["values"])


def function_from_json(text: str) -> KnowledgeFunction:
    return function_from_dict(json.loads(text))


def usage_penalty(values: np.ndarray, concepts: ConceptSpace) -> float:
    """Concept-variety penalty on a raw (n, l) table of concept points."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    nonzero = v[np.any(v != 0.0, axis=-1)]
    if len(nonzero) == 0:
        return 0.0
    distinct = np.unique(nonzero, axis=0)
    if isinstance(concepts, DiscreteConcepts):
        return float(max(len(distinct) - 1, 0))
    if len(distinct) <= 1:
        return 0.0
    if concepts.dim == 1:
        return float(distinct.max() - distinct.min())
    return _hull_measure(distinct)


def _hull_measure(points: np.ndarray) -> float:
    # Degenerate point sets (fewer than dim+1 points, or affinely dependent)
    # span a zero-measure hull.
    from scipy.spatial import ConvexHull, QhullError

    if len(points) <= points.shape[1]:
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        return 0.0


def knowledge_distance(f: KnowledgeFunction, g: KnowledgeFunction) -> float:
    """Euclidean distance between two tabular functions.

    sqrt of the sum over experiences of the squared concept-point distance.
    """
    if f.values.shape != g.values.shape:
        raise KnowledgeError("functions live on different settings")
    return float(np.linalg.norm(f.values - g.values))


class LikelihoodLandscape:
    """How well a concept explains an experience, as a value in [0, 1].

    Every landscape returns exactly 1/2 at the zero concept.
    """

    def evaluate(self, setting: KnowledgeSetting, e: int, concept) -> float:
        c = np.atleast_1d(np.asarray(concept, dtype=float))
        if not np.any(c != 0.0):
            return 0.5
        return self._value(setting, e, c)

    def per_experience(self, setting: KnowledgeSetting, values: np.ndarray) -> np.ndarray:
        """Vector of L(e, values[e]) over all experience indices."""
        v = np.asarray(values, dtype=float)
        out = np.array(
            [self._value(setting, e, v[e]) for e in range(setting.n_experiences)]
        )
        out[~np.any(v != 0.0, axis=-1)] = 0.5
        return out

    def per_population(self, setting: KnowledgeSetting, values: np.ndarray) -> np.ndarray:
        """(N, n_experiences) likelihood table for a stack of value tables."""
        return np.stack([self.per_experience(setting, v) for v in values])

    def _value(self, setting, e, concept) -> float:
        raise NotImplementedError


class ConstantLikelihood(LikelihoodLandscape):
    """L(e, c) = v for every nonzero concept."""

    def __init__(self, value: float = 1.0):
        if not 0.0 <= value <= 1.0:
            raise KnowledgeError("constant likelihood must lie in [0, 1]")
        self.value = float(value)

    def _value(self, setting, e, concept) -> float:
        return self.value

    def per_experience(self, setting, values):
        v = np.asarray(values, dtype=float)
        nonzero = np.any(v != 0.0, axis=-1)
        return np.where(nonzero, self.value, 0.5)

    per_population = per_experience

    def to_dict(self) -> dict:
        return {"variant": "constant", "value": self.value}


class GaussianPeakLikelihood(LikelihoodLandscape):
    """L(e, c) = exp(-||c - center||^2 / width) for nonzero concepts."""

    def __init__(self, center, width: float):
        if width <= 0.0:
            raise KnowledgeError("peak width must be positive")
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.width = float(width)

    def _value(self, setting, e, concept) -> float:
        d2 = float(np.sum((concept - self.center) ** 2))
        return float(np.exp(-d2 / self.width))

    def per_experience(self, setting, values):
        v = np.asarray(values, dtype=float)
        d2 = np.sum((v - self.center) ** 2, axis=-1)
        out = np.exp(-d2 / self.width)
        out[~np.any(v != 0.0, axis=-1)] = 0.5
        return out

    per_population = per_experience

    def to_dict(self) -> dict:
        return {
            "variant": "gaussian-peak",
            "center": self.center.tolist(),
            "width": self.width,
        }


class TabularLikelihood(LikelihoodLandscape):
    """Dense (n_experiences, n_concepts) table for discrete concept spaces."""

    def __init__(self, table):
        tab = np.asarray(table, dtype=float)
        if tab.ndim != 2:
            raise KnowledgeError("likelihood table must be 2d")
        if np.any(tab < 0.0) or np.any(tab > 1.0):
            raise KnowledgeError("likelihood values must lie in [0, 1]")
        tab = tab.copy()
        tab[:, 0] = 0.5
        tab.setflags(write=False)
        self.table = tab

    def _value(self, setting, e, concept) -> float:
        idx = setting.concepts.index_of(concept[None, :])[0]
        return float(self.table[e, idx])

    def per_experience(self, setting, values):
        idx = setting.concepts.index_of(values)
        return self.table[np.arange(len(idx)), idx]

    def per_population(self, setting, values):
        n, n_exp, dim = values.shape
        idx = setting.concepts.index_of(values.reshape(-1, dim)).reshape(n, n_exp)
        return self.table[np.arange(n_exp)[None, :], idx]

    def to_dict(self) -> dict:
        return {"variant": "tabular", "table": self.table.tolist()}


def landscape_from_dict(doc: dict) -> LikelihoodLandscape:
    variant = doc.get("variant")
    if variant == "constant":
        return ConstantLikelihood(doc.get("value", 1.0))
    if variant == "gaussian-peak":
        return GaussianPeakLikelihood(doc["center"], doc["width"])
    if variant == "tabular":
        return TabularLikelihood(doc["table"])
    raise KnowledgeError(f"unknown likelihood variant: {variant!r}")
