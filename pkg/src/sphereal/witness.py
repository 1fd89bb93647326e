"""Post-classification of leftover points by per-class anchor-summed kernels.

Each class is represented by its anchor set (the points the sweep labeled
confidently); a point is assigned to the class whose summed witness-kernel
response is largest.  Classes with no anchors score -inf and never win;
exact ties resolve to the lowest class id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .active_loop import LabelState, UNLABELED
from .errors import ConfigError, NumericError, ParameterError
from .kernels import jacobi_kernel
from .preprocess import as_unit_points

__all__ = [
    "WitnessModel",
    "build_witness_model",
    "witness_scores",
    "witness_classify",
    "classify_uncertain",
]

_ANCHOR_BLOCK = 4096  # anchor columns per kernel evaluation block


@dataclass
class WitnessModel:
    """Per-class anchor sets plus the witness kernel parameters."""

    class_ids: tuple[int, ...]
    anchors: list[np.ndarray]  # aligned with class_ids; (count, q+1) each
    degree: int
    sphere_dim: int

    def __post_init__(self):
        if len(self.class_ids) != len(self.anchors):
            raise ParameterError("class_ids and anchors must align")
        if not any(a.shape[0] for a in self.anchors):
            raise ConfigError("witness model needs at least one anchored class")


def build_witness_model(
    points,
    predicted,
    degree: int,
    sphere_dim: int | None = None,
    anchor_cap: int | None = None,
    seed: int = 0,
) -> WitnessModel:
    """Collect anchors per class from the labeled points.

    ``anchor_cap`` optionally subsamples each class's anchors (seeded,
    uniform) to bound classification cost; by default every labeled point
    is an anchor.
    """
    pts = as_unit_points(points)
    labels = np.asarray(predicted, dtype=np.int64)
    if sphere_dim is None:
        sphere_dim = pts.shape[1] - 1
    class_ids = tuple(int(c) for c in np.unique(labels) if c != UNLABELED)
    if not class_ids:
        raise ConfigError("no labeled points to anchor the witness classifier")
    rng = np.random.default_rng(seed)
    anchors = []
    for cls in class_ids:
        idx = np.flatnonzero(labels == cls)
        if anchor_cap is not None and idx.size > anchor_cap:
            idx = np.sort(rng.choice(idx, size=anchor_cap, replace=False))
        anchors.append(pts[idx])
    return WitnessModel(class_ids=class_ids, anchors=anchors, degree=degree,
                        sphere_dim=int(sphere_dim))


def witness_scores(x, model: WitnessModel) -> np.ndarray:
    """Anchor-summed kernel responses, shape (rows, classes).

    Anchorless classes score -inf.  Anchor sets are read-only here, so
    distinct rows can be scored concurrently.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    pts = as_unit_points(arr[None, :] if single else arr)
    scores = np.full((pts.shape[0], len(model.class_ids)), -np.inf)
    for col, anchors in enumerate(model.anchors):
        if anchors.shape[0] == 0:
            continue
        total = np.zeros(pts.shape[0])
        for start in range(0, anchors.shape[0], _ANCHOR_BLOCK):
            block = anchors[start : start + _ANCHOR_BLOCK]
            dots = pts @ block.T
            total += np.sum(jacobi_kernel(dots, model.degree, model.sphere_dim), axis=1)
        scores[:, col] = total
    return scores


def witness_classify(x, model: WitnessModel):
    """Class with the largest anchor sum; ties go to the lowest class id."""
    scores = witness_scores(x, model)
    finite = np.isfinite(scores).any(axis=1)
    if not finite.all():
        raise NumericError("all class sums are non-finite for some points")
    # argmax returns the first maximum and class_ids ascend, so exact ties
    # resolve to the lowest class id.
    picks = np.argmax(scores, axis=1)
    labels = np.asarray(model.class_ids, dtype=np.int64)[picks]
    if np.asarray(x).ndim == 1:
        return int(labels[0])
    return labels


def classify_uncertain(
    state: LabelState,
    points,
    degree: int,
    sphere_dim: int | None = None,
    anchor_cap: int | None = None,
    seed: int = 0,
) -> LabelState:
    """Label every point the sweep left unlabeled (uncertain or pruned).

    Anchors are all loop-labeled points; previously assigned labels never
    change.  Returns a new state with a fully populated prediction vector.
    """
    pts = as_unit_points(points)
    leftovers = np.flatnonzero(state.predicted == UNLABELED)
    if leftovers.size == 0:
        return state
    model = build_witness_model(
        pts, state.predicted, degree, sphere_dim=sphere_dim,
        anchor_cap=anchor_cap, seed=seed,
    )
    predicted = state.predicted.copy()
    predicted[leftovers] = witness_classify(pts[leftovers], model)
    return LabelState(
        predicted=predicted,
        queries=list(state.queries),
        preset=list(state.preset),
        uncertain=state.uncertain,
        pruned=state.pruned,
        component_history=list(state.component_history),
        budget_exhausted=state.budget_exhausted,
    )
