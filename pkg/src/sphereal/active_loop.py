"""Label-budgeted sweep: query one point per fresh component, propagate labels.

The sweep raises the adjacency threshold eta step by step.  At each step,
every component with no queried member gets a single oracle query at its
most confident point (highest support-estimate value, lowest index on
ties) whose label is propagated to the component; components whose queried
members agree propagate that shared label; components with conflicting
queried labels are left alone, since their points were labeled at smaller
eta where locality was stronger, and whatever remains unlabeled falls
through to the witness classifier.  A label, once assigned, is never
overwritten at a larger eta.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ParameterError
from .graph import build_components

__all__ = [
    "LabelOracle",
    "GroundTruthOracle",
    "ReplayOracle",
    "LoopConfig",
    "LabelState",
    "eta_grid",
    "run_active_loop",
]

UNLABELED = 0


class LabelOracle:
    """Caching oracle: each distinct index is charged at most once."""

    def __init__(self):
        self._cache: dict[int, int] = {}

    def _lookup(self, index: int) -> int:
        raise NotImplementedError

    def query(self, index: int) -> int:
        index = int(index)
        if index not in self._cache:
            self._cache[index] = int(self._lookup(index))
        return self._cache[index]

    @property
    def query_count(self) -> int:
        return len(self._cache)

    @property
    def charged(self) -> dict[int, int]:
        return dict(self._cache)


class GroundTruthOracle(LabelOracle):
    """Benchmark-mode oracle backed by the ground-truth label vector."""

    def __init__(self, labels):
        super().__init__()
        self._labels = np.asarray(labels, dtype=np.int64)

    def _lookup(self, index: int) -> int:
        label = int(self._labels[index])
        if label <= 0:
            raise DataError(f"oracle asked for index {index} with no ground truth")
        return label


class ReplayOracle(LabelOracle):
    """Replays (index, label) pairs recorded by an earlier run."""

    def __init__(self, pairs):
        super().__init__()
        self._known = {int(i): int(l) for i, l in pairs}

    @classmethod
    def from_csv(cls, path) -> "ReplayOracle":
        """Accepts two-column (index,label) or three-column (order,index,label)
        files, with or without a header line."""
        path = Path(path)
        if not path.exists():
            raise DataError(f"replay log not found: {path}")
        pairs = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                cells = [c.strip() for c in row]
                try:
                    values = [int(c) for c in cells]
                except ValueError:
                    continue  # header line
                if len(values) == 2:
                    pairs.append((values[0], values[1]))
                elif len(values) == 3:
                    pairs.append((values[1], values[2]))
                else:
                    raise DataError(f"replay log {path} has a {len(values)}-column row")
        return cls(pairs)

    def _lookup(self, index: int) -> int:
        if index not in self._known:
            raise DataError(f"replay log has no label for queried index {index}")
        return self._known[index]


@dataclass
class LoopConfig:
    """Sweep schedule and query budget."""

    eta_start: float = 0.05
    eta_step: float = 0.05
    eta_max: float = np.pi / 4
    query_budget: int | None = None

    def __post_init__(self):
        if not (0.0 < self.eta_start <= self.eta_max <= np.pi):
            raise ParameterError(
                f"need 0 < eta_start <= eta_max <= pi, got "
                f"({self.eta_start}, {self.eta_max})"
            )
        if self.eta_step <= 0.0:
            raise ParameterError(f"eta_step must be positive, got {self.eta_step}")
        if self.query_budget is not None and self.query_budget < 0:
            raise ParameterError("query_budget must be >= 0")


@dataclass
class LabelState:
    """Outcome of the sweep.

    ``predicted`` holds 0 for points never consistently labeled; those kept
    points are listed in ``uncertain``, while ``pruned`` lists the points
    the support threshold dropped before the sweep.  Together with the
    labeled points they partition the index range, pairwise disjoint.
    Both groups fall through to the witness classifier.
    """

    predicted: np.ndarray
    queries: list[tuple[int, int]]
    preset: list[tuple[int, int]]
    uncertain: np.ndarray
    pruned: np.ndarray
    component_history: list[tuple[float, int]]
    budget_exhausted: bool = False

    @property
    def queried_count(self) -> int:
        return len(self.queries)


def eta_grid(config: LoopConfig) -> np.ndarray:
    """The sweep thresholds eta_start, eta_start + step, ... up to eta_max."""
    steps = int(np.floor((config.eta_max - config.eta_start) / config.eta_step + 1e-9))
    return config.eta_start + config.eta_step * np.arange(steps + 1)


def run_active_loop(
    angles,
    kept_mask,
    confidence,
    oracle: LabelOracle,
    config: LoopConfig,
    preset_labels=None,
) -> LabelState:
    """Execute the eta sweep over the kept points.

    ``confidence`` scores each sample for query selection (the precomputed
    support-estimate values over the pruned set); ``preset_labels`` seeds
    the queried set with known (index, label) pairs that are not charged to
    the oracle.  Exhausting the query budget stops further querying and is
    reported on the state, not raised.
    """
    angles = np.asarray(angles, dtype=np.float64)
    kept = np.asarray(kept_mask, dtype=bool)
    conf = np.asarray(confidence, dtype=np.float64)
    m = angles.shape[0]
    if kept.shape != (m,) or conf.shape != (m,):
        raise ParameterError("kept_mask and confidence must match the angle matrix")

    predicted = np.full(m, UNLABELED, dtype=np.int64)
    queried: dict[int, int] = {}
    preset = [(int(i), int(l)) for i, l in (preset_labels or [])]
    for idx, label in preset:
        if label <= 0:
            raise ParameterError("preset labels must be positive class ids")
        queried[idx] = label
        predicted[idx] = label

    queries: list[tuple[int, int]] = []
    history: list[tuple[float, int]] = []
    budget_exhausted = False

    for eta in eta_grid(config):
        graph = build_components(angles, kept, float(eta))
        history.append((float(eta), graph.component_count))
        for comp in range(graph.component_count):
            members = graph.members(comp)
            member_labels = [queried[i] for i in members.tolist() if i in queried]
            if not member_labels:
                if config.query_budget is not None and len(queries) >= config.query_budget:
                    budget_exhausted = True
                    continue
                # Most confident member; ties resolve to the lowest index
                # because argmax returns the first maximum and members ascend.
                pick = int(members[np.argmax(conf[members])])
                label = oracle.query(pick)
                if label <= 0:
                    raise DataError(f"oracle returned non-positive label for {pick}")
                queried[pick] = label
                queries.append((pick, label))
            elif len(set(member_labels)) == 1:
                label = member_labels[0]
            else:
                continue  # conflicting queried labels: leave for the witness
            fresh = members[predicted[members] == UNLABELED]
            predicted[fresh] = label

    uncertain = np.flatnonzero(kept & (predicted == UNLABELED))
    pruned = np.flatnonzero(~kept & (predicted == UNLABELED))
    return LabelState(
        predicted=predicted,
        queries=queries,
        preset=preset,
        uncertain=uncertain,
        pruned=pruned,
        component_history=history,
        budget_exhausted=budget_exhausted,
    )
