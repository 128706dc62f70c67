"""Workload replay: input formats, algorithm adapters and the batch runner."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .baselines import NOISE, FixedCoreModel, naive_dbscan, static_hash_clustering
from .core import Config, DynamicDBSCAN
from .errors import InputError
from .evalkit import ari, nmi
from .lsh import draw_hash_functions

ALGORITHMS = ("dynamic", "static-hash", "fixed-core", "naive")


@dataclass(frozen=True)
class Add:
    id: Hashable
    coords: np.ndarray


@dataclass(frozen=True)
class Delete:
    id: Hashable


Event = Add | Delete


# ---------------------------------------------------------------- input


def parse_ops(lines: Iterable[str]) -> list[Event]:
    """Parse ``A <id> <v1> <v2> ...`` / ``D <id>`` lines.

    Blank lines and lines starting with ``#`` are skipped.  Validates that
    every delete names a live id and that all points share one dimension.
    """
    events: list[Event] = []
    live: set[str] = set()
    d = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0].upper()
        if tag == "A" and len(parts) >= 3:
            pid = parts[1]
            try:
                coords = np.array([float(v) for v in parts[2:]])
            except ValueError:
                raise InputError(f"line {lineno}: non-numeric coordinate") from None
            if not np.all(np.isfinite(coords)):
                raise InputError(f"line {lineno}: non-finite coordinate")
            if d is None:
                d = len(coords)
            elif len(coords) != d:
                raise InputError(f"line {lineno}: expected {d} coordinates, got {len(coords)}")
            if pid in live:
                raise InputError(f"line {lineno}: id {pid} added twice")
            live.add(pid)
            events.append(Add(pid, coords))
        elif tag == "D" and len(parts) == 2:
            pid = parts[1]
            if pid not in live:
                raise InputError(f"line {lineno}: delete of unknown id {pid}")
            live.discard(pid)
            events.append(Delete(pid))
        else:
            raise InputError(f"line {lineno}: cannot parse {line!r}")
    return events


def load_csv(path, label_column: str = "label") -> tuple[np.ndarray, np.ndarray | None]:
    """Read a header CSV: numeric feature columns plus an optional label column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return np.empty((0, 0)), None
        header = [h.strip() for h in header]
        lower = [h.lower() for h in header]
        label_at = lower.index(label_column.lower()) if label_column.lower() in lower else None
        rows, labels = [], []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            if label_at is not None:
                labels.append(row[label_at].strip())
                row = row[:label_at] + row[label_at + 1:]
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric feature value") from None
    d = len(header) - (label_at is not None)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), d)
    if not np.all(np.isfinite(X)):
        raise InputError(f"{path}: non-finite feature value")
    y = None
    if label_at is not None:
        _, y = np.unique(np.array(labels), return_inverse=True)
    return X, y


def arrival_order(labels: np.ndarray | None, n: int, ordering: str, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 1])
    perm = rng.permutation(n)
    if ordering == "random":
        return perm
    if ordering == "by-cluster":
        if labels is None:
            raise InputError("by-cluster ordering needs a label column")
        return perm[np.argsort(labels[perm], kind="stable")]
    raise InputError(f"unknown ordering {ordering!r}")


def events_from_matrix(X: np.ndarray, order: Sequence[int]) -> list[Event]:
    return [Add(int(i), X[i]) for i in order]


# ---------------------------------------------------------------- algorithms


class DynamicAlgorithm:
    name = "dynamic"

    def __init__(self, cfg: Config, backend: str | None = None, debug: bool = False) -> None:
        self.db = DynamicDBSCAN.from_config(cfg, backend=backend)
        self.debug = debug
        self._pid: dict[Hashable, int] = {}

    def add(self, ext, x) -> None:
        self._pid[ext] = self.db.add_point(x)

    def delete(self, ext) -> None:
        self.db.delete_point(self._pid.pop(ext))

    def end_batch(self) -> None:
        if self.debug:
            self.db.validate()

    def labels(self) -> tuple[dict, set]:
        snap = self.db.labels_snapshot()
        labels = {ext: snap.labels[p] for ext, p in self._pid.items()}
        noise = {ext for ext, p in self._pid.items() if p in snap.noise}
        return labels, noise


class _Recomputing:
    """Keeps live points and re-clusters them from scratch after each batch."""

    def __init__(self, cfg: Config) -> None:
        self.cfg = cfg
        self.hash_states = draw_hash_functions(cfg.t, cfg.epsilon, np.random.default_rng(cfg.seed))
        self.live: dict[Hashable, np.ndarray] = {}

    def add(self, ext, x) -> None:
        self.live[ext] = np.asarray(x, dtype=np.float64)

    def delete(self, ext) -> None:
        del self.live[ext]

    def end_batch(self) -> None:
        pass

    def _matrix(self) -> tuple[list, np.ndarray]:
        ids = list(self.live)
        X = np.array([self.live[i] for i in ids]) if ids else np.empty((0, 0))
        return ids, X


class StaticHashAlgorithm(_Recomputing):
    name = "static-hash"

    def labels(self) -> tuple[dict, set]:
        ids, X = self._matrix()
        res = static_hash_clustering(X, self.cfg.k, self.hash_states, ids)
        return res.labels, res.noise


class NaiveAlgorithm(_Recomputing):
    name = "naive"

    def labels(self) -> tuple[dict, set]:
        ids, X = self._matrix()
        res = naive_dbscan(X, self.cfg.k, self.cfg.epsilon)
        return {ids[i]: lab for i, lab in res.labels.items()}, {ids[i] for i in res.noise}


class FixedCoreAlgorithm(_Recomputing):
    """Clusters the first batch, then freezes its core points."""

    name = "fixed-core"

    def __init__(self, cfg: Config) -> None:
        super().__init__(cfg)
        self.model: FixedCoreModel | None = None
        self.assigned: dict[Hashable, int] = {}

    def add(self, ext, x) -> None:
        super().add(ext, x)
        if self.model is not None:
            self.assigned[ext] = self.model.assign(x)

    def delete(self, ext) -> None:
        super().delete(ext)
        self.assigned.pop(ext, None)

    def end_batch(self) -> None:
        if self.model is None and self.live:
            ids, X = self._matrix()
            self.model = FixedCoreModel(X, self.cfg.k, self.hash_states, ids)
            self.assigned = dict(self.model.initial.labels)
            for pid in self.model.initial.noise:
                self.assigned[pid] = NOISE

    def labels(self) -> tuple[dict, set]:
        labels = {ext: self.assigned[ext] for ext in self.live}
        noise = {ext for ext, lab in labels.items() if lab == NOISE}
        return labels, noise


def make_algorithm(name: str, cfg: Config, backend: str | None = None, debug: bool = False):
    if name == "dynamic":
        return DynamicAlgorithm(cfg, backend, debug)
    if name == "static-hash":
        return StaticHashAlgorithm(cfg)
    if name == "fixed-core":
        return FixedCoreAlgorithm(cfg)
    if name == "naive":
        return NaiveAlgorithm(cfg)
    raise InputError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")


# ---------------------------------------------------------------- runner


@dataclass
class BatchRow:
    algorithm: str
    batch_index: int
    live_points: int
    elapsed_ms: float
    ari: float | None
    nmi: float | None
    cluster_count: int | None
    noise_count: int | None


@dataclass
class RunReport:
    rows: list[BatchRow] = field(default_factory=list)

    @property
    def final(self) -> BatchRow | None:
        return self.rows[-1] if self.rows else None


def metric_vector(ids: Sequence, labels: dict, noise: set) -> np.ndarray:
    """Labels in ``ids`` order; every noise point becomes its own singleton."""
    base = max((lab for p, lab in labels.items() if p not in noise), default=-1) + 1
    out = np.empty(len(ids), dtype=np.int64)
    extra = 0
    for j, p in enumerate(ids):
        if p in noise:
            out[j] = base + extra
            extra += 1
        else:
            out[j] = labels[p]
    return out


def run_events(
    events: Sequence[Event],
    algorithm,
    batch_size: int = 1000,
    truth: dict | None = None,
    final_only: bool = False,
) -> RunReport:
    """Apply events in batches; score the full live set after every batch.

    With ``final_only`` the labels are only computed after the last batch;
    earlier rows carry timings and live counts but no metrics.
    """
    if batch_size < 1:
        raise InputError("batch size must be positive")
    report = RunReport()
    live: dict[Hashable, None] = {}
    starts = range(0, len(events), batch_size)
    for b, start in enumerate(starts):
        t0 = time.perf_counter()
        for ev in events[start:start + batch_size]:
            if isinstance(ev, Add):
                algorithm.add(ev.id, ev.coords)
                live[ev.id] = None
            else:
                algorithm.delete(ev.id)
                del live[ev.id]
        algorithm.end_batch()
        if final_only and b < len(starts) - 1:
            elapsed = (time.perf_counter() - t0) * 1000.0
            report.rows.append(BatchRow(algorithm.name, b, len(live), elapsed, None, None, None, None))
            continue
        labels, noise = algorithm.labels()
        elapsed = (time.perf_counter() - t0) * 1000.0
        ids = list(live)
        clusters = {labels[p] for p in ids if p not in noise}
        a = m = None
        if truth is not None and len(ids) >= 2:
            pred = metric_vector(ids, labels, noise)
            true = np.array([truth[p] for p in ids])
            a, m = ari(true, pred), nmi(true, pred)
        report.rows.append(
            BatchRow(algorithm.name, b, len(ids), elapsed, a, m, len(clusters), len(noise))
        )
    return report
