"""Post-run metrics: evaluation-phase cooperation, collapse thresholds,
value-landscape statistics, and representation-cluster diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

IN_RANGE = "in_range"
ABOVE_RANGE = "above_range"
BELOW_RANGE = "below_range"


def mean_cooperation(trace: np.ndarray, t_eval: int) -> float:
    """Mean of the final ``t_eval`` entries of a cooperation trace."""
    trace = np.asarray(trace, dtype=np.float64)
    if t_eval < 1:
        raise ConfigError(f"t_eval must be >= 1, got {t_eval}")
    if trace.size < t_eval:
        raise ConfigError(
            f"trace has {trace.size} entries, needs at least {t_eval}"
        )
    return float(np.mean(trace[-t_eval:]))


@dataclass(frozen=True)
class ThresholdResult:
    """Largest payoff-harshness value that keeps cooperation above a criterion.

    ``status`` is ``in_range`` when the threshold lies inside the tested
    grid, ``above_range`` when every grid point qualifies, and
    ``below_range`` when none does (``d_r_star`` is None in the marker
    cases).
    """

    criterion: float
    d_r_star: float | None
    status: str


def collapse_threshold(
    d_r_values,
    coop_values,
    criterion: float,
    at_or_above: bool = False,
) -> ThresholdResult:
    """Largest d_r whose cooperation exceeds ``criterion``.

    ``d_r_values`` must be strictly ascending. The comparison is strict
    by default; pass ``at_or_above=True`` for >=.
    """
    d_r = np.asarray(d_r_values, dtype=np.float64)
    coop = np.asarray(coop_values, dtype=np.float64)
    if d_r.size == 0:
        raise ConfigError("empty d_r grid")
    if d_r.shape != coop.shape:
        raise ConfigError("d_r grid and cooperation values differ in length")
    if np.any(np.diff(d_r) <= 0):
        raise ConfigError("d_r grid must be strictly ascending")
    qualifies = coop >= criterion if at_or_above else coop > criterion
    if not qualifies.any():
        return ThresholdResult(criterion, None, BELOW_RANGE)
    if qualifies.all():
        return ThresholdResult(criterion, None, ABOVE_RANGE)
    best = int(np.max(np.nonzero(qualifies)[0]))
    return ThresholdResult(criterion, float(d_r[best]), IN_RANGE)


def q_stats(q_values: np.ndarray) -> tuple[float, float]:
    """(mean |Q| over states and actions, mean |Q(s,C) - Q(s,D)|)."""
    q = np.asarray(q_values, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != 2 or q.shape[0] == 0:
        raise ConfigError(f"expected a nonempty (n, 2) array, got {q.shape}")
    q_mean = float(np.mean(np.abs(q)))
    q_gap = float(np.mean(np.abs(q[:, 0] - q[:, 1])))
    return q_mean, q_gap


@dataclass(frozen=True)
class ClusterDiagnostic:
    """Two-way k-means partition of representation vectors."""

    assignments: np.ndarray  # (n,) labels in {0, 1}
    centroids: np.ndarray  # (2, dim)
    sse: float


def _sse(points: np.ndarray, assignments: np.ndarray, centroids: np.ndarray) -> float:
    diff = points - centroids[assignments]
    return float(np.sum(diff * diff))


def _lloyd(pts: np.ndarray, rng: np.random.Generator, max_iter: int):
    """One seeded Lloyd descent: distance-weighted init, repair, iterate."""
    n = pts.shape[0]
    first = int(rng.integers(n))
    d2 = np.sum((pts - pts[first]) ** 2, axis=1)
    second = int(rng.choice(n, p=d2 / d2.sum()))
    centroids = np.stack([pts[first], pts[second]]).astype(np.float64)

    assignments = None
    for _ in range(max_iter):
        d0 = np.sum((pts - centroids[0]) ** 2, axis=1)
        d1 = np.sum((pts - centroids[1]) ** 2, axis=1)
        new_assign = (d1 < d0).astype(np.int8)
        for label in (0, 1):
            if not np.any(new_assign == label):
                # all points sit in the other cluster; eject the farthest
                dist_to_own = d1 if label == 0 else d0
                new_assign[int(np.argmax(dist_to_own))] = label
        if assignments is not None and np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        for label in (0, 1):
            centroids[label] = pts[assignments == label].mean(axis=0)
    return assignments, centroids


def kmeans2(
    points: np.ndarray, seed: int, max_iter: int = 100, restarts: int = 10
) -> ClusterDiagnostic:
    """Two-cluster k-means: restarted Lloyd descents, best SSE wins.

    Each restart seeds the first centroid uniformly and the second
    proportionally to squared distance from it, then iterates to
    convergence or ``max_iter``, repairing an empty cluster by moving in
    the point farthest from its assigned centroid. Lloyd's descent only
    finds local optima; the seeded restarts make missing the global
    partition rare but not impossible. Deterministic given ``seed``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 2 or np.unique(pts, axis=0).shape[0] < 2:
        raise ConfigError("k-means needs at least 2 distinct points")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        assignments, centroids = _lloyd(pts, rng, max_iter)
        sse = _sse(pts, assignments, centroids)
        if best is None or sse < best.sse:
            best = ClusterDiagnostic(
                assignments=assignments, centroids=centroids, sse=sse
            )
    return best


def _distance_rows(pts: np.ndarray) -> np.ndarray:
    """Full Euclidean distance matrix, one direct row at a time."""
    n = pts.shape[0]
    dist = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        diff = pts - pts[i]
        dist[i] = np.sqrt(np.sum(diff * diff, axis=1))
    return dist


def silhouette(points: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette coefficient of a two-cluster labeling.

    Per point: s = (b - a) / max(a, b) with Euclidean distances, where a
    is the mean distance within the point's own cluster (excluding
    itself) and b the mean distance to the other cluster. A point alone
    in its cluster contributes 0, as does a point with a = b = 0.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    labels = np.asarray(assignments)
    n = pts.shape[0]
    if n < 2:
        raise ConfigError("silhouette needs at least 2 points")
    if labels.shape != (n,):
        raise ConfigError("one label per point required")
    in1 = labels == 1
    n1 = int(np.count_nonzero(in1))
    if n1 == 0 or n1 == n:
        raise ConfigError("silhouette needs both clusters nonempty")

    dist = _distance_rows(pts)
    sizes = np.where(in1, n1, n - n1).astype(np.float64)
    sum_own = np.where(in1, dist[:, in1].sum(axis=1), dist[:, ~in1].sum(axis=1))
    sum_other = np.where(in1, dist[:, ~in1].sum(axis=1), dist[:, in1].sum(axis=1))
    a = np.where(sizes > 1, sum_own / np.maximum(sizes - 1, 1), 0.0)
    b = sum_other / (n - sizes)

    denom = np.maximum(a, b)
    s = np.zeros(n, dtype=np.float64)
    ok = denom > 0
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    s[sizes == 1] = 0.0
    return float(np.mean(s))


def aggregate_seeds(
    rows: list[dict],
    group_keys: tuple[str, ...],
    value_keys: tuple[str, ...],
) -> list[dict]:
    """Collapse per-seed rows into per-cell mean / sample sd / count.

    Rows are grouped by ``group_keys`` (everything but the seed); each
    ``value_keys`` column yields ``<key>_mean`` and ``<key>_sd``. The sd
    uses the n-1 denominator and is reported as 0.0 for single-row
    groups. Cells are emitted sorted by group key, so the result is
    invariant to the input row order.
    """
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row[k] for k in group_keys)
        cells.setdefault(key, []).append(row)
    out = []
    for key in sorted(cells):
        members = cells[key]
        cell = dict(zip(group_keys, key))
        cell["count"] = len(members)
        for vk in value_keys:
            values = np.array([float(m[vk]) for m in members], dtype=np.float64)
            cell[f"{vk}_mean"] = float(np.mean(values))
            cell[f"{vk}_sd"] = (
                float(np.std(values, ddof=1)) if values.size > 1 else 0.0
            )
        out.append(cell)
    return out
