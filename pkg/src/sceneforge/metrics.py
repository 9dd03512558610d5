"""Completion evaluation: Chamfer distances (L1/L2), precision/recall at a
distance threshold, F-score, and normalized AUC of the F-score curve over
log-spaced thresholds.

The L2 convention is selectable: "literal-norm" averages Euclidean norms;
"squared" averages squared norms (the convention many completion papers use).
L1 nearest neighbors are computed under the L1 norm itself, never
approximated by the L2-nearest point.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GeometryError
from .geometry import NnIndex, PointCloud, build_nn_index
from .util import write_json_atomic

L2_LITERAL = "literal-norm"
L2_SQUARED = "squared"


@dataclass(frozen=True)
class MetricsConfig:
    tau: float = 0.001
    auc_range: tuple[float, float] = (0.0001, 0.01)
    auc_samples: int = 64
    l2_convention: str = L2_LITERAL

    def __post_init__(self):
        t1, t2 = self.auc_range
        if not (0 < t1 < t2):
            raise ValueError("auc_range must satisfy 0 < tau1 < tau2")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.auc_samples < 2:
            raise ValueError("auc_samples must be >= 2")
        if self.l2_convention not in (L2_LITERAL, L2_SQUARED):
            raise ValueError(f"unknown l2_convention '{self.l2_convention}'")


@dataclass(frozen=True)
class MetricsReport:
    l1_cd: float
    l2_cd: float
    precision: float
    recall: float
    fscore: float
    auc: float
    tau: float
    n_pred: int
    n_gt: int

    def __post_init__(self):
        values = (self.l1_cd, self.l2_cd, self.precision, self.recall, self.fscore, self.auc)
        if not all(np.isfinite(v) for v in values):
            raise ValueError("metrics must be finite")

    def to_dict(self) -> dict:
        return {
            "l1_cd": self.l1_cd,
            "l2_cd": self.l2_cd,
            "precision": self.precision,
            "recall": self.recall,
            "fscore": self.fscore,
            "auc": self.auc,
            "tau": self.tau,
            "n_pred": self.n_pred,
            "n_gt": self.n_gt,
        }


def point_set_distance(p: np.ndarray, index: NnIndex, norm: str = "l2") -> float:
    """min over indexed q of ||p - q|| under the chosen norm ('l2' or 'l1')."""
    dist, _ = index.query(np.asarray(p, dtype=np.float64).reshape(1, 3), norm=norm)
    return float(dist[0])


def _directed_distances(a: PointCloud, b_index: NnIndex, norm: str) -> np.ndarray:
    dist, _ = b_index.query(a.points, norm=norm)
    return dist


def chamfer(pred: PointCloud, gt: PointCloud, norm: str = "l2",
            config: MetricsConfig | None = None) -> float:
    """Symmetric Chamfer distance under 'l1' or 'l2'.

    CD = (1/(2|P|)) sum dist(p, Q) + (1/(2|Q|)) sum dist(q, P); under the
    squared L2 convention each dist term is squared first.
    """
    config = config or MetricsConfig()
    _require_nonempty(pred, gt)
    d_pq = _directed_distances(pred, build_nn_index(gt), norm)
    d_qp = _directed_distances(gt, build_nn_index(pred), norm)
    if norm == "l2" and config.l2_convention == L2_SQUARED:
        d_pq = d_pq * d_pq
        d_qp = d_qp * d_qp
    return float(d_pq.mean() / 2.0 + d_qp.mean() / 2.0)


def precision_recall(pred: PointCloud, gt: PointCloud, tau: float) -> tuple[float, float]:
    """Fraction of points within (strictly under) tau of the other cloud, L2."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    _require_nonempty(pred, gt)
    d_pq = _directed_distances(pred, build_nn_index(gt), "l2")
    d_qp = _directed_distances(gt, build_nn_index(pred), "l2")
    return float((d_pq < tau).mean()), float((d_qp < tau).mean())


def fscore(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def auc(pred: PointCloud, gt: PointCloud, config: MetricsConfig | None = None) -> float:
    """Normalized area under F(tau) against ln(tau) over the config range.

    Trapezoidal rule on auc_samples log-uniform thresholds (endpoints
    included), divided by ln(tau2/tau1) so identical clouds score 1.0.
    """
    config = config or MetricsConfig()
    _require_nonempty(pred, gt)
    d_pq = _directed_distances(pred, build_nn_index(gt), "l2")
    d_qp = _directed_distances(gt, build_nn_index(pred), "l2")
    return _auc_from_distances(d_pq, d_qp, config)


def _auc_from_distances(d_pq: np.ndarray, d_qp: np.ndarray, config: MetricsConfig) -> float:
    t1, t2 = config.auc_range
    taus = np.geomspace(t1, t2, config.auc_samples)
    f = np.empty(len(taus))
    for i, t in enumerate(taus):
        p = (d_pq < t).mean()
        r = (d_qp < t).mean()
        f[i] = fscore(p, r)
    x = np.log(taus)
    return float(np.trapezoid(f, x) / (x[-1] - x[0]))


def evaluate(pred: PointCloud, gt: PointCloud, config: MetricsConfig | None = None) -> MetricsReport:
    """All metrics for one prediction/ground-truth pair in one distance pass."""
    config = config or MetricsConfig()
    _require_nonempty(pred, gt)
    gt_index = build_nn_index(gt)
    pred_index = build_nn_index(pred)
    d2_pq = _directed_distances(pred, gt_index, "l2")
    d2_qp = _directed_distances(gt, pred_index, "l2")
    d1_pq = _directed_distances(pred, gt_index, "l1")
    d1_qp = _directed_distances(gt, pred_index, "l1")

    l1_cd = float(d1_pq.mean() / 2.0 + d1_qp.mean() / 2.0)
    if config.l2_convention == L2_SQUARED:
        l2_cd = float((d2_pq * d2_pq).mean() / 2.0 + (d2_qp * d2_qp).mean() / 2.0)
    else:
        l2_cd = float(d2_pq.mean() / 2.0 + d2_qp.mean() / 2.0)
    precision = float((d2_pq < config.tau).mean())
    recall = float((d2_qp < config.tau).mean())
    return MetricsReport(
        l1_cd=l1_cd,
        l2_cd=l2_cd,
        precision=precision,
        recall=recall,
        fscore=fscore(precision, recall),
        auc=_auc_from_distances(d2_pq, d2_qp, config),
        tau=config.tau,
        n_pred=len(pred),
        n_gt=len(gt),
    )


def _require_nonempty(pred: PointCloud, gt: PointCloud) -> None:
    if len(pred) == 0 or len(gt) == 0:
        raise GeometryError("metrics need non-empty clouds")


# --- batch evaluation ----------------------------------------------------


def read_pairs_file(path) -> list[dict]:
    """Pairing file: CSV with header pred_path,gt_path,model_id or a JSON list."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        pairs = json.loads(path.read_text(encoding="utf-8"))
    else:
        with open(path, newline="", encoding="utf-8") as f:
            pairs = list(csv.DictReader(f))
    for row in pairs:
        for key in ("pred_path", "gt_path", "model_id"):
            if key not in row:
                raise ValueError(f"pairing entry lacks '{key}': {row}")
    return pairs


def evaluate_batch(
    pairs: list[dict],
    config: MetricsConfig | None = None,
    json_out=None,
    csv_out=None,
) -> dict:
    """Evaluate each (pred, gt) pair; emit per-pair and mean-aggregate reports.

    The CSV table scales both Chamfer columns by 1e3, the usual reporting
    convention for normalized clouds.
    """
    from .meshio import load_point_cloud

    config = config or MetricsConfig()
    per_pair = []
    for row in pairs:
        report = evaluate(load_point_cloud(row["pred_path"]), load_point_cloud(row["gt_path"]), config)
        per_pair.append({"model_id": row["model_id"], **report.to_dict()})
    keys = ("l1_cd", "l2_cd", "precision", "recall", "fscore", "auc")
    aggregate = {k: float(np.mean([r[k] for r in per_pair])) for k in keys}
    result = {"pairs": per_pair, "aggregate": aggregate, "config": {
        "tau": config.tau, "auc_range": list(config.auc_range),
        "auc_samples": config.auc_samples, "l2_convention": config.l2_convention,
    }}
    if json_out is not None:
        write_json_atomic(json_out, result)
    if csv_out is not None:
        with open(csv_out, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["model_id", "l1_cd_x1e3", "l2_cd_x1e3",
                             "precision", "recall", "fscore", "auc"])
            for r in per_pair:
                writer.writerow([r["model_id"], f"{r['l1_cd'] * 1e3:.4f}", f"{r['l2_cd'] * 1e3:.4f}",
                                 f"{r['precision']:.4f}", f"{r['recall']:.4f}",
                                 f"{r['fscore']:.4f}", f"{r['auc']:.4f}"])
            writer.writerow(["mean", f"{aggregate['l1_cd'] * 1e3:.4f}", f"{aggregate['l2_cd'] * 1e3:.4f}",
                             f"{aggregate['precision']:.4f}", f"{aggregate['recall']:.4f}",
                             f"{aggregate['fscore']:.4f}", f"{aggregate['auc']:.4f}"])
    return result
