"""Saliency evaluation: precision/recall, P-R curves, F-measure, MAE, tuning.

Binarization works on the 8-bit quantization of a saliency map: a pixel is
foreground iff its byte value is strictly greater than the threshold level,
which makes level 255 the empty map and anchors the curve endpoint. An empty
binarized map scores precision 1.0 and recall 0.0 by convention.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .image import BinaryMask, GrayImage, quantize_to_byte

__all__ = [
    "F_MEASURE_WEIGHT",
    "PrPoint",
    "EvalReport",
    "precision_recall",
    "adaptive_threshold",
    "binarize",
    "f_measure",
    "mae",
    "pr_curve",
    "grid_search",
]

# Weight of precision in the F-measure (the conventional gamma^2 = 0.3).
F_MEASURE_WEIGHT = 0.3


@dataclass(frozen=True)
class PrPoint:
    threshold: int
    precision: float
    recall: float


@dataclass(eq=False)
class EvalReport:
    """Dataset-level evaluation: 256-point mean P-R curve plus scalar means."""

    pr_curve: tuple[PrPoint, ...]
    precision: float
    recall: float
    f_measure: float
    mae: float

    def to_json(self) -> str:
        doc = {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "mae": self.mae,
            "pr_curve": [
                {"threshold": p.threshold, "precision": p.precision, "recall": p.recall}
                for p in self.pr_curve
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        curve = tuple(
            PrPoint(int(p["threshold"]), float(p["precision"]), float(p["recall"]))
            for p in doc["pr_curve"]
        )
        return cls(
            pr_curve=curve,
            precision=float(doc["precision"]),
            recall=float(doc["recall"]),
            f_measure=float(doc["f_measure"]),
            mae=float(doc["mae"]),
        )

    def pr_csv(self) -> str:
        lines = ["threshold,precision,recall"]
        lines += [f"{p.threshold},{p.precision!r},{p.recall!r}" for p in self.pr_curve]
        return "\n".join(lines) + "\n"


def precision_recall(sm: BinaryMask, gt: BinaryMask) -> tuple[float, float]:
    """|SM and GT| / |SM| and |SM and GT| / |GT|; empty SM gives (1.0, 0.0)."""
    if sm.pixels.shape != gt.pixels.shape:
        raise ValueError("mask dimensions differ")
    gt_count = int(gt.pixels.sum())
    if gt_count == 0:
        raise ValueError("ground truth has no foreground")
    sm_count = int(sm.pixels.sum())
    if sm_count == 0:
        return 1.0, 0.0
    hits = int((sm.pixels & gt.pixels).sum())
    return hits / sm_count, hits / gt_count


def adaptive_threshold(sal: GrayImage) -> int:
    """Per-image byte level: twice the mean saliency, clipped at 255."""
    level = int(np.floor(2.0 * float(sal.pixels.mean()) * 255.0 + 0.5))
    return min(255, level)


def binarize(sal: GrayImage, level: int) -> BinaryMask:
    """Foreground where the quantized saliency byte exceeds the level."""
    return BinaryMask(quantize_to_byte(sal.pixels) > level)


def f_measure(precision: float, recall: float) -> float:
    """Weighted harmonic mean favoring precision; 0 when both inputs are 0."""
    if precision == 0.0 and recall == 0.0:
        return 0.0
    w = F_MEASURE_WEIGHT
    return (1.0 + w) * precision * recall / (w * precision + recall)


def mae(sal: GrayImage, gt: BinaryMask) -> float:
    """Mean absolute per-pixel difference between the map and the 0/1 truth."""
    if sal.pixels.shape != gt.pixels.shape:
        raise ValueError("dimensions differ")
    return float(np.abs(sal.pixels - gt.pixels.astype(np.float64)).mean())


def pr_curve(dataset: Sequence[tuple[GrayImage, BinaryMask]]) -> tuple[PrPoint, ...]:
    """Mean precision/recall over the dataset for every byte level 0..255."""
    if not dataset:
        raise ValueError("empty dataset")
    curves = np.zeros((256, 2))
    for sal, gt in dataset:
        if sal.pixels.shape != gt.pixels.shape:
            raise ValueError("dimensions differ")
        gt_count = int(gt.pixels.sum())
        if gt_count == 0:
            raise ValueError("ground truth has no foreground")
        bytes_ = quantize_to_byte(sal.pixels)
        # Counting by byte value gives all 256 thresholds in one pass.
        sal_hist = np.bincount(bytes_.ravel(), minlength=256)
        hit_hist = np.bincount(bytes_[gt.pixels].ravel(), minlength=256)
        # foreground at level L = pixels with byte > L
        sm_counts = sal_hist[::-1].cumsum()[::-1]
        hit_counts = hit_hist[::-1].cumsum()[::-1]
        sm_above = np.concatenate([sm_counts[1:], [0]])
        hit_above = np.concatenate([hit_counts[1:], [0]])
        precision = np.where(sm_above > 0, hit_above / np.maximum(sm_above, 1), 1.0)
        recall = hit_above / gt_count
        curves[:, 0] += precision
        curves[:, 1] += recall
    curves /= len(dataset)
    return tuple(
        PrPoint(level, float(curves[level, 0]), float(curves[level, 1])) for level in range(256)
    )


def grid_search(
    score: Callable[[float, float, float], tuple[float, float]],
    stage_steps: Sequence[float] = (40.0, 10.0, 2.0),
    lo: float = 0.0,
    hi: float = 200.0,
    history: list | None = None,
) -> tuple[float, float, float]:
    """Coarse-to-fine search for (alpha, beta, gamma) maximizing a scorer.

    ``score`` returns (f_measure, mae); candidates are ranked by higher F,
    then lower MAE, then the lexicographically smallest triple. Stage one
    scans the full cube [lo, hi]^3 at the first step; each later stage scans
    a +-(previous step) cube around the incumbent at its finer step, so every
    stage's cube contains the previous incumbent. ``history``, if given,
    collects one dict per stage with the axes scanned and the incumbent.
    """
    if not stage_steps:
        raise ValueError("at least one stage step is required")

    def axis(center: float | None, step: float, spread: float | None) -> list[float]:
        if center is None:
            start, stop = lo, hi
        else:
            start, stop = max(lo, center - spread), min(hi, center + spread)
        k = int(np.floor((stop - start) / step + 1e-9))
        return [start + i * step for i in range(k + 1)]

    best: tuple[float, float, float] | None = None
    best_key: tuple[float, float, tuple[float, float, float]] | None = None
    prev_step: float | None = None
    for step in stage_steps:
        axes = [
            axis(None if best is None else best[i], step, prev_step)
            for i in range(3)
        ]
        stage_best = None
        stage_key = None
        for a in axes[0]:
            for b in axes[1]:
                for g in axes[2]:
                    f, err = score(a, b, g)
                    # Negate so the lexicographic tuple comparison prefers
                    # higher F, lower MAE, then the smallest triple.
                    key = (-f, err, (a, b, g))
                    if stage_key is None or key < stage_key:
                        stage_key = key
                        stage_best = (a, b, g)
        best, best_key = stage_best, stage_key
        prev_step = step
        if history is not None:
            history.append({"step": step, "axes": axes, "incumbent": best})
    assert best is not None
    return best
