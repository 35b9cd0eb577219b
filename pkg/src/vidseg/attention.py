"""Class-discriminative attention: CAM maps, multi-scale fusion, per-region
aggregation, and relevance filtering of frames by classification score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster_io import Tensor
from .superpixel import SuperpixelPartition


@dataclass
class AttentionMap:
    width: int
    height: int
    values: np.ndarray  # float32 >= 0, shape (height, width)


@dataclass
class ClassScores:
    class_names: list
    scores: np.ndarray  # float, shape (C,), values in [0,1]


@dataclass
class RelevantInterval:
    start_frame: int
    end_frame: int  # inclusive
    class_id: int


def cam_raw(features: Tensor, weights: Tensor, class_id: int) -> np.ndarray:
    """Unclamped activation map: per-pixel dot product of the feature vector
    with the classifier weight column (debug path; linear in weights)."""
    if features.data.ndim != 3 or weights.data.ndim != 2:
        raise ValueError("features must be (h,w,d) and weights (d,C)")
    h, w, d = features.data.shape
    if weights.data.shape[0] != d:
        raise ValueError("feature depth does not match weight rows")
    if not 0 <= class_id < weights.data.shape[1]:
        raise ValueError("class id out of range")
    return features.data.astype(np.float64) @ weights.data[:, class_id].astype(
        np.float64
    )


def cam(features: Tensor, weights: Tensor, class_id: int) -> AttentionMap:
    """Class activation map, clamped at zero."""
    raw = np.maximum(cam_raw(features, weights, class_id), 0.0)
    h, w = raw.shape
    return AttentionMap(width=w, height=h, values=raw.astype(np.float32))


def bilinear_resize(values: np.ndarray, target_w: int, target_h: int
                    ) -> np.ndarray:
    """Half-pixel-centered, edge-clamped bilinear resampling."""
    src_h, src_w = values.shape
    v = values.astype(np.float64)
    xs = (np.arange(target_w) + 0.5) * (src_w / target_w) - 0.5
    ys = (np.arange(target_h) + 0.5) * (src_h / target_h) - 0.5
    x0 = np.clip(np.floor(xs).astype(int), 0, src_w - 1)
    y0 = np.clip(np.floor(ys).astype(int), 0, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    fx = np.clip(xs - np.floor(xs), 0.0, 1.0)
    fy = np.clip(ys - np.floor(ys), 0.0, 1.0)
    # degenerate rows/cols where floor clamps: weight 0 keeps the edge value
    fx[xs < 0] = 0.0
    fy[ys < 0] = 0.0
    top = v[np.ix_(y0, x0)] * (1 - fx) + v[np.ix_(y0, x1)] * fx
    bot = v[np.ix_(y1, x0)] * (1 - fx) + v[np.ix_(y1, x1)] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def fuse_multiscale(maps: list, target_w: int, target_h: int) -> AttentionMap:
    """Resize all maps to the target size, take the pixel-wise maximum,
    then normalize so the peak equals 1 (all-zero input stays zero)."""
    if not maps:
        raise ValueError("need at least one attention map")
    fused = None
    for m in maps:
        r = bilinear_resize(m.values, target_w, target_h)
        fused = r if fused is None else np.maximum(fused, r)
    peak = fused.max()
    if peak > 0:
        fused = fused / peak
    return AttentionMap(width=target_w, height=target_h,
                        values=fused.astype(np.float32))


def superpixel_attention(att: AttentionMap, p: SuperpixelPartition
                         ) -> np.ndarray:
    """Per-region mean attention, normalized by the frame's max region mean."""
    if (att.width, att.height) != (p.width, p.height):
        raise ValueError("attention and partition must share dimensions")
    sums = np.bincount(p.labels.ravel(),
                       weights=att.values.astype(np.float64).ravel(),
                       minlength=p.count)
    means = sums / p.pixel_counts
    peak = means.max()
    if peak > 0:
        means = means / peak
    return means


def relevance_filter(frame_scores: list, class_id: int,
                     threshold: float = 0.8, min_run: int = 5) -> list:
    """Maximal runs of frames whose class score exceeds the threshold, kept
    when at least min_run frames long."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0,1]")
    if min_run < 1:
        raise ValueError("min_run must be >= 1")
    intervals = []
    start = None
    for t, s in enumerate(frame_scores):
        score = s.scores[class_id] if isinstance(s, ClassScores) else s
        if score > threshold:
            if start is None:
                start = t
        elif start is not None:
            if t - start >= min_run:
                intervals.append(RelevantInterval(start, t - 1, class_id))
            start = None
    if start is not None and len(frame_scores) - start >= min_run:
        intervals.append(
            RelevantInterval(start, len(frame_scores) - 1, class_id))
    return intervals
