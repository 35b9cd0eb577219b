"""Synthetic test clip: a textured disk translating over a contrasting
static background, with exact flow, Gaussian attention, and analytic
ground-truth masks. Used by `gen-synthetic` and the end-to-end tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .attention import AttentionMap
from .raster_io import (
    FlowField,
    Image,
    SegmentationMask,
    Tensor,
    write_flo,
    write_gt_mask,
    write_netpbm,
    write_tensor,
)

DEFAULT_FRAMES = 30
DEFAULT_WIDTH = 160
DEFAULT_HEIGHT = 120
DISK_RADIUS = 28
STEP_X = 3  # disk displacement per frame, pixels


def make_clip(n_frames: int = DEFAULT_FRAMES, width: int = DEFAULT_WIDTH,
              height: int = DEFAULT_HEIGHT, radius: int = DISK_RADIUS,
              step_x: int = STEP_X, seed: int = 7):
    """Returns (frames, flows, attention_maps, gt_masks, scores)."""
    rng = np.random.default_rng(seed)
    h, w = height, width
    bg_noise = rng.integers(-25, 26, size=(h, w, 3))
    bg = np.clip(np.array([40, 70, 90])[None, None, :] + bg_noise, 0, 255)
    # object texture in object-local coordinates, large enough for the disk
    tex_size = 2 * radius + 1
    obj_noise = rng.integers(-40, 41, size=(tex_size, tex_size, 3))
    obj = np.clip(np.array([210, 150, 60])[None, None, :] + obj_noise, 0, 255)

    cy = h // 2
    cx0 = radius + 4
    xs, ys = np.meshgrid(np.arange(w), np.arange(h))

    frames, flows, atts, gts, scores = [], [], [], [], []
    for t in range(n_frames):
        cx = cx0 + step_x * t
        inside = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2
        frame = bg.copy()
        ly = np.clip(ys - cy + radius, 0, tex_size - 1)
        lx = np.clip(xs - cx + radius, 0, tex_size - 1)
        frame[inside] = obj[ly[inside], lx[inside]]
        frames.append(Image(w, h, 3, frame.astype(np.uint8)))
        gts.append(SegmentationMask(w, h, inside.astype(np.uint8)))

        sigma = 0.85 * radius
        att = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * sigma**2))
        atts.append(AttentionMap(w, h, att.astype(np.float32)))
        scores.append(0.9)

        if t < n_frames - 1:
            u = np.where(inside, float(step_x), 0.0).astype(np.float32)
            v = np.zeros((h, w), dtype=np.float32)
            flows.append(FlowField(w, h, u, v))
    return frames, flows, atts, gts, scores


def write_clip(out_dir, class_name: str = "disk", **kwargs) -> None:
    """Write the synthetic clip in the on-disk layout the CLI consumes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frames, flows, atts, gts, scores = make_clip(**kwargs)
    for t, frame in enumerate(frames):
        write_netpbm(frame, out / f"frame_{t:06d}.ppm")
    for t, flow in enumerate(flows):
        write_flo(flow, out / f"flow_{t:06d}.flo")
    for t, att in enumerate(atts):
        write_tensor(Tensor(att.values.shape, att.values),
                     out / f"att_{t:06d}.tnsr")
    for t, gt in enumerate(gts):
        write_gt_mask(gt.values, out / f"gt_{t:06d}.pgm")
    doc = {
        "classes": [class_name],
        "frames": {str(t): [s] for t, s in enumerate(scores)},
    }
    (out / "scores.json").write_text(json.dumps(doc, indent=2))
    config = {
        "_note": "region size scaled down from the 360p default for the "
                 "small synthetic frames",
        "region_size": 8,
    }
    (out / "config.json").write_text(json.dumps(config, indent=2))
