"""Optical flow sources and flow-based temporal correspondences.

Precomputed Middlebury .flo files are the primary flow source; the built-in
block-matching estimator exists so synthetic tests need no fixtures and must
be opted into on the CLI (``--allow-estimated-flow``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .raster_io import FlowField, Image
from .superpixel import SuperpixelPartition


@dataclass
class FlowCorrespondence:
    """Pixel-link counts between regions of frame t and frame t+1."""

    links: dict  # (region_t, region_t1) -> link_count >= 1


def _to_gray(image: Image) -> np.ndarray:
    # channel sum keeps values integral, so SAD comparisons are exact
    return image.data.astype(np.float64).sum(axis=2)


def estimate_flow_blockmatch(a: Image, b: Image, block: int = 8,
                             radius: int = 4) -> FlowField:
    """SAD block matching; integer displacements broadcast to pixels."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("frames must share dimensions")
    if block < 4:
        raise ValueError("block must be >= 4")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    ga = np.ascontiguousarray(_to_gray(a))
    gb = np.ascontiguousarray(_to_gray(b))
    u, v = _kernels.blockmatch(ga, gb, block, radius)
    return FlowField(a.width, a.height,
                     u.astype(np.float32), v.astype(np.float32))


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Per-component round-half-away-from-zero."""
    return np.trunc(x + np.copysign(0.5, x))


def flow_links(p_t: SuperpixelPartition, p_t1: SuperpixelPartition,
               flow: FlowField) -> FlowCorrespondence:
    """Count, per region pair, pixels of frame t landing in a region of
    frame t+1 when displaced by the flow. Out-of-bounds targets drop."""
    if (p_t.width, p_t.height) != (flow.width, flow.height) or \
       (p_t1.width, p_t1.height) != (flow.width, flow.height):
        raise ValueError("partitions and flow must share dimensions")
    h, w = flow.height, flow.width
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    tx = round_half_away(xs + flow.u.astype(np.float64)).astype(np.int64)
    ty = round_half_away(ys + flow.v.astype(np.float64)).astype(np.int64)
    ok = (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    src = p_t.labels[ok].astype(np.int64)
    dst = p_t1.labels[ty[ok], tx[ok]].astype(np.int64)
    codes, counts = np.unique(src * p_t1.count + dst, return_counts=True)
    links = {
        (int(c // p_t1.count), int(c % p_t1.count)): int(n)
        for c, n in zip(codes, counts)
    }
    return FlowCorrespondence(links=links)
