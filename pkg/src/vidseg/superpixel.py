"""SLIC superpixel partitioning of frames into graph nodes.

k-means in RGBxy space on a regular seed grid, 10 iterations, followed by a
connectivity pass that absorbs orphan 4-connected components into the
largest adjacent region. Deterministic: assignment ties go to the lower
region index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .raster_io import Image

SLIC_ITERS = 10


@dataclass
class SuperpixelPartition:
    width: int
    height: int
    labels: np.ndarray  # int32, shape (height, width), values in [0, count)
    count: int
    pixel_counts: np.ndarray  # int64, (count,)
    mean_rgb: np.ndarray  # float64, (count, 3), values in [0,1]
    centroids: np.ndarray  # float64, (count, 2), (x, y) in pixels


def _stats(labels: np.ndarray, rgb: np.ndarray, count: int):
    flat = labels.ravel()
    pixel_counts = np.bincount(flat, minlength=count)
    denom = np.maximum(pixel_counts, 1)  # empty regions can occur mid-iteration
    mean_rgb = np.empty((count, 3))
    for ch in range(3):
        mean_rgb[:, ch] = np.bincount(
            flat, weights=rgb[:, :, ch].ravel(), minlength=count
        ) / denom
    h, w = labels.shape
    xs, ys = np.meshgrid(np.arange(w), np.arange(h))
    centroids = np.stack(
        [
            np.bincount(flat, weights=xs.ravel(), minlength=count) / denom,
            np.bincount(flat, weights=ys.ravel(), minlength=count) / denom,
        ],
        axis=1,
    )
    return pixel_counts, mean_rgb, centroids


def _enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Keep the largest 4-connected component of each label; merge the rest
    into the largest adjacent region. Components are processed in raster
    order of their first pixel for determinism."""
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int32)
    comps = []  # (label, [pixels]) per component, in raster discovery order
    for sy in range(h):
        for sx in range(w):
            if comp[sy, sx] >= 0:
                continue
            cid = len(comps)
            lab = labels[sy, sx]
            stack = [(sy, sx)]
            comp[sy, sx] = cid
            pixels = []
            while stack:
                y, x = stack.pop()
                pixels.append((y, x))
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and comp[ny, nx] < 0 \
                            and labels[ny, nx] == lab:
                        comp[ny, nx] = cid
                        stack.append((ny, nx))
            comps.append((lab, pixels))

    # largest component per label wins; ties to the earlier-discovered one
    keeper = {}
    for cid, (lab, pixels) in enumerate(comps):
        if lab not in keeper or len(pixels) > len(comps[keeper[lab]][1]):
            keeper[lab] = cid

    out = labels.copy()
    sizes = np.bincount(labels.ravel(), minlength=int(labels.max()) + 1)
    for cid, (lab, pixels) in enumerate(comps):
        if cid == keeper[lab]:
            continue
        # absorb into the largest 4-adjacent foreign region
        neighbor_votes = {}
        for y, x in pixels:
            for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if 0 <= ny < h and 0 <= nx < w:
                    nl = out[ny, nx]
                    if nl != lab and comp[ny, nx] != cid:
                        neighbor_votes[nl] = sizes[nl]
        if neighbor_votes:
            target = max(neighbor_votes, key=lambda l: (neighbor_votes[l], -l))
            for y, x in pixels:
                out[y, x] = target
    return out


def _compact_labels(labels: np.ndarray):
    """Relabel to 0..count-1 in raster order of first occurrence."""
    flat = labels.ravel()
    uniq, first = np.unique(flat, return_index=True)
    order = uniq[np.argsort(first)]
    remap = np.empty(int(flat.max()) + 1, dtype=np.int32)
    remap[order] = np.arange(len(order), dtype=np.int32)
    return remap[labels], len(order)


def slic(image: Image, region_size: int = 15, compactness: float = 10.0
         ) -> SuperpixelPartition:
    """Partition a frame into roughly region_size x region_size superpixels."""
    if region_size < 2:
        raise ValueError("region_size must be >= 2")
    if compactness <= 0:
        raise ValueError("compactness must be > 0")
    rgb = image.as_float_rgb()
    h, w = image.height, image.width

    nx = max(1, w // region_size)
    ny = max(1, h // region_size)
    # seeds at cell centers of an nx x ny grid
    sx = (np.arange(nx) + 0.5) * (w / nx) - 0.5
    sy = (np.arange(ny) + 0.5) * (h / ny) - 0.5
    cx, cy = np.meshgrid(sx, sy)
    centers = np.zeros((nx * ny, 5))
    centers[:, 3] = cx.ravel()
    centers[:, 4] = cy.ravel()
    ix = np.clip(np.rint(centers[:, 3]).astype(int), 0, w - 1)
    iy = np.clip(np.rint(centers[:, 4]).astype(int), 0, h - 1)
    centers[:, :3] = rgb[iy, ix]

    ratio2 = (compactness / region_size) ** 2
    window = region_size  # search 2S x 2S around each center
    rgb_c = np.ascontiguousarray(rgb)
    labels = None
    for _ in range(SLIC_ITERS):
        labels = _kernels.slic_assign(rgb_c, centers, ratio2, window)
        if (labels < 0).any():
            # pixels outside every search window: claim by nearest center
            bad = np.argwhere(labels < 0)
            d = (bad[:, 0:1] - centers[None, :, 4]) ** 2 \
                + (bad[:, 1:2] - centers[None, :, 3]) ** 2
            labels[bad[:, 0], bad[:, 1]] = np.argmin(d, axis=1)
        counts, mean_rgb, centroids = _stats(labels, rgb, centers.shape[0])
        occupied = counts > 0
        centers[occupied, :3] = mean_rgb[occupied]
        centers[occupied, 3:] = centroids[occupied]

    labels = _enforce_connectivity(labels.astype(np.int32))
    labels, count = _compact_labels(labels)
    counts, mean_rgb, centroids = _stats(labels, rgb, count)
    return SuperpixelPartition(
        width=w, height=h, labels=labels, count=count,
        pixel_counts=counts, mean_rgb=mean_rgb, centroids=centroids,
    )


def partition_from_labels(labels: np.ndarray, image: Image
                          ) -> SuperpixelPartition:
    """Wrap an existing label map (labels must be 0..count-1, each used)."""
    labels = np.asarray(labels, dtype=np.int32)
    h, w = labels.shape
    if (h, w) != (image.height, image.width):
        raise ValueError("label map and image must share dimensions")
    count = int(labels.max()) + 1
    if len(np.unique(labels)) != count or labels.min() < 0:
        raise ValueError("labels must cover 0..count-1")
    counts, mean_rgb, centroids = _stats(labels, image.as_float_rgb(), count)
    return SuperpixelPartition(width=w, height=h, labels=labels, count=count,
                               pixel_counts=counts, mean_rgb=mean_rgb,
                               centroids=centroids)


def region_adjacency(p: SuperpixelPartition) -> dict:
    """Unordered adjacent region pairs -> shared 4-boundary length."""
    pairs = {}
    for a, b in (
        (p.labels[:, :-1].ravel(), p.labels[:, 1:].ravel()),
        (p.labels[:-1, :].ravel(), p.labels[1:, :].ravel()),
    ):
        diff = a != b
        lo = np.minimum(a[diff], b[diff]).astype(np.int64)
        hi = np.maximum(a[diff], b[diff]).astype(np.int64)
        codes, counts = np.unique(lo * p.count + hi, return_counts=True)
        for code, n in zip(codes, counts):
            key = (int(code // p.count), int(code % p.count))
            pairs[key] = pairs.get(key, 0) + int(n)
    return pairs
