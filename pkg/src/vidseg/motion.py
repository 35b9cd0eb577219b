"""Motion evidence: flow-gradient boundaries, an inside-outside map built by
ray casting against those boundaries, and its per-region aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .raster_io import FlowField
from .superpixel import SuperpixelPartition

LAMBDA_B = 0.5  # flow-gradient magnitude scaling in the boundary response


@dataclass
class InsideOutsideMap:
    width: int
    height: int
    inside_prob: np.ndarray  # float32 in [0,1], shape (height, width)


def motion_boundary(flow: FlowField, theta_b: float = 0.5,
                    lambda_b: float = LAMBDA_B) -> np.ndarray:
    """Binary boundary map: 1 - exp(-lambda_b * ||J||_F) > theta_b, with J
    the 2x2 flow Jacobian by central differences (one-sided at borders)."""
    if theta_b <= 0:
        raise ValueError("theta_b must be > 0")
    du_dy, du_dx = np.gradient(flow.u.astype(np.float64))
    dv_dy, dv_dx = np.gradient(flow.v.astype(np.float64))
    frob = np.sqrt(du_dx**2 + du_dy**2 + dv_dx**2 + dv_dy**2)
    response = 1.0 - np.exp(-lambda_b * frob)
    return (response > theta_b).astype(np.uint8)


def inside_outside(boundary: np.ndarray) -> InsideOutsideMap:
    """Cast 8 axis/diagonal rays per non-boundary pixel; the inside
    probability is the fraction of rays that hit a boundary pixel before
    leaving the image. Boundary pixels score 1."""
    prob = _kernels.inside_outside(np.ascontiguousarray(boundary,
                                                        dtype=np.uint8))
    h, w = boundary.shape
    return InsideOutsideMap(width=w, height=h,
                            inside_prob=prob.astype(np.float32))


def motion_term(iom: InsideOutsideMap, p: SuperpixelPartition) -> np.ndarray:
    """Per-region mean inside probability, in [0,1]."""
    if (iom.width, iom.height) != (p.width, p.height):
        raise ValueError("map and partition must share dimensions")
    sums = np.bincount(p.labels.ravel(),
                       weights=iom.inside_prob.astype(np.float64).ravel(),
                       minlength=p.count)
    return sums / p.pixel_counts
