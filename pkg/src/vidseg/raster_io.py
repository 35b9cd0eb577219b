"""Bit-exact readers/writers for the on-disk artifacts.

Formats: binary netpbm (P5/P6) for frames and masks, Middlebury .flo for
optical flow, and a minimal "TNSR" container for float32 tensors (feature
maps, classifier weights, score vectors). All multi-byte values are
little-endian; writers emit a single canonical byte layout so that
write(read(f)) round-trips are byte-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLO_MAGIC = b"PIEH"
TNSR_MAGIC = b"TNSR"

# 2**31 elements is far beyond anything this pipeline handles; the cap lets
# readers reject absurd dims before allocating.
_MAX_ELEMENTS = 2**31


class RasterFormatError(ValueError):
    """Malformed or unsupported file content."""


class RasterTruncationError(RasterFormatError):
    """File ended before the declared payload was complete."""


@dataclass
class Image:
    """8-bit raster, grayscale (1 channel) or RGB (3 channels)."""

    width: int
    height: int
    channels: int
    data: np.ndarray  # uint8, shape (height, width, channels)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        if self.data.shape != (self.height, self.width, self.channels):
            raise ValueError("data shape does not match declared dimensions")

    def as_float_rgb(self) -> np.ndarray:
        """Pixels as float64 RGB in [0,1], shape (h, w, 3)."""
        rgb = self.data.astype(np.float64) / 255.0
        if self.channels == 1:
            rgb = np.repeat(rgb, 3, axis=2)
        return rgb


@dataclass
class SegmentationMask:
    """Binary per-pixel mask; 0 = background, 1 = foreground."""

    width: int
    height: int
    values: np.ndarray  # uint8 in {0,1}, shape (height, width)

    def __post_init__(self):
        if self.values.shape != (self.height, self.width):
            raise ValueError("mask shape does not match declared dimensions")
        bad = ~np.isin(self.values, (0, 1))
        if bad.any():
            raise ValueError("mask values must be 0 or 1")


@dataclass
class FlowField:
    """Dense per-pixel displacement; +x right, +y down, in pixels."""

    width: int
    height: int
    u: np.ndarray  # float32, shape (height, width)
    v: np.ndarray  # float32, shape (height, width)

    def __post_init__(self):
        shape = (self.height, self.width)
        if self.u.shape != shape or self.v.shape != shape:
            raise ValueError("flow component shape does not match dimensions")
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise ValueError("flow values must be finite")


@dataclass
class Tensor:
    """N-dimensional float32 grid, 1 to 4 dims, row-major."""

    dims: tuple
    data: np.ndarray  # float32, shape == dims

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if not 1 <= len(self.dims) <= 4:
            raise ValueError("tensor rank must be 1..4")
        if any(d < 1 for d in self.dims):
            raise ValueError("tensor dims must be >= 1")
        if self.data.shape != self.dims:
            raise ValueError("data shape does not match dims")
        if not np.isfinite(self.data).all():
            raise ValueError("tensor values must be finite")


# ---------------------------------------------------------------------------
# netpbm (P5 / P6)

def _parse_pnm_header(buf: bytes, path):
    """Parse magic, width, height, maxval; returns (magic, w, h, maxval, offset)."""
    if len(buf) < 2:
        raise RasterFormatError(f"{path}: empty or too short for a netpbm header")
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise RasterFormatError(f"{path}: bad magic {magic!r} at byte 0")
    pos = 2
    fields = []
    while len(fields) < 3:
        # skip whitespace and '#' comments
        while pos < len(buf):
            c = buf[pos : pos + 1]
            if c.isspace():
                pos += 1
            elif c == b"#":
                while pos < len(buf) and buf[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(buf) and buf[pos : pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise RasterFormatError(f"{path}: expected integer at byte {start}")
        fields.append(int(buf[start:pos]))
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise RasterFormatError(
            f"{path}: expected single whitespace after maxval at byte {pos}"
        )
    pos += 1
    w, h, maxval = fields
    if w < 1 or h < 1:
        raise RasterFormatError(f"{path}: dimensions must be >= 1, got {w}x{h}")
    return magic, w, h, maxval, pos


def read_netpbm(path) -> Image:
    """Read a binary P5 (gray) or P6 (RGB) file with maxval 255."""
    buf = Path(path).read_bytes()
    magic, w, h, maxval, pos = _parse_pnm_header(buf, path)
    if maxval != 255:
        raise RasterFormatError(f"{path}: maxval must be 255, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    n = w * h * channels
    payload = buf[pos : pos + n]
    if len(payload) < n:
        raise RasterTruncationError(
            f"{path}: payload has {len(payload)} bytes, expected {n}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(h, w, channels).copy()
    return Image(width=w, height=h, channels=channels, data=data)


def write_netpbm(image: Image, path) -> None:
    magic = b"P5" if image.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (image.width, image.height)
    Path(path).write_bytes(header + image.data.tobytes())


def read_mask(path) -> SegmentationMask:
    """Read a P5 mask with values {0, 255}; 255 maps to label 1."""
    img = read_netpbm(path)
    if img.channels != 1:
        raise RasterFormatError(f"{path}: masks must be P5 grayscale")
    raw = img.data[:, :, 0]
    bad = ~np.isin(raw, (0, 255))
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise RasterFormatError(
            f"{path}: mask pixel ({x},{y}) has value {raw[y, x]}, expected 0 or 255"
        )
    return SegmentationMask(img.width, img.height, (raw == 255).astype(np.uint8))


def write_mask(mask: SegmentationMask, path) -> None:
    img = Image(
        mask.width, mask.height, 1, (mask.values * np.uint8(255))[:, :, None]
    )
    write_netpbm(img, path)


def read_gt_mask(path) -> np.ndarray:
    """Read a ground-truth P5 mask with PASCAL-style values: 0 background,
    1 foreground, 255 unlabeled (excluded from evaluation)."""
    img = read_netpbm(path)
    if img.channels != 1:
        raise RasterFormatError(f"{path}: ground truth must be P5 grayscale")
    raw = img.data[:, :, 0]
    bad = ~np.isin(raw, (0, 1, 255))
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise RasterFormatError(
            f"{path}: ground-truth pixel ({x},{y}) has value {raw[y, x]}, "
            "expected 0, 1, or 255"
        )
    return raw.copy()


def write_gt_mask(values: np.ndarray, path) -> None:
    h, w = values.shape
    write_netpbm(Image(w, h, 1, values.astype(np.uint8)[:, :, None]), path)


def read_label_map(path) -> np.ndarray:
    """Read a u16 label map stored as P5 with maxval 65535 (big-endian samples)."""
    buf = Path(path).read_bytes()
    magic, w, h, maxval, pos = _parse_pnm_header(buf, path)
    if magic != b"P5" or maxval != 65535:
        raise RasterFormatError(f"{path}: expected P5 with maxval 65535")
    n = w * h * 2
    payload = buf[pos : pos + n]
    if len(payload) < n:
        raise RasterTruncationError(
            f"{path}: payload has {len(payload)} bytes, expected {n}"
        )
    return np.frombuffer(payload, dtype=">u2").reshape(h, w).astype(np.uint16)


def write_label_map(labels: np.ndarray, path) -> None:
    h, w = labels.shape
    if labels.max(initial=0) > 65535:
        raise ValueError("label map exceeds u16 range")
    header = b"P5\n%d %d\n65535\n" % (w, h)
    Path(path).write_bytes(header + labels.astype(">u2").tobytes())


# ---------------------------------------------------------------------------
# Middlebury .flo

def read_flo(path) -> FlowField:
    buf = Path(path).read_bytes()
    if len(buf) < 12:
        raise RasterTruncationError(f"{path}: shorter than .flo header")
    if buf[:4] != FLO_MAGIC:
        raise RasterFormatError(f"{path}: bad magic {buf[:4]!r}")
    w, h = struct.unpack("<ii", buf[4:12])
    if w <= 0 or h <= 0:
        raise RasterFormatError(f"{path}: non-positive dimensions {w}x{h}")
    n = w * h * 2
    if n > _MAX_ELEMENTS:
        raise RasterFormatError(f"{path}: dims {w}x{h} exceed element cap")
    payload = buf[12 : 12 + 4 * n]
    if len(payload) < 4 * n:
        raise RasterTruncationError(
            f"{path}: payload has {len(payload)} bytes, expected {4 * n}"
        )
    uv = np.frombuffer(payload, dtype="<f4").reshape(h, w, 2)
    if not np.isfinite(uv).all():
        raise RasterFormatError(f"{path}: non-finite flow values")
    return FlowField(w, h, uv[:, :, 0].copy(), uv[:, :, 1].copy())


def write_flo(flow: FlowField, path) -> None:
    uv = np.stack([flow.u, flow.v], axis=2).astype("<f4")
    header = FLO_MAGIC + struct.pack("<ii", flow.width, flow.height)
    Path(path).write_bytes(header + uv.tobytes())


# ---------------------------------------------------------------------------
# TNSR container

def read_tensor(path) -> Tensor:
    buf = Path(path).read_bytes()
    if len(buf) < 8:
        raise RasterTruncationError(f"{path}: shorter than TNSR header")
    if buf[:4] != TNSR_MAGIC:
        raise RasterFormatError(f"{path}: bad magic {buf[:4]!r}")
    (ndims,) = struct.unpack("<I", buf[4:8])
    if not 1 <= ndims <= 4:
        raise RasterFormatError(f"{path}: rank {ndims} outside 1..4")
    if len(buf) < 8 + 4 * ndims:
        raise RasterTruncationError(f"{path}: truncated dims field")
    dims = struct.unpack("<%dI" % ndims, buf[8 : 8 + 4 * ndims])
    n = 1
    for d in dims:
        if d < 1:
            raise RasterFormatError(f"{path}: dim {d} must be >= 1")
        n *= d
        if n > _MAX_ELEMENTS:
            raise RasterFormatError(f"{path}: dims product exceeds element cap")
    pos = 8 + 4 * ndims
    payload = buf[pos : pos + 4 * n]
    if len(payload) < 4 * n:
        raise RasterTruncationError(
            f"{path}: payload has {len(payload)} bytes, expected {4 * n}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    return Tensor(dims=dims, data=data)


def write_tensor(tensor: Tensor, path) -> None:
    header = TNSR_MAGIC + struct.pack("<I", len(tensor.dims))
    header += struct.pack("<%dI" % len(tensor.dims), *tensor.dims)
    Path(path).write_bytes(header + tensor.data.astype("<f4").tobytes())
