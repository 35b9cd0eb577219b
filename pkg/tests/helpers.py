import numpy as np

from vidseg.raster_io import Image


def gray_image(values: np.ndarray) -> Image:
    values = np.asarray(values, dtype=np.uint8)
    h, w = values.shape
    return Image(w, h, 1, values[:, :, None])


def rgb_image(values: np.ndarray) -> Image:
    values = np.asarray(values, dtype=np.uint8)
    h, w, _ = values.shape
    return Image(w, h, 3, values)
