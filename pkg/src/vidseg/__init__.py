"""vidseg: segmentation annotations for weakly labeled videos.

Per-frame object masks are obtained by an attention-guided spatio-temporal
graph cut over superpixels, combining classifier attention, flow-based
motion evidence, and color appearance models. The package also simulates
the web-video retrieval filter over a local manifest, evaluates masks by
mIoU, and exports (attention, mask) training pairs.
"""

from ._kernels import COMPILED as HAVE_COMPILED_KERNELS

__version__ = "0.1.0"

__all__ = ["HAVE_COMPILED_KERNELS", "__version__"]
