"""Hot-loop kernels: compiled extension when available, numpy fallback otherwise.

Set the environment variable ``VIDSEG_NO_EXT=1`` to force the fallback
(used by the kernel benchmark and the equivalence tests).
"""

import os

from . import _py

if os.environ.get("VIDSEG_NO_EXT"):
    _impl = _py
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _py

COMPILED = _impl.COMPILED
slic_assign = _impl.slic_assign
inside_outside = _impl.inside_outside
blockmatch = _impl.blockmatch
MaxFlow = _impl.MaxFlow
