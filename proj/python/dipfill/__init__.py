"""Single-image gap filling for multi-band rasters via a deep image prior.

The heavy lifting lives in the `_dipfill` extension module; this package
re-exports its surface and adds a couple of numpy conveniences.
"""

try:
    from ._dipfill import *  # noqa: F401,F403  (wheel layout)
    from . import _dipfill as _impl
except ImportError:  # pragma: no cover - plain cmake build layout
    from _dipfill import *  # noqa: F401,F403
    import _dipfill as _impl

__version__ = "0.1.0"


def restore_array(values, observed, config=None, mode="composite",
                  output_mode="full", seed=0, log_progress=False):
    """Gap-fill a (bands, H, W) float array given a (H, W) observed-mask.

    Returns (restored array, list of (label, losses) traces).
    """
    import numpy as np

    raster = _impl.Raster(np.ascontiguousarray(values, dtype=np.float64))
    mask = _impl.GapMask(np.ascontiguousarray(observed, dtype=bool))
    if config is None:
        config = _impl.HourglassConfig.reference()
    restored, traces = _impl.restore(raster, mask, config, mode, output_mode,
                                     seed, log_progress)
    return restored.to_numpy(), traces
