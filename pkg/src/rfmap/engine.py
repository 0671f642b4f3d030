"""Sliding-kernel feature map extraction.

The image is quantized once (global min/max), mirror-padded by the kernel
radius, and every pixel receives the 37 features of its k x k window.
Two interchangeable backends share a per-row contract: the compiled
extension when built, a vectorized numpy fallback otherwise. Both are
checked against oracle_extract, a naive per-window recomputation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernel_py
from .features import FEATURE_NAMES, QuantizedPatch, feature_vector, quantize
from .imaging import FloatMap, GrayImage

try:
    from . import _kernel
except ImportError:
    _kernel = None

__all__ = ["RfmConfig", "FeatureMapStack", "extract_maps", "oracle_extract", "active_backend"]


@dataclass(frozen=True)
class RfmConfig:
    """Extraction settings: window side, gray levels, feature subset."""

    kernel: int = 13
    ng: int = 32
    features: tuple = None

    def __post_init__(self):
        if self.kernel < 3 or self.kernel % 2 == 0:
            raise ValueError("kernel must be odd and at least 3")
        if self.ng < 2:
            raise ValueError("ng must be at least 2")
        if self.features is not None:
            bad = [f for f in self.features if f not in FEATURE_NAMES]
            if bad:
                raise ValueError(f"unknown features: {', '.join(bad)}")
            ordered = tuple(f for f in FEATURE_NAMES if f in set(self.features))
            object.__setattr__(self, "features", ordered)

    @property
    def selected(self) -> tuple:
        return FEATURE_NAMES if self.features is None else self.features


@dataclass(frozen=True)
class FeatureMapStack:
    """Named per-feature maps sharing the source image dimensions."""

    names: tuple
    data: np.ndarray  # (len(names), height, width) float64

    def __post_init__(self):
        d = np.ascontiguousarray(self.data, dtype=np.float64)
        if d.ndim != 3 or d.shape[0] != len(self.names):
            raise ValueError("data must be (len(names), height, width)")
        if not np.all(np.isfinite(d)):
            raise ValueError("non-finite map value")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def __getitem__(self, name: str) -> FloatMap:
        return FloatMap(self.data[self.names.index(name)])

    def items(self):
        return [(n, FloatMap(self.data[i])) for i, n in enumerate(self.names)]


def active_backend(backend=None) -> str:
    """Resolve which backend extract_maps will use.

    Explicit argument wins, then the RFMAP_BACKEND environment variable
    ("compiled" or "python"), then the compiled extension if it imported.
    """
    choice = backend or os.environ.get("RFMAP_BACKEND", "auto")
    if choice not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown backend {choice!r}")
    if choice == "compiled" and _kernel is None:
        raise RuntimeError("compiled backend requested but extension not built")
    if choice == "auto":
        return "compiled" if _kernel is not None else "python"
    return choice


def _padded_levels(img: GrayImage, cfg: RfmConfig) -> np.ndarray:
    q = quantize(img, cfg.ng)
    r = (cfg.kernel - 1) // 2
    return np.pad(q.levels, r, mode="reflect")


def _select(out: np.ndarray, cfg: RfmConfig) -> FeatureMapStack:
    stack = np.moveaxis(out, 2, 0)  # (37, H, W)
    names = cfg.selected
    if len(names) != len(FEATURE_NAMES):
        idx = [FEATURE_NAMES.index(n) for n in names]
        stack = stack[idx]
    return FeatureMapStack(names=names, data=stack)


def extract_maps(img: GrayImage, cfg: RfmConfig = RfmConfig(), threads: int = 1,
                 backend=None) -> FeatureMapStack:
    """Compute the selected feature maps for every pixel of img.

    Rows are computed independently, so the output is bitwise identical for
    any thread count.
    """
    impl = _kernel if active_backend(backend) == "compiled" else _kernel_py
    padded = np.ascontiguousarray(_padded_levels(img, cfg), dtype=np.int32)
    h, w = img.pixels.shape
    out = np.empty((h, w, len(FEATURE_NAMES)), dtype=np.float64)
    threads = max(1, min(int(threads), h))
    if threads == 1:
        impl.run_band(padded, 0, h, cfg.kernel, cfg.ng, out)
    else:
        bounds = np.linspace(0, h, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [
                pool.submit(impl.run_band, padded, int(y0), int(y1), cfg.kernel, cfg.ng, out)
                for y0, y1 in zip(bounds[:-1], bounds[1:])
                if y1 > y0
            ]
            for f in futs:
                f.result()
    return _select(out, cfg)


def oracle_extract(img: GrayImage, cfg: RfmConfig = RfmConfig()) -> FeatureMapStack:
    """Reference implementation: full per-window recomputation.

    Deliberately simple and slow; extract_maps must match it within 1e-12
    per pixel on every feature map.
    """
    k = cfg.kernel
    padded = _padded_levels(img, cfg)
    h, w = img.pixels.shape
    out = np.empty((h, w, len(FEATURE_NAMES)), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            patch = QuantizedPatch(padded[y : y + k, x : x + k], cfg.ng)
            out[y, x, :] = feature_vector(patch).as_array()
    return _select(out, cfg)
