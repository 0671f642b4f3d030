"""Grayscale image loading, gray-level normalization, and b-spline resizing.

Canonical in-memory form is :class:`GrayImage`: an 8-bit image with an
explicit gray-level depth of 256. All downstream texture analysis consumes
this type. Maps of real values (feature maps, saliency maps) use
:class:`FloatMap`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

__all__ = [
    "GrayImage",
    "FloatMap",
    "UnreadableImageError",
    "UnsupportedImageFormatError",
    "NonGrayscaleImageError",
    "load_image",
    "save_png",
    "normalize_levels",
    "resize_bspline",
]

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class UnreadableImageError(OSError):
    """File is missing, unreadable, or truncated."""


class UnsupportedImageFormatError(ValueError):
    """File is readable but not an 8-bit grayscale PNG or binary PGM."""


class NonGrayscaleImageError(ValueError):
    """Image decodes but carries more than one channel."""


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image. ``pixels`` is (height, width), row-major."""

    pixels: np.ndarray
    depth: int = 256

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2D array")
        if self.depth < 2 or self.depth > 256:
            raise ValueError("depth must be in [2, 256]")
        if px.max(initial=0) >= self.depth:
            raise ValueError("pixel value exceeds depth")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class FloatMap:
    """Image-sized map of finite real values, (height, width) row-major."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("values must be a non-empty 2D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _load_pgm(data: bytes, path: str) -> GrayImage:
    # Binary PGM (P5): ASCII header with whitespace/comments, then raw bytes.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnreadableImageError(f"{path}: truncated PGM header")
        fields.append(data[start:pos])
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise UnreadableImageError(f"{path}: malformed PGM header") from None
    if maxval > 255:
        raise UnsupportedImageFormatError(f"{path}: PGM maxval {maxval} exceeds 8 bits")
    if width < 1 or height < 1 or maxval < 1:
        raise UnreadableImageError(f"{path}: malformed PGM header")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + width * height]
    if len(raster) < width * height:
        raise UnreadableImageError(f"{path}: truncated PGM raster")
    px = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(px)


def _load_png(data: bytes, path: str) -> GrayImage:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableImageError(f"{path}: {exc}") from None
    if img.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise UnsupportedImageFormatError(
            f"{path}: {img.mode} PNG not supported, expected 8-bit grayscale"
        )
    if img.mode != "L":
        raise NonGrayscaleImageError(f"{path}: non-grayscale input (mode {img.mode})")
    return GrayImage(np.asarray(img, dtype=np.uint8))


def load_image(path) -> GrayImage:
    """Load an 8-bit grayscale PNG or binary PGM (P5) file.

    Pixel values are copied verbatim; the result always has depth 256.
    Raises :class:`UnreadableImageError`, :class:`UnsupportedImageFormatError`
    or :class:`NonGrayscaleImageError`, each reported distinctly.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UnreadableImageError(f"{path}: {exc}") from None
    if data.startswith(_PNG_MAGIC):
        return _load_png(data, str(path))
    if data.startswith(b"P5"):
        return _load_pgm(data, str(path))
    raise UnsupportedImageFormatError(
        f"{path}: unsupported format, expected 8-bit grayscale PNG or binary PGM"
    )


def save_png(img: GrayImage, path) -> None:
    Image.fromarray(img.pixels, mode="L").save(path, format="PNG")


def normalize_levels(img: GrayImage) -> GrayImage:
    """Min-max rescale pixel values onto [0, 255].

    Rounding is half-away-from-zero, computed in exact integer arithmetic.
    Constant images map to all-zero; output depth is always 256.
    """
    px = img.pixels.astype(np.int64)
    lo = int(px.min())
    hi = int(px.max())
    if hi == lo:
        return GrayImage(np.zeros_like(img.pixels))
    span = hi - lo
    # round(255*d/span) half-up for nonnegative d, without float arithmetic
    out = (510 * (px - lo) + span) // (2 * span)
    return GrayImage(out.astype(np.uint8))


def _sample_coords(n_in: int, n_out: int) -> np.ndarray:
    # align-centers convention: src = (dst + 0.5) * (in/out) - 0.5
    return (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5


def resize_bspline(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Resize with interpolating cubic b-splines (separable prefilter).

    Sample coordinates follow the align-centers convention
    ``src = (dst + 0.5) * (in/out) - 0.5``; boundaries are handled by mirror
    reflection (no edge repeat). The interpolated result is clamped to
    [0, 255] and rounded half-away-from-zero.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError("zero-size target")
    src = img.pixels.astype(np.float64)
    in_h, in_w = src.shape
    if in_h == 1 and in_w == 1:
        vals = np.full((out_h, out_w), src[0, 0])
    elif in_h == 1 or in_w == 1:
        # Constant along the singleton axis: interpolate the 1D profile.
        line = src.ravel()
        n_in = line.size
        n_out = out_w if in_h == 1 else out_h
        coords = _sample_coords(n_in, n_out)[np.newaxis, :]
        prof = ndimage.map_coordinates(
            line[np.newaxis, :].repeat(2, axis=0),
            np.vstack([np.zeros((1, n_out)), coords]),
            order=3,
            mode="mirror",
            prefilter=True,
        )
        vals = np.tile(prof, (out_h, 1)) if in_h == 1 else np.tile(prof[:, np.newaxis], (1, out_w))
    else:
        ys = _sample_coords(in_h, out_h)
        xs = _sample_coords(in_w, out_w)
        gy, gx = np.meshgrid(ys, xs, indexing="ij")
        vals = ndimage.map_coordinates(
            src, np.stack([gy, gx]), order=3, mode="mirror", prefilter=True
        )
    out = np.floor(np.clip(vals, 0.0, 255.0) + 0.5)
    return GrayImage(np.clip(out, 0, 255).astype(np.uint8))
