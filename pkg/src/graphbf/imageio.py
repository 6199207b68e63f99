"""Grayscale image I/O, synthetic white noise and SNR measurement.

Intensities live in [0, 1] after loading. Noise is added to the real-valued
signal without clipping; clipping and 8-bit quantization only happen in
:func:`save_image`.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

__all__ = [
    "ImageFormatError",
    "ImageGrid",
    "NoiseSpec",
    "load_image",
    "save_image",
    "add_white_noise",
    "snr_db",
    "calibrate_noise_to_snr",
    "crop",
]


class ImageFormatError(ValueError):
    """Raised for files that are not 8-bit grayscale PGM (P5) or PNG."""


@dataclass(frozen=True)
class ImageGrid:
    """Immutable height x width grid of real intensities.

    ``data`` is stored row-major as a read-only float64 array, so
    ``data.ravel()`` is the graph signal with node index ``row * width + col``.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"image data must be a non-empty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def signal(self) -> np.ndarray:
        """Flattened copy of the intensities (the graph signal)."""
        return self.data.ravel().copy()

    @classmethod
    def from_signal(cls, x: np.ndarray, shape: tuple[int, int]) -> "ImageGrid":
        return cls(np.asarray(x, dtype=np.float64).reshape(shape))


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"noise sigma must be finite and >= 0, got {self.sigma}")


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # PNM header tokens are whitespace separated; '#' starts a comment line
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PGM header")
    return buf[start:pos], pos


def _load_pgm(raw: bytes) -> np.ndarray:
    magic, pos = _read_token(raw, 0)
    if magic != b"P5":
        raise ImageFormatError(f"only binary PGM (P5) is supported, got magic {magic!r}")
    try:
        tok, pos = _read_token(raw, pos)
        width = int(tok)
        tok, pos = _read_token(raw, pos)
        height = int(tok)
        tok, pos = _read_token(raw, pos)
        maxval = int(tok)
    except ValueError as exc:
        raise ImageFormatError(f"malformed PGM header: {exc}") from None
    if maxval != 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}; only 8-bit (255) is supported")
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"invalid PGM dimensions {width}x{height}")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    pixels = raw[pos:pos + width * height]
    if len(pixels) != width * height:
        raise ImageFormatError("PGM raster is shorter than width*height")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def _load_png(path: str) -> np.ndarray:
    with Image.open(path) as im:
        if im.format != "PNG":
            raise ImageFormatError(f"{path}: expected PNG data, found {im.format}")
        if im.mode != "L":
            raise ImageFormatError(
                f"{path}: only 8-bit grayscale PNG is supported, got mode {im.mode!r}"
            )
        return np.asarray(im, dtype=np.uint8)


def load_image(path: str | os.PathLike) -> ImageGrid:
    """Read an 8-bit grayscale PGM (P5) or PNG and map bytes linearly to [0, 1].

    The format is detected from the file signature, not the extension.

    Raises
    ------
    ImageFormatError
        If the file is neither format, or is color / not 8-bit.
    OSError
        If the file cannot be read.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] in (b"P5", b"P2", b"P6", b"P3"):
        u8 = _load_pgm(raw)
    elif raw[:8] == b"\x89PNG\r\n\x1a\n":
        u8 = _load_png(path)
    else:
        raise ImageFormatError(f"{path}: not a PGM (P5) or PNG file")
    return ImageGrid(u8.astype(np.float64) / 255.0)


def quantize(data: np.ndarray) -> np.ndarray:
    """Clip to [0, 1] and round half-up onto 0..255."""
    clipped = np.clip(np.asarray(data, dtype=np.float64), 0.0, 1.0)
    return np.floor(clipped * 255.0 + 0.5).astype(np.uint8)


def save_image(img: ImageGrid, path: str | os.PathLike) -> None:
    """Write ``img`` as P5 PGM (``.pgm``) or 8-bit grayscale PNG (``.png``)."""
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    u8 = quantize(img.data)
    if ext == ".pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(u8.tobytes())
    elif ext == ".png":
        Image.fromarray(u8, mode="L").save(path, format="PNG")
    else:
        raise ImageFormatError(f"cannot infer output format from extension {ext!r} (use .pgm or .png)")


def crop(img: ImageGrid, x: int, y: int, w: int, h: int) -> ImageGrid:
    """Sub-block with top-left corner at column ``x``, row ``y``."""
    if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > img.width or y + h > img.height:
        raise ValueError(
            f"crop {x},{y},{w},{h} does not fit inside a {img.width}x{img.height} image"
        )
    return ImageGrid(img.data[y:y + h, x:x + w])


def add_white_noise(img: ImageGrid, spec: NoiseSpec) -> ImageGrid:
    """Add i.i.d. zero-mean Gaussian noise with standard deviation ``spec.sigma``.

    Samples come from numpy's PCG64 bit generator seeded with ``spec.seed``
    (``numpy.random.default_rng``), so equal seeds give bit-identical output
    on a given numpy version. The result is not clipped.
    """
    if spec.sigma == 0:
        return ImageGrid(img.data)
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.sigma, size=img.shape)
    return ImageGrid(img.data + noise)


def snr_db(reference: ImageGrid, test: ImageGrid) -> float:
    """Energy-ratio SNR ``10 log10(sum(ref^2) / sum((ref - test)^2))``.

    Returns ``math.inf`` when the two images are identical.
    """
    if reference.shape != test.shape:
        raise ValueError(f"dimension mismatch: {reference.shape} vs {test.shape}")
    signal = float(np.sum(reference.data ** 2))
    error = float(np.sum((reference.data - test.data) ** 2))
    if error == 0.0:
        return math.inf
    if signal == 0.0:
        return -math.inf
    return 10.0 * math.log10(signal / error)


def sigma_for_snr(img: ImageGrid, target_snr: float) -> float:
    """Noise standard deviation whose expected energy gives ``target_snr`` dB."""
    if not math.isfinite(target_snr):
        raise ValueError(f"target SNR must be finite, got {target_snr}")
    mean_energy = float(np.mean(img.data ** 2))
    if mean_energy == 0.0:
        raise ValueError("cannot calibrate noise on an all-zero image")
    return math.sqrt(mean_energy / 10.0 ** (target_snr / 10.0))


def calibrate_noise_to_snr(img: ImageGrid, target_snr: float, seed: int = 0) -> ImageGrid:
    return add_white_noise(img, NoiseSpec(sigma_for_snr(img, target_snr), seed))
