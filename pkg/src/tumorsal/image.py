"""Grayscale raster types and 8-bit image I/O.

Supported on disk: PGM (binary P5 and ASCII P2) and 8-bit grayscale PNG.
Intensities live in [0, 1] in memory; a file byte v maps to v/255 on load
and an intensity maps to round-half-up(v*255) on save, so a save/load
round trip moves any pixel by at most 1/510.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "GrayImage",
    "BinaryMask",
    "MAX_QUANT_ERROR",
    "quantize_to_byte",
    "load_image",
    "save_image",
    "load_mask",
    "save_mask",
]

# Worst-case save->load error: half of one 8-bit quantization step.
MAX_QUANT_ERROR = 1.0 / 510.0

_MASK_THRESHOLD = 128  # byte >= 128 counts as foreground


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D grid of intensities in [0, 1], row-major."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("zero-sized image")
        if float(px.min()) < 0.0 or float(px.max()) > 1.0:
            raise ValueError("intensities outside [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """2-D boolean raster, row-major; used for ground truth and binarized maps."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=bool)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("zero-sized mask")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def quantize_to_byte(values: np.ndarray | float) -> np.ndarray:
    """Map [0, 1] intensities to bytes with round-half-up, clipped to 0..255."""
    v = np.asarray(values, dtype=np.float64)
    return np.clip(np.floor(v * 255.0 + 0.5), 0, 255).astype(np.uint8)


def _read_pgm(raw: bytes, path: Path) -> np.ndarray:
    """Parse P2/P5 bytes into a uint8 array. Comments (#...) are allowed."""
    magic = raw[:2]

    def tokens():
        i = 2
        while i < len(raw):
            c = raw[i : i + 1]
            if c == b"#":
                while i < len(raw) and raw[i : i + 1] not in (b"\n", b"\r"):
                    i += 1
            elif c.isspace():
                i += 1
            else:
                j = i
                while j < len(raw) and not raw[j : j + 1].isspace():
                    j += 1
                yield raw[i:j], j
                i = j

    header = []
    data_start = len(raw)
    for tok, end in tokens():
        header.append(int(tok))
        if len(header) == 3:
            data_start = end + 1  # single whitespace byte after maxval
            break
    if len(header) != 3:
        raise ValueError(f"unsupported format: truncated PGM header in {path}")
    width, height, maxval = header
    if width <= 0 or height <= 0:
        raise ValueError("zero-sized image")
    if not 0 < maxval <= 255:
        raise ValueError(f"unsupported format: PGM maxval {maxval} is not 8-bit")

    if magic == b"P5":
        data = np.frombuffer(raw[data_start : data_start + width * height], dtype=np.uint8)
        if data.size != width * height:
            raise ValueError(f"unsupported format: short pixel data in {path}")
    else:  # P2
        ascii_vals = raw[data_start - 1 :].split()
        if len(ascii_vals) < width * height:
            raise ValueError(f"unsupported format: short pixel data in {path}")
        data = np.array([int(t) for t in ascii_vals[: width * height]], dtype=np.uint8)
    return data.reshape(height, width)


def _load_bytes(path: str | Path) -> np.ndarray:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] in (b"P2", b"P5"):
        return _read_pgm(raw, path)
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise ValueError(f"unsupported format: {path}") from exc
    if img.mode == "1":
        img = img.convert("L")
    if img.mode != "L":
        raise ValueError(f"unsupported format: {path} is not 8-bit grayscale")
    if img.width == 0 or img.height == 0:
        raise ValueError("zero-sized image")
    return np.asarray(img, dtype=np.uint8)


def load_image(path: str | Path) -> GrayImage:
    """Load an 8-bit grayscale PGM/PNG file; bytes map to v/255."""
    return GrayImage(_load_bytes(path) / 255.0)


def load_mask(path: str | Path) -> BinaryMask:
    """Load a grayscale file as a mask: pixel true iff byte >= 128."""
    return BinaryMask(_load_bytes(path) >= _MASK_THRESHOLD)


def _write_bytes(data: np.ndarray, path: Path) -> None:
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii")
        path.write_bytes(header + data.tobytes())
    elif suffix == ".png":
        Image.fromarray(data, mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported format: cannot write {suffix or path.name}")


def save_image(img: GrayImage, path: str | Path) -> None:
    """Write as 8-bit grayscale; format chosen by extension (.pgm or .png)."""
    _write_bytes(quantize_to_byte(img.pixels), Path(path))


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    """Write a mask as 8-bit grayscale with foreground 255 and background 0."""
    _write_bytes(np.where(mask.pixels, 255, 0).astype(np.uint8), Path(path))
