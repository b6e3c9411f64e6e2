"""Grayscale image I/O.

Inputs: binary PGM (P5, maxval 255) and PNG; color PNG is converted with
Rec. 601 luma and the conversion is logged. Exact float values travel
between pipeline stages in a raw little-endian float32 sidecar with a
16-byte header: magic "PRF1", u32 width, u32 height, 4 pad bytes.
"""

from __future__ import annotations

import logging
import os
import struct

import numpy as np

log = logging.getLogger(__name__)

SIDECAR_MAGIC = b"PRF1"
SIDECAR_EXT = ".prf1"


class ImageIOError(IOError):
    """Unreadable, malformed, or unsupported image file."""


def _to_unit(arr8: np.ndarray) -> np.ndarray:
    return arr8.astype(float) / 255.0


def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ImageIOError(f"{path}: not a binary PGM (P5) file")
    # header tokens: magic, width, height, maxval; # comments allowed
    tokens = []
    i = 2
    while len(tokens) < 3:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise ImageIOError(f"{path}: truncated PGM header")
        tokens.append(data[i:j])
        i = j
    i += 1  # single whitespace after maxval
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageIOError(f"{path}: malformed PGM header") from None
    if maxval != 255:
        raise ImageIOError(f"{path}: only maxval 255 PGM supported, got {maxval}")
    raster = data[i : i + w * h]
    if len(raster) != w * h:
        raise ImageIOError(f"{path}: PGM raster truncated")
    return _to_unit(np.frombuffer(raster, dtype=np.uint8).reshape(h, w))


def _read_png(path: str) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise ImageIOError("PNG support requires Pillow") from exc
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "I;16", "I"):
                arr = np.asarray(im.convert("L"))
            else:
                log.info("%s: converting %s to grayscale via Rec. 601 luma", path, im.mode)
                rgb = np.asarray(im.convert("RGB")).astype(float)
                arr = np.clip(
                    0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2],
                    0,
                    255,
                ).round().astype(np.uint8)
    except ImageIOError:
        raise
    except Exception as exc:
        raise ImageIOError(f"{path}: cannot decode PNG ({exc})") from exc
    return _to_unit(arr)


def read_image(path: str) -> np.ndarray:
    """Load a grayscale image as float64 in [0, 1]."""
    if not os.path.exists(path):
        raise ImageIOError(f"{path}: no such file")
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return _read_pgm(path)
    if ext == ".png":
        return _read_png(path)
    if ext == SIDECAR_EXT:
        return read_sidecar(path)
    raise ImageIOError(f"{path}: unsupported format {ext or '(none)'}; use .pgm, .png or {SIDECAR_EXT}")


def write_pgm(path: str, img) -> None:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D grayscale")
    arr8 = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    h, w = arr8.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(arr8.tobytes())


def write_png(path: str, img) -> None:
    from PIL import Image

    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D grayscale")
    arr8 = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr8, mode="L").save(path, format="PNG")


def write_image(path: str, img) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        write_pgm(path, img)
    elif ext == ".png":
        write_png(path, img)
    elif ext == SIDECAR_EXT:
        write_sidecar(path, img)
    else:
        raise ImageIOError(f"{path}: unsupported output format {ext or '(none)'}")


def write_sidecar(path: str, img) -> None:
    img = np.asarray(img, dtype=np.float32)
    if img.ndim != 2:
        raise ValueError("image must be 2-D grayscale")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(SIDECAR_MAGIC)
        fh.write(struct.pack("<II4x", w, h))
        fh.write(img.astype("<f4").tobytes())


def read_sidecar(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:4] != SIDECAR_MAGIC:
            raise ImageIOError(f"{path}: not a PRF1 sidecar")
        w, h = struct.unpack("<II4x", head[4:])
        payload = fh.read()
    if len(payload) != 4 * w * h:
        raise ImageIOError(f"{path}: sidecar payload size mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w).astype(float)


def sidecar_path(image_path: str) -> str:
    return os.path.splitext(image_path)[0] + SIDECAR_EXT
