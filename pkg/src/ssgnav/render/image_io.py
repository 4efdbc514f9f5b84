"""Lossless PNG encoding of raster images."""

from __future__ import annotations

import io
import os

import numpy as np
from PIL import Image

from ..errors import IoError
from ..geometry import RasterImage


def png_bytes(img: RasterImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def encode_image(img: RasterImage, path) -> None:
    data = png_bytes(img)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def decode_image(path) -> RasterImage:
    try:
        with Image.open(path) as im:
            return RasterImage(np.array(im.convert("RGBA")))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def load_view_dir(path):
    """Read ``<direction>.png`` for the eight directions from a directory.
    Missing files are simply absent from the returned mapping."""
    from .compass import DIRECTIONS

    views = {}
    for d in DIRECTIONS:
        f = os.path.join(path, f"{d}.png")
        if os.path.exists(f):
            views[d] = decode_image(f)
    return views
