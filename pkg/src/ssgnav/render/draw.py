"""Clipped raster primitives on (H, W, 4) uint8 arrays, plus a 5x7 bitmap font."""

from __future__ import annotations

import numpy as np

_GLYPHS = {
    "A": "01110 10001 10001 11111 10001 10001 10001",
    "B": "11110 10001 10001 11110 10001 10001 11110",
    "C": "01110 10001 10000 10000 10000 10001 01110",
    "D": "11100 10010 10001 10001 10001 10010 11100",
    "E": "11111 10000 10000 11110 10000 10000 11111",
    "F": "11111 10000 10000 11110 10000 10000 10000",
    "G": "01110 10001 10000 10111 10001 10001 01111",
    "H": "10001 10001 10001 11111 10001 10001 10001",
    "I": "01110 00100 00100 00100 00100 00100 01110",
    "J": "00111 00010 00010 00010 00010 10010 01100",
    "K": "10001 10010 10100 11000 10100 10010 10001",
    "L": "10000 10000 10000 10000 10000 10000 11111",
    "M": "10001 11011 10101 10101 10001 10001 10001",
    "N": "10001 10001 11001 10101 10011 10001 10001",
    "O": "01110 10001 10001 10001 10001 10001 01110",
    "P": "11110 10001 10001 11110 10000 10000 10000",
    "Q": "01110 10001 10001 10001 10101 10010 01101",
    "R": "11110 10001 10001 11110 10100 10010 10001",
    "S": "01111 10000 10000 01110 00001 00001 11110",
    "T": "11111 00100 00100 00100 00100 00100 00100",
    "U": "10001 10001 10001 10001 10001 10001 01110",
    "V": "10001 10001 10001 10001 10001 01010 00100",
    "W": "10001 10001 10001 10101 10101 10101 01010",
    "X": "10001 10001 01010 00100 01010 10001 10001",
    "Y": "10001 10001 10001 01010 00100 00100 00100",
    "Z": "11111 00001 00010 00100 01000 10000 11111",
    "0": "01110 10001 10011 10101 11001 10001 01110",
    "1": "00100 01100 00100 00100 00100 00100 01110",
    "2": "01110 10001 00001 00010 00100 01000 11111",
    "3": "11111 00010 00100 00010 00001 10001 01110",
    "4": "00010 00110 01010 10010 11111 00010 00010",
    "5": "11111 10000 11110 00001 00001 10001 01110",
    "6": "00110 01000 10000 11110 10001 10001 01110",
    "7": "11111 00001 00010 00100 01000 01000 01000",
    "8": "01110 10001 10001 01110 10001 10001 01110",
    "9": "01110 10001 10001 01111 00001 00010 01100",
    " ": "00000 00000 00000 00000 00000 00000 00000",
    "-": "00000 00000 00000 11111 00000 00000 00000",
    "_": "00000 00000 00000 00000 00000 00000 11111",
    "/": "00000 00001 00010 00100 01000 10000 00000",
    ".": "00000 00000 00000 00000 00000 01100 01100",
    ":": "00000 01100 01100 00000 01100 01100 00000",
    "?": "01110 10001 00001 00010 00100 00000 00100",
}
FONT = {
    ch: np.array([[c == "1" for c in row] for row in rows.split()], dtype=bool)
    for ch, rows in _GLYPHS.items()
}
GLYPH_W, GLYPH_H = 5, 7


def _paste(px, mask, top, left, color):
    h, w = mask.shape
    H, W = px.shape[:2]
    r0, c0 = max(top, 0), max(left, 0)
    r1, c1 = min(top + h, H), min(left + w, W)
    if r0 >= r1 or c0 >= c1:
        return
    sub = mask[r0 - top:r1 - top, c0 - left:c1 - left]
    px[r0:r1, c0:c1][sub] = color


def text_size(text: str, scale: int) -> tuple:
    n = len(text)
    return (max(n * (GLYPH_W + 1) - 1, 0) * scale, GLYPH_H * scale)


def draw_text(px, text: str, cx: int, cy: int, scale: int, color) -> None:
    """Uppercase bitmap text centered on (cx, cy); unknown characters render as '?'."""
    text = text.upper()
    w, h = text_size(text, scale)
    left, top = cx - w // 2, cy - h // 2
    for i, ch in enumerate(text):
        glyph = FONT.get(ch, FONT["?"])
        if scale > 1:
            glyph = np.kron(glyph, np.ones((scale, scale), dtype=bool))
        _paste(px, glyph, top, left + i * (GLYPH_W + 1) * scale, color)


def fill_disk(px, cx: int, cy: int, radius: float, color) -> None:
    r = int(np.ceil(radius))
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    _paste(px, xx * xx + yy * yy <= radius * radius, cy - r, cx - r, color)


def draw_ring(px, cx: int, cy: int, radius: float, width: float, color) -> None:
    r = int(np.ceil(radius))
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    d2 = xx * xx + yy * yy
    inner = max(radius - width, 0.0)
    _paste(px, (d2 <= radius * radius) & (d2 > inner * inner), cy - r, cx - r, color)


def draw_line(px, x0, y0, x1, y1, width: float, color) -> None:
    half = width / 2.0
    left = int(np.floor(min(x0, x1) - half))
    top = int(np.floor(min(y0, y1) - half))
    right = int(np.ceil(max(x0, x1) + half))
    bottom = int(np.ceil(max(y0, y1) + half))
    yy, xx = np.mgrid[top:bottom + 1, left:right + 1]
    dx, dy = x1 - x0, y1 - y0
    L2 = dx * dx + dy * dy
    if L2 == 0:
        t = np.zeros_like(xx, dtype=float)
    else:
        t = np.clip(((xx - x0) * dx + (yy - y0) * dy) / L2, 0.0, 1.0)
    d2 = (xx - (x0 + t * dx)) ** 2 + (yy - (y0 + t * dy)) ** 2
    _paste(px, d2 <= half * half, top, left, color)


def fill_polygon(px, points, color) -> None:
    """Fill a convex polygon given as [(x, y), ...] in pixel coordinates."""
    pts = np.asarray(points, dtype=float)
    left, top = np.floor(pts.min(axis=0)).astype(int)
    right, bottom = np.ceil(pts.max(axis=0)).astype(int)
    yy, xx = np.mgrid[top:bottom + 1, left:right + 1]
    inside_pos = np.ones(xx.shape, dtype=bool)
    inside_neg = np.ones(xx.shape, dtype=bool)
    for (ax, ay), (bx, by) in zip(pts, np.roll(pts, -1, axis=0)):
        cross = (bx - ax) * (yy - ay) - (by - ay) * (xx - ax)
        inside_pos &= cross >= 0
        inside_neg &= cross <= 0
    _paste(px, inside_pos | inside_neg, top, left, color)
