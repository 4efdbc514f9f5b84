"""PLY point-cloud reading and writing (ascii and binary little-endian)."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import EmptyInput, FormatError

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass(eq=False)
class PointCloud:
    points: np.ndarray
    colors: Optional[np.ndarray] = None
    bounds: Tuple[np.ndarray, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (N, 3)")
        if len(pts) == 0:
            raise EmptyInput("point cloud has no points")
        if not np.all(np.isfinite(pts)):
            raise FormatError("point cloud contains non-finite coordinates")
        self.points = pts
        if self.colors is not None:
            colors = np.ascontiguousarray(self.colors, dtype=np.uint8)
            if colors.shape != pts.shape:
                raise ValueError("colors must have the same shape as points")
            self.colors = colors
        self.bounds = (pts.min(axis=0), pts.max(axis=0))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        if not np.array_equal(self.points, other.points):
            return False
        if (self.colors is None) != (other.colors is None):
            return False
        return self.colors is None or np.array_equal(self.colors, other.colors)

    __hash__ = None


@dataclass
class _Element:
    name: str
    count: int
    props: List[Tuple[str, str, Optional[str]]]  # (name, dtype, list count dtype)

    @property
    def has_list(self) -> bool:
        return any(p[2] is not None for p in self.props)

    def dtype(self, endian: str) -> np.dtype:
        return np.dtype([(name, endian + t) for name, t, _ in self.props])


def _parse_header(fh) -> Tuple[str, List[_Element]]:
    magic = fh.readline()
    if magic.strip() != b"ply":
        raise FormatError("missing 'ply' magic line")
    fmt = None
    elements: List[_Element] = []
    while True:
        raw = fh.readline()
        if not raw:
            raise FormatError("header ended without end_header")
        line = raw.decode("ascii", errors="replace").strip()
        if not line or line.startswith(("comment", "obj_info")):
            continue
        tok = line.split()
        if tok[0] == "end_header":
            break
        if tok[0] == "format":
            if len(tok) != 3 or tok[2] != "1.0":
                raise FormatError(f"bad format line: {line!r}")
            if tok[1] not in ("ascii", "binary_little_endian"):
                raise FormatError(f"unsupported PLY format {tok[1]!r}")
            fmt = tok[1]
        elif tok[0] == "element":
            try:
                elements.append(_Element(tok[1], int(tok[2]), []))
            except (IndexError, ValueError):
                raise FormatError(f"bad element line: {line!r}") from None
        elif tok[0] == "property":
            if not elements:
                raise FormatError("property before any element")
            try:
                if tok[1] == "list":
                    elements[-1].props.append((tok[4], _PLY_TYPES[tok[3]], _PLY_TYPES[tok[2]]))
                else:
                    elements[-1].props.append((tok[2], _PLY_TYPES[tok[1]], None))
            except (IndexError, KeyError):
                raise FormatError(f"bad property line: {line!r}") from None
        else:
            raise FormatError(f"unexpected header line: {line!r}")
    if fmt is None:
        raise FormatError("missing format line")
    return fmt, elements


def _skip_binary_element(data: bytes, offset: int, el: _Element) -> int:
    if not el.has_list:
        return offset + el.count * el.dtype("<").itemsize
    for _ in range(el.count):
        for _, t, count_t in el.props:
            size = np.dtype(t).itemsize
            if count_t is None:
                offset += size
            else:
                ct = np.dtype("<" + count_t)
                if offset + ct.itemsize > len(data):
                    raise FormatError("truncated binary body")
                n = int(np.frombuffer(data, dtype=ct, count=1, offset=offset)[0])
                offset += ct.itemsize + n * size
    return offset


def load_point_cloud(path) -> PointCloud:
    """Read the vertex element of a PLY file. Colors are attached when the
    vertex element carries red/green/blue properties."""
    with open(path, "rb") as fh:
        fmt, elements = _parse_header(fh)
        body = fh.read()

    vertex = next((e for e in elements if e.name == "vertex"), None)
    if vertex is None:
        raise FormatError("no vertex element")
    names = {p[0]: p for p in vertex.props}
    for axis in "xyz":
        if axis not in names or names[axis][1] not in ("f4", "f8"):
            raise FormatError(f"vertex element lacks float property {axis!r}")
    if vertex.has_list:
        raise FormatError("list properties on vertex element are not supported")
    if vertex.count == 0:
        raise EmptyInput("PLY file declares zero vertices")
    has_rgb = all(c in names for c in ("red", "green", "blue"))

    if fmt == "ascii":
        lines = body.decode("ascii", errors="replace").splitlines()
        lines = [ln for ln in lines if ln.strip()]
        start = 0
        for el in elements:
            if el is vertex:
                break
            start += el.count
        rows = lines[start:start + vertex.count]
        if len(rows) != vertex.count:
            raise FormatError(f"header declares {vertex.count} vertices, body has {len(rows)}")
        try:
            table = np.array([r.split() for r in rows], dtype=np.float64)
        except ValueError:
            raise FormatError("malformed ascii vertex rows") from None
        if table.ndim != 2 or table.shape[1] != len(vertex.props):
            raise FormatError("ascii vertex rows do not match declared properties")
        cols = {p[0]: i for i, p in enumerate(vertex.props)}
        # values are parsed through the declared storage type so ascii and
        # binary encodings of the same file load identically
        xyz = np.stack([table[:, cols[a]].astype(names[a][1]) for a in "xyz"], axis=1)
        rgb = None
        if has_rgb:
            rgb = np.stack([table[:, cols[c]] for c in ("red", "green", "blue")], axis=1)
            rgb = np.clip(rgb, 0, 255).astype(np.uint8)
    else:
        offset = 0
        for el in elements:
            if el is vertex:
                break
            offset = _skip_binary_element(body, offset, el)
        dt = vertex.dtype("<")
        need = offset + vertex.count * dt.itemsize
        if len(body) < need:
            raise FormatError(
                f"truncated binary body: need {need} bytes, have {len(body)}"
            )
        arr = np.frombuffer(body, dtype=dt, count=vertex.count, offset=offset)
        xyz = np.stack([arr[a] for a in "xyz"], axis=1)
        rgb = None
        if has_rgb:
            rgb = np.stack([arr[c] for c in ("red", "green", "blue")], axis=1)
            rgb = np.clip(rgb, 0, 255).astype(np.uint8)

    return PointCloud(xyz.astype(np.float64), rgb)


def save_point_cloud(cloud: PointCloud, path, binary: bool = True) -> None:
    """Write float32 x,y,z (+ uint8 rgb). Binary output round-trips bit-exactly."""
    n = len(cloud)
    header = ["ply", "format %s 1.0" % ("binary_little_endian" if binary else "ascii")]
    header.append(f"element vertex {n}")
    header += ["property float x", "property float y", "property float z"]
    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
    if cloud.colors is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
    header.append("end_header")
    arr = np.empty(n, dtype=fields)
    pts32 = cloud.points.astype(np.float32)
    for i, a in enumerate("xyz"):
        arr[a] = pts32[:, i]
    if cloud.colors is not None:
        for i, c in enumerate(("red", "green", "blue")):
            arr[c] = cloud.colors[:, i]

    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(arr.tobytes())
        else:
            # %.9g round-trips float32 exactly
            cols = [np.char.mod("%.9g", pts32[:, i]) for i in range(3)]
            if cloud.colors is not None:
                cols += [cloud.colors[:, i].astype(str) for i in range(3)]
            rows = [" ".join(r) for r in zip(*cols)]
            fh.write(("\n".join(rows) + "\n").encode("ascii"))
    os.replace(tmp, path)
