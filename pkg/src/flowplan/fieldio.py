"""Text file format for flow fields (version 1).

Layout: a magic/version line, grid header keys, then per layer the u, v,
and land blocks, each ny rows of nx whitespace-separated values with row
0 the southernmost row. Values are plain decimals; the parser refuses
missing or extra cells rather than coercing. Blank lines and '#' comments
are ignored on input and never emitted.
"""

from __future__ import annotations

import hashlib
from typing import Iterable

import numpy as np

from .flowfield import FieldError, FlowField, GridGeometry

MAGIC = "flowfield-v1"


class FieldFormatError(FieldError):
    """Malformed field document."""


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_field(field: FlowField) -> str:
    g = field.geometry
    lines = [
        MAGIC,
        f"nx {g.nx}",
        f"ny {g.ny}",
        f"cell_size_m {_fmt(g.cell_size)}",
        "layer_depths_m " + " ".join(_fmt(d) for d in g.layer_depths),
    ]
    if g.origin is not None:
        lines.append(f"origin_lonlat {_fmt(g.origin[0])} {_fmt(g.origin[1])}")
    for l in range(g.num_layers):
        lines.append(f"layer {l}")
        for name, arr in (("u", field.u), ("v", field.v)):
            lines.append(name)
            for iy in range(g.ny):
                lines.append(" ".join(_fmt(x) for x in arr[l, iy]))
        lines.append("land")
        for iy in range(g.ny):
            lines.append(" ".join("1" if x else "0" for x in field.land[l, iy]))
    return "\n".join(lines) + "\n"


def save_flow_field(field: FlowField, path_or_stream) -> None:
    text = dump_field(field)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w") as fh:
            fh.write(text)


def field_digest(field: FlowField) -> str:
    """SHA-256 of the canonical serialized document."""
    return hashlib.sha256(dump_field(field).encode()).hexdigest()


class _Lines:
    """Token-line cursor with positions for error messages."""

    def __init__(self, raw: Iterable[str]):
        self.items: list[tuple[int, str]] = []
        for no, line in enumerate(raw, start=1):
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                self.items.append((no, stripped))
        self.pos = 0

    def next(self, what: str) -> tuple[int, str]:
        if self.pos >= len(self.items):
            raise FieldFormatError(f"unexpected end of document, expected {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item

    def peek_key(self) -> str | None:
        if self.pos >= len(self.items):
            return None
        return self.items[self.pos][1].split()[0]


def _parse_float(tok: str, no: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise FieldFormatError(f"line {no}: {what} is not a number: {tok!r}") from None


def _expect_key(lines: _Lines, key: str, nvals: int | None = None) -> tuple[int, list[str]]:
    no, line = lines.next(key)
    parts = line.split()
    if parts[0] != key:
        raise FieldFormatError(f"line {no}: expected {key!r}, found {parts[0]!r}")
    if nvals is not None and len(parts) - 1 != nvals:
        raise FieldFormatError(f"line {no}: {key} takes {nvals} value(s), found {len(parts) - 1}")
    return no, parts[1:]


def _read_rows(lines: _Lines, what: str, ny: int, nx: int, parse) -> np.ndarray:
    rows = []
    for iy in range(ny):
        no, line = lines.next(f"{what} row {iy}")
        toks = line.split()
        if len(toks) != nx:
            raise FieldFormatError(f"line {no}: {what} row {iy} has {len(toks)} values, expected {nx}")
        rows.append([parse(t, no) for t in toks])
    return np.array(rows)


def load_flow_field(source) -> FlowField:
    """Parse a field document from a path, stream, or string."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    if isinstance(text, bytes):
        text = text.decode()

    lines = _Lines(text.splitlines())
    no, magic = lines.next("magic line")
    if magic != MAGIC:
        raise FieldFormatError(f"line {no}: not a {MAGIC} document (found {magic!r})")
    _, (nx_s,) = _expect_key(lines, "nx", 1)
    _, (ny_s,) = _expect_key(lines, "ny", 1)
    no, (cs_s,) = _expect_key(lines, "cell_size_m", 1)
    try:
        nx, ny = int(nx_s), int(ny_s)
    except ValueError:
        raise FieldFormatError(f"nx/ny must be integers, got {nx_s!r}/{ny_s!r}") from None
    cell_size = _parse_float(cs_s, no, "cell_size_m")
    no, depth_toks = _expect_key(lines, "layer_depths_m")
    depths = tuple(_parse_float(t, no, "layer depth") for t in depth_toks)
    origin = None
    if lines.peek_key() == "origin_lonlat":
        no, (lon_s, lat_s) = _expect_key(lines, "origin_lonlat", 2)
        origin = (_parse_float(lon_s, no, "origin lon"), _parse_float(lat_s, no, "origin lat"))
    geometry = GridGeometry(nx=nx, ny=ny, cell_size=cell_size, layer_depths=depths, origin=origin)

    L = geometry.num_layers
    u = np.empty((L, ny, nx))
    v = np.empty((L, ny, nx))
    land = np.empty((L, ny, nx), dtype=bool)

    def parse_vel(tok: str, no: int) -> float:
        return _parse_float(tok, no, "velocity")

    def parse_land(tok: str, no: int) -> bool:
        if tok == "0":
            return False
        if tok == "1":
            return True
        raise FieldFormatError(f"line {no}: land flag must be 0 or 1, found {tok!r}")

    for l in range(L):
        no, (l_s,) = _expect_key(lines, "layer", 1)
        if l_s != str(l):
            raise FieldFormatError(f"line {no}: expected layer {l}, found {l_s!r}")
        _expect_key(lines, "u", 0)
        u[l] = _read_rows(lines, "u", ny, nx, parse_vel)
        _expect_key(lines, "v", 0)
        v[l] = _read_rows(lines, "v", ny, nx, parse_vel)
        _expect_key(lines, "land", 0)
        land[l] = _read_rows(lines, "land", ny, nx, parse_land)
    if lines.pos != len(lines.items):
        no, line = lines.items[lines.pos]
        raise FieldFormatError(f"line {no}: trailing content after last layer: {line!r}")
    return FlowField(geometry=geometry, u=u, v=v, land=land)
