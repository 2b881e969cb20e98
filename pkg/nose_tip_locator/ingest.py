"""
Readers and writers for depth maps, landmarks, point clouds and meshes.

Depth map formats:
    PGM16       binary PGM, magic "P5", maxval 65535, big-endian samples. A stored 0 is a
                dropout (invalid pixel); any other sample decodes as stored / scale.
    ASCII_GRID  "width height" on the first line, then one line per row of width
                whitespace-separated numbers; "nan" (any case) marks an invalid pixel.
    XYZ         one "x y z" triple per line on an integer (x = col, y = row) lattice.
                An optional "# grid width height x0 y0" comment fixes the grid; without
                it the bounding box of the points is used and absent cells are invalid.
"""

import math
import os
from enum import Enum
from typing import TYPE_CHECKING, Optional

import numpy as np

from .core import DepthMap, Landmark, Point3
from .errors import DepthFormatError, DepthRangeError, InvalidParameterError, MissingInputError

if TYPE_CHECKING:
    from .smooth import TriangleMesh

PGM_MAXVAL = 65535
XYZ_GRID_TAG = "grid"
LANDMARK_KEYS = ("row", "col", "x", "y", "z", "score")
MAX_GRID_CELLS = 1 << 26


class DepthFileFormat(str, Enum):
    PGM16 = "pgm16"
    ASCII_GRID = "grid"
    XYZ = "xyz"


def format_number(value: float) -> str:
    """Shortest decimal text that parses back to exactly the same float."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _parse_depth_token(token: str, path: str, line: int) -> Optional[float]:
    if token.lower() == "nan":
        return None
    try:
        value = float(token)
    except ValueError:
        raise DepthFormatError(path, f"not a number: {token!r}", line=line) from None
    if not math.isfinite(value):
        raise DepthFormatError(path, f"non-finite depth: {token!r}", line=line)
    return value


def _parse_int_token(token: str, what: str, path: str, line: int) -> int:
    try:
        value = float(token)
    except ValueError:
        raise DepthFormatError(path, f"{what} is not a number: {token!r}", line=line) from None
    if not math.isfinite(value) or not value.is_integer():
        raise DepthFormatError(path, f"{what} is not an integer: {token!r}", line=line)
    return int(value)


def _read_text(path: str) -> str:
    if not os.path.isfile(path):
        raise MissingInputError(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except UnicodeDecodeError as e:
        raise DepthFormatError(path, "not UTF-8 text", offset=e.start) from None


def _check_grid_size(width: int, height: int, path: str, line: Optional[int] = None) -> None:
    if width < 1 or height < 1:
        raise DepthFormatError(path, f"grid size must be positive, got {width}x{height}", line=line)
    if width * height > MAX_GRID_CELLS:
        raise DepthFormatError(path, f"grid {width}x{height} exceeds {MAX_GRID_CELLS} cells", line=line)


def _read_bytes(path: str) -> bytes:
    if not os.path.isfile(path):
        raise MissingInputError(path)
    with open(path, "rb") as f:
        return f.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


# --- PGM16 ---


def _next_pgm_token(data: bytes, pos: int, path: str) -> tuple[bytes, int, int]:
    """Return (token, token_offset, position after token), skipping whitespace and comments."""
    while pos < len(data):
        char = data[pos : pos + 1]
        if char == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        elif char.isspace():
            pos += 1
        else:
            break

    if pos >= len(data):
        raise DepthFormatError(path, "truncated PGM header", offset=pos)

    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], start, pos


def _load_pgm16(path: str, scale: float) -> DepthMap:
    data = _read_bytes(path)

    magic, offset, pos = _next_pgm_token(data, 0, path)
    if magic != b"P5":
        raise DepthFormatError(path, f"bad magic {magic!r}, expected b'P5'", offset=offset)

    fields = []
    for name in ("width", "height", "maxval"):
        token, offset, pos = _next_pgm_token(data, pos, path)
        if not token.isdigit():
            raise DepthFormatError(path, f"{name} is not a positive integer: {token!r}", offset=offset)
        fields.append((int(token), offset))

    (width, width_at), (height, height_at), (maxval, maxval_at) = fields
    if width < 1:
        raise DepthFormatError(path, "width must be at least 1", offset=width_at)
    if height < 1:
        raise DepthFormatError(path, "height must be at least 1", offset=height_at)
    if maxval != PGM_MAXVAL:
        raise DepthFormatError(path, f"maxval must be {PGM_MAXVAL}, got {maxval}", offset=maxval_at)
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise DepthFormatError(path, "missing whitespace after maxval", offset=pos)
    pos += 1

    expected = width * height * 2
    if len(data) - pos != expected:
        raise DepthFormatError(
            path, f"expected {expected} bytes of samples, found {len(data) - pos}", offset=pos
        )

    raw = np.frombuffer(data, dtype=">u2", count=width * height, offset=pos).reshape(height, width)
    valid = raw != 0
    depth = np.where(valid, raw.astype(np.float64) / scale, np.nan)
    return DepthMap(depth=depth, valid=valid)


def quantize_pgm16(depth_map: DepthMap, scale: float = 1.0) -> np.ndarray:
    """Stored PGM16 samples: round(depth * scale) at valid pixels, 0 elsewhere."""
    stored = np.zeros(depth_map.shape, dtype=np.int64)
    values = np.rint(depth_map.valid_depths() * scale)
    if values.size and (values.min() < 1 or values.max() > PGM_MAXVAL):
        raise DepthRangeError(
            f"depths quantize to [{values.min():g}, {values.max():g}], "
            f"outside the PGM16 range [1, {PGM_MAXVAL}] at scale {scale:g}"
        )
    stored[depth_map.valid] = values.astype(np.int64)
    return stored


def _save_pgm16(depth_map: DepthMap, path: str, scale: float) -> None:
    stored = quantize_pgm16(depth_map, scale)
    header = f"P5\n{depth_map.width} {depth_map.height}\n{PGM_MAXVAL}\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(stored.astype(">u2").tobytes())


# --- ASCII grid ---


def _load_ascii_grid(path: str) -> DepthMap:
    lines = _read_text(path).splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DepthFormatError(path, "empty file", line=1)

    header = lines[0].split()
    if len(header) != 2:
        raise DepthFormatError(path, "header must be 'width height'", line=1)
    width = _parse_int_token(header[0], "width", path, 1)
    height = _parse_int_token(header[1], "height", path, 1)
    _check_grid_size(width, height, path, line=1)

    rows = lines[1:]
    if len(rows) != height:
        raise DepthFormatError(
            path, f"expected {height} rows, found {len(rows)}", line=min(len(lines), height + 1)
        )

    depth = np.full((height, width), np.nan)
    valid = np.zeros((height, width), dtype=bool)
    for r, text in enumerate(rows):
        line_no = r + 2
        tokens = text.split()
        if len(tokens) != width:
            raise DepthFormatError(path, f"expected {width} values, found {len(tokens)}", line=line_no)
        for c, token in enumerate(tokens):
            value = _parse_depth_token(token, path, line_no)
            if value is not None:
                depth[r, c] = value
                valid[r, c] = True

    return DepthMap(depth=depth, valid=valid)


def _save_ascii_grid(depth_map: DepthMap, path: str) -> None:
    lines = [f"{depth_map.width} {depth_map.height}"]
    for r in range(depth_map.height):
        lines.append(
            " ".join(
                format_number(depth_map.depth[r, c]) if depth_map.valid[r, c] else "nan"
                for c in range(depth_map.width)
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


# --- XYZ ---


def _parse_grid_comment(text: str, path: str, line: int) -> Optional[tuple[int, int, int, int]]:
    tokens = text.lstrip("#").split()
    if not tokens or tokens[0] != XYZ_GRID_TAG:
        return None
    if len(tokens) != 5:
        raise DepthFormatError(path, "grid comment must be '# grid width height x0 y0'", line=line)
    width, height, x0, y0 = (
        _parse_int_token(t, name, path, line)
        for t, name in zip(tokens[1:], ("width", "height", "x0", "y0"))
    )
    _check_grid_size(width, height, path, line=line)
    return width, height, x0, y0


def _load_xyz(path: str) -> DepthMap:
    grid = None
    samples = []
    for line_no, text in enumerate(_read_text(path).splitlines(), start=1):
        stripped = text.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            parsed = _parse_grid_comment(stripped, path, line_no)
            if parsed is not None:
                grid = parsed
            continue

        tokens = stripped.split()
        if len(tokens) != 3:
            raise DepthFormatError(path, f"expected 'x y z', found {len(tokens)} values", line=line_no)
        x = _parse_int_token(tokens[0], "x grid coordinate", path, line_no)
        y = _parse_int_token(tokens[1], "y grid coordinate", path, line_no)
        z = _parse_depth_token(tokens[2], path, line_no)
        samples.append((x, y, z, line_no))

    if grid is None:
        if not samples:
            raise DepthFormatError(path, "no points to infer a grid from", line=1)
        x0 = min(s[0] for s in samples)
        y0 = min(s[1] for s in samples)
        width = max(s[0] for s in samples) - x0 + 1
        height = max(s[1] for s in samples) - y0 + 1
        _check_grid_size(width, height, path)
    else:
        width, height, x0, y0 = grid

    depth = np.full((height, width), np.nan)
    valid = np.zeros((height, width), dtype=bool)
    seen = np.zeros((height, width), dtype=bool)
    for x, y, z, line_no in samples:
        col, row = x - x0, y - y0
        if not (0 <= col < width and 0 <= row < height):
            raise DepthFormatError(path, f"point ({x}, {y}) lies outside the grid", line=line_no)
        if seen[row, col]:
            raise DepthFormatError(path, f"second sample for cell ({x}, {y})", line=line_no)
        seen[row, col] = True
        if z is not None:
            depth[row, col] = z
            valid[row, col] = True

    return DepthMap(depth=depth, valid=valid)


def _save_xyz(depth_map: DepthMap, path: str) -> None:
    lines = [f"# {XYZ_GRID_TAG} {depth_map.width} {depth_map.height} 0 0"]
    rows, cols = np.nonzero(depth_map.valid)
    for r, c in zip(rows.tolist(), cols.tolist()):
        lines.append(f"{c} {r} {format_number(depth_map.depth[r, c])}")
    _write_text(path, "\n".join(lines) + "\n")


# --- public API ---


def load_depth_map(path: str, fmt: DepthFileFormat, pgm_scale: float = 1.0) -> DepthMap:
    fmt = DepthFileFormat(fmt)
    if fmt is DepthFileFormat.PGM16:
        if not pgm_scale > 0:
            raise InvalidParameterError(f"PGM16 scale must be positive, got {pgm_scale}")
        return _load_pgm16(path, pgm_scale)
    if fmt is DepthFileFormat.ASCII_GRID:
        return _load_ascii_grid(path)
    return _load_xyz(path)


def save_depth_map(
    depth_map: DepthMap, path: str, fmt: DepthFileFormat, pgm_scale: float = 1.0
) -> None:
    fmt = DepthFileFormat(fmt)
    if fmt is DepthFileFormat.PGM16:
        if not pgm_scale > 0:
            raise InvalidParameterError(f"PGM16 scale must be positive, got {pgm_scale}")
        _save_pgm16(depth_map, path, pgm_scale)
    elif fmt is DepthFileFormat.ASCII_GRID:
        _save_ascii_grid(depth_map, path)
    else:
        _save_xyz(depth_map, path)


def save_landmark(landmark: Landmark, path: str) -> None:
    values = {
        "row": str(landmark.row),
        "col": str(landmark.col),
        "x": format_number(landmark.point.x),
        "y": format_number(landmark.point.y),
        "z": format_number(landmark.point.z),
        "score": format_number(landmark.score),
    }
    _write_text(path, "".join(f"{key}={values[key]}\n" for key in LANDMARK_KEYS))


def load_landmark(path: str) -> Landmark:
    values = {}
    for line_no, text in enumerate(_read_text(path).splitlines(), start=1):
        if not text.strip():
            continue
        key, sep, value = text.partition("=")
        key = key.strip()
        if not sep or key not in LANDMARK_KEYS:
            raise DepthFormatError(path, f"unexpected record line {text!r}", line=line_no)
        if key in values:
            raise DepthFormatError(path, f"duplicate key {key!r}", line=line_no)
        if key in ("row", "col"):
            values[key] = _parse_int_token(value.strip(), key, path, line_no)
        else:
            number = _parse_depth_token(value.strip(), path, line_no)
            if number is None:
                raise DepthFormatError(path, f"{key} must be finite", line=line_no)
            values[key] = number

    missing = [key for key in LANDMARK_KEYS if key not in values]
    if missing:
        raise DepthFormatError(path, f"missing key(s): {', '.join(missing)}")

    return Landmark(
        row=values["row"],
        col=values["col"],
        point=Point3(values["x"], values["y"], values["z"]),
        score=values["score"],
    )


def save_point_cloud(points: np.ndarray, path: str) -> None:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    _write_text(path, "".join(" ".join(format_number(v) for v in p) + "\n" for p in points))


def load_point_cloud(path: str) -> np.ndarray:
    rows = []
    for line_no, text in enumerate(_read_text(path).splitlines(), start=1):
        stripped = text.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 3:
            raise DepthFormatError(path, f"expected 'x y z', found {len(tokens)} values", line=line_no)
        point = [_parse_depth_token(t, path, line_no) for t in tokens]
        if any(v is None for v in point):
            raise DepthFormatError(path, "point coordinates must be finite", line=line_no)
        rows.append(point)
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def save_mesh_obj(mesh: "TriangleMesh", path: str) -> None:
    lines = [f"v {' '.join(format_number(v) for v in vertex)}" for vertex in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    _write_text(path, "\n".join(lines) + "\n")
