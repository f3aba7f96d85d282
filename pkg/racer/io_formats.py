"""Readers and writers for particle stacks (MRC mode 2), silhouettes (binary PGM) and results."""
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from racer.exceptions import CorruptFile, DomainError, ParseError, UnsupportedFormat

MRC_HEADER_BYTES = 1024
MAP_ID_OFFSET = 208
LITTLE_ENDIAN_STAMP = bytes([0x44, 0x44, 0x00, 0x00])
BIG_ENDIAN_STAMP = bytes([0x11, 0x11, 0x00, 0x00])

# MRC2014 main header, 1024 bytes
header_fields = [
    ("nx", "i4"), ("ny", "i4"), ("nz", "i4"), ("mode", "i4"),
    ("nxstart", "i4"), ("nystart", "i4"), ("nzstart", "i4"),
    ("mx", "i4"), ("my", "i4"), ("mz", "i4"),
    ("cella", "f4", 3), ("cellb", "f4", 3),
    ("mapc", "i4"), ("mapr", "i4"), ("maps", "i4"),
    ("dmin", "f4"), ("dmax", "f4"), ("dmean", "f4"),
    ("ispg", "i4"), ("nsymbt", "i4"), ("extra", "V100"),
    ("origin", "f4", 3), ("map", "S4"), ("machst", "S4"),
    ("rms", "f4"), ("nlabl", "i4"), ("label", "S80", 10),
]

CENTER_COLUMNS = ["particle_index", "row", "col", "cost_min", "e_max", "backend", "R"]


def _header_dtype(byteorder):
    return np.dtype([(name, byteorder + kind, *shape) if kind[0] in "if" else (name, kind, *shape) for name, kind, *shape in header_fields])


@dataclass
class ParticleStack:
    images: np.ndarray
    path: str = None
    indices: list = field(default=None)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        if self.images.ndim != 3:
            raise DomainError(f"a particle stack is a 3-D array (particles, rows, cols), got shape {self.images.shape}")
        if self.indices is None:
            self.indices = list(range(len(self.images)))

    def __len__(self):
        return len(self.images)

    def __getitem__(self, i):
        return self.images[i]

    def __iter__(self):
        return iter(self.images)

    @property
    def extent(self):
        return self.images.shape[1:]


def read_mrc(path):
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < MRC_HEADER_BYTES:
        raise CorruptFile(path, MRC_HEADER_BYTES, len(raw))
    if raw[MAP_ID_OFFSET:MAP_ID_OFFSET + 4] != b"MAP ":
        raise UnsupportedFormat(f"{path}: missing 'MAP ' identifier at byte {MAP_ID_OFFSET}")
    byteorder = ">" if raw[212:214] == BIG_ENDIAN_STAMP[:2] else "<"
    header = np.frombuffer(raw, dtype=_header_dtype(byteorder), count=1)[0]
    if header["mode"] != 2:
        raise UnsupportedFormat(f"{path}: only 32-bit real data is supported", mode=int(header["mode"]))
    nx, ny, nz, nsymbt = int(header["nx"]), int(header["ny"]), int(header["nz"]), int(header["nsymbt"])
    if min(nx, ny, nz) < 0:
        raise UnsupportedFormat(f"{path}: negative dimensions {nx}x{ny}x{nz} in the header")
    if nsymbt < 0:
        raise UnsupportedFormat(f"{path}: negative extended header length {nsymbt}")
    start = MRC_HEADER_BYTES + nsymbt
    expected = nx * ny * nz * 4
    available = max(0, len(raw) - start)
    if available < expected:
        raise CorruptFile(path, start + expected, len(raw))
    if expected == 0:
        return ParticleStack(np.zeros((nz, ny, nx), dtype=np.float32), path=str(path))
    images = np.frombuffer(raw, dtype=byteorder + "f4", count=nx * ny * nz, offset=start).reshape(nz, ny, nx)
    return ParticleStack(images.astype(np.float32), path=str(path))


def _mrc_header(images):
    nz, ny, nx = images.shape
    header = np.zeros(1, dtype=_header_dtype("<"))
    header["nx"], header["ny"], header["nz"] = nx, ny, nz
    header["mode"] = 2
    header["mx"], header["my"], header["mz"] = nx, ny, nz
    header["cella"] = (nx, ny, nz)
    header["cellb"] = (90, 90, 90)
    header["mapc"], header["mapr"], header["maps"] = 1, 2, 3
    if images.size:
        header["dmin"], header["dmax"], header["dmean"] = images.min(), images.max(), images.mean(dtype=np.float64)
        header["rms"] = images.std(dtype=np.float64)
    header["map"] = b"MAP "
    header["machst"] = LITTLE_ENDIAN_STAMP
    return header.tobytes()


def write_mrc(stack, path):
    images = stack.images if isinstance(stack, ParticleStack) else np.asarray(stack)
    images = np.ascontiguousarray(images, dtype="<f4")
    try:
        with open(path, "wb") as f:
            f.write(_mrc_header(images))
            f.write(images.tobytes())
    except OSError as e:
        raise OSError(f"could not write MRC stack to {path}: {e}") from e


def _pgm_tokens(raw, count):
    """First ``count`` header tokens of a PGM file, skipping whitespace and '#' comments."""
    tokens = []
    position = 2
    while len(tokens) < count:
        if position >= len(raw):
            raise ParseError("truncated PGM header", position)
        byte = raw[position:position + 1]
        if byte.isspace():
            position += 1
        elif byte == b"#":
            while position < len(raw) and raw[position:position + 1] not in (b"\n", b"\r"):
                position += 1
        else:
            start = position
            while position < len(raw) and not raw[position:position + 1].isspace():
                position += 1
            token = raw[start:position]
            if not token.isdigit():
                raise ParseError(f"expected a decimal number in the PGM header, got {token!r}", start)
            tokens.append(int(token))
    if position >= len(raw) or not raw[position:position + 1].isspace():
        raise ParseError("missing whitespace after the PGM header", position)
    return tokens, position + 1


def read_pgm(path):
    """Binary (P5) PGM as a float image in [0, 1]."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] != b"P5":
        raise ParseError(f"unsupported PGM variant {raw[:2]!r}, only binary P5 is read", 0)
    (width, height, maxval), start = _pgm_tokens(raw, 3)
    if not 0 < maxval <= 65535:
        raise ParseError(f"maxval must be in 1..65535, got {maxval}", start - 1)
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    expected = width * height * dtype.itemsize
    if len(raw) - start < expected:
        raise CorruptFile(path, start + expected, len(raw))
    values = np.frombuffer(raw, dtype=dtype, count=width * height, offset=start).reshape(height, width)
    return values.astype(np.float64) / maxval


def write_pgm(image, path, maxval=255, rescale=False):
    """Write an image with values in [0, 1]; ``rescale`` maps min..max onto [0, 1] first."""
    image = np.asarray(image, dtype=np.float64)
    if rescale:
        span = image.max() - image.min()
        image = (image - image.min()) / span if span > 0 else np.zeros_like(image)
    if image.min() < 0 or image.max() > 1:
        raise DomainError("PGM output needs values in [0, 1]; pass rescale=True for other ranges")
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    payload = np.round(image * maxval).astype(dtype)
    height, width = image.shape
    try:
        with open(path, "wb") as f:
            f.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
            f.write(payload.tobytes())
    except OSError as e:
        raise OSError(f"could not write PGM image to {path}: {e}") from e


def read_image(path, slice_index=0):
    """Load a single image from PGM, MRC/MRCS (one slice) or NumPy ``.npy`` files."""
    suffix = os.path.splitext(str(path))[1].lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix in (".mrc", ".mrcs"):
        stack = read_mrc(path)
        if not 0 <= slice_index < len(stack):
            raise DomainError(f"{path} holds {len(stack)} slices, slice {slice_index} requested")
        return stack[slice_index].astype(np.float64)
    if suffix == ".npy":
        return np.load(path)
    raise UnsupportedFormat(f"{path}: unknown image format {suffix!r}, use .pgm, .mrc, .mrcs or .npy")


def centers_frame(results):
    return pd.DataFrame([{column: result[column] for column in CENTER_COLUMNS} for result in results], columns=CENTER_COLUMNS)


def write_centers(results, path):
    """CSV of per-particle centers in the order given."""
    try:
        centers_frame(results).to_csv(path, index=False)
    except OSError as e:
        raise OSError(f"could not write centers to {path}: {e}") from e
