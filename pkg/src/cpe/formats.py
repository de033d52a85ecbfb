"""Binary embedding and attention-map files.

Two tiny little-endian formats, both fixed-layout so other tooling can read
and write them without this package:

CPEB (embedding matrix)
    magic   4 bytes  43 50 45 42 ("CPEB")
    version u16      1
    dtype   u8       0 = float32
    reserved u8      0
    n_rows  u32
    dim     u32
    payload n_rows * dim float32, row-major

CPEA (attention map)
    magic   4 bytes  43 50 45 41 ("CPEA")
    version u16      1
    height  u32
    width   u32
    payload height * width float32, row-major, all values >= 0

Payloads round-trip bit-exactly: loading keeps the stored float32 array; any
higher-precision math downstream casts a copy.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError
from .validation import UNIT_NORM_ATOL

CPEB_MAGIC = b"CPEB"
CPEA_MAGIC = b"CPEA"
_CPEB_HEADER = struct.Struct("<4sHBBII")
_CPEA_HEADER = struct.Struct("<4sHII")
_VERSION = 1
_DTYPE_F32 = 0

# Caps the header-claimed element count; anything above this is a corrupt or
# hostile header, not a real fixture.
_MAX_ELEMENTS = 1 << 31


@dataclass
class EmbeddingSet:
    """A dense block of row embeddings plus identity and normalization state."""

    values: np.ndarray  # (rows, dim) float32
    set_id: str = ""
    normalized: bool = True

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise DataError(f"EmbeddingSet {self.set_id!r}: values must be 2-D")
        if self.rows < 1 or self.dim < 1:
            raise DataError(f"EmbeddingSet {self.set_id!r}: empty shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DataError(f"EmbeddingSet {self.set_id!r}: non-finite entries")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def as_float64(self) -> np.ndarray:
        return self.values.astype(np.float64)


def save_embedding_set(es: EmbeddingSet, path: str | Path) -> None:
    path = Path(path)
    header = _CPEB_HEADER.pack(
        CPEB_MAGIC, _VERSION, _DTYPE_F32, 0, es.rows, es.dim
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(es.values.tobytes())


def load_embedding_set(
    path: str | Path, expect_normalized: bool = True
) -> EmbeddingSet:
    """Read a CPEB file.

    Normalization is a property of ingestion, not of loading, so rows are
    checked against the expectation rather than silently re-normalized; a
    failed check means the file was produced wrong.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _CPEB_HEADER.size or raw[:4] != CPEB_MAGIC:
        raise FormatError(f"not a CPEB file: {path}")
    magic, version, dtype, reserved, n_rows, dim = _CPEB_HEADER.unpack_from(raw)
    if version != _VERSION:
        raise FormatError(f"unsupported CPEB version {version}: {path}")
    if dtype != _DTYPE_F32:
        raise FormatError(f"unsupported CPEB dtype tag {dtype}: {path}")
    if n_rows < 1 or dim < 1 or n_rows * dim > _MAX_ELEMENTS:
        raise FormatError(
            f"unreasonable CPEB header ({n_rows} rows x {dim} dim): {path}"
        )
    expected = _CPEB_HEADER.size + 4 * n_rows * dim
    if len(raw) < expected:
        raise FormatError(f"truncated CPEB payload in {path}")
    if len(raw) > expected:
        raise FormatError(f"trailing bytes after CPEB payload in {path}")
    values = np.frombuffer(
        raw, dtype="<f4", count=n_rows * dim, offset=_CPEB_HEADER.size
    ).reshape(n_rows, dim)
    es = EmbeddingSet(values.copy(), set_id=path.stem, normalized=expect_normalized)
    if expect_normalized:
        norms = np.linalg.norm(es.as_float64(), axis=1)
        bad = np.abs(norms - 1.0) > UNIT_NORM_ATOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DataError(
                f"embedding row {i} in {path} is not unit-normalized "
                f"(norm={norms[i]:.6g})"
            )
    return es


def save_attention_map(values: np.ndarray, path: str | Path) -> None:
    values = np.ascontiguousarray(values, dtype=np.float32)
    if values.ndim != 2:
        raise DataError("attention map must be 2-D")
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise DataError("attention map must be finite and >= 0")
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(_CPEA_HEADER.pack(CPEA_MAGIC, _VERSION, h, w))
        fh.write(values.tobytes())


def load_attention_map(path: str | Path) -> np.ndarray:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _CPEA_HEADER.size or raw[:4] != CPEA_MAGIC:
        raise FormatError(f"not a CPEA file: {path}")
    magic, version, h, w = _CPEA_HEADER.unpack_from(raw)
    if version != _VERSION:
        raise FormatError(f"unsupported CPEA version {version}: {path}")
    if h < 1 or w < 1 or h * w > _MAX_ELEMENTS:
        raise FormatError(f"unreasonable CPEA header ({h} x {w}): {path}")
    expected = _CPEA_HEADER.size + 4 * h * w
    if len(raw) < expected:
        raise FormatError(f"truncated CPEA payload in {path}")
    if len(raw) > expected:
        raise FormatError(f"trailing bytes after CPEA payload in {path}")
    values = np.frombuffer(raw, dtype="<f4", count=h * w, offset=_CPEA_HEADER.size)
    values = values.reshape(h, w).copy()
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise DataError(f"attention map {path} has negative or non-finite values")
    return values
