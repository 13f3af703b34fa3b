"""Binary serialization for single density matrices.

Format (little-endian throughout):

  offset  size  field
  0       4     magic ``b"Q3ST"``
  4       1     version, currently 1
  5       4     uint32 matrix dimension d
  9       16*d*d  row-major float64 (re, im) pairs

Round-trips are exact: float64 values are stored bit-for-bit.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"Q3ST"
VERSION = 1


def state_to_bytes(rho: np.ndarray) -> bytes:
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise FormatError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    header = MAGIC + struct.pack("<BI", VERSION, d)
    interleaved = np.empty((d, d, 2), dtype="<f8")
    interleaved[..., 0] = m.real
    interleaved[..., 1] = m.imag
    return header + interleaved.tobytes()


def state_from_bytes(blob: bytes) -> np.ndarray:
    if len(blob) < 9:
        raise FormatError(f"truncated state record: {len(blob)} bytes")
    if blob[:4] != MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}")
    version, d = struct.unpack("<BI", blob[4:9])
    if version != VERSION:
        raise FormatError(f"unsupported state format version {version}")
    expected = 9 + 16 * d * d
    if len(blob) != expected:
        raise FormatError(f"state record has {len(blob)} bytes, expected {expected} for dim {d}")
    flat = np.frombuffer(blob, dtype="<f8", offset=9)
    pairs = flat.reshape(d, d, 2)
    return (pairs[..., 0] + 1j * pairs[..., 1]).astype(complex)


def save_state(path: str | Path, rho: np.ndarray) -> None:
    Path(path).write_bytes(state_to_bytes(rho))


def load_state(path: str | Path) -> np.ndarray:
    return state_from_bytes(Path(path).read_bytes())
