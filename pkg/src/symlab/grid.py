"""Periodic sample grids for (systems of) functions on [-L, L)^d, d = 1 or 2.

Binary layout (little endian): magic ``SYMG``, u16 version, u16 dims,
u32 components, u32 points per axis, u32 snapshots, f64 L, then complex128
values in C order with shape (snapshots, components, n[, n]). A JSON
sidecar repeats the header and stores the snapshot times.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError

MAGIC = b"SYMG"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHIIId")


@dataclass
class GridFunction:
    """Samples u(x) of an ``ncomp``-component function, shape (ncomp, n[, n])."""

    values: np.ndarray
    L: float = np.pi

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim not in (2, 3):
            raise DomainError("values must have shape (ncomp, n) or (ncomp, n, n)")
        n = v.shape[1]
        if n < 2 or n & (n - 1) or any(s != n for s in v.shape[1:]):
            raise DomainError(f"points per axis must be a common power of two, got {v.shape[1:]}")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must be finite")
        if not self.L > 0:
            raise DomainError("half-period L must be positive")
        self.values = v
        self.L = float(self.L)

    # -- geometry ------------------------------------------------------------

    @property
    def dims(self) -> int:
        return self.values.ndim - 1

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return np.fft.fftfreq(self.n, d=self.h) * 2 * np.pi

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.x] * self.dims), indexing="ij")

    def kmesh(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.k] * self.dims), indexing="ij")

    def kabs(self) -> np.ndarray:
        return np.sqrt(sum(k * k for k in self.kmesh()))

    # -- algebra -------------------------------------------------------------

    def like(self, values) -> "GridFunction":
        return GridFunction(np.asarray(values), self.L)

    def fft(self) -> np.ndarray:
        return np.fft.fftn(self.values, axes=self._axes())

    def from_fft(self, vhat) -> "GridFunction":
        return self.like(np.fft.ifftn(vhat, axes=self._axes()))

    def _axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.dims + 1))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.h ** self.dims))

    def inner(self, other: "GridFunction") -> complex:
        """(u, v) = integral of v^* u."""
        return complex(np.sum(self.values * np.conj(other.values)) * self.h ** self.dims)

    def derivative(self, axis: int = 0) -> "GridFunction":
        """Spectral derivative along ``axis`` (the Nyquist mode is zeroed)."""
        k = self.kmesh()[axis].copy()
        if self.n % 2 == 0:
            k[np.isclose(np.abs(k), self.nyquist)] = 0.0
        return self.from_fft(1j * k * self.fft())

    def __add__(self, other):
        return self.like(self.values + (other.values if isinstance(other, GridFunction) else other))

    def __sub__(self, other):
        return self.like(self.values - (other.values if isinstance(other, GridFunction) else other))

    def __mul__(self, c):
        return self.like(self.values * c)

    __rmul__ = __mul__

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_function(cls, fn, n: int, L: float = np.pi, dims: int = 1) -> "GridFunction":
        x = -L + 2 * L / n * np.arange(n)
        mesh = np.meshgrid(*([x] * dims), indexing="ij")
        return cls(np.asarray(fn(*mesh)), L)

    @classmethod
    def band_limited_noise(cls, rng: np.random.Generator, n: int, L: float = np.pi, dims: int = 1,
                           ncomp: int = 1, kmax: float | None = None) -> "GridFunction":
        """Complex white noise with Fourier support in |k| <= kmax (default Nyquist/2)."""
        shape = (ncomp,) + (n,) * dims
        g = cls(np.zeros(shape), L)
        kmax = g.nyquist / 2 if kmax is None else kmax
        vhat = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        vhat[:, g.kabs() > kmax] = 0.0
        return g.from_fft(vhat)

    # -- serialization -------------------------------------------------------

    def to_bytes(self) -> bytes:
        return encode_snapshots([self])

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridFunction":
        snaps, _ = decode_snapshots(data)
        if len(snaps) != 1:
            raise DomainError(f"expected one snapshot, found {len(snaps)}")
        return snaps[0]

    def save(self, path) -> None:
        save_trajectory(path, [self], [0.0])


def encode_snapshots(snaps: Sequence[GridFunction]) -> bytes:
    if not snaps:
        raise DomainError("no snapshots to encode")
    g = snaps[0]
    for s in snaps:
        if s.values.shape != g.values.shape or s.L != g.L:
            raise DomainError("snapshots must share grid and component count")
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, g.dims, g.ncomp, g.n, len(snaps), g.L)
    body = np.stack([s.values for s in snaps]).astype("<c16").tobytes()
    return head + body


def decode_snapshots(data: bytes) -> tuple[list[GridFunction], dict]:
    if len(data) < _HEADER.size:
        raise DomainError("truncated grid file")
    magic, version, dims, ncomp, n, nt, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DomainError("not a grid file (bad magic)")
    if version != FORMAT_VERSION:
        raise DomainError(f"unsupported grid format version {version}")
    shape = (nt, ncomp) + (n,) * dims
    count = int(np.prod(shape))
    body = data[_HEADER.size:]
    if len(body) != 16 * count:
        raise DomainError("grid file size does not match header")
    vals = np.frombuffer(body, dtype="<c16").reshape(shape)
    header = {"dims": dims, "ncomp": ncomp, "n": n, "snapshots": nt, "L": L, "version": version}
    return [GridFunction(v.copy(), L) for v in vals], header


def save_trajectory(path, snaps: Sequence[GridFunction], times: Sequence[float]) -> None:
    """Write ``path`` (binary) and ``path.json`` (sidecar)."""
    path = Path(path)
    if len(times) != len(snaps):
        raise DomainError("one time per snapshot required")
    path.write_bytes(encode_snapshots(snaps))
    g = snaps[0]
    meta = {"format": "SYMG", "version": FORMAT_VERSION, "dims": g.dims, "ncomp": g.ncomp, "n": g.n,
            "L": g.L, "times": [float(t) for t in times]}
    path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_trajectory(path) -> tuple[list[GridFunction], list[float]]:
    path = Path(path)
    snaps, header = decode_snapshots(path.read_bytes())
    side = path.with_name(path.name + ".json")
    times = list(range(len(snaps)))
    if side.exists():
        meta = json.loads(side.read_text())
        for key in ("dims", "ncomp", "n"):
            if meta.get(key) != header[key]:
                raise DomainError(f"sidecar disagrees with header on {key!r}")
        times = meta["times"]
    return snaps, [float(t) for t in times]
