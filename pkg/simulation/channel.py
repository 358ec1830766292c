"""
Multipath mmWave channels: UPA channels for transmitter-side diagnosis and
ULA-to-ULA channels for joint transmitter/receiver diagnosis.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

import config
from diagnosis.errors import DimensionMismatch


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar (n_x by n_y) or linear (n_x elements) array."""

    kind: str
    n_x: int
    n_y: int = 1
    d_x: float = config.ANTENNA_SPACING
    d_y: float = config.ANTENNA_SPACING

    def __post_init__(self):
        if self.kind not in ("upa", "ula"):
            raise ValueError("array kind must be 'upa' or 'ula', got {}".format(self.kind))
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("element counts must be >= 1")
        if self.d_x <= 0 or self.d_y <= 0:
            raise ValueError("element spacings must be > 0")
        if self.kind == "ula" and self.n_y != 1:
            raise ValueError("a ULA has a single column")

    @classmethod
    def upa(cls, n_x, n_y, d_x=config.ANTENNA_SPACING, d_y=config.ANTENNA_SPACING):
        return cls("upa", int(n_x), int(n_y), float(d_x), float(d_y))

    @classmethod
    def ula(cls, n, d=config.ANTENNA_SPACING):
        return cls("ula", int(n), 1, float(d), float(d))

    @property
    def shape(self):
        return (self.n_x, self.n_y)

    @property
    def n_antennas(self):
        return self.n_x * self.n_y

    def to_dict(self):
        return {
            "kind": self.kind,
            "n_x": self.n_x,
            "n_y": self.n_y,
            "d_x": self.d_x,
            "d_y": self.d_y,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], int(d["n_x"]), int(d.get("n_y", 1)),
                   float(d.get("d_x", config.ANTENNA_SPACING)),
                   float(d.get("d_y", config.ANTENNA_SPACING)))


@dataclass(frozen=True)
class PathSet:
    """
    Path parameters. UPA channels use (elevation, azimuth) departure angles,
    ULA channels use (departure, arrival) angles.
    """

    gains: np.ndarray
    elevation: Optional[np.ndarray] = None
    azimuth: Optional[np.ndarray] = None
    departure: Optional[np.ndarray] = None
    arrival: Optional[np.ndarray] = None

    def __post_init__(self):
        L = len(self.gains)
        if L < 1:
            raise ValueError("a path set needs at least one path")
        for name in ("elevation", "azimuth", "departure", "arrival"):
            angles = getattr(self, name)
            if angles is None:
                continue
            if len(angles) != L:
                raise DimensionMismatch(
                    "{} has {} entries for {} paths".format(name, len(angles), L)
                )
            if np.any(np.abs(angles) > np.pi / 2 + 1e-12):
                raise ValueError("{} angles must lie in [-pi/2, pi/2]".format(name))

    @property
    def n_paths(self):
        return len(self.gains)


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray
    geometry: Union[ArrayGeometry, Tuple[ArrayGeometry, ArrayGeometry]]
    paths: PathSet


def upa_response(theta, phi, geom):
    """N_x x N_y UPA response A(theta, phi), Frobenius norm 1."""
    if geom.kind != "upa":
        raise ValueError("upa_response needs a UPA geometry")
    m = np.arange(geom.n_x)[:, None]
    n = np.arange(geom.n_y)[None, :]
    phase_x = 2 * np.pi * geom.d_x * np.sin(theta) * np.cos(phi)
    phase_y = 2 * np.pi * geom.d_y * np.sin(theta) * np.sin(phi)
    A = np.exp(1j * m * phase_x) * np.exp(1j * n * phase_y)
    return A / np.sqrt(geom.n_x * geom.n_y)


def ula_steering(theta, geom):
    """Unnormalised ULA steering vector [1, e^{-j2pi d sin(theta)}, ...]."""
    if geom.kind != "ula":
        raise ValueError("ula_steering needs a ULA geometry")
    n = np.arange(geom.n_x)
    return np.exp(-1j * 2 * np.pi * n * geom.d_x * np.sin(theta))


def complex_gaussian(rng, size, var=1.0):
    """CN(0, var) samples: independent N(0, var/2) real and imaginary parts."""
    return np.sqrt(var / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def draw_upa_paths(L, rng):
    if L < 1:
        raise ValueError("number of paths must be >= 1")
    gains = complex_gaussian(rng, L)
    elevation = rng.uniform(-np.pi / 2, np.pi / 2, L)
    azimuth = rng.uniform(-np.pi / 2, np.pi / 2, L)
    return PathSet(gains=gains, elevation=elevation, azimuth=azimuth)


def draw_ula_paths(L, rng):
    if L < 1:
        raise ValueError("number of paths must be >= 1")
    gains = complex_gaussian(rng, L)
    departure = rng.uniform(-np.pi / 2, np.pi / 2, L)
    arrival = rng.uniform(-np.pi / 2, np.pi / 2, L)
    return PathSet(gains=gains, departure=departure, arrival=arrival)


def upa_channel(geom, paths):
    H = np.zeros(geom.shape, dtype=np.complex128)
    for beta, theta, phi in zip(paths.gains, paths.elevation, paths.azimuth):
        H += beta * upa_response(theta, phi, geom)
    return ChannelRealization(H=H, geometry=geom, paths=paths)


def ula_channel(geom_r, geom_t, paths):
    H = np.zeros((geom_r.n_antennas, geom_t.n_antennas), dtype=np.complex128)
    for beta, theta_t, theta_r in zip(paths.gains, paths.departure, paths.arrival):
        a_r = ula_steering(theta_r, geom_r)
        a_t = ula_steering(theta_t, geom_t)
        H += beta * np.outer(a_r, a_t.conj())
    return ChannelRealization(H=H, geometry=(geom_r, geom_t), paths=paths)


def gen_upa_channel(geom, L, rng):
    return upa_channel(geom, draw_upa_paths(L, rng))


def gen_ula_channel(geom_r, geom_t, L, rng):
    return ula_channel(geom_r, geom_t, draw_ula_paths(L, rng))
