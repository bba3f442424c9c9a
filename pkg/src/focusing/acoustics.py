"""Free-field transfer-function models and focusing-quality functionals.

Phase convention is the outgoing wave e^{-jkR}/R; the 1/(4 pi) factor is
dropped everywhere since every reported quantity is scale-invariant.

Coordinates are right-handed Cartesian metres. Horizontal-plane angles are
measured from the +x axis (forward) towards +y, so a direction at angle
``phi`` is (cos phi, sin phi, 0).
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .linalg import ZeroVectorError

SPEED_OF_SOUND = 343.0
MIN_DISTANCE = 1e-9


class CoincidentPointsError(ValueError):
    pass


@dataclass(frozen=True)
class Wavenumber:
    """Wavenumber k = 2 pi f / c in rad/m."""

    k: float
    c: float = SPEED_OF_SOUND

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValueError(f"wavenumber must be positive and finite, got {self.k}")
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"speed of sound must be positive, got {self.c}")

    @classmethod
    def from_frequency(cls, f, c=SPEED_OF_SOUND):
        if not f > 0:
            raise ValueError(f"frequency must be positive, got {f}")
        return cls(2 * np.pi * f / c, c)

    @classmethod
    def from_wavelength(cls, wavelength, c=SPEED_OF_SOUND):
        if not wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {wavelength}")
        return cls(2 * np.pi / wavelength, c)

    @classmethod
    def from_mu(cls, mu, a, c=SPEED_OF_SOUND):
        """From the non-dimensional frequency mu = k a."""
        return cls(mu / a, c)

    @property
    def frequency(self):
        return self.k * self.c / (2 * np.pi)

    @property
    def wavelength(self):
        return 2 * np.pi / self.k

    def mu(self, a):
        return self.k * a


@dataclass(frozen=True)
class AcousticModel:
    """Element transfer-function model.

    ``kind`` is ``"monopole"`` (point sources in free field) or
    ``"planewave"`` (far-field limit). For plane waves, ``far_side`` says
    which set of locations is far away and therefore only a direction:
    ``"sources"`` for loudspeakers around a listener, ``"points"`` for
    control directions in front of an array. ``R`` is the common far-field
    distance in the factor delta = e^{-jkR}/R.
    """

    kind: Literal["monopole", "planewave"]
    k: Wavenumber
    R: float = 1.0
    far_side: Literal["sources", "points"] = "sources"

    def __post_init__(self):
        if self.kind not in ("monopole", "planewave"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.far_side not in ("sources", "points"):
            raise ValueError(f"far_side must be 'sources' or 'points', got {self.far_side!r}")
        if self.kind == "planewave" and not self.R > 0:
            raise ValueError(f"far-field distance must be positive, got {self.R}")

    @property
    def delta(self):
        kk = self.k.k
        return np.exp(-1j * kk * self.R) / self.R


def _kval(k):
    return k.k if isinstance(k, Wavenumber) else float(k)


def monopole_tf(source, receiver, k):
    """Free-field monopole e^{-jkR}/R between two points."""
    R = float(np.linalg.norm(np.asarray(source, float) - np.asarray(receiver, float)))
    if R <= MIN_DISTANCE:
        raise CoincidentPointsError(f"source and receiver coincide (R = {R:.3e} m)")
    return np.exp(-1j * _kval(k) * R) / R


def plane_wave_tf(direction, x, k, R=1.0):
    """Far-field plane wave (e^{-jkR}/R) e^{jk n.x} from unit direction n."""
    n = np.asarray(direction, float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    kk = _kval(k)
    return np.exp(-1j * kk * R) / R * np.exp(1j * kk * np.dot(n, np.asarray(x, float)))


def unit(v):
    v = np.asarray(v, float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ZeroVectorError("cannot normalise a zero vector")
    return v / n


def transfer_matrix(model, sources, points):
    """Vectorised transfer functions, shape (len(points), len(sources))."""
    sources = np.atleast_2d(np.asarray(sources, float))
    points = np.atleast_2d(np.asarray(points, float))
    kk = model.k.k
    if model.kind == "monopole":
        R = np.linalg.norm(points[:, None, :] - sources[None, :, :], axis=-1)
        if np.any(R <= MIN_DISTANCE):
            m, l = np.argwhere(R <= MIN_DISTANCE)[0]
            raise CoincidentPointsError(f"control point {m} coincides with source {l}")
        return np.exp(-1j * kk * R) / R
    if model.far_side == "sources":
        dirs, pos = unit(sources), points
        phase = pos @ dirs.T
    else:
        dirs, pos = unit(points), sources
        phase = dirs @ pos.T
    return model.delta * np.exp(1j * kk * phase)


@dataclass(frozen=True)
class PlantMatrix:
    """M x L transfer-function matrix with the geometry it came from."""

    G: np.ndarray
    sources: np.ndarray
    points: np.ndarray
    model: AcousticModel
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.G.shape

    @property
    def frequency(self):
        return self.model.k.frequency


def build_plant(model, sources, points, meta=None):
    """Plant G[m, l] = transfer function from source l to control point m."""
    sources = np.atleast_2d(np.asarray(sources, float))
    points = np.atleast_2d(np.asarray(points, float))
    M, L = len(points), len(sources)
    if not 1 <= M <= L:
        raise ValueError(f"need L >= M >= 1, got M={M}, L={L}")
    G = transfer_matrix(model, sources, points)
    return PlantMatrix(G, sources, points, model, dict(meta or {}))


def beamforming_gain(x, x0, model, sources):
    """Normalised beamforming gain |g(x0)^H g(x)| / (|g(x)| |g(x0)|).

    Equal to the cosine of the Hermitian angle between the two field vectors.
    """
    g = transfer_matrix(model, sources, [x, x0])
    n = np.linalg.norm(g, axis=1)
    if np.any(n == 0):
        raise ZeroVectorError("transfer-function vector is zero")
    return float(min(abs(np.vdot(g[1], g[0])) / (n[0] * n[1]), 1.0))


def ula_positions(L, dx):
    """Element positions of a centred ULA along the y axis (broadside +x)."""
    offsets = (np.arange(L) - (L - 1) / 2) * dx
    return np.column_stack([np.zeros(L), offsets, np.zeros(L)])


def direction(angle):
    """Unit vector(s) in the horizontal plane at ``angle`` radians from +x."""
    angle = np.asarray(angle, float)
    return np.stack([np.cos(angle), np.sin(angle), np.zeros_like(angle)], axis=-1)


def ula_steering(theta, L, dx, k):
    """Unit plane-wave transfer functions e^{jk y_l sin(theta)} of a ULA."""
    y = ula_positions(L, dx)[:, 1]
    return np.exp(1j * _kval(k) * y * np.sin(theta))


def ula_directivity(theta, theta0, L, alpha):
    """Far-field ULA directivity |sin(pi s/alpha) / (L sin(pi s/(L alpha)))|.

    ``s = sin(theta) - sin(theta0)``. Grating-lobe directions, where the
    denominator vanishes, return the limit 1.
    """
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    u = (np.sin(theta) - np.sin(theta0)) / (L * alpha)
    # sin(pi L u) = +-sin(pi L r) when u = round(u) + r, so work with r
    r = u - np.round(u)
    small = np.abs(np.pi * r) < 1e-8
    r_safe = np.where(small, 0.5, r)
    val = np.abs(np.sin(np.pi * L * r_safe) / (L * np.sin(np.pi * r_safe)))
    val = np.where(small, 1.0, val)
    return float(val) if np.ndim(val) == 0 else val
