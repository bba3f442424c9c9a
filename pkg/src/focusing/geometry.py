"""Source and control-point layouts, and two-point path-length metrics.

Angles are radians in the Python API and degrees in JSON documents (keys
end in ``_deg``). The listener's interaural axis is +y, forward is +x, and
control point 1 sits at +y before any head rotation.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import ClassVar

import numpy as np

from .acoustics import MIN_DISTANCE, CoincidentPointsError, direction, ula_positions


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Layout:
    sources: np.ndarray
    points: np.ndarray
    far_side: str = "sources"
    R: float = 1.0

    @property
    def L(self):
        return len(self.sources)

    @property
    def M(self):
        return len(self.points)


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise GeometryError(f"{name} must be positive, got {value}")


def _interaural_pair(a, rotation):
    x1 = a * np.array([-np.sin(rotation), np.cos(rotation), 0.0])
    return np.array([x1, -x1])


@dataclass(frozen=True)
class TwoChannelSymmetric:
    """Two sources at +-gamma on a circle of radius r; ears at radius a.

    ``rotation`` turns the ears about z (head rotation); 0 keeps the
    mirror-symmetric layout.
    """

    variant: ClassVar[str] = "two_channel_symmetric"
    a: float
    gamma: float
    r: float = 1.0
    rotation: float = 0.0

    def validate(self):
        _positive("a", self.a)
        _positive("r", self.r)
        if self.r <= self.a:
            raise GeometryError("sources must lie outside the head radius")

    def build(self):
        src = self.r * direction(np.array([self.gamma, -self.gamma]))
        return Layout(src, _interaural_pair(self.a, self.rotation), "sources", self.r)


@dataclass(frozen=True)
class TwoChannelGeneral:
    variant: ClassVar[str] = "two_channel_general"
    sources: tuple
    points: tuple

    def validate(self):
        if np.shape(self.sources) != (2, 3) or np.shape(self.points) != (2, 3):
            raise GeometryError("two-channel geometry needs 2 sources and 2 points in 3-D")

    def build(self):
        src = np.asarray(self.sources, float)
        pts = np.asarray(self.points, float)
        return Layout(src, pts, "sources", float(np.mean(np.linalg.norm(src, axis=1))))


@dataclass(frozen=True)
class UPDA:
    """Symmetric uniform path-length-difference array.

    Sources sit on a circle of radius ``R`` at angles gamma_l with
    2 a sin(gamma_l) uniformly spaced over [-eta_max, eta_max]. By default
    eta_max = 2 a sin(span / 2).
    """

    variant: ClassVar[str] = "upda"
    L: int
    span: float
    a: float
    R: float = 1.0
    eta_max: float | None = None

    def validate(self):
        if int(self.L) != self.L or self.L < 2:
            raise GeometryError(f"UPDA needs an integer L >= 2, got {self.L}")
        _positive("a", self.a)
        _positive("R", self.R)
        if not 0 < self.span <= np.pi + 1e-12:
            raise GeometryError(f"span must lie in (0, 180] degrees, got {np.degrees(self.span)}")
        if self.eta_max is not None:
            _positive("eta_max", self.eta_max)
            if self.eta_max > 2 * self.a * (1 + 1e-12):
                raise GeometryError(
                    f"eta_max = {self.eta_max} needs |sin gamma| > 1 (limit 2a = {2 * self.a})"
                )

    @property
    def eta_max_target(self):
        if self.eta_max is not None:
            return self.eta_max
        return 2 * self.a * np.sin(self.span / 2)

    def angles(self):
        eta = np.linspace(-1.0, 1.0, int(self.L)) * self.eta_max_target
        return np.arcsin(np.clip(eta / (2 * self.a), -1.0, 1.0))

    def build(self):
        src = self.R * direction(self.angles())
        return Layout(src, _interaural_pair(self.a, 0.0), "sources", self.R)


@dataclass(frozen=True)
class ULA:
    """Uniform linear array on the y axis with far-field control directions.

    Control points are placed at distance ``R`` so that a monopole model can
    be evaluated on them; the plane-wave model only uses their directions.
    """

    variant: ClassVar[str] = "ula"
    L: int
    dx: float
    control_angles: tuple
    R: float = 100.0

    def validate(self):
        if int(self.L) != self.L or self.L < 2:
            raise GeometryError(f"ULA needs an integer L >= 2, got {self.L}")
        _positive("dx", self.dx)
        _positive("R", self.R)
        if len(self.control_angles) < 1:
            raise GeometryError("ULA needs at least one control direction")

    @property
    def aperture(self):
        return (self.L - 1) * self.dx

    @property
    def length(self):
        """L dx, the array length plus one spacing."""
        return self.L * self.dx

    def build(self):
        src = ula_positions(int(self.L), self.dx)
        pts = self.R * direction(np.asarray(self.control_angles, float))
        return Layout(src, np.atleast_2d(pts), "points", self.R)


@dataclass(frozen=True)
class Arbitrary:
    variant: ClassVar[str] = "arbitrary"
    sources: tuple
    points: tuple
    far_side: str = "sources"

    def validate(self):
        s, p = np.asarray(self.sources, float), np.asarray(self.points, float)
        if s.ndim != 2 or s.shape[1] != 3 or p.ndim != 2 or p.shape[1] != 3:
            raise GeometryError("sources and points must be lists of 3-D coordinates")
        if len(s) < 1 or len(p) < 1:
            raise GeometryError("need at least one source and one point")

    def build(self):
        src = np.asarray(self.sources, float)
        pts = np.asarray(self.points, float)
        far = src if self.far_side == "sources" else pts
        return Layout(src, pts, self.far_side, float(np.mean(np.linalg.norm(far, axis=1))))


VARIANTS = {cls.variant: cls for cls in (TwoChannelSymmetric, TwoChannelGeneral, UPDA, ULA, Arbitrary)}
_ANGLE_FIELDS = {"gamma", "rotation", "span", "control_angles"}


def build_geometry(layout):
    """Concrete source and control-point coordinates for a layout description."""
    layout.validate()
    return layout.build()


def geometry_from_dict(doc):
    """Parse a JSON-style mapping; angle keys are given in degrees."""
    doc = dict(doc)
    try:
        cls = VARIANTS[doc.pop("variant")]
    except KeyError as exc:
        raise GeometryError(f"unknown or missing geometry variant: {exc}") from None
    kwargs = {}
    for key, value in doc.items():
        if key.endswith("_deg") and key[:-4] in _ANGLE_FIELDS:
            name = key[:-4]
            value = tuple(np.radians(value)) if isinstance(value, list) else float(np.radians(value))
        elif key in ("sources", "points"):
            name, value = key, tuple(tuple(map(float, row)) for row in value)
        else:
            name = key
        kwargs[name] = value
    try:
        layout = cls(**kwargs)
    except TypeError as exc:
        raise GeometryError(f"bad fields for {cls.variant}: {exc}") from None
    layout.validate()
    return layout


def geometry_to_dict(layout):
    out = {"variant": layout.variant}
    for key, value in asdict(layout).items():
        if value is None:
            continue
        if key in _ANGLE_FIELDS:
            out[key + "_deg"] = (
                [float(np.degrees(v)) for v in value]
                if isinstance(value, (tuple, list))
                else float(np.degrees(value))
            )
        elif isinstance(value, (tuple, list)):
            out[key] = [list(map(float, v)) if np.ndim(v) else float(v) for v in value]
        else:
            out[key] = value
    return out


def load_geometry(path):
    with open(path) as fh:
        return geometry_from_dict(json.load(fh))


@dataclass(frozen=True)
class PathMetrics:
    """Per-source path-length differences eta_l = R_2l - R_1l and products
    xi_l = R_1l R_2l for a pair of control points."""

    eta: np.ndarray
    xi: np.ndarray
    eta_max: float
    delta_eta: float
    extra: dict = field(default_factory=dict)

    @property
    def is_uniform(self):
        d = np.diff(np.sort(self.eta))
        return bool(d.size == 0 or np.ptp(d) <= 1e-12)


def path_metrics(sources, x1, x2):
    sources = np.atleast_2d(np.asarray(sources, float))
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    if np.linalg.norm(x1 - x2) <= MIN_DISTANCE:
        raise CoincidentPointsError("control points coincide")
    R1 = np.linalg.norm(sources - x1, axis=1)
    R2 = np.linalg.norm(sources - x2, axis=1)
    if np.any(R1 <= MIN_DISTANCE) or np.any(R2 <= MIN_DISTANCE):
        raise CoincidentPointsError("a source coincides with a control point")
    eta = R2 - R1
    eta_max = float(np.max(np.abs(eta)))
    L = len(sources)
    delta = 2 * eta_max / (L - 1) if L > 1 else 0.0
    return PathMetrics(eta, R1 * R2, eta_max, delta)
