"""Named geometries and frequencies for the reference field maps fig5a to fig12c.

Two-channel and UPDA presets use a = 0.09 m, c = 343 m/s and sources on a
1 m circle. ULA presets use L = 20, dx = 0.012 m.
"""

from dataclasses import dataclass

import numpy as np

from .acoustics import SPEED_OF_SOUND, AcousticModel, Wavenumber, build_plant
from .conditions import (
    asymmetric_design,
    osd_wavelength_for_span,
    ula_design,
    ula_symmetric_limits,
    upda_zeros,
)
from .geometry import UPDA, ULA, TwoChannelSymmetric, build_geometry

HEAD_RADIUS = 0.09
ULA_L = 20
ULA_DX = 0.012


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    geometry: object
    frequency: float
    model: str = "planewave"
    focus: int = 0
    a: float | None = HEAD_RADIUS
    c: float = SPEED_OF_SOUND

    def layout(self):
        return build_geometry(self.geometry)

    def acoustic_model(self, kind=None, frequency=None):
        lay = self.layout()
        k = Wavenumber.from_frequency(frequency or self.frequency, self.c)
        return AcousticModel(kind or self.model, k, R=lay.R, far_side=lay.far_side)

    def plant(self, kind=None, frequency=None):
        lay = self.layout()
        return build_plant(self.acoustic_model(kind, frequency), lay.sources, lay.points)


def _osd(span_deg):
    span = np.radians(span_deg)
    lam = osd_wavelength_for_span(span, HEAD_RADIUS)
    return TwoChannelSymmetric(HEAD_RADIUS, span / 2, 1.0), SPEED_OF_SOUND / lam


def _asym(rotation_deg, gamma_deg=30.0):
    geo = TwoChannelSymmetric(HEAD_RADIUS, np.radians(gamma_deg), 1.0, np.radians(rotation_deg))
    lay = geo.build()
    n1, n2 = lay.sources / np.linalg.norm(lay.sources, axis=1, keepdims=True)
    d = asymmetric_design(n1, n2, lay.points[0])
    return geo, SPEED_OF_SOUND / d.wavelength


def _upda(L, span_deg, n):
    span = np.radians(span_deg)
    d = upda_zeros(L, HEAD_RADIUS, span / 2, n)
    return UPDA(L, span, HEAD_RADIUS, 1.0), SPEED_OF_SOUND / d.wavelength


def _ula_offsets(f, offsets):
    d = ula_design(ULA_L, ULA_DX, SPEED_OF_SOUND / f, offsets)
    return ULA(ULA_L, ULA_DX, d.angles), f


def _ula_symmetric(f):
    lim = ula_symmetric_limits(ULA_L, ULA_DX, SPEED_OF_SOUND / f)
    return ULA(ULA_L, ULA_DX, lim.angles), f


def _build():
    out = {}

    def add(name, description, built, **kw):
        geo, f = built
        out[name] = Preset(name, description, geo, f, **kw)

    add("fig5a", "symmetric two-channel, span 11 deg", _osd(11))
    add("fig5b", "symmetric two-channel, span 57 deg", _osd(57))
    add("fig5c", "symmetric two-channel, span 120 deg", _osd(120))
    add("fig5d", "symmetric two-channel, span 180 deg (lowest super-ideal frequency)", _osd(180))
    f6 = 0.41 * SPEED_OF_SOUND / (2 * np.pi * HEAD_RADIUS)
    add("fig6", "span 180 deg below the super-ideal limit, mu = 0.41",
        (TwoChannelSymmetric(HEAD_RADIUS, np.pi / 2, 1.0), f6))
    add("fig7a", "sources at +-30 deg, head rotated 30 deg", _asym(30))
    add("fig7b", "sources at +-30 deg, head rotated 70 deg", _asym(70))
    add("fig10a", "UPDA L = 20, span 60 deg, fourth zero", _upda(20, 60, 4))
    add("fig10b", "UPDA L = 5, span 60 deg, fourth zero", _upda(5, 60, 4))
    add("fig11", "ULA L = 20, three control directions, offsets -2, 0, 2", _ula_offsets(4899.0, (-2, 0, 2)),
        focus=1, a=None)
    add("fig12a", "ULA symmetric control directions at 1484 Hz", _ula_symmetric(1484.0), a=None,
        focus=1)
    add("fig12b", "ULA symmetric control directions at 3435 Hz", _ula_symmetric(3435.0), a=None,
        focus=2)
    add("fig12c", "ULA symmetric control directions at 4899 Hz", _ula_symmetric(4899.0), a=None,
        focus=3)
    return out


PRESETS = _build()


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
