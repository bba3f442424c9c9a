"""Closed-form conditions for ideal and super-ideal focusing.

Covers the general and monopole two-channel checks, the symmetric
two-channel (OSD) span law, the asymmetric two-channel wavelength law, the
symmetric UPDA crosstalk and its zeros, and far-field ULA control-direction
design. Wavelengths are metres, angles radians.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .acoustics import SPEED_OF_SOUND, ula_steering
from .linalg import gram, svd_underdetermined

PHASE_TOL = 1e-9
MAG_TOL = 1e-9


class ExcludedBranchError(ValueError):
    pass


class ConstraintError(ValueError):
    pass


class DegenerateGeometryError(ValueError):
    pass


def _wrap(phi):
    """Wrap to (-pi, pi]."""
    return float(np.pi - np.mod(np.pi - phi, 2 * np.pi))


def _odd(n):
    return 2 * int(n) - 1


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class FocusingDesign:
    variant: str
    inputs: dict
    feasible: bool
    n: int = 1
    wavelength: float | None = None
    wavelength_low: float | None = None
    gamma_opt: float | None = None
    theta: float | None = None
    a: float | None = None
    c: float = SPEED_OF_SOUND
    violated: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def frequency(self):
        return None if self.wavelength is None else self.c / self.wavelength

    @property
    def k(self):
        return None if self.wavelength is None else 2 * np.pi / self.wavelength

    @property
    def mu(self):
        if self.wavelength is None or self.a is None:
            return None
        return 2 * np.pi * self.a / self.wavelength

    @property
    def span(self):
        return None if self.gamma_opt is None else 2 * abs(self.gamma_opt)

    def to_dict(self):
        out = _jsonable(asdict(self))
        out.update(frequency=self.frequency, k=self.k, mu=self.mu, span=self.span)
        for key in ("gamma_opt", "theta", "span"):
            if out[key] is not None:
                out[key + "_deg"] = float(np.degrees(out[key]))
        return out


@dataclass(frozen=True)
class TwoChannelCheck:
    holds: bool
    phase_defect: float
    magnitude_defect: float
    n: int | None = None


def two_channel_ideal_check(G, tol=PHASE_TOL):
    """General 2 x 2 ideal-focusing conditions for arbitrary transfer functions.

    Holds when the per-source phase differences differ by an odd multiple
    of pi and the per-source magnitude products are equal.
    """
    G = np.asarray(G, dtype=complex)
    if G.shape != (2, 2):
        raise ValueError(f"need a 2 x 2 plant, got {G.shape}")
    if np.any(G == 0):
        raise ValueError("all four transfer functions must be nonzero")
    dg = np.abs(G[0]) * np.abs(G[1])
    dphi = np.angle(G[0]) - np.angle(G[1])
    phase_defect = abs(_wrap(dphi[0] - dphi[1] - np.pi))
    mag_defect = float(abs(dg[0] - dg[1]) / dg.max())
    return TwoChannelCheck(
        holds=bool(phase_defect <= tol and mag_defect <= tol),
        phase_defect=phase_defect,
        magnitude_defect=mag_defect,
    )


def monopole_ideal_check(metrics, wavelength, tol=MAG_TOL):
    """Monopole two-channel conditions on path-length differences/products.

    eta_1 - eta_2 must be an odd multiple of half a wavelength and the two
    path-length products must agree. ``tol`` is relative (to the wavelength
    and to max xi respectively).
    """
    eta = np.asarray(metrics.eta, float)
    xi = np.asarray(metrics.xi, float)
    if eta.size != 2:
        raise ValueError(f"monopole check needs exactly 2 sources, got {eta.size}")
    half = wavelength / 2
    ratio = (eta[0] - eta[1]) / half
    n = int(np.round((ratio + 1) / 2))
    length_defect = abs(eta[0] - eta[1] - _odd(n) * half) / wavelength
    xi_defect = float(abs(xi[0] - xi[1]) / xi.max())
    return TwoChannelCheck(
        holds=bool(length_defect <= tol and xi_defect <= tol),
        phase_defect=float(2 * np.pi * length_defect),
        magnitude_defect=xi_defect,
        n=n,
    )


def osd_design(wavelength, a, n=1, c=SPEED_OF_SOUND):
    """Symmetric two-channel loudspeaker angle for super-ideal focusing.

    gamma_opt = asin((2n - 1) wavelength / (8 a)); infeasible once
    |(2n - 1) wavelength| exceeds 8 a.
    """
    if not (wavelength > 0 and a > 0):
        raise ValueError("wavelength and a must be positive")
    s = _odd(n) * wavelength / (8 * a)
    feasible = abs(s) <= 1 + 1e-12
    gamma = float(np.arcsin(np.clip(s, -1, 1))) if feasible else None
    return FocusingDesign(
        variant="osd",
        inputs={"wavelength": wavelength, "a": a, "n": int(n)},
        feasible=bool(feasible),
        n=int(n),
        wavelength=float(wavelength),
        wavelength_low=8 * a,
        gamma_opt=gamma,
        a=a,
        c=c,
        violated=None if feasible else "|(2n-1) wavelength| <= 8a",
    )


def osd_wavelength_for_span(span, a, n=1):
    """Wavelength at which a symmetric pair of total span ``span`` is super-ideal."""
    return 8 * a * np.sin(span / 2) / _odd(n)


def asymmetric_design(n1, n2, x1, n=1, wavelength=None, c=SPEED_OF_SOUND):
    """Asymmetric far-field two-channel design.

    Without ``wavelength``: the super-ideal wavelength
    |4 |dn| |x1| cos(theta) / (2n - 1)| for the given geometry, where theta is
    the angle between dn = n1 - n2 and x1. With ``wavelength``: the angle
    theta that achieves it, subject to |(2n - 1) wavelength| <= 4 |dn| |x1|.
    """
    n1 = np.asarray(n1, float)
    n2 = np.asarray(n2, float)
    x1 = np.asarray(x1, float)
    dn = n1 - n2
    ndn = float(np.linalg.norm(dn))
    a = float(np.linalg.norm(x1))
    if a == 0:
        raise ValueError("control point must not be at the origin")
    if ndn == 0:
        raise DegenerateGeometryError("source directions coincide")
    low = 4 * ndn * a
    inputs = {"n1": n1, "n2": n2, "x1": x1, "n": int(n)}
    if wavelength is None:
        cos_t = float(np.dot(dn, x1) / (ndn * a))
        theta = float(np.arccos(np.clip(cos_t, -1, 1)))
        if abs(cos_t) < 1e-12:
            return FocusingDesign(
                "asymmetric", inputs, False, int(n), None, low, theta=theta, a=a, c=c,
                violated="theta = 90 deg: infinite frequency (unstable)",
            )
        lam = abs(low * cos_t / _odd(n))
        return FocusingDesign("asymmetric", inputs, True, int(n), lam, low, theta=theta, a=a, c=c)
    inputs["wavelength"] = wavelength
    s = _odd(n) * wavelength / low
    if abs(s) > 1 + 1e-12:
        return FocusingDesign(
            "asymmetric", inputs, False, int(n), float(wavelength), low, a=a, c=c,
            violated="|(2n-1) wavelength| <= 4 |dn| |x1|",
        )
    theta = float(np.arccos(np.clip(s, -1, 1)))
    return FocusingDesign("asymmetric", inputs, True, int(n), float(wavelength), low, theta=theta, a=a, c=c)


def asymmetric_angle_pair(theta12, wavelength, a, n=1):
    """Angle between source 1 and x1 given the angle between source 2 and x1."""
    cos11 = np.cos(theta12) + _odd(n) * wavelength / (4 * a)
    if abs(cos11) > 1 + 1e-12:
        raise ConstraintError(
            f"|cos(theta12) + (2n-1) wavelength/(4a)| = {abs(cos11):.6g} exceeds 1"
        )
    return float(np.arccos(np.clip(cos11, -1, 1)))


# Veltkamp split: n*h for small integer n becomes an exact sum p + e.
def _exact_multiple(n, h):
    n = np.asarray(n, float)
    c = 134217729.0 * h
    hi = c - (c - h)
    lo = h - hi
    a = n * hi
    b = n * lo
    p = a + b
    bb = p - a
    e = (a - (p - bb)) + (b - bb)
    return p, e


def _sin_multiple(n, h):
    p, e = _exact_multiple(n, h)
    return np.sin(p) + e * np.cos(p)


def _cos_multiple(n, h):
    p, e = _exact_multiple(n, h)
    return np.cos(p) - e * np.sin(p)


@dataclass(frozen=True)
class UpdaCrosstalk:
    sum_form: float
    closed_form: float
    grating: bool


def upda_crosstalk(L, eta_max, k, R=1.0):
    """Symmetric UPDA focusing crosstalk by the cosine sum and in closed form.

    sum_form = R^-2 sum_l cos(k l d_eta) over l = -(L-1)/2 .. (L-1)/2 with
    d_eta = 2 eta_max / (L - 1); closed_form = sin(L h) / (R^2 sin h) with
    h = k eta_max / (L - 1). Even L uses half-integer l. Where sin h
    vanishes (grating lobe) the closed form returns its limit.
    """
    L = int(L)
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if not eta_max > 0:
        raise ValueError(f"eta_max must be positive, got {eta_max}")
    h = float(k) * float(eta_max) / (L - 1)
    # l * k * d_eta = (2 l) * h, with 2 l an integer
    twice_l = 2 * np.arange(L) - (L - 1)
    total = float(np.sum(_cos_multiple(twice_l, h))) / R**2
    s = float(np.sin(h))
    grating = abs(s) < 1e-8
    if grating:
        m = int(np.round(h / np.pi))
        closed = L * (-1.0) ** (m * (L - 1)) / R**2
    else:
        closed = float(_sin_multiple(L, h)) / (R**2 * s)
    return UpdaCrosstalk(total, closed, bool(grating))


def upda_zeros(L, a, gamma_max, n=1, c=SPEED_OF_SOUND):
    """Wavelength at which the symmetric UPDA crosstalk vanishes.

    wavelength = |4 L a sin(gamma_max) / (n (L - 1))| for n not a multiple
    of L. ``wavelength_low`` is the n = 1, 180 degree-span limit
    4 L a / (L - 1), which tends to 4 a as L grows.
    """
    L = int(L)
    n = int(n)
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if n % L == 0:
        raise ExcludedBranchError(f"n = {n} is a multiple of L = {L} (grating lobe, not a zero)")
    lam = abs(4 * L * a * np.sin(gamma_max) / (n * (L - 1)))
    return FocusingDesign(
        variant="upda",
        inputs={"L": L, "a": a, "gamma_max": gamma_max, "n": n},
        feasible=bool(lam > 0),
        n=n,
        wavelength=float(lam),
        wavelength_low=upda_wavelength_low(L, a),
        gamma_opt=float(gamma_max),
        a=a,
        c=c,
        extra={"eta_max": 2 * a * np.sin(gamma_max), "wavelength_low_limit": 4 * a},
    )


def upda_wavelength_low(L, a):
    return 4 * L * a / (L - 1)


@dataclass(frozen=True)
class UlaDesign:
    L: int
    dx: float
    wavelength: float
    alpha: float
    offsets: tuple
    angles: tuple
    M_max: int
    gram_residual: float
    kappa: float
    c: float = SPEED_OF_SOUND

    @property
    def frequency(self):
        return self.c / self.wavelength

    def to_dict(self):
        out = _jsonable(asdict(self))
        out["variant"] = "ula"
        out["frequency"] = self.frequency
        out["angles_deg"] = [float(np.degrees(t)) for t in self.angles]
        out["feasible"] = True
        return out


def _check_offsets(offsets, L):
    mu = np.asarray(offsets, float)
    for i in range(len(mu)):
        for j in range(i + 1, len(mu)):
            d = mu[i] - mu[j]
            if abs(d - np.round(d)) > 1e-9:
                raise ConstraintError(f"offset difference {d} between points {i}, {j} is not an integer")
            if int(np.round(d)) % L == 0:
                raise ConstraintError(
                    f"offset difference {int(np.round(d))} between points {i}, {j} is a multiple "
                    f"of L = {L}: grating lobe"
                )
    return mu


def ula_plane_wave_plant(L, dx, wavelength, angles):
    k = 2 * np.pi / wavelength
    return np.array([ula_steering(t, L, dx, k) for t in angles])


def ula_design(L, dx, wavelength, offsets, c=SPEED_OF_SOUND):
    """Far-field ULA control directions sin(theta_i) = mu_i alpha.

    alpha = wavelength / (L dx). Offsets must differ pairwise by integers
    that are not multiples of L, and |mu_i alpha| <= 1. The resulting unit
    plane-wave plant is checked to have Gram L I.
    """
    L = int(L)
    alpha = wavelength / (L * dx)
    mu = _check_offsets(offsets, L)
    bad = np.abs(mu * alpha) > 1 + 1e-12
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ConstraintError(f"|mu alpha| = {abs(mu[i] * alpha):.6g} > 1 for offset {mu[i]}: outside arcsine domain")
    angles = np.arcsin(np.clip(mu * alpha, -1, 1))
    G = ula_plane_wave_plant(L, dx, wavelength, angles)
    residual = float(np.max(np.abs(gram(G) - L * np.eye(len(angles)))) / L)
    kappa = svd_underdetermined(G).condition_number
    M_max = int(min(L, 2 * np.floor(1 / alpha + 1e-9) + 1))
    return UlaDesign(L, dx, float(wavelength), float(alpha), tuple(float(m) for m in mu),
                     tuple(float(t) for t in angles), M_max, residual, float(kappa), c)


@dataclass(frozen=True)
class UlaSymmetricLimits:
    M_max: int
    angles: tuple
    wavelength_low: float
    alpha: float
    feasible_three: bool


def ula_symmetric_limits(L, dx, wavelength):
    """Largest odd number of symmetric control points with sin(theta_i) = i alpha.

    Bounded by M <= 2 L dx / wavelength + 1 (and M <= L so that no offset
    difference hits a grating lobe). ``wavelength_low`` = L dx.
    """
    alpha = wavelength / (L * dx)
    bound = 2 / alpha + 1
    M = int(np.floor(bound + 1e-9))
    M = min(M, L)
    if M % 2 == 0:
        M -= 1
    feasible = M >= 3
    if not feasible:
        M = 1
    half = np.arange((M + 1) // 2)
    theta = np.arcsin(np.clip(half * alpha, -1, 1))
    angles = np.concatenate([-theta[:0:-1], theta])
    return UlaSymmetricLimits(M, tuple(float(t) for t in angles), L * dx, float(alpha), bool(feasible))


def ula_array_length(wavelength, theta, i=2):
    """L dx = (i - 1) wavelength / sin(theta_i) for the i-th symmetric point."""
    return (i - 1) * wavelength / np.sin(theta)
