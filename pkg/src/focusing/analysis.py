"""Focusing-crosstalk structure of a plant and its focusing-state class."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .acoustics import PlantMatrix
from .linalg import (
    SINGULAR_TOL,
    DimensionError,
    as_matrix,
    gram,
    gramian,
    hadamard_bound,
    spectral_norm,
    svd_underdetermined,
)

IDEAL_TOL = 1e-9
EQUAL_TOL = 1e-9


class FocusingState(str, Enum):
    SINGULAR = "Singular"
    GENERAL = "General"
    IDEAL = "Ideal"
    SUPER_IDEAL = "SuperIdeal"

    def __str__(self):
        return self.value


class NotIdealError(ValueError):
    pass


def _plant(G):
    return G.G if isinstance(G, PlantMatrix) else as_matrix(G)


@dataclass(frozen=True)
class GramAnalysis:
    gram: np.ndarray
    crosstalk_magnitudes: np.ndarray
    hermitian_angles: np.ndarray
    gramian: float
    hadamard_bound: float
    normalized_offdiag: float
    diag_spread: float
    state: FocusingState

    @property
    def gramian_ratio(self):
        return self.gramian / self.hadamard_bound if self.hadamard_bound > 0 else 0.0

    @property
    def is_ideal(self):
        return self.state in (FocusingState.IDEAL, FocusingState.SUPER_IDEAL)

    def to_dict(self):
        """JSON-ready mapping; complex Gram entries become [re, im] pairs."""
        return {
            "gram": [[[float(z.real), float(z.imag)] for z in row] for row in self.gram],
            "crosstalk_magnitudes": self.crosstalk_magnitudes.tolist(),
            "hermitian_angles": self.hermitian_angles.tolist(),
            "gramian": self.gramian,
            "hadamard_bound": self.hadamard_bound,
            "normalized_offdiag": self.normalized_offdiag,
            "diag_spread": self.diag_spread,
            "state": self.state.value,
        }


def analyze_gram(G, ideal_tol=IDEAL_TOL, equal_tol=EQUAL_TOL):
    """Gram, crosstalk magnitudes, Hermitian angles and focusing state of G.

    The state is ``Singular`` when gramian <= 1e-12 Hadamard bound,
    otherwise ``SuperIdeal`` / ``Ideal`` / ``General`` depending on whether
    the normalised off-diagonal magnitude is within ``ideal_tol`` and the
    focus-point pressures agree to ``equal_tol``.
    """
    Gam = gram(_plant(G))
    M = Gam.shape[0]
    d = np.diag(Gam).real
    mags = np.abs(Gam)
    np.fill_diagonal(mags, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.sqrt(np.outer(d, d))
        cosines = np.where(norm > 0, mags / norm, 1.0)
    cosines = np.clip(cosines, 0.0, 1.0)
    np.fill_diagonal(cosines, 1.0)
    angles = np.arccos(cosines)
    np.fill_diagonal(angles, 0.0)
    offdiag = float(np.max(cosines[~np.eye(M, dtype=bool)])) if M > 1 else 0.0
    spread = float(d.max() / d.min()) if d.min() > 0 else np.inf

    det = gramian(Gam)
    bound = hadamard_bound(Gam)
    if bound <= 0 or det <= SINGULAR_TOL * bound:
        state = FocusingState.SINGULAR
    elif offdiag <= ideal_tol:
        state = FocusingState.SUPER_IDEAL if spread - 1 <= equal_tol else FocusingState.IDEAL
    else:
        state = FocusingState.GENERAL
    return GramAnalysis(Gam, mags, angles, det, bound, offdiag, spread, state)


@dataclass(frozen=True)
class IdealSingularSummary:
    sigma: np.ndarray
    amplification: float
    kappa: float
    ideal_filters: np.ndarray
    modes: np.ndarray
    mode_residual: float


def ideal_singular_system(analysis, G):
    """Singular system of an ideal plant read straight off its Gram diagonal.

    sigma_m = sqrt(g_mm), the source-strength modes are g_m^* / sqrt(g_mm) and
    the ideal focusing filters are g_m^* / g_mm.
    """
    if not analysis.is_ideal:
        raise NotIdealError(f"focusing state is {analysis.state}, not ideal")
    G = _plant(G)
    d = np.diag(analysis.gram).real
    sigma = np.sqrt(d)
    modes = G.conj().T / sigma
    filters = G.conj().T / d
    # each mode should focus on its own point only
    out = G @ modes
    residual = float(np.max(np.abs(out - np.diag(sigma))) / sigma.max())
    return IdealSingularSummary(
        sigma=sigma,
        amplification=float(1.0 / sigma.min()),
        kappa=float(sigma.max() / sigma.min()),
        ideal_filters=filters,
        modes=modes,
        mode_residual=residual,
    )


def spatially_matched_ratio(G, H0):
    """J(H0) = |G H0|^2 / |H0|^2 with spectral norms; never exceeds |G|^2."""
    G = _plant(G)
    H0 = np.asarray(H0, dtype=complex)
    if H0.ndim == 1:
        H0 = H0[:, None]
    H0 = as_matrix(H0)
    if H0.shape[0] != G.shape[1]:
        raise DimensionError(f"filters have {H0.shape[0]} rows, plant has {G.shape[1]} sources")
    nh = spectral_norm(H0) if np.any(H0) else 0.0
    if nh == 0:
        raise ValueError("filter matrix is zero")
    return spectral_norm(G @ H0) ** 2 / nh**2


def condition_number(G):
    return svd_underdetermined(_plant(G)).condition_number
