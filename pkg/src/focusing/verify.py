"""Self-check suite: brute-force oracles against the library's fast paths.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs them in a
fixed order with a seeded generator so reports are reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .acoustics import AcousticModel, Wavenumber, build_plant
from .analysis import FocusingState, analyze_gram, ideal_singular_system, spatially_matched_ratio
from .conditions import (
    asymmetric_design,
    osd_design,
    osd_wavelength_for_span,
    ula_design,
    upda_crosstalk,
    upda_zeros,
)
from .geometry import TwoChannelSymmetric, build_geometry
from .linalg import gram, gramian, hadamard_bound, pseudoinverse, spectral_norm, svd_underdetermined


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tol: float
    detail: str = ""

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28} residual={self.residual:.3e}  tol={self.tol:.1e}  {self.detail}".rstrip()


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def moore_penrose_residuals(G, F):
    """Relative residuals of the four Moore-Penrose identities."""
    GF = G @ F
    FG = F @ G
    nG = np.linalg.norm(G)
    nF = np.linalg.norm(F)
    return (
        np.linalg.norm(GF @ G - G) / nG,
        np.linalg.norm(F @ G @ F - F) / nF,
        np.linalg.norm(GF - GF.conj().T) / max(np.linalg.norm(GF), 1.0),
        np.linalg.norm(FG - FG.conj().T) / max(np.linalg.norm(FG), 1.0),
    )


def check_moore_penrose(rng, trials=500, tol=1e-10):
    worst = 0.0
    norm_excess = -np.inf
    for _ in range(trials):
        M = int(rng.integers(1, 9))
        L = int(rng.integers(M, 17))
        G = crandn(rng, M, L)
        F = pseudoinverse(G)
        worst = max(worst, *moore_penrose_residuals(G, F))
        q_true = crandn(rng, L)
        d = G @ q_true
        q0 = F @ d
        worst = max(worst, np.linalg.norm(G @ q0 - d) / np.linalg.norm(d))
        norm_excess = max(norm_excess, np.linalg.norm(q0) - np.linalg.norm(q_true))
    ok = worst <= tol and norm_excess <= tol
    return CheckResult("moore_penrose", ok, worst, tol, f"max |q0|-|q| = {norm_excess:.2e}")


def check_hadamard(rng, trials=10_000, tol=1e-10):
    """Diagonal Grams meet the bound; generic Grams fall strictly below it."""
    worst_eq = 0.0
    min_gap = np.inf
    for i in range(trials):
        M = int(rng.integers(2, 7))
        if i % 2:
            Gam = np.diag(rng.uniform(0.1, 10.0, M)).astype(complex)
            worst_eq = max(worst_eq, abs(gramian(Gam) - hadamard_bound(Gam)) / hadamard_bound(Gam))
        else:
            Gam = gram(crandn(rng, M, M + int(rng.integers(0, 4))))
            min_gap = min(min_gap, 1 - gramian(Gam) / hadamard_bound(Gam))
    ok = worst_eq <= tol and min_gap > tol
    return CheckResult("hadamard", ok, worst_eq, tol, f"min strict gap = {min_gap:.2e}")


def check_upda_identity(rng, trials=10_000, tol=1e-11):
    worst = 0.0
    for _ in range(trials):
        L = int(rng.choice(np.arange(3, 102, 2)))
        eta_max = rng.uniform(1e-3, 0.5)
        k = rng.uniform(1e-6, 20 * np.pi) / eta_max
        R = rng.uniform(0.5, 5.0)
        x = upda_crosstalk(L, eta_max, k, R)
        worst = max(worst, abs(x.sum_form - x.closed_form) * R**2 / L)
    return CheckResult("upda_identity", worst <= tol, worst, tol)


def _super_ideal(G, tol=1e-9):
    an = analyze_gram(G, ideal_tol=tol, equal_tol=tol)
    kappa = svd_underdetermined(G).condition_number
    return an, kappa


def check_osd(perturb=0.0, a=0.09, tol=1e-9):
    worst = 0.0
    ok = True
    for span_deg in (11.0, 57.0, 120.0, 180.0):
        lam = osd_wavelength_for_span(np.radians(span_deg), a)
        d = osd_design(lam, a)
        lay = build_geometry(TwoChannelSymmetric(a, d.gamma_opt + perturb, 10.0))
        model = AcousticModel("planewave", Wavenumber.from_wavelength(lam), R=1.0)
        an, kappa = _super_ideal(build_plant(model, lay.sources, lay.points).G, tol)
        worst = max(worst, an.normalized_offdiag, abs(kappa - 1))
        ok &= an.state is FocusingState.SUPER_IDEAL
    return CheckResult("osd_super_ideal", ok and worst <= tol, worst, tol)


def check_asymmetric(perturb=0.0, a=0.09, tol=1e-9):
    worst = 0.0
    ok = True
    for rot_deg in (0.0, 30.0, 70.0, 85.0):
        geo = TwoChannelSymmetric(a, np.radians(30.0), 1.0, np.radians(rot_deg))
        lay = build_geometry(geo)
        n1, n2 = lay.sources / np.linalg.norm(lay.sources, axis=1, keepdims=True)
        d = asymmetric_design(n1, n2, lay.points[0])
        lay = build_geometry(TwoChannelSymmetric(a, np.radians(30.0) + perturb, 1.0, np.radians(rot_deg)))
        model = AcousticModel("planewave", Wavenumber.from_wavelength(d.wavelength), R=1.0)
        an, kappa = _super_ideal(build_plant(model, lay.sources, lay.points).G, tol)
        worst = max(worst, an.normalized_offdiag, abs(kappa - 1))
        ok &= an.state is FocusingState.SUPER_IDEAL
    return CheckResult("asymmetric_super_ideal", ok and worst <= tol, worst, tol)


def check_upda_zeros(perturb=0.0, a=0.09, tol=1e-10):
    worst = 0.0
    for L in (2, 3, 5, 7, 20, 33):
        for n in range(1, 2 * L):
            if n % L == 0:
                continue
            gmax = np.radians(30.0)
            d = upda_zeros(L, a, gmax, n)
            eta_max = 2 * a * np.sin(gmax + perturb)
            x = upda_crosstalk(L, eta_max, d.k, 1.0)
            worst = max(worst, abs(x.sum_form) / L)
    return CheckResult("upda_zeros", worst <= tol, worst, tol)


def check_ula(perturb=0.0, tol=1e-9):
    d = ula_design(20, 0.012, 343.0 / 4899.0, (-2, 0, 2))
    angles = np.asarray(d.angles) + perturb
    from .conditions import ula_plane_wave_plant

    G = ula_plane_wave_plant(20, 0.012, d.wavelength, angles)
    residual = float(np.max(np.abs(gram(G) - 20 * np.eye(3))) / 20)
    kappa = svd_underdetermined(G).condition_number
    worst = max(residual, abs(kappa - 1))
    return CheckResult("ula_super_ideal", worst <= tol, worst, tol)


def check_spatially_matched(rng, trials=200, tol=1e-10):
    worst_excess = -np.inf
    worst_eq = 0.0
    for _ in range(trials):
        M = int(rng.integers(1, 6))
        L = int(rng.integers(M, 12))
        G = crandn(rng, M, L)
        H = crandn(rng, L, int(rng.integers(1, M + 1)))
        nG2 = spectral_norm(G) ** 2
        worst_excess = max(worst_excess, (spatially_matched_ratio(G, H) - nG2) / nG2)
        # ideal plant: orthogonal rows with random norms
        Q, _ = np.linalg.qr(crandn(rng, L, M))
        scales = rng.uniform(0.5, 3.0, M)
        Gi = (Q.conj().T) * scales[:, None]
        an = analyze_gram(Gi, ideal_tol=1e-9)
        fi = ideal_singular_system(an, Gi).ideal_filters
        lam = scales**2
        worst_eq = max(worst_eq, abs(spatially_matched_ratio(Gi, fi) - lam.min()) / lam.min())
        Gs = Q.conj().T * 2.0
        fopt = Gs.conj().T / 4.0
        worst_eq = max(worst_eq, abs(spatially_matched_ratio(Gs, fopt) - 4.0) / 4.0)
    ok = worst_excess <= tol and worst_eq <= tol
    return CheckResult("spatially_matched", ok, worst_eq, tol, f"max J/|G|^2 - 1 = {worst_excess:.2e}")


def check_svd_oracle(rng, trials=100, tol=1e-10):
    worst = 0.0
    for _ in range(trials):
        M = int(rng.integers(1, 9))
        L = int(rng.integers(M, 17))
        G = crandn(rng, M, L)
        s = svd_underdetermined(G).singular_values
        ref = np.linalg.svd(G, compute_uv=False)
        worst = max(worst, np.max(np.abs(s - ref)) / ref[0])
    return CheckResult("svd_oracle", worst <= tol, worst, tol)


def run_checks(seed=0, quick=False, perturb=0.0):
    rng = np.random.default_rng(seed)
    scale = 10 if quick else 1
    return [
        check_moore_penrose(rng, 500 // scale),
        check_hadamard(rng, 10_000 // scale),
        check_upda_identity(rng, 10_000 // scale),
        check_svd_oracle(rng, 100 // scale),
        check_spatially_matched(rng, 200 // scale),
        check_osd(perturb),
        check_asymmetric(perturb),
        check_upda_zeros(perturb),
        check_ula(perturb),
    ]
