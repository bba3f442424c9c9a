import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn
from focusing.analysis import (
    FocusingState,
    NotIdealError,
    analyze_gram,
    condition_number,
    ideal_singular_system,
    spatially_matched_ratio,
)
from focusing.linalg import DimensionError, pseudoinverse, spectral_norm, svd_underdetermined


def orthogonal_rows(rng, norms, L):
    Q, _ = np.linalg.qr(crandn(rng, L, len(norms)))
    return Q.conj().T * np.asarray(norms, float)[:, None]


class TestClassification:
    def test_super_ideal(self, rng):
        G = orthogonal_rows(rng, [1.5, 1.5, 1.5], 6)
        an = analyze_gram(G)
        assert an.state is FocusingState.SUPER_IDEAL
        assert condition_number(G) == pytest.approx(1.0, abs=1e-12)

    def test_ideal(self, rng):
        G = orthogonal_rows(rng, [1.0, 2.0], 4)
        assert analyze_gram(G).state is FocusingState.IDEAL
        assert condition_number(G) == pytest.approx(2.0, rel=1e-12)

    def test_singular(self, rng):
        g = crandn(rng, 4)
        assert analyze_gram(np.vstack([g, g])).state is FocusingState.SINGULAR

    def test_general(self, rng):
        an = analyze_gram(crandn(rng, 3, 5))
        assert an.state is FocusingState.GENERAL
        assert 0 < an.gramian_ratio < 1

    def test_angles_and_crosstalk(self, rng):
        G = crandn(rng, 3, 4)
        an = analyze_gram(G)
        for i in range(3):
            for j in range(3):
                if i != j:
                    c = abs(np.vdot(G[j], G[i]))
                    assert an.crosstalk_magnitudes[i, j] == pytest.approx(c, rel=1e-12)
                    cos = c / (np.linalg.norm(G[i]) * np.linalg.norm(G[j]))
                    assert np.cos(an.hermitian_angles[i, j]) == pytest.approx(cos, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 4), st.integers(0, 2**32 - 1))
    def test_super_ideal_iff_unit_kappa(self, M, extra, seed):
        rng = np.random.default_rng(seed)
        if seed % 2:
            G = orthogonal_rows(rng, np.full(M, rng.uniform(0.5, 2)), M + extra)
        else:
            G = crandn(rng, M, M + extra)
        an = analyze_gram(G)
        kappa = svd_underdetermined(G).condition_number
        assert (an.state is FocusingState.SUPER_IDEAL) == (abs(kappa - 1) <= 1e-8)
        assert an.gramian <= an.hadamard_bound * (1 + 1e-12)

    def test_to_dict(self, rng):
        d = analyze_gram(crandn(rng, 2, 3)).to_dict()
        assert d["state"] == "General"
        assert len(d["gram"]) == 2 and len(d["gram"][0][0]) == 2


class TestIdealSystem:
    def test_diagonal_gram(self, rng):
        G = orthogonal_rows(rng, [2.0, 3.0], 5)
        s = ideal_singular_system(analyze_gram(G), G)
        np.testing.assert_allclose(s.sigma, [2, 3])
        assert s.amplification == pytest.approx(0.5)
        assert s.kappa == pytest.approx(1.5)
        assert s.mode_residual < 1e-12

    def test_super_ideal_filters(self, rng):
        lam = 2.25
        G = orthogonal_rows(rng, np.full(3, np.sqrt(lam)), 5)
        s = ideal_singular_system(analyze_gram(G), G)
        np.testing.assert_allclose(s.ideal_filters, G.conj().T / lam, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 4), st.integers(0, 2**32 - 1))
    def test_pinv_equals_ideal_filters(self, M, extra, seed):
        rng = np.random.default_rng(seed)
        G = orthogonal_rows(rng, rng.uniform(0.3, 3, M), M + extra)
        s = ideal_singular_system(analyze_gram(G), G)
        F = pseudoinverse(G)
        assert np.linalg.norm(F - s.ideal_filters) <= 1e-10 * np.linalg.norm(F)

    def test_not_ideal(self, rng):
        G = crandn(rng, 2, 3)
        with pytest.raises(NotIdealError):
            ideal_singular_system(analyze_gram(G), G)


class TestSpatiallyMatched:
    def test_top_singular_vector(self, rng):
        G = crandn(rng, 3, 5)
        s = svd_underdetermined(G)
        assert spatially_matched_ratio(G, s.V[:, 0]) == pytest.approx(spectral_norm(G) ** 2, rel=1e-10)

    def test_ideal_filters(self, rng):
        G = orthogonal_rows(rng, [1.0, 1.7, 2.2], 6)
        s = ideal_singular_system(analyze_gram(G), G)
        assert spatially_matched_ratio(G, s.ideal_filters) == pytest.approx(1.0, rel=1e-10)

    def test_super_ideal_equality(self, rng):
        G = orthogonal_rows(rng, [2.0, 2.0], 4)
        J = spatially_matched_ratio(G, G.conj().T / 4)
        assert J == pytest.approx(4.0, rel=1e-10)
        assert J == pytest.approx(spectral_norm(G) ** 2, rel=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_upper_bound(self, M, extra, cols, seed):
        rng = np.random.default_rng(seed)
        G = crandn(rng, M, M + extra)
        H = crandn(rng, M + extra, cols)
        assert spatially_matched_ratio(G, H) <= spectral_norm(G) ** 2 * (1 + 1e-12)

    def test_row_mismatch(self, rng):
        with pytest.raises(DimensionError):
            spatially_matched_ratio(crandn(rng, 2, 4), crandn(rng, 3, 1))
