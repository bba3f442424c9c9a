import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focusing.geometry import (
    UPDA,
    ULA,
    Arbitrary,
    GeometryError,
    TwoChannelGeneral,
    TwoChannelSymmetric,
    build_geometry,
    geometry_from_dict,
    geometry_to_dict,
    load_geometry,
    path_metrics,
)


def test_symmetric_mirror():
    lay = build_geometry(TwoChannelSymmetric(0.09, np.radians(30), 1.0))
    R = np.linalg.norm(lay.points[:, None] - lay.sources[None], axis=-1)
    assert abs(R[0, 0] - R[1, 1]) <= 1e-12
    assert abs(R[0, 1] - R[1, 0]) <= 1e-12


def test_symmetric_conventions():
    lay = build_geometry(TwoChannelSymmetric(0.09, np.radians(30), 2.0))
    np.testing.assert_allclose(lay.sources[0], 2 * np.array([np.cos(np.pi / 6), np.sin(np.pi / 6), 0]))
    np.testing.assert_allclose(lay.points[0], [0, 0.09, 0], atol=1e-17)
    np.testing.assert_allclose(lay.points[1], -lay.points[0])


def test_upda_uniform_eta():
    lay = build_geometry(UPDA(7, np.pi, 0.09, 1.0))
    pm = path_metrics(lay.sources, lay.points[0], lay.points[1])
    # far-field value: sources at 1 m against a = 9 cm, compare exact distances
    eta_ff = 2 * 0.09 * np.sin(np.arctan2(lay.sources[:, 1], lay.sources[:, 0]))
    np.testing.assert_allclose(eta_ff, np.linspace(-0.18, 0.18, 7), atol=1e-15)
    assert np.diff(eta_ff) == pytest.approx(np.full(6, 4 * 0.09 / 6))
    assert pm.eta.max() == pytest.approx(2 * 0.09, rel=1e-12)
    assert pm.delta_eta == pytest.approx(4 * 0.09 / 6, rel=1e-12)


def test_ula_lengths():
    g = ULA(20, 0.012, (0.0,))
    assert g.aperture == pytest.approx(0.228)
    assert g.length == pytest.approx(0.24)


def test_path_metrics_median_plane():
    pm = path_metrics([[1.0, 0, 0]], [0, 0.09, 0], [0, -0.09, 0])
    assert pm.eta[0] == pytest.approx(0.0, abs=1e-15)


def test_path_metrics_symmetric_pair():
    lay = build_geometry(TwoChannelSymmetric(0.09, np.radians(40), 1.0))
    pm = path_metrics(lay.sources, *lay.points)
    assert pm.eta[0] == pytest.approx(-pm.eta[1], abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 89))
def test_far_field_path_difference(gamma_deg):
    a = 0.09
    lay = build_geometry(TwoChannelSymmetric(a, np.radians(gamma_deg), 100 * a))
    pm = path_metrics(lay.sources, *lay.points)
    approx = 2 * a * np.sin(np.radians(gamma_deg))
    assert pm.eta[0] == pytest.approx(approx, rel=1e-2)


@pytest.mark.parametrize(
    "layout",
    [
        TwoChannelSymmetric(-0.1, 0.2),
        UPDA(1, 1.0, 0.09),
        UPDA(5, 0.0, 0.09),
        UPDA(5, 4.0, 0.09),
        UPDA(5, 1.0, 0.09, eta_max=0.5),
        ULA(20, 0.0, (0.0,)),
        ULA(20, 0.01, ()),
        Arbitrary(((0, 0),), ((0, 0, 0),)),
    ],
)
def test_invalid(layout):
    with pytest.raises(GeometryError):
        build_geometry(layout)


@pytest.mark.parametrize(
    "layout",
    [
        TwoChannelSymmetric(0.09, 0.5, 1.5, 0.3),
        TwoChannelGeneral(((1, 0.3, 0), (1, -0.3, 0)), ((0, 0.1, 0), (0, -0.1, 0))),
        UPDA(5, np.radians(60), 0.09),
        ULA(20, 0.012, (-0.5, 0.0, 0.5)),
        Arbitrary(((1, 0, 0), (0, 1, 0), (0, 0, 1)), ((0.1, 0, 0),), "sources"),
    ],
)
def test_dict_round_trip(layout, tmp_path):
    doc = geometry_to_dict(layout)
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc))
    back = load_geometry(path)
    a, b = build_geometry(layout), build_geometry(back)
    np.testing.assert_allclose(a.sources, b.sources, atol=1e-15)
    np.testing.assert_allclose(a.points, b.points, atol=1e-15)


def test_unknown_variant():
    with pytest.raises(GeometryError):
        geometry_from_dict({"variant": "nope"})


def test_angle_keys_are_degrees():
    g = geometry_from_dict({"variant": "two_channel_symmetric", "a": 0.09, "gamma_deg": 90})
    assert g.gamma == pytest.approx(np.pi / 2)
