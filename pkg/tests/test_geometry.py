"""Layout generation, path loss and unit conversions."""

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_cellfree import geometry as geo

# fixed loss term at 1900 MHz, AP height 15 m, user height 1.65 m
COST231_1900 = 140.71508370390842


def test_unit_conversions():
    assert geo.dbm_to_watt(30.0) == pytest.approx(1.0)
    assert geo.dbm_to_watt(0.0) == pytest.approx(1e-3)
    assert geo.db_to_linear(10.0) == pytest.approx(10.0)
    assert geo.db_to_linear(0.0) == pytest.approx(1.0)


def test_cost231_constant_frozen():
    val = geo.cost231_constant(1900.0, geo.AP_HEIGHT_M, geo.USER_HEIGHT_M)
    assert val == pytest.approx(COST231_1900, rel=1e-12)


def test_wavelength_and_noise():
    consts = geo.RadioConstants()
    assert consts.wavelength_m == pytest.approx(geo.SPEED_OF_LIGHT / 1.9e9)
    assert consts.noise_w == pytest.approx(geo.dbm_to_watt(-91.0))


def test_path_loss_slopes():
    consts = geo.RadioConstants()
    # 35 dB per decade beyond the second breakpoint
    assert (geo.path_loss(0.2, consts) - geo.path_loss(2.0, consts)
            == pytest.approx(35.0, rel=1e-9))
    # 20 dB per octave factor between the breakpoints
    assert (geo.path_loss(0.02, consts) - geo.path_loss(0.04, consts)
            == pytest.approx(20.0 * np.log10(2.0), rel=1e-9))
    # flat inside the first breakpoint
    assert geo.path_loss(0.003, consts) == geo.path_loss(0.009, consts)


def test_path_loss_continuous_at_knee():
    consts = geo.RadioConstants()
    d1 = consts.d1_m / 1000.0
    below = geo.path_loss(d1 * (1 - 1e-9), consts)
    above = geo.path_loss(d1 * (1 + 1e-9), consts)
    assert below == pytest.approx(above, abs=1e-6)


def test_path_loss_anchor_value():
    # far branch by hand: -L - 35 log10(d)
    consts = geo.RadioConstants()
    assert geo.path_loss(1.0, consts) == pytest.approx(-COST231_1900, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-4, max_value=50.0),
       st.floats(min_value=1.0, max_value=10.0))
def test_path_loss_monotone(d_km, factor):
    consts = geo.RadioConstants()
    near = geo.path_loss(d_km, consts)
    far = geo.path_loss(d_km * factor, consts)
    assert far <= near + 1e-9


def test_path_loss_rejects_nonpositive_distance():
    consts = geo.RadioConstants()
    with pytest.raises(ValueError):
        geo.path_loss(0.0, consts)
    with pytest.raises(ValueError):
        geo.path_loss(np.array([0.5, -1.0]), consts)


def test_generate_layout_quadrants_and_determinism():
    layout = geo.generate_layout(12, 5, 3, d_km=1.0, seed=42)
    again = geo.generate_layout(12, 5, 3, d_km=1.0, seed=42)
    np.testing.assert_array_equal(layout.ap_xy, again.ap_xy)
    np.testing.assert_array_equal(layout.user_xy, again.user_xy)
    np.testing.assert_array_equal(layout.ris_xy, again.ris_xy)
    assert layout.ap_xy.shape == (12, 2)
    assert np.all(layout.ap_xy >= -0.5) and np.all(layout.ap_xy <= 0.0)
    assert np.all(layout.user_xy >= 0.0) and np.all(layout.user_xy <= 0.5)
    assert np.all(layout.ris_xy >= 0.0) and np.all(layout.ris_xy <= 0.5)
    assert (layout.m_aps, layout.k_users, layout.j_ris) == (12, 5, 3)


def test_generate_layout_no_panels_and_errors():
    layout = geo.generate_layout(2, 2, 0, d_km=1.0, seed=0)
    assert layout.ris_xy.shape == (0, 2)
    with pytest.raises(ValueError):
        geo.generate_layout(0, 2, 1, d_km=1.0, seed=0)
    with pytest.raises(ValueError):
        geo.generate_layout(2, 2, 1, d_km=-1.0, seed=0)


def test_link_distances_hand_values():
    a = np.array([[0.0, 0.0]])
    b = np.array([[0.003, 0.004], [0.0, 0.0]])
    dist = geo.link_distances(a, 10.0, b, 10.0)
    assert dist[0, 0] == pytest.approx(0.005, rel=1e-12)
    # vertical-only separation of 6 m
    dist = geo.link_distances(a, 10.0, b, 4.0)
    assert dist[0, 1] == pytest.approx(0.006, rel=1e-12)


def test_shadowing_only_beyond_second_breakpoint():
    # a 20 m square keeps every 3-D link under the 50 m breakpoint, so the
    # gains must be the deterministic median path loss for any seed
    consts = geo.RadioConstants()
    layout = geo.generate_layout(3, 2, 1, d_km=0.02, seed=1)
    fad_a = geo.large_scale_fading(layout, consts, seed=5)
    fad_b = geo.large_scale_fading(layout, consts, seed=6)
    np.testing.assert_array_equal(fad_a.direct, fad_b.direct)
    np.testing.assert_array_equal(fad_a.ap_ris, fad_b.ap_ris)
    dist = geo.link_distances(layout.ap_xy, geo.AP_HEIGHT_M,
                              layout.user_xy, geo.USER_HEIGHT_M)
    expect = geo.db_to_linear(geo.path_loss(dist, consts))
    np.testing.assert_allclose(fad_a.direct, expect, rtol=1e-12)


def test_large_scale_fading_shapes_and_no_panels():
    consts = geo.RadioConstants()
    layout = geo.generate_layout(4, 3, 2, d_km=1.0, seed=7)
    fad = geo.large_scale_fading(layout, consts, seed=7)
    assert fad.direct.shape == (4, 3)
    assert fad.ap_ris.shape == (4, 2)
    assert fad.user_ris.shape == (3, 2)
    assert np.all(fad.direct > 0)
    empty = geo.generate_layout(4, 3, 0, d_km=1.0, seed=7)
    fad = geo.large_scale_fading(empty, consts, seed=7)
    assert fad.ap_ris.shape == (4, 0)
    assert fad.user_ris.shape == (3, 0)


def test_layout_csv_export(tmp_path):
    layout = geo.generate_layout(2, 3, 1, d_km=1.0, seed=3)
    path = tmp_path / "layout.csv"
    geo.layout_to_csv(layout, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["node_type", "index", "x_km", "y_km", "z_m"]
    assert len(rows) == 1 + 2 + 3 + 1
    assert rows[1][0] == "ap" and float(rows[1][4]) == geo.AP_HEIGHT_M
    assert rows[-1][0] == "ris" and float(rows[-1][4]) == geo.RIS_HEIGHT_M
    assert float(rows[1][2]) == pytest.approx(layout.ap_xy[0, 0])
