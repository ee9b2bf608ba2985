import numpy as np
import pytest

from kerrdimer.contour import contours_to_json, extract_contour, marching_squares


def _grid(n=11):
    x = np.linspace(0, 1, n)
    y = np.linspace(0, 1, n)
    return x, y, np.add.outer(x, y)


def test_constant_field_has_no_contour():
    x, y, _ = _grid()
    assert marching_squares(x, y, np.ones((11, 11)), 0.5) == []


def test_level_outside_range():
    x, y, z = _grid()
    assert marching_squares(x, y, z, 5.0) == []


def test_linear_field_gives_exact_antidiagonal():
    x, y, z = _grid()
    lines = marching_squares(x, y, z, 1.0)
    assert len(lines) == 1
    pts = lines[0]
    assert np.max(np.abs(pts.sum(axis=1) - 1.0)) < 1e-12
    assert {tuple(np.round(pts[0], 12)), tuple(np.round(pts[-1], 12))} == {(0.0, 1.0), (1.0, 0.0)}


def test_nonuniform_axes_interpolate_linearly():
    x = np.array([0.0, 0.1, 0.5, 2.0])
    y = np.array([0.0, 1.0, 4.0])
    z = np.add.outer(2 * x, -y)
    for line in marching_squares(x, y, z, 0.3):
        assert np.allclose(2 * line[:, 0] - line[:, 1], 0.3, atol=1e-12)


def test_closed_loop_around_a_peak():
    x = y = np.linspace(-1, 1, 21)
    z = np.exp(-np.add.outer(x**2, y**2))
    lines = marching_squares(x, y, z, 0.6)
    assert len(lines) == 1
    loop = lines[0]
    assert np.allclose(loop[0], loop[-1])
    r = np.hypot(loop[:, 0], loop[:, 1])
    assert np.allclose(r, np.sqrt(-np.log(0.6)), rtol=0.02)


def test_sign_symmetry():
    rng = np.random.default_rng(0)
    x, y = np.linspace(0, 1, 9), np.linspace(0, 2, 7)
    z = rng.normal(size=(9, 7))
    a = marching_squares(x, y, z, 0.2)
    b = marching_squares(x, y, -z, -0.2)
    key = lambda lines: sorted(map(tuple, np.round(np.concatenate(lines), 12)))
    assert key(a) == key(b)


def test_nan_cells_skipped():
    x, y, z = _grid(5)
    z[2, 2] = np.nan
    lines = marching_squares(x, y, z, 1.0)
    for line in lines:
        assert np.allclose(line.sum(axis=1), 1.0)
    # the four cells touching the NaN corner are dropped, splitting the line
    assert len(lines) == 2


def test_shape_mismatch():
    with pytest.raises(ValueError):
        marching_squares([0, 1], [0, 1, 2], np.zeros((2, 2)), 0.0)
    assert marching_squares([0], [0, 1], np.zeros((1, 2)), 0.0) == []


def test_sweep_contours(make_result):
    res = make_result([0, 10, 20, 40], [0.1, 0.76, 2.5], lambda j, o: 0.5 + j / 40)
    lines = extract_contour(res, "g2_ab", 1.0)
    assert len(lines) == 1
    assert np.allclose(lines[0][:, 0], 20.0)
    js = contours_to_json(res)
    assert set(js["fields"]) == {"g2_ab", "g2_aa"}
    assert set(js["fields"]["g2_ab"]) == {"0.7", "1.0", "1.3"}
    assert js["axes"] == {"x": "j_ac_mhz", "y": "omega_mhz"}
