import math

import numpy as np
import pytest

from ablatrack import (
    Calibration,
    EdgeTrace,
    PixelClass,
    build_time_series,
    compute_standoff,
    export_csv,
    linear_fit,
)
from ablatrack.analysis import fit_channels
from ablatrack.errors import DegenerateAbscissa, InconsistentDimensions, MissingEdge, NoKeptFrames


def _trace(kind, points, frame=0):
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=int)
    return EdgeTrace(frame, kind, xs, ys)


def _edges_file(frames, flow="left", width=100, height=80, fps=10.0):
    return {
        "schema": "arcjetcv-edges/1",
        "meta": {"flow": flow, "width": width, "height": height, "fps": fps},
        "frames": frames,
        "rejected_frames": [e["index"] for e in frames if e.get("rejected")],
    }


def _frame_entry(index, sample_edge, shock_edge=None, area=None, rejected=False, fps=10.0):
    return {
        "index": index,
        "time_s": index / fps,
        "sample_edge": sample_edge,
        "shock_edge": shock_edge,
        "features": {"sample_area_px": area} if area is not None else None,
        "rejected": rejected,
    }


def _straight_edge(x, y0=10, y1=50):
    return [[float(x), y] for y in range(y0, y1 + 1)]


# --- compute_standoff ---------------------------------------------------------


def test_standoff_arithmetic():
    sample = _trace(PixelClass.SAMPLE, [(100.0, 10), (100.0, 20)])
    shock = _trace(PixelClass.SHOCK, [(80.0, 10), (80.0, 20)])
    assert compute_standoff(sample, shock, 15.0) == 20.0


def test_standoff_interpolates_between_rows():
    sample = _trace(PixelClass.SAMPLE, [(100.0, 10), (102.0, 12)])
    shock = _trace(PixelClass.SHOCK, [(90.0, 10), (90.0, 12)])
    assert compute_standoff(sample, shock, 11.0) == pytest.approx(11.0)


def test_standoff_missing_edge():
    sample = _trace(PixelClass.SAMPLE, [(100.0, 10), (100.0, 20)])
    empty = _trace(PixelClass.SHOCK, [])
    with pytest.raises(MissingEdge):
        compute_standoff(sample, empty, 15.0)
    off_span = _trace(PixelClass.SHOCK, [(80.0, 30), (80.0, 40)])
    with pytest.raises(MissingEdge):
        compute_standoff(sample, off_span, 15.0)


# --- linear_fit -----------------------------------------------------------------


def test_fit_exact_line():
    t = np.arange(10.0)
    fit = linear_fit(t, 2.0 * t + 1.0)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(1.0, abs=1e-12)
    assert fit.slope_stderr == 0.0
    assert fit.intercept_stderr == 0.0
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 10


def test_fit_hand_computed_closed_form():
    # t=[0,1,2], y=[0,1,1]: slope=1/2, intercept=1/6, SSR=1/6, Sxx=2
    fit = linear_fit(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 1.0]))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(1.0 / 6.0, abs=1e-12)
    assert fit.slope_stderr == pytest.approx(math.sqrt((1.0 / 6.0) / 2.0), abs=1e-12)
    assert fit.intercept_stderr == pytest.approx(math.sqrt((1.0 / 6.0) * (1.0 / 3.0 + 0.5)), abs=1e-12)
    assert fit.r_squared == pytest.approx(0.75, abs=1e-12)


def test_fit_degenerate_abscissa():
    with pytest.raises(DegenerateAbscissa):
        linear_fit(np.array([2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0]))


def test_fit_two_points_zero_stderr():
    fit = linear_fit(np.array([0.0, 1.0]), np.array([3.0, 5.0]))
    assert fit.slope == 2.0 and fit.intercept == 3.0
    assert fit.slope_stderr == 0.0 and fit.intercept_stderr == 0.0


def test_fit_constant_y_r_squared_one():
    fit = linear_fit(np.array([0.0, 1.0, 2.0]), np.array([4.0, 4.0, 4.0]))
    assert fit.slope == 0.0
    assert fit.r_squared == 1.0


def test_residual_orthogonality():
    rng = np.random.default_rng(81)
    for _ in range(50):
        n = int(rng.integers(3, 40))
        t = rng.normal(size=n) * 10
        if len(np.unique(t)) < 2:
            continue
        y = rng.normal(size=n)
        fit = linear_fit(t, y)
        r = y - (fit.slope * t + fit.intercept)
        scale = max(np.abs(y).max(), 1.0)
        assert abs(r.sum()) <= 1e-9 * n * scale
        assert abs((r * t).sum()) <= 1e-9 * n * scale * max(np.abs(t).max(), 1.0)


# --- build_time_series -----------------------------------------------------------


def test_single_frame_recession_zero():
    f = [_frame_entry(0, _straight_edge(40.0), area=500.0)]
    bundle = build_time_series([_edges_file(f)], Calibration(10.0, 40.0))
    for station in bundle.stations:
        assert bundle.recession_mm[station].tolist() == [0.0]
    assert bundle.vertical_position_mm.tolist() == [0.0]


def test_recession_sign_left_flow():
    frames = [
        _frame_entry(0, _straight_edge(40.0), area=100.0),
        _frame_entry(1, _straight_edge(44.0), area=100.0),  # edge moved +x = loss for LEFT
    ]
    cal = Calibration(10.0, 40.0)  # 0.25 mm/px
    bundle = build_time_series([_edges_file(frames, flow="left")], cal)
    assert bundle.recession_mm[0.0][1] == pytest.approx(4.0 * 0.25)


def test_recession_sign_right_flow():
    frames = [
        _frame_entry(0, _straight_edge(40.0), area=100.0),
        _frame_entry(1, _straight_edge(36.0), area=100.0),  # edge moved -x = loss for RIGHT
    ]
    bundle = build_time_series([_edges_file(frames, flow="right")], Calibration(10.0, 40.0))
    assert bundle.recession_mm[0.0][1] == pytest.approx(1.0)


def test_rejected_frames_excluded():
    frames = [
        _frame_entry(0, _straight_edge(40.0)),
        _frame_entry(1, _straight_edge(41.0), rejected=True),
        _frame_entry(2, _straight_edge(42.0)),
    ]
    bundle = build_time_series([_edges_file(frames)], Calibration(10.0, 40.0))
    assert bundle.frame_indices.tolist() == [0, 2]


def test_no_kept_frames():
    frames = [_frame_entry(0, _straight_edge(40.0), rejected=True)]
    with pytest.raises(NoKeptFrames):
        build_time_series([_edges_file(frames)], Calibration(10.0, 40.0))


def test_merge_equivalence_and_conflict_resolution():
    a = [_frame_entry(i, _straight_edge(40.0 + i)) for i in range(0, 3)]
    b = [_frame_entry(i, _straight_edge(40.0 + i)) for i in range(3, 6)]
    merged = build_time_series([_edges_file(a), _edges_file(b)], Calibration(10.0, 40.0))
    single = build_time_series(
        [_edges_file([_frame_entry(i, _straight_edge(40.0 + i)) for i in range(6)])],
        Calibration(10.0, 40.0),
    )
    assert merged.frame_indices.tolist() == single.frame_indices.tolist()
    for f in merged.stations:
        assert np.allclose(merged.recession_mm[f], single.recession_mm[f], equal_nan=True)
    # later file wins on identical indices
    override = [_frame_entry(2, _straight_edge(99.0))]
    bundle = build_time_series(
        [_edges_file([_frame_entry(i, _straight_edge(40.0)) for i in range(3)]), _edges_file(override)],
        Calibration(10.0, 40.0),
    )
    assert bundle.recession_mm[0.0][2] == pytest.approx((99.0 - 40.0) * 0.25)


def test_merge_rejects_inconsistent_dimensions():
    a = _edges_file([_frame_entry(0, _straight_edge(40.0))], width=100)
    b = _edges_file([_frame_entry(1, _straight_edge(40.0))], width=200)
    with pytest.raises(InconsistentDimensions):
        build_time_series([a, b], Calibration(10.0, 40.0))


def test_mm_per_px_scaling_doubles_outputs():
    frames = [
        _frame_entry(i, _straight_edge(40.0 + 2 * i), shock_edge=_straight_edge(30.0 + 2 * i), area=100.0)
        for i in range(5)
    ]
    b1 = build_time_series([_edges_file(frames)], Calibration(10.0, 40.0))
    b2 = build_time_series([_edges_file(frames)], Calibration(20.0, 40.0))
    for f in b1.stations:
        assert np.allclose(2 * b1.recession_mm[f], b2.recession_mm[f], equal_nan=True)
    assert np.allclose(2 * b1.shock_standoff_mm, b2.shock_standoff_mm, equal_nan=True)
    assert np.allclose(4 * b1.sample_area_mm2, b2.sample_area_mm2, equal_nan=True)
    f1, f2 = fit_channels(b1), fit_channels(b2)
    for name in f1:
        scale = 4.0 if name == "area_mm2" else 2.0  # area is mm^2
        assert f2[name].slope == pytest.approx(scale * f1[name].slope)
        assert f2[name].slope_stderr == pytest.approx(scale * f1[name].slope_stderr)
        assert f2[name].intercept == pytest.approx(scale * f1[name].intercept)


# --- export_csv -------------------------------------------------------------------


def _small_bundle():
    frames = [
        _frame_entry(i, _straight_edge(40.0 + i), shock_edge=_straight_edge(30.0), area=100.0 + i)
        for i in range(3)
    ]
    bundle = build_time_series([_edges_file(frames)], Calibration(10.0, 40.0))
    return bundle, fit_channels(bundle)


def test_csv_row_count_and_header(tmp_path):
    bundle, fits = _small_bundle()
    series, fits_path = export_csv(bundle, fits, tmp_path / "out")
    lines = series.read_text().splitlines()
    assert len(lines) == 4  # header + 3 frames
    header = lines[0].split(",")
    assert header[0] == "time_s"
    assert "recession_mm@0" in header and "recession_mm@-0.75" in header
    assert header[-3:] == ["area_mm2", "standoff_mm", "vertical_mm"]
    fit_lines = fits_path.read_text().splitlines()
    assert fit_lines[0] == "channel,slope,slope_stderr,intercept,intercept_stderr,r_squared,n_points"


def test_csv_reexport_byte_identical(tmp_path):
    bundle, fits = _small_bundle()
    s1, f1 = export_csv(bundle, fits, tmp_path / "a")
    s2, f2 = export_csv(bundle, fits, tmp_path / "b")
    assert s1.read_bytes() == s2.read_bytes()
    assert f1.read_bytes() == f2.read_bytes()


def test_csv_fit_column_matches_linear_fit(tmp_path):
    bundle, fits = _small_bundle()
    _, fits_path = export_csv(bundle, fits, tmp_path / "c")
    row = [l for l in fits_path.read_text().splitlines() if l.startswith("recession_mm@0,")][0]
    slope = float(row.split(",")[1])
    expected = linear_fit(bundle.time_s, bundle.recession_mm[0.0]).slope
    assert abs(slope - expected) <= 1e-12


def test_csv_absent_values_empty_cells(tmp_path):
    frames = [
        _frame_entry(0, _straight_edge(40.0)),  # no shock, no area
        _frame_entry(1, _straight_edge(41.0)),
    ]
    bundle = build_time_series([_edges_file(frames)], Calibration(10.0, 40.0))
    series, _ = export_csv(bundle, fit_channels(bundle), tmp_path / "d")
    data_row = series.read_text().splitlines()[1].split(",")
    header = series.read_text().splitlines()[0].split(",")
    assert data_row[header.index("standoff_mm")] == ""
    assert data_row[header.index("area_mm2")] == ""
