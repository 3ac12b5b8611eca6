import filecmp
import json

import numpy as np
import pytest

from ablatrack import FlowDirection, SynthVideoConfig, generate_synthetic_video, open_frame_source
from ablatrack.colorseg import luminance
from ablatrack.errors import ConfigInvalid, IndexOutOfRange, MalformedManifest, MissingManifest


def _write_manifest(d, frames, fps=30.0, width=16, height=16):
    path = d / "manifest.json"
    path.write_text(json.dumps({"fps": fps, "width": width, "height": height, "frames": frames}))
    return path


def _write_png(path, width=16, height=16, level=40):
    from PIL import Image

    Image.fromarray(np.full((height, width, 3), level, dtype=np.uint8), "RGB").save(path)


def test_open_frame_source_echoes_manifest(tmp_path):
    for i in range(3):
        _write_png(tmp_path / f"f{i}.png")
    src = open_frame_source(_write_manifest(tmp_path, [f"f{i}.png" for i in range(3)]))
    assert src.frame_count == 3
    assert src.fps == 30.0
    assert (src.width, src.height) == (16, 16)


def test_open_frame_source_missing():
    with pytest.raises(MissingManifest):
        open_frame_source("/nonexistent/manifest.json")


@pytest.mark.parametrize(
    "mutate",
    [
        lambda m: m.pop("fps"),
        lambda m: m.update(fps=-1),
        lambda m: m.update(frames=[]),
        lambda m: m.update(width=2),
    ],
)
def test_open_frame_source_malformed(tmp_path, mutate):
    obj = {"fps": 30.0, "width": 16, "height": 16, "frames": ["f0.png"]}
    mutate(obj)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(obj))
    with pytest.raises(MalformedManifest):
        open_frame_source(path)


def test_open_frame_source_index_gap(tmp_path):
    frames = [{"index": 0, "file": "f0.png"}, {"index": 2, "file": "f2.png"}]
    with pytest.raises(MalformedManifest):
        open_frame_source(_write_manifest(tmp_path, frames))


def test_get_frame_bounds_and_timestamps(fixture_video):
    src = fixture_video.source
    f0 = src.get_frame(0)
    assert f0.index == 0 and f0.timestamp_s == 0.0
    with pytest.raises(IndexOutOfRange):
        src.get_frame(src.frame_count)
    with pytest.raises(IndexOutOfRange):
        src.get_frame(-1)


def test_get_frame_is_pure(fixture_video):
    a = fixture_video.source.get_frame(50)
    b = fixture_video.source.get_frame(50)
    assert np.array_equal(a.pixels, b.pixels)


def test_generator_round_trips_through_manifest(fixture_video):
    src = open_frame_source(fixture_video.manifest)
    assert src.frame_count == fixture_video.cfg.frame_count


def test_sample_interior_brightness(fixture_video):
    # known interior point: a few px downstream of the edge at the center row
    cfg = fixture_video.cfg
    frame = fixture_video.source.get_frame(50)
    x = int(cfg.edge_x_at(50)) - 10  # flow RIGHT: body extends left
    y = cfg.height // 2
    r = frame.pixels[y, x, 0]  # red channel carries the HSV value level
    assert abs(int(r) - cfg.sample_brightness) <= 3 * cfg.noise_sigma + 1


def test_zero_rate_keeps_edge_constant(tmp_path):
    cfg = SynthVideoConfig(frame_count=30, width=256, height=192, initial_edge_x=150.0,
                           recession_rate=0.0, sample_radius=40, on_window=(5, 25))
    _, gt = generate_synthetic_video(cfg, tmp_path / "v")
    ys = ~np.isnan(gt.edge_x[5])
    for t in range(5, 26):
        assert np.all(gt.edge_x[t][ys] == 150.0)


def test_edge_position_arithmetic():
    cfg = SynthVideoConfig(initial_edge_x=300.0, recession_rate=0.5, on_window=(20, 80))
    assert cfg.edge_x_at(60) == 300.0 - 0.5 * 40


def test_flow_left_flips_edge_sign():
    cfg = SynthVideoConfig(flow_direction=FlowDirection.LEFT, initial_edge_x=212.0,
                           recession_rate=0.5, on_window=(20, 80))
    assert cfg.edge_x_at(60) == 212.0 + 0.5 * 40


def test_generator_determinism(tmp_path):
    cfg = SynthVideoConfig(frame_count=6, width=128, height=96, initial_edge_x=80.0,
                           sample_radius=20, on_window=(1, 4), seed=11)
    a, _ = generate_synthetic_video(cfg, tmp_path / "a")
    b, _ = generate_synthetic_video(cfg, tmp_path / "b")
    for fa, fb in zip(a.frame_files, b.frame_files):
        assert filecmp.cmp(fa, fb, shallow=False)
    assert (tmp_path / "a" / "gt.json").read_bytes() == (tmp_path / "b" / "gt.json").read_bytes()


def test_ground_truth_inside_frame(fixture_video):
    gt, cfg = fixture_video.gt, fixture_video.cfg
    for arr in (gt.edge_x, gt.shock_x):
        vals = arr[~np.isnan(arr)]
        assert np.all(vals >= 0) and np.all(vals <= cfg.width - 1)


def test_ignition_spike_brightens_first_on_frames(fixture_video):
    src, cfg = fixture_video.source, fixture_video.cfg
    first_on = cfg.on_window[0]
    lum_spike = luminance(src.get_frame(first_on).pixels).mean()
    lum_on = luminance(src.get_frame(first_on + 10).pixels).mean()
    lum_off = luminance(src.get_frame(first_on - 5).pixels).mean()
    assert lum_spike > lum_on > lum_off


def test_config_invalid_window():
    with pytest.raises(ConfigInvalid):
        SynthVideoConfig(on_window=(50, 20)).validate()
    with pytest.raises(ConfigInvalid):
        SynthVideoConfig(frame_count=100, on_window=(0, 100)).validate()


def test_config_edge_leaves_frame():
    with pytest.raises(ConfigInvalid):
        SynthVideoConfig(initial_edge_x=40.0, recession_rate=2.0, on_window=(0, 99)).validate()


def test_rate_schedule_piecewise_arithmetic():
    cfg = SynthVideoConfig(initial_edge_x=300.0, on_window=(0, 89), frame_count=90,
                           rate_schedule=[(30, 0.1), (30, 0.5), (30, 0.2)])
    assert cfg.recession_px(30) == pytest.approx(3.0)
    assert cfg.recession_px(60) == pytest.approx(3.0 + 15.0)
    assert cfg.recession_px(89) == pytest.approx(18.0 + 0.2 * 29)
