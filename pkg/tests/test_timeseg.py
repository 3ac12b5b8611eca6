import numpy as np
import pytest

from ablatrack import (
    BrightnessTrace,
    Conv1DNet,
    SyntheticSignalConfig,
    TimeSegClass,
    TrainConfig,
    compute_brightness_trace,
    generate_synthetic_signal,
    infer_interest_window,
    load_model,
    net_forward,
    save_model,
    train,
)
from ablatrack.errors import ConfigInvalid, NoOnRegion, NonFiniteInput, SchemaMismatch, WrongLength
from ablatrack.timeseg import (
    Adam,
    Conv1D,
    ConvTranspose1D,
    Mode,
    ReLU,
    conv_out_len,
    cross_entropy,
    make_dataset,
    softmax_ce_backward,
    softmax_channels,
    tconv_out_len,
)
from oracles import conv1d_brute, numeric_grad, rel_err, tconv1d_brute


# --- brightness trace --------------------------------------------------------


def test_trace_constant_video_is_all_zero(fixture_video):
    import json

    from PIL import Image

    from ablatrack import open_frame_source

    d = fixture_video.dir / "const"
    d.mkdir(exist_ok=True)
    names = []
    for i in range(4):
        Image.fromarray(np.full((16, 16, 3), 80, dtype=np.uint8), "RGB").save(d / f"f{i}.png")
        names.append(f"f{i}.png")
    (d / "manifest.json").write_text(json.dumps({"fps": 10.0, "width": 16, "height": 16, "frames": names}))
    trace = compute_brightness_trace(open_frame_source(d / "manifest.json"), 1)
    assert np.all(trace.values == 0.0)


def test_trace_minmax_endpoints(fixture_video):
    import json

    from PIL import Image

    from ablatrack import open_frame_source

    d = fixture_video.dir / "two"
    d.mkdir(exist_ok=True)
    for i, level in enumerate((10, 30)):
        Image.fromarray(np.full((16, 16, 3), level, dtype=np.uint8), "RGB").save(d / f"f{i}.png")
    (d / "manifest.json").write_text(
        json.dumps({"fps": 10.0, "width": 16, "height": 16, "frames": ["f0.png", "f1.png"]})
    )
    trace = compute_brightness_trace(open_frame_source(d / "manifest.json"), 1)
    assert trace.values.tolist() == [0.0, 1.0]


def test_trace_peak_in_ignition_frames(fixture_video):
    trace = compute_brightness_trace(fixture_video.source, 1)
    peak_frame = trace.frame_indices[int(np.argmax(trace.values))]
    first_on = fixture_video.cfg.on_window[0]
    assert first_on <= peak_frame <= first_on + 1
    assert trace.values.min() == 0.0 and trace.values.max() == 1.0


# --- synthetic signals -------------------------------------------------------


def test_signal_label_partition():
    for seed in range(20):
        signal, labels = generate_synthetic_signal(SyntheticSignalConfig(seed=seed))
        assert len(signal) == len(labels) == 256
        assert np.all((signal >= 0.0) & (signal <= 1.0))
        counts = {c: int((labels == int(c)).sum()) for c in TimeSegClass}
        assert sum(counts.values()) == 256


def test_signal_margin_boundary():
    # the OFF -> TRANSITION switch sits exactly at t_on - margin
    cfg = SyntheticSignalConfig(seed=123)
    _, labels = generate_synthetic_signal(cfg)
    m = cfg.transition_margin
    t_on = int(np.flatnonzero(labels != int(TimeSegClass.OFF))[0]) + m
    assert labels[t_on - m - 1] == int(TimeSegClass.OFF)
    assert labels[t_on - m] == int(TimeSegClass.TRANSITION)


def test_signal_on_fraction_monte_carlo():
    fracs = []
    for i in range(1000):
        _, labels = generate_synthetic_signal(SyntheticSignalConfig(seed=10_000 + i))
        fracs.append((labels == int(TimeSegClass.ON)).mean())
    assert 0.25 <= np.mean(fracs) <= 0.65


def test_make_dataset_deterministic():
    cfg = SyntheticSignalConfig()
    X1, Y1 = make_dataset(cfg, 8, base_seed=5)
    X2, Y2 = make_dataset(cfg, 8, base_seed=5)
    assert np.array_equal(X1, X2) and np.array_equal(Y1, Y2)


# --- forward path ------------------------------------------------------------


def test_softmax_columns_sum_to_one():
    net = Conv1DNet(seed=1)
    rng = np.random.default_rng(2)
    probs = net_forward(net, rng.random(256), Mode.EVAL)
    assert probs.shape == (3, 256)
    assert np.allclose(probs.sum(axis=0), 1.0, atol=1e-6)
    assert np.all(probs >= 0)


def test_zero_net_gives_uniform_probs():
    net = Conv1DNet(seed=1)
    for layer in net.conv_layers:
        layer.W[...] = 0.0
        layer.b[...] = 0.0
    probs = net_forward(net, np.random.default_rng(3).random(256), Mode.EVAL)
    assert np.allclose(probs, 1.0 / 3.0, atol=1e-12)


def test_net_forward_rejects_bad_inputs():
    net = Conv1DNet(seed=1)
    with pytest.raises(WrongLength):
        net_forward(net, np.zeros(100), Mode.EVAL)
    bad = np.zeros(256)
    bad[3] = np.nan
    with pytest.raises(NonFiniteInput):
        net_forward(net, bad, Mode.EVAL)


def test_conv_length_law_and_decoder_restores_256():
    lengths = [256]
    for k, s, p in ((7, 2, 3), (7, 2, 3)):
        lengths.append(conv_out_len(lengths[-1], k, s, p))
    assert lengths == [256, 128, 64]
    up = [64]
    for k, s, p, op in ((7, 2, 3, 1), (7, 2, 3, 1), (7, 1, 3, 0)):
        up.append(tconv_out_len(up[-1], k, s, p, op))
    assert up == [64, 128, 256, 256]


def test_forward_matches_brute_force_oracle():
    rng = np.random.default_rng(31)
    for _ in range(30):
        C, O = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        L, k = int(rng.integers(8, 33)), int(rng.integers(1, 8))
        s, p = int(rng.integers(1, 4)), int(rng.integers(0, 4))
        if conv_out_len(L, k, s, p) < 1:
            continue
        layer = Conv1D("c", C, O, k, s, p, rng)
        x = rng.normal(size=(2, C, L))
        assert rel_err(layer.forward(x), conv1d_brute(x, layer.W, layer.b, s, p)) < 1e-6
    for _ in range(30):
        C, O = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        L, k = int(rng.integers(4, 17)), int(rng.integers(2, 8))
        s = int(rng.integers(1, 4))
        p = int(rng.integers(0, k))
        op = int(rng.integers(0, s))
        if tconv_out_len(L, k, s, p, op) < 1 or k - 1 - p < 0:
            continue
        layer = ConvTranspose1D("t", C, O, k, s, p, op, rng)
        x = rng.normal(size=(2, C, L))
        assert rel_err(layer.forward(x), tconv1d_brute(x, layer.W, layer.b, s, p, op)) < 1e-6


def test_dropout_only_active_in_train_mode():
    net = Conv1DNet(seed=4)
    x = np.random.default_rng(5).random(256)
    a = net_forward(net, x, Mode.EVAL)
    b = net_forward(net, x, Mode.EVAL)
    assert np.array_equal(a, b)
    t1 = net_forward(net, x, Mode.TRAIN, rng=np.random.default_rng(1))
    t2 = net_forward(net, x, Mode.TRAIN, rng=np.random.default_rng(2))
    assert not np.array_equal(t1, t2)


def test_argmax_invariant_to_constant_logit_shift():
    rng = np.random.default_rng(6)
    logits = rng.normal(size=(1, 3, 16))
    shifted = logits + rng.normal(size=(1, 1, 16))
    assert np.array_equal(
        softmax_channels(logits).argmax(axis=1), softmax_channels(shifted).argmax(axis=1)
    )


# --- gradients ---------------------------------------------------------------


GRAD_TOL = 1e-4


def test_conv_gradients_match_finite_differences():
    rng = np.random.default_rng(41)
    for _ in range(20):
        C, O = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        L, k = int(rng.integers(8, 17)), int(rng.integers(1, 6))
        s, p = int(rng.integers(1, 3)), int(rng.integers(0, 3))
        if conv_out_len(L, k, s, p) < 1:
            continue
        layer = Conv1D("c", C, O, k, s, p, rng)
        x = rng.normal(size=(2, C, L))
        R = rng.normal(size=(2, O, conv_out_len(L, k, s, p)))

        def loss():
            return float((layer.forward(x) * R).sum())

        loss()
        dx = layer.backward(R)
        assert rel_err(dx, numeric_grad(loss, x)) < GRAD_TOL
        assert rel_err(layer.dW, numeric_grad(loss, layer.W)) < GRAD_TOL
        assert rel_err(layer.db, numeric_grad(loss, layer.b)) < GRAD_TOL


def test_tconv_gradients_match_finite_differences():
    rng = np.random.default_rng(42)
    for _ in range(20):
        C, O = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        L, k = int(rng.integers(4, 13)), int(rng.integers(2, 6))
        s = int(rng.integers(1, 3))
        p = int(rng.integers(0, k))
        op = int(rng.integers(0, s))
        if k - 1 - p < 0 or tconv_out_len(L, k, s, p, op) < 1:
            continue
        layer = ConvTranspose1D("t", C, O, k, s, p, op, rng)
        x = rng.normal(size=(2, C, L))
        R = rng.normal(size=(2, O, tconv_out_len(L, k, s, p, op)))

        def loss():
            return float((layer.forward(x) * R).sum())

        loss()
        dx = layer.backward(R)
        assert rel_err(dx, numeric_grad(loss, x)) < GRAD_TOL
        assert rel_err(layer.dW, numeric_grad(loss, layer.W)) < GRAD_TOL
        assert rel_err(layer.db, numeric_grad(loss, layer.b)) < GRAD_TOL


def test_relu_gradient_matches_finite_differences():
    rng = np.random.default_rng(43)
    for _ in range(20):
        relu = ReLU()
        x = rng.normal(size=(2, 3, 10)) + 0.05  # keep clear of the kink
        R = rng.normal(size=x.shape)

        def loss():
            return float((relu.forward(x) * R).sum())

        loss()
        assert rel_err(relu.backward(R), numeric_grad(loss, x)) < GRAD_TOL


def test_softmax_ce_gradient_matches_finite_differences():
    rng = np.random.default_rng(44)
    for _ in range(20):
        logits = rng.normal(size=(2, 3, 12))
        targets = rng.integers(0, 3, (2, 12))

        def loss():
            return cross_entropy(softmax_channels(logits), targets)

        analytic = softmax_ce_backward(softmax_channels(logits), targets)
        assert rel_err(analytic, numeric_grad(loss, logits)) < GRAD_TOL


# --- training ----------------------------------------------------------------


def test_train_rejects_zero_epochs():
    with pytest.raises(ConfigInvalid):
        TrainConfig(epochs=0).validate()


def test_train_overfits_noise_free_signals():
    cfg = SyntheticSignalConfig(noise_sigma=(0.0, 0.0), seed=0)
    tc = TrainConfig(epochs=200, dataset_size=10, batch_size=4, validation_fraction=0.2, seed=3)
    net = Conv1DNet(seed=3)
    train(net, tc, cfg)
    X, Y = make_dataset(cfg, 10, base_seed=3)
    train_idx = np.random.default_rng(3).permutation(10)[2:]  # same split as train()
    probs = net.forward(X[train_idx])
    assert (probs.argmax(axis=1) == Y[train_idx]).mean() >= 0.99


def test_train_deterministic_same_seed():
    tc = TrainConfig(epochs=2, dataset_size=40, seed=9)
    net1 = Conv1DNet(seed=9)
    r1 = train(net1, tc, SyntheticSignalConfig())
    net2 = Conv1DNet(seed=9)
    r2 = train(net2, tc, SyntheticSignalConfig())
    assert r1.loss_curve == r2.loss_curve
    assert r1.val_accuracy_curve == r2.val_accuracy_curve
    assert net1.weights_equal(net2)


def test_adam_moves_toward_minimum():
    class P:
        pass

    p = P()
    p.x = np.array([5.0])
    p.dx = np.zeros(1)
    opt = Adam([(p, "x")], lr=0.1)
    for _ in range(400):
        p.dx = 2.0 * p.x  # d/dx x^2
        opt.step()
    assert abs(p.x[0]) < 1e-2


# --- inference ---------------------------------------------------------------


def test_infer_window_on_synthetic_trace(quick_net):
    # noise-free square trace: t_on = 64/256, t_off = 192/256 of 1000 frames
    stride = 10
    frames = np.arange(0, 1000, stride)
    values = np.zeros(len(frames))
    on = (frames >= 250) & (frames < 750)
    values[on] = 0.55
    spike = (frames >= 250) & (frames < 250 + 2 * stride)
    values[spike] = 1.0
    trace = BrightnessTrace(values, frames)
    first, last, labels = infer_interest_window(quick_net, trace)
    assert abs(first - 250) <= 2 * stride
    assert abs(last - 750) <= 2 * stride
    assert len(labels) == len(frames)


def test_infer_window_all_zero_raises(quick_net):
    with pytest.raises(NoOnRegion):
        infer_interest_window(quick_net, BrightnessTrace(np.zeros(64), np.arange(64)))


def test_infer_window_fixture(quick_net, fixture_video):
    trace = compute_brightness_trace(fixture_video.source, 1)
    first, last, _ = infer_interest_window(quick_net, trace)
    t0, t1 = fixture_video.cfg.on_window
    assert abs(first - t0) <= 3
    assert abs(last - t1) <= 3


def test_infer_window_short_trace_rejected(quick_net):
    with pytest.raises(WrongLength):
        infer_interest_window(quick_net, BrightnessTrace(np.zeros(4), np.arange(4)))


# --- persistence -------------------------------------------------------------


def test_save_load_round_trip_bitwise(tmp_path):
    net = Conv1DNet(seed=77)
    path = tmp_path / "model.json"
    save_model(net, path)
    loaded = load_model(path)
    assert loaded.weights_equal(net)


def test_load_truncated_file(tmp_path):
    net = Conv1DNet(seed=77)
    path = tmp_path / "model.json"
    save_model(net, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(SchemaMismatch):
        load_model(path)


def test_load_wrong_shape(tmp_path):
    import json

    net = Conv1DNet(seed=77)
    path = tmp_path / "model.json"
    save_model(net, path)
    obj = json.loads(path.read_text())
    obj["layers"][0]["out"] = 16
    path.write_text(json.dumps(obj))
    with pytest.raises(SchemaMismatch):
        load_model(path)


def test_loaded_model_equivalent_on_fixed_set(tmp_path, quick_net):
    X, Y = make_dataset(SyntheticSignalConfig(), 20, base_seed=55)
    before = (quick_net.forward(X).argmax(axis=1) == Y).mean()
    path = tmp_path / "m.json"
    save_model(quick_net, path)
    after_net = load_model(path)
    after = (after_net.forward(X).argmax(axis=1) == Y).mean()
    assert before == after
