import dataclasses

import pytest

from ablatrack import Conv1DNet, SynthVideoConfig, SyntheticSignalConfig, TrainConfig, generate_synthetic_video, train


@dataclasses.dataclass
class Fixture:
    dir: object
    cfg: SynthVideoConfig
    source: object
    gt: object

    @property
    def manifest(self):
        return self.source.manifest_path


@pytest.fixture(scope="session")
def fixture_video(tmp_path_factory):
    """The default 100-frame 512x384 synthetic test video (flow RIGHT)."""
    d = tmp_path_factory.mktemp("fixture")
    cfg = SynthVideoConfig()
    source, gt = generate_synthetic_video(cfg, d)
    return Fixture(d, cfg, source, gt)


@pytest.fixture(scope="session")
def fixture_video_left(tmp_path_factory):
    """Mirrored-geometry fixture with flow from the left."""
    from ablatrack import FlowDirection

    d = tmp_path_factory.mktemp("fixture_left")
    cfg = SynthVideoConfig(flow_direction=FlowDirection.LEFT, initial_edge_x=212.0)
    source, gt = generate_synthetic_video(cfg, d)
    return Fixture(d, cfg, source, gt)


@pytest.fixture(scope="session")
def quick_net():
    """Lightly trained window model; enough accuracy for pipeline tests."""
    net = Conv1DNet(seed=7)
    report = train(net, TrainConfig(epochs=12, dataset_size=300, seed=7), SyntheticSignalConfig())
    assert report.final_val_accuracy > 0.9
    return net
