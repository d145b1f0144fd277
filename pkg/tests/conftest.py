import numpy as np
import pytest
from PIL import Image

from paintscore import model as model_mod
from paintscore.dataset import load_manifest
from paintscore.preprocess import PreprocessConfig
from paintscore.synthetic import SyntheticSpec, generate_synthetic
from paintscore.training import Hyperparams, train


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """16 synthetic paintings at 48 px; shared read-only across tests.

    Seed 69 keeps every total well away from 0 so MAPE stays defined.
    """
    out = tmp_path_factory.mktemp("tiny_corpus")
    manifest = generate_synthetic(SyntheticSpec(count=16, image_side=48, seed=69), out)
    return out, manifest


@pytest.fixture
def fresh_tiny_manifest(tiny_corpus):
    """Reload the corpus so mutation (split fields) cannot leak between tests."""
    out, _ = tiny_corpus
    return load_manifest(out / "manifest.csv")


@pytest.fixture(scope="session")
def tiny_checkpoint(tiny_corpus, tmp_path_factory):
    """A briefly trained mini model over the tiny corpus, saved to disk."""
    _, manifest = tiny_corpus
    run_dir = tmp_path_factory.mktemp("tiny_run")
    model = model_mod.build(model_mod.ModelConfig.mini(), init_seed=5)
    hp = Hyperparams(batch_size=8, max_epochs=2, seed=5, eval_every=2)
    pre_cfg = PreprocessConfig.for_backbone("mini", seed=5)
    checkpoint, _ = train(model, manifest.records, hp, pre_cfg, out_dir=run_dir)
    return checkpoint


def make_image(path, width, height, color=(120, 30, 200), fmt="PNG"):
    img = Image.new("RGB", (width, height), color)
    img.save(path, format=fmt)
    return path


def solid_array(width, height, color=(10, 20, 30)):
    return np.full((height, width, 3), np.array(color, dtype=np.uint8), dtype=np.uint8)
