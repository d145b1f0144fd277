import numpy as np
import pytest
import torch

from paintscore.model import ModelConfig, build
from paintscore.preprocess import PreprocessConfig
from paintscore.synthetic import SyntheticSpec, generate_synthetic
from paintscore.training import (
    Hyperparams,
    TrainingDiverged,
    make_optimizer,
    mse_loss,
    target_vector,
    train,
    training_step,
)


def tensor_batch(n=4, side=72, seed=0):
    rng = np.random.default_rng(seed)
    x = torch.from_numpy(rng.normal(size=(n, 3, side, side)).astype(np.float32))
    y = torch.from_numpy(rng.uniform(0, 20, size=(n, 5)).astype(np.float32))
    return x, y


class TestMseLoss:
    def test_identity_is_zero(self):
        t = torch.rand(3, 5)
        assert mse_loss(t, t).item() == 0.0

    def test_single_sample_arithmetic(self):
        pred = torch.tensor([[12.0, 10.0, 10.0, 10.0, 10.0]])
        target = torch.full((1, 5), 10.0)
        assert mse_loss(pred, target).item() == pytest.approx(0.8)

    def test_two_sample_batch_matches_hand_oracle(self):
        pred = torch.tensor([[1.0, 2.0, 3.0, 4.0, 5.0],
                             [5.0, 4.0, 3.0, 2.0, 1.0]])
        target = torch.tensor([[1.0, 1.0, 1.0, 1.0, 1.0],
                               [2.0, 2.0, 2.0, 2.0, 2.0]])
        # per-sample means: (0+1+4+9+16)/5 = 6, (9+4+1+0+1)/5 = 3; overall 4.5
        assert mse_loss(pred, target).item() == pytest.approx(4.5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse_loss(torch.rand(3, 5), torch.rand(3, 4))


class TestTrainingStep:
    def test_repeated_steps_descend(self):
        model = build(ModelConfig.mini(), init_seed=1)
        hp = Hyperparams(seed=1)
        x, y = tensor_batch(n=10, seed=1)
        opt = make_optimizer(model, hp)
        first = training_step(model, x, y, hp, opt)
        loss = first
        for _ in range(199):
            loss = training_step(model, x, y, hp, opt)
        assert loss < first

    def test_zero_learning_rate_is_exact_noop_on_parameters(self):
        model = build(ModelConfig.mini(), init_seed=2)
        hp = Hyperparams(learning_rate=0.0, seed=2)
        x, y = tensor_batch(n=6, seed=2)
        before = {k: v.clone() for k, v in model.named_parameters()}
        opt = make_optimizer(model, hp)
        first = training_step(model, x, y, hp, opt)
        second = training_step(model, x, y, hp, opt)
        assert first == second  # normalization uses the same batch stats both times
        for key, value in model.named_parameters():
            assert torch.equal(value, before[key]), key

    def test_divergence_detected(self):
        model = build(ModelConfig.mini(), init_seed=3)
        hp = Hyperparams(seed=3)
        x, y = tensor_batch(n=2, seed=3)
        y[0, 0] = float("inf")
        with pytest.raises(TrainingDiverged) as err:
            training_step(model, x, y, hp, batch_id="fixture-batch")
        assert "fixture-batch" in str(err.value)
        assert "0.0005" in str(err.value)

    def test_sgd_variant_also_descends(self):
        model = build(ModelConfig.mini(), init_seed=4)
        hp = Hyperparams(optimizer="sgd", learning_rate=1e-4, seed=4)
        x, y = tensor_batch(n=8, seed=4)
        opt = make_optimizer(model, hp)
        losses = [training_step(model, x, y, hp, opt) for _ in range(50)]
        assert losses[-1] < losses[0]


class TestTargets:
    def test_component_targets_used_when_present(self, fresh_tiny_manifest):
        record = fresh_tiny_manifest.records[0]
        target = target_vector(record)
        assert target.shape == (5,)
        assert np.allclose(target, record.consensus_components.as_tuple())

    def test_total_only_falls_back_to_even_split(self, fresh_tiny_manifest):
        record = fresh_tiny_manifest.records[0]
        record.consensus_components = None
        record.consensus_total = 60.0
        assert np.allclose(target_vector(record), [12.0] * 5)

    def test_missing_ground_truth_rejected(self, fresh_tiny_manifest):
        record = fresh_tiny_manifest.records[0]
        record.consensus_components = None
        record.consensus_total = None
        with pytest.raises(ValueError):
            target_vector(record)


@pytest.fixture(scope="module")
def train_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("train_corpus")
    manifest = generate_synthetic(SyntheticSpec(count=30, image_side=48, seed=13), out)
    return manifest


class TestTrainLoop:
    def test_step_count_exact(self, train_corpus):
        model = build(ModelConfig.mini(), init_seed=0)
        hp = Hyperparams(batch_size=10, max_epochs=3, seed=0, eval_every=10)
        cfg = PreprocessConfig.for_backbone("mini", seed=0)
        _, log = train(model, train_corpus.records, hp, cfg)
        assert len(log.entries) == 3
        assert log.total_steps == 9
        assert [e.epoch for e in log.entries] == [1, 2, 3]

    def test_partial_last_batch_kept(self, train_corpus):
        model = build(ModelConfig.mini(), init_seed=0)
        hp = Hyperparams(batch_size=8, max_epochs=1, seed=0)
        cfg = PreprocessConfig.for_backbone("mini", seed=0)
        _, log = train(model, train_corpus.records, hp, cfg)
        assert log.entries[0].steps == 4  # 8+8+8+6

    def test_fixed_seed_bit_identical_losses(self, train_corpus):
        losses = []
        for _ in range(2):
            model = build(ModelConfig.mini(), init_seed=6)
            hp = Hyperparams(batch_size=10, max_epochs=2, seed=6)
            cfg = PreprocessConfig.for_backbone("mini", seed=6)
            _, log = train(model, train_corpus.records, hp, cfg)
            losses.append([e.train_loss for e in log.entries])
        assert losses[0] == losses[1]

    def test_empty_training_set_rejected(self):
        model = build(ModelConfig.mini(), init_seed=0)
        hp = Hyperparams(max_epochs=1)
        cfg = PreprocessConfig.for_backbone("mini")
        with pytest.raises(ValueError):
            train(model, [], hp, cfg)

    def test_checkpoint_and_log_written(self, train_corpus, tmp_path):
        model = build(ModelConfig.mini(), init_seed=0)
        hp = Hyperparams(batch_size=10, max_epochs=2, seed=0, eval_every=1)
        cfg = PreprocessConfig.for_backbone("mini", seed=0)
        test_records = train_corpus.records[:5]
        checkpoint, log = train(
            model, train_corpus.records[5:], hp, cfg,
            test_records=test_records, out_dir=tmp_path,
        )
        assert checkpoint is not None
        assert checkpoint.weights_path.exists()
        assert checkpoint.training_meta.epochs_completed == 2
        assert all(e.test_loss is not None for e in log.entries)
        jsonl = log.write_jsonl(tmp_path / "log.jsonl")
        lines = jsonl.read_text().strip().splitlines()
        assert len(lines) == 2

    def test_resume_continues_epoch_numbering(self, train_corpus, tmp_path):
        model = build(ModelConfig.mini(), init_seed=0)
        hp = Hyperparams(batch_size=10, max_epochs=2, seed=0, eval_every=2)
        cfg = PreprocessConfig.for_backbone("mini", seed=0)
        checkpoint, first_log = train(model, train_corpus.records, hp, cfg, out_dir=tmp_path)
        assert first_log.entries[-1].epoch == 2
        _, resumed_log = train(
            model, train_corpus.records, hp, cfg, out_dir=tmp_path,
            start_epoch=checkpoint.training_meta.epochs_completed,
        )
        assert [e.epoch for e in resumed_log.entries] == [3, 4]
