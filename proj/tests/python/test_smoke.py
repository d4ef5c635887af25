import math

import numpy as np
import pytest

import vmda


def test_kernels():
    s = vmda.softmax(np.array([0.0, math.log(2.0)]), 0)
    assert s == pytest.approx([1 / 3, 2 / 3], abs=1e-15)
    out = vmda.conv2d(np.ones((1, 5, 5)), np.ones((1, 1, 3, 3)), np.zeros(1), padding=1)
    assert out[0, 2, 2] == 9.0
    assert vmda.avg_pool2d(np.array([[[1.0, 2.0], [3.0, 4.0]]]), 2, 2)[0, 0, 0] == 2.5
    assert vmda.linear(np.ones(2), np.array([[1.0, 2.0], [3.0, 4.0]]), np.zeros(2)).tolist() == [3.0, 7.0]
    assert vmda.gelu(1.0) == pytest.approx(0.841345, abs=1e-6)
    with pytest.raises(ValueError):
        vmda.softmax(np.array([np.nan]), 0)


def test_frequency_split_reconstructs():
    rng = np.random.default_rng(0)
    f = rng.normal(size=(3, 8, 8))
    p = vmda.FreqSelectorParams.neutral(3)
    high, low = vmda.decompose(f, p)
    assert np.max(np.abs(high + low - f)) <= 1e-12
    assert vmda.frequency_select(f, p).shape == f.shape
    fused = vmda.fmfm(f, rng.normal(size=(3, 8, 8)), vmda.FmfmParams.zeros(3))
    assert not fused.any()


def test_memory_pool():
    pool = vmda.MemoryPool(vmda.MemoryConfig(dim=2), vmda.FilterParams.identity(2))
    pool.init(np.array([2.0, 0.0]))
    pool.push_short(np.array([0.0, 2.0]))
    r = pool.retrieve_detail(np.array([1.0, 0.0]))
    assert r["weights"][0] == pytest.approx([0.8808, 0.1192], abs=1e-4)
    assert pool.sizes() == [2, 1, 1]
    for _ in range(20):
        pool.update(np.array([0.1, 0.1]))
    assert pool.sizes() == [8, 1, 1]
    assert pool.tier(0).shape == (8, 2)
    with pytest.raises(vmda.StateError):
        pool.init(np.zeros(2))
    with pytest.raises(ValueError):
        pool.push_short(np.zeros(3))


def test_losses_and_metrics():
    assert vmda.focal_loss([0.5], [1]) == pytest.approx(0.0433217, abs=1e-6)
    assert vmda.regression_loss((0, 0, 1, 1), (2, 2, 1, 1)) == pytest.approx(23.5556, abs=1e-3)
    grad, smooth = vmda.regression_gradient((1.1, 0.7, 2.3, 1.9), (0.8, 1.2, 2.0, 2.4))
    assert all(smooth) and len(grad) == 4
    g = vmda.BoundingBox(0, 0, 10, 10)
    res = [None, vmda.BoundingBox(0, 0, 5, 10), g, vmda.BoundingBox(3, 3, 4, 4)]
    report = vmda.evaluate(res, [g, g, g, None])
    assert report["precision"] == report["recall"] == report["f_score"] == 0.5
    assert report["pr_threshold"] == 20.0
    assert vmda.iou((0, 0, 2, 2), (1, 0, 2, 2)) == pytest.approx(1 / 3)


def test_generate_and_run(tmp_path):
    text = vmda.default_config_text().replace("frames = 64", "frames = 10")
    seq = vmda.generate(text)
    assert seq["rgb"].shape == (10, 2, 64, 64)
    assert len(seq["ground_truth"]) == 10
    results = vmda.run(text, str(tmp_path))
    assert len(results[0]["predictions"]) == 10
    assert (tmp_path / "seq_000" / "boxes.txt").exists()
    again = vmda.run(text, str(tmp_path / "again"))
    assert again[0]["predictions"] == results[0]["predictions"]


def test_selftest_passes():
    failed = [(name, detail) for name, ok, detail in vmda.selftest() if not ok]
    assert failed == []
