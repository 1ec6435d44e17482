import cmath
import math

import numpy as np
import pytest

import tofmpi


def small_scene(seed=3, size=24):
    scene = tofmpi.sample_simple_scene(seed)
    scene.resolution = (size, size)
    return scene


def test_builtin_materials_are_named():
    names = [name for name, _ in tofmpi.builtin_materials()]
    assert len(names) == 6
    assert names[0] == "Concrete"


def test_scene_json_round_trip():
    scene = small_scene()
    again = tofmpi.CornerScene.from_json(scene.to_json())
    assert again == scene


def test_render_shapes_and_direct_only_exactness():
    cfg = tofmpi.ToFConfig()
    cfg.multipath_enabled = False
    frames = tofmpi.render(small_scene(), cfg)
    assert frames["depth"].shape == (24, 24)
    valid = frames["valid"].astype(bool)
    assert valid.any()
    np.testing.assert_allclose(frames["depth"][valid], frames["ground_truth"][valid], atol=1e-9)


def test_multipath_only_lengthens_depth():
    frames = tofmpi.render(small_scene(seed=8))
    valid = frames["valid"].astype(bool)
    assert np.all(frames["depth"][valid] >= frames["ground_truth"][valid] - 1e-12)


def test_combine_phasors_matches_complex_sum():
    cfg = tofmpi.ToFConfig()
    returns = [(1.0, 3.2), (0.25, 4.1), (0.1, 5.0)]
    k = 4 * math.pi * cfg.modulation_frequency / 299792458.0
    z = sum(a * cmath.exp(1j * k * d) for a, d in returns)
    depth, amplitude = tofmpi.combine_phasors(returns, cfg)
    expected = (cmath.phase(z) % (2 * math.pi)) / k
    assert depth == pytest.approx(expected, abs=1e-12)
    assert amplitude == pytest.approx(abs(z), abs=1e-12)


def test_zero_signal_raises_with_code():
    with pytest.raises(tofmpi.TofmpiError) as info:
        tofmpi.combine_phasors([(0.0, 1.0)])
    assert info.value.code == "ZeroSignal"


def test_laplacian_of_ramp_vanishes_inside():
    img = np.add.outer(np.arange(12.0), 2 * np.arange(10.0))
    out = tofmpi.laplacian(img, 3)
    np.testing.assert_allclose(out[1:-1, 1:-1], 0.0, atol=1e-12)
    with pytest.raises(tofmpi.TofmpiError):
        tofmpi.laplacian(img, 4)


def test_features_layout_and_confidence():
    frames = tofmpi.render(small_scene(size=16))
    tensor, layout = tofmpi.extract_features(frames)
    assert tensor.shape == (16, 16, 39)
    assert layout == tofmpi.feature_layout()
    c = layout.index("confidence")
    d = layout.index("depth")
    expected = np.exp(-((tensor[:, :, d] * (math.cos(-math.pi / 4) + math.sin(-math.pi / 4))) ** 2))
    np.testing.assert_allclose(tensor[:, :, c], expected, atol=1e-15)


def test_forest_fits_step_and_survives_save_load():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(400, 3))
    y = np.where(X[:, 1] > 0.5, 2.0, -1.0)
    cfg = tofmpi.ForestConfig()
    cfg.n_trees = 4
    cfg.max_depth = 3
    cfg.min_samples_split = 2
    cfg.bootstrap = False
    forest = tofmpi.train_forest(X, y, cfg)
    np.testing.assert_allclose(forest.predict(X), y)
    assert int(np.argmax(forest.importances)) == 1
    again = tofmpi.RegressionForest.load(forest.save())
    np.testing.assert_array_equal(again.predict(X), forest.predict(X))


def test_evaluate_perfect_correction():
    frames = tofmpi.render(small_scene(size=12))
    report = tofmpi.evaluate([frames], [frames["ground_truth"]])
    assert report["mean_rpe_after"] == 0.0
    assert report["mean_rpe_before"] >= 0.0
    assert tofmpi.rpe(2.0, 2.5) == pytest.approx(0.25)
