"""Smoke tests for the trusmap Python module against the C++ core."""

import math

import numpy as np
import pytest

import trusmap


@pytest.fixture(scope="module")
def small_config():
    cfg = trusmap.PhantomConfig()
    cfg.dims = [64, 64, 64]
    cfg.spacing = (1.0, 1.0, 1.0)
    cfg.seed = 20260808
    return cfg


def test_volume_numpy_round_trip():
    rng = np.random.default_rng(7)
    data = rng.uniform(0, 255, size=(8, 10, 12)).astype(np.float32)
    vol = trusmap.Volume.from_numpy(data, spacing=(0.5, 0.7, 0.9), origin=(1, 2, 3))
    assert vol.dims == (12, 10, 8)
    back = vol.to_numpy()
    assert back.shape == (8, 10, 12)
    assert np.array_equal(back, data)
    # trilinear sample at a voxel center equals the stored value
    world = vol.index_to_world((3, 4, 5))
    assert vol.sample(world) == pytest.approx(float(data[5, 4, 3]))
    assert vol.sample((1e6, 0, 0)) is None


def test_transform_algebra():
    t = trusmap.RigidTransform.from_params(
        (1.0, -2.0, 3.0), (0.1, -0.05, 0.2), center=(10, 10, 10)
    )
    inv = t.invert()
    p = (4.0, 5.0, 6.0)
    q = t.apply(p)
    back = inv.apply(q)
    assert np.allclose(back, p, atol=1e-12)
    composed = t.compose(inv)
    assert composed.rotation_angle_deg() < 1e-9

    # JSON round-trip
    again = trusmap.RigidTransform.from_json(t.to_json())
    assert np.allclose(again.apply(p), q, atol=1e-10)


def test_phantom_and_registration(small_config):
    trusmap.set_threads(0)
    ref, _ = trusmap.generate_reference(small_config)
    t_true = trusmap.RigidTransform.from_params(
        (3.0, -2.0, 1.0),
        (math.radians(2.0), math.radians(-1.0), math.radians(2.0)),
        center=(31.5, 31.5, 31.5),
    )
    mov, truth = trusmap.generate_moving(small_config, t_true, noise_seed=99)

    result = trusmap.register_volumes(ref, mov)
    assert result.success
    assert result.score > 0.6

    pairs = list(zip(truth.fiducials_ref, truth.fiducials_mov))
    mean_mm, max_mm, n = trusmap.tre(pairs, result.transform)
    assert n == small_config.n_fiducials
    assert mean_mm <= 1.44
    assert max_mm <= 3.84


def test_similarity_self_is_one(small_config):
    ref, _ = trusmap.generate_reference(small_config)
    score, overlap = trusmap.similarity(ref, ref, trusmap.RigidTransform(), step=1)
    assert score == pytest.approx(1.0, abs=1e-9)
    assert overlap == pytest.approx(1.0)


def test_sector_targeting():
    grid = trusmap.SectorGrid.from_box((0, 0, 0), (40, 20, 30))
    assert list(grid.col_edges) == [0, 10, 20, 30, 40]
    # 18 mm core through the Mid-Lateral-Right sector center
    assert trusmap.clip_length((35, 10, 6), (35, 10, 24), grid, "ML-R") == pytest.approx(10.0)
    assert trusmap.is_hit((35, 10, 6), (35, 10, 24), grid, "ML-R")
    assert not trusmap.is_hit((-5, 10, 6), (-5, 10, 24), grid, "ML-R")
    assert trusmap.fuse_apex("AL-L") == "AP-L"
    assert trusmap.fuse_apex("BL-R") == "BL-R"
    assert len(trusmap.raw_target_codes()) == 12


def test_chi_square_matches_published_values():
    assert trusmap.chi2_sf_df1(5.89) == pytest.approx(0.01523, abs=1e-4)
    assert trusmap.chi2_sf_df1(3.841) == pytest.approx(0.0500, abs=2e-4)
    assert trusmap.chi2_2x2(10, 10, 10, 10) == 0.0
    assert trusmap.chi2_2x2(20, 10, 10, 20) == pytest.approx(6.667, abs=1e-3)
    with pytest.raises(ValueError):
        trusmap.chi2_2x2(0, 0, 1, 1)


def test_mha_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    data = rng.uniform(0, 255, size=(6, 7, 8)).astype(np.float32)
    vol = trusmap.Volume.from_numpy(data, spacing=(0.5, 0.5, 0.5))
    path = str(tmp_path / "vol.mha")
    trusmap.write_mha(vol, path)
    back = trusmap.read_mha(path)
    assert np.array_equal(back.to_numpy(), data)
    with pytest.raises(IOError):
        trusmap.read_mha(str(tmp_path / "missing.mha"))


def test_gaussian_pyramid(small_config):
    ref, _ = trusmap.generate_reference(small_config)
    levels = trusmap.build_pyramid(ref, 3)
    assert [lv.dims[0] for lv in levels] == [64, 32, 16]
    assert levels[1].spacing[0] == pytest.approx(2.0 * levels[0].spacing[0])
