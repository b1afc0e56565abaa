import numpy as np
import pytest

from treesliced.datagen import OrbitConfig, generate_orbit, generate_orbit_dataset


def test_orbit_starts_at_seed_point_and_stays_in_square():
    pts = generate_orbit(4.0, 0.3, 0.7, 500)
    assert pts.shape == (500, 2)
    assert np.allclose(pts[0], [0.3, 0.7])
    assert (pts >= 0).all() and (pts < 1).all()


def test_orbit_rejects_start_outside_square():
    with pytest.raises(ValueError):
        generate_orbit(4.0, 1.2, 0.5, 10)


def test_orbit_update_order():
    # one step by hand: a moves first, then b sees the updated a
    t, a0, b0 = 3.0, 0.2, 0.4
    a1 = (a0 + t * b0 * (1 - b0)) % 1.0
    b1 = (b0 + t * a1 * (1 - a1)) % 1.0
    pts = generate_orbit(t, a0, b0, 2)
    assert pts[1, 0] == pytest.approx(a1)
    assert pts[1, 1] == pytest.approx(b1)


def test_dataset_layout_and_determinism():
    cfg = OrbitConfig(class_params=(2.5, 4.3), orbits_per_class=4, points_per_orbit=50, seed=3)
    ds1 = generate_orbit_dataset(cfg)
    ds2 = generate_orbit_dataset(cfg)
    assert len(ds1) == 8
    assert [c.label for c in ds1] == [2.5] * 4 + [4.3] * 4
    for c1, c2 in zip(ds1, ds2):
        assert np.array_equal(c1.points, c2.points)


def test_dataset_classes_differ():
    cfg = OrbitConfig(class_params=(2.5, 4.3), orbits_per_class=1, points_per_orbit=100, seed=0)
    ds = generate_orbit_dataset(cfg)
    assert not np.allclose(ds[0].points, ds[1].points)


def test_config_validation():
    with pytest.raises(ValueError):
        OrbitConfig(class_params=())
    with pytest.raises(ValueError):
        OrbitConfig(class_params=(1.0, -2.0))
    with pytest.raises(ValueError):
        OrbitConfig(orbits_per_class=0)
