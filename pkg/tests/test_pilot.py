import numpy as np
import pytest

from invreg.pilot import clip_to_square, knn_fit, sawtooth_estimator
from invreg.synth import Dataset


def _dataset(x, y):
    return Dataset(x=np.asarray(x, float), y=np.asarray(y, float), sigma2=0.0, seed=0)


def test_clip_to_square():
    out = clip_to_square(np.array([[1.5, -2.0], [0.3, 0.9]]))
    assert np.array_equal(out, [[1.0, -1.0], [0.3, 0.9]])


def test_knn_k1_interpolates_training_points():
    x = np.array([[0.0, 0.0], [0.5, 0.5], [-0.5, 0.25]])
    y = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
    f = knn_fit(_dataset(x, y), k=1)
    assert np.allclose(f(x), y)


def test_knn_mean_of_neighbors():
    x = np.array([[0.0, 0.0], [0.2, 0.0], [1.0, 1.0]])
    y = np.array([[0.0, 0.0], [0.4, 0.0], [1.0, 1.0]])
    f = knn_fit(_dataset(x, y), k=2)
    # query at origin: two nearest are rows 0 and 1
    assert np.allclose(f(np.array([0.0, 0.0])), [0.2, 0.0])


def test_knn_tie_break_lowest_index():
    # four equidistant points from the origin with distinct responses
    x = np.array([[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]])
    y = np.array([[1.0, 0.0], [0.6, 0.0], [0.2, 0.0], [-0.2, 0.0]])
    f = knn_fit(_dataset(x, y), k=2)
    # all four are at distance 0.5: rows 0 and 1 win by index
    assert np.allclose(f(np.array([0.0, 0.0])), [0.8, 0.0])


def test_knn_output_clipped():
    x = np.array([[0.0, 0.0], [0.1, 0.0]])
    y = np.array([[1.8, -1.5], [1.8, -1.5]])
    f = knn_fit(_dataset(x, y), k=2)
    assert np.array_equal(f(np.array([0.0, 0.0])), [1.0, -1.0])


def test_knn_validation():
    ds = _dataset(np.zeros((3, 2)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        knn_fit(ds, k=0)
    with pytest.raises(ValueError):
        knn_fit(ds, k=4)


def test_knn_k_equals_n_is_global_mean():
    x = np.array([[0.5, 0.5], [-0.5, -0.5]])
    y = np.array([[0.2, 0.4], [0.6, 0.0]])
    f = knn_fit(_dataset(x, y), k=2)
    assert np.allclose(f(np.array([0.9, -0.9])), [0.4, 0.2])


# --- sawtooth ------------------------------------------------------------

def test_sawtooth_first_component_is_identity():
    f = sawtooth_estimator(10)
    x = np.random.default_rng(0).uniform(-1, 1, (200, 2))
    assert np.array_equal(f(x)[:, 0], x[:, 0])


@pytest.mark.parametrize("teeth", [1, 10, 100, 1000])
def test_sawtooth_sup_distance_to_identity(teeth):
    f = sawtooth_estimator(teeth)
    x2 = np.linspace(-1, 1, 20001)
    pts = np.stack([np.zeros_like(x2), x2], axis=1)
    err = np.abs(f(pts)[:, 1] - x2).max()
    assert err <= 2.0 / teeth + 1e-12


def test_sawtooth_exact_branch_values():
    # one tooth on [-1, 1]: slopes +3, -3, +3 on thirds
    f = sawtooth_estimator(1)
    delta = 2.0
    x = np.array([[0.0, -1.0], [0.0, -1.0 + delta / 6], [0.0, -1.0 + delta / 2]])
    vals = f(x)[:, 1]
    assert vals[0] == pytest.approx(-1.0)
    # halfway up the first third: -1 + 3*(delta/6) = 0
    assert vals[1] == pytest.approx(0.0)
    # middle of the tooth sits on the descending branch: -1 + 2 - 3*(1 - 2/3)*...
    d, u = -1.0, delta / 2
    expected = d + delta - 3.0 * (u - delta / 3.0)
    assert vals[2] == pytest.approx(expected)


def test_sawtooth_three_preimages_per_level():
    f = sawtooth_estimator(10)
    x2 = np.linspace(-1, 1, 200001)
    pts = np.stack([np.zeros_like(x2), x2], axis=1)
    vals = f(pts)[:, 1]
    # an interior level inside the first tooth is hit three times
    level = -0.9
    hits = np.abs(vals - level) < 2e-5
    groups = np.split(np.flatnonzero(hits), np.flatnonzero(np.diff(np.flatnonzero(hits)) > 1) + 1)
    assert len(groups) >= 3


def test_sawtooth_endpoint_and_validation():
    f = sawtooth_estimator(10)
    assert f(np.array([0.0, 1.0]))[1] == 1.0
    with pytest.raises(ValueError):
        sawtooth_estimator(0)
