import numpy as np
import pytest

from invreg.maps import identity_map, swirl_truth
from invreg.synth import (
    CovariateLaw,
    Dataset,
    DatasetFormatError,
    read_csv,
    sample_dataset,
    write_csv,
)


def test_sample_shapes_and_domain():
    ds = sample_dataset(identity_map(), 500, 0.01, seed=1)
    assert ds.n == 500
    assert ds.x.shape == ds.y.shape == (500, 2)
    assert np.all(np.abs(ds.x) <= 1.0)


def test_determinism_per_seed():
    a = sample_dataset(swirl_truth(), 200, 1e-3, seed=7)
    b = sample_dataset(swirl_truth(), 200, 1e-3, seed=7)
    c = sample_dataset(swirl_truth(), 200, 1e-3, seed=8)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.y, c.y)


def test_zero_noise_gives_exact_images():
    truth = swirl_truth()
    ds = sample_dataset(truth, 300, 0.0, seed=2)
    assert np.array_equal(ds.y, truth(ds.x))


def test_noise_variance_close():
    truth = identity_map()
    ds = sample_dataset(truth, 50_000, 0.04, seed=3)
    resid = ds.y - ds.x
    assert resid.var() == pytest.approx(0.04, rel=0.05)


def test_input_validation():
    with pytest.raises(ValueError):
        sample_dataset(identity_map(), 0, 0.1, seed=0)
    with pytest.raises(ValueError):
        sample_dataset(identity_map(), 10, -0.1, seed=0)
    with pytest.raises(ValueError):
        Dataset(x=np.zeros((3, 2)), y=np.zeros((4, 2)), sigma2=0.0, seed=0)


def test_csv_roundtrip_bitwise(tmp_path):
    ds = sample_dataset(swirl_truth(), 123, 1e-3, seed=11)
    path = tmp_path / "d.csv"
    write_csv(ds, path)
    back = read_csv(path)
    assert np.array_equal(back.x, ds.x)
    assert np.array_equal(back.y, ds.y)
    assert back.sigma2 == ds.sigma2 and back.seed == ds.seed


def test_csv_extra_comments_survive(tmp_path):
    ds = sample_dataset(identity_map(), 5, 0.0, seed=0)
    path = tmp_path / "d.csv"
    write_csv(ds, path, extra_comments=["config: n=5"])
    text = path.read_text()
    assert text.startswith("# config: n=5\n")
    assert read_csv(path).n == 5


def test_read_csv_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y1,y2\n0.1,0.2,0.3\n")
    with pytest.raises(DatasetFormatError) as exc:
        read_csv(path)
    assert exc.value.line == 2
    assert "line 2" in str(exc.value)


def test_read_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c,d\n0,0,0,0\n")
    with pytest.raises(DatasetFormatError):
        read_csv(path)


def test_read_csv_non_numeric(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y1,y2\n0.1,oops,0.3,0.4\n")
    with pytest.raises(DatasetFormatError) as exc:
        read_csv(path)
    assert exc.value.line == 2


def test_read_csv_empty(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("\n")
    with pytest.raises(DatasetFormatError):
        read_csv(path)


def test_rejection_law():
    law = CovariateLaw(
        kind="rejection",
        density=lambda p: 0.5 + 0.5 * (p[:, 0] > 0),
        density_bound=1.0,
    )
    rng = np.random.default_rng(5)
    x = law.sample(20_000, rng)
    assert x.shape == (20_000, 2)
    assert np.all(np.abs(x) <= 1.0)
    # twice as much mass on the right half
    frac_right = (x[:, 0] > 0).mean()
    assert frac_right == pytest.approx(2 / 3, abs=0.02)


def test_rejection_law_validation():
    law = CovariateLaw(kind="rejection")
    with pytest.raises(ValueError):
        law.sample(10, np.random.default_rng(0))
    with pytest.raises(ValueError):
        CovariateLaw(kind="nope").sample(10, np.random.default_rng(0))
