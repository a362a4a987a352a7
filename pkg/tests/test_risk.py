import numpy as np
import pytest

from invreg.maps import PlanarMap, identity_map, swirl_truth
from invreg.risk import (
    REPORT_CSV_HEADER,
    forward_l2_risk,
    inverse_risk,
    levelset_lipschitz_diag,
    report_csv_row,
    sup_norm_error,
)


def _shift(c1, c2):
    c = np.array([c1, c2])
    return PlanarMap(fn=lambda p: p + c, inverse_fn=lambda p: p - c, name="shift")


def _scale(a):
    return PlanarMap(fn=lambda p: a * p, inverse_fn=lambda p: p / a, name="scale")


# --- forward risk --------------------------------------------------------

def test_forward_risk_constant_shift_exact():
    # ||f_hat - f_star|| is constant, so Monte Carlo is exact
    r = forward_l2_risk(_shift(0.1, 0.0), identity_map(), n_samples=100)
    assert r == pytest.approx(0.01, abs=1e-12)


def test_forward_risk_scale_oracle():
    # E||0.5 X - X||^2 = 0.25 E||X||^2 = 0.25 * 2/3 for X uniform on the square
    r = forward_l2_risk(_scale(0.5), identity_map(), n_samples=200_000, seed=1)
    assert r == pytest.approx(0.25 * 2 / 3, rel=0.02)


def test_forward_risk_deterministic_per_seed():
    a = forward_l2_risk(_scale(0.9), identity_map(), n_samples=1000, seed=5)
    b = forward_l2_risk(_scale(0.9), identity_map(), n_samples=1000, seed=5)
    assert a == b


def test_forward_risk_validation():
    with pytest.raises(ValueError):
        forward_l2_risk(identity_map(), identity_map(), n_samples=0)


# --- inverse risk --------------------------------------------------------

def test_inverse_risk_shift_closed_form():
    rep = inverse_risk(_shift(0.01, 0.0), identity_map(), n_samples=100)
    assert rep.inverse_l2 == pytest.approx(1e-4, abs=1e-15)
    assert rep.inverse_l2_norm == pytest.approx(0.01, abs=1e-12)
    assert rep.psi_term == pytest.approx(1e-8, abs=1e-18)
    assert rep.forward_l2 == pytest.approx(1e-4, abs=1e-15)
    assert rep.mc_std_error == pytest.approx(0.0, abs=1e-15)


def test_total_is_forward_plus_psi():
    rep = inverse_risk(_scale(0.8), identity_map(), n_samples=5000, seed=2)
    assert rep.total_inverse_risk == rep.forward_l2 + rep.psi_term
    assert rep.psi_term == pytest.approx(rep.inverse_l2**2, rel=1e-12)
    assert rep.mc_std_error > 0.0


def test_pushforward_changes_integration_law():
    # truth halves the square; f_hat is the identity
    truth, f_hat = _scale(0.5), identity_map()
    plain = inverse_risk(f_hat, truth, n_samples=200_000, seed=3)
    pushed = inverse_risk(f_hat, truth, n_samples=200_000, seed=3, pushforward=True)
    # y ~ U(I^2): E||y - 2y||^2 = 2/3; y = 0.5 X: E||0.5X - X||^2 = 1/6
    assert plain.inverse_l2 == pytest.approx(2 / 3, rel=0.02)
    assert pushed.inverse_l2 == pytest.approx(1 / 6, rel=0.02)


def test_inverse_risk_requires_inverses():
    no_inv = PlanarMap(fn=lambda p: p, name="bare")
    with pytest.raises(ValueError):
        inverse_risk(no_inv, identity_map())
    with pytest.raises(ValueError):
        inverse_risk(identity_map(), no_inv)
    with pytest.raises(ValueError):
        inverse_risk(identity_map(), identity_map(), n_samples=0)


def test_sup_error_and_area_recorded_verbatim():
    rep = inverse_risk(
        identity_map(), identity_map(), n_samples=10, sup_error=0.5, nonminv_area=0.25
    )
    assert rep.sup_error == 0.5 and rep.nonminv_area == 0.25


def test_report_csv_row_matches_header():
    rep = inverse_risk(_shift(0.1, 0.1), identity_map(), n_samples=100)
    row = report_csv_row(rep)
    assert len(row.split(",")) == len(REPORT_CSV_HEADER.split(","))
    vals = [float(v) for v in row.split(",")]
    assert vals[0] == pytest.approx(rep.forward_l2)
    assert vals[3] == pytest.approx(rep.total_inverse_risk)


# --- sup-norm error ------------------------------------------------------

def test_sup_norm_error_shift_exact():
    assert sup_norm_error(_shift(0.1, -0.05), identity_map()) == pytest.approx(0.1)


def test_sup_norm_error_scale_attained_at_corner():
    # worst componentwise error of 0.5x vs x is at |x_k| = 1
    assert sup_norm_error(_scale(0.5), identity_map()) == pytest.approx(0.5)


def test_sup_norm_error_validation():
    with pytest.raises(ValueError):
        sup_norm_error(identity_map(), identity_map(), resolution=1)


# --- level-set Lipschitz diagnostic --------------------------------------

def test_levelset_diag_identity_ratio_one():
    # level sets of the first component are vertical lines; the Hausdorff
    # distance between lines at levels y, y' is exactly |y - y'|
    r = levelset_lipschitz_diag(
        identity_map(), 1, [(-0.5, 0.5), (0.2, -0.3), (0.0, 0.8)]
    )
    assert r == pytest.approx(1.0, abs=0.02)


def test_levelset_diag_swirl_resolution_stable():
    pairs = [(-0.4, 0.4), (0.1, 0.6)]
    lo = levelset_lipschitz_diag(swirl_truth(), 2, pairs, resolution=201)
    hi = levelset_lipschitz_diag(swirl_truth(), 2, pairs, resolution=401)
    assert lo == pytest.approx(hi, rel=0.2)


def test_levelset_diag_rejects_close_pair():
    with pytest.raises(ValueError):
        levelset_lipschitz_diag(identity_map(), 1, [(0.0, 0.01)])


def test_levelset_diag_empty_level_raises():
    # 0.5x never reaches level 0.9: empty set contradicts invertibility
    with pytest.raises(ValueError):
        levelset_lipschitz_diag(_scale(0.5), 1, [(0.9, 0.2)])


def test_levelset_diag_needs_pairs():
    with pytest.raises(ValueError):
        levelset_lipschitz_diag(identity_map(), 1, [])
