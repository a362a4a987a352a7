"""End-to-end acceptance gate.

Each test covers one numbered acceptance criterion and prints a single
PASS/FAIL line (visible with ``pytest -s`` or in failure output).  The
tolerances here are pinned; loosening them is not an option.
"""

import hashlib
import math
import time

import numpy as np
import pytest

from invreg.cli import main as cli_main
from invreg.estimator import (
    FALLBACK,
    evaluate,
    fit,
    fit_from_pilot,
    invert,
    non_invertible_measure,
)
from invreg.maps import (
    PlanarMap,
    check_invertible_on_grid,
    family_map,
    identity_map,
    random_bump_params,
    swirl_truth,
)
from invreg.minimax import (
    hypothesis_map,
    kl_gaussian_model,
    separation_l2,
    single_bump_mass,
    vg_code,
)
from invreg.pilot import sawtooth_estimator
from invreg.risk import inverse_risk, sup_norm_error
from invreg.rotation import CORNERS, estimate_rotation, exact_rotation, rotation_R, tau
from invreg.synth import sample_dataset

TWO_PI = 2.0 * math.pi


def _report(num: int, label: str, ok: bool, detail: str = "") -> None:
    state = "PASS" if ok else "FAIL"
    print(f"CRITERION {num} [{state}] {label}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num}: {label} {detail}"


def _grid(resolution: int) -> np.ndarray:
    lin = np.linspace(-1.0, 1.0, resolution)
    g1, g2 = np.meshgrid(lin, lin, indexing="ij")
    return np.stack([g1.ravel(), g2.ravel()], axis=1)


@pytest.fixture(scope="module")
def swirl_fit():
    """The reference experiment: swirl truth, n=1e4, sigma2=1e-3, k=10."""
    ds = sample_dataset(swirl_truth(), 10_000, 1e-3, seed=42)
    return ds, fit(ds, 10, t_override=5)


def test_criterion_1_identity_pipeline_exact():
    start = time.perf_counter()
    e = fit_from_pilot(identity_map(), 10_000)
    pts = _grid(201)
    sup_fwd = float(np.abs(evaluate(e, pts) - pts).max())
    sup_inv = float(np.abs(invert(e, pts) - pts).max())
    rep = inverse_risk(e.as_planar_map(), identity_map(), n_samples=1000)
    elapsed = time.perf_counter() - start
    # the rotation goes through trig even for identity corner data, so
    # "zero" risk means zero to floating-point rounding (errors ~1e-15
    # squared and averaged), far below any statistical resolution
    ok = (
        sup_fwd <= 1e-9
        and sup_inv <= 1e-9
        and rep.forward_l2 <= 1e-24
        and rep.inverse_l2 <= 1e-24
        and rep.total_inverse_risk <= 1e-24
        and elapsed < 10.0
    )
    _report(1, "identity pipeline exact", ok,
            f"sup_fwd={sup_fwd:.2e} sup_inv={sup_inv:.2e} {elapsed:.1f}s")


def test_criterion_2_inversion_roundtrip(swirl_fit):
    start = time.perf_counter()
    _, e = swirl_fit
    x = np.random.default_rng(1).uniform(-1, 1, (10_000, 2))
    back = invert(e, evaluate(e, x))
    exact = np.abs(back - x).max(axis=1) <= 1e-9
    fallback = np.all(back == FALLBACK, axis=1)
    in_square = np.all(np.abs(back) <= 1.0, axis=1)
    elapsed = time.perf_counter() - start
    ok = (
        exact.mean() >= 0.99
        and bool(np.all(exact | fallback))
        and bool(np.all(in_square | fallback))
        and elapsed < 60.0
    )
    _report(2, "inversion round trip", ok,
            f"exact={exact.mean():.4f} fallback={fallback.mean():.4f} {elapsed:.1f}s")


def test_criterion_3_rotation_contracts():
    rot = exact_rotation(swirl_truth())
    params = rot.params
    rng = np.random.default_rng(2)

    z = rng.uniform(-1, 1, (10_000, 2)) / math.sqrt(2.0)  # inside the disk
    out = rotation_R(z, params)
    radius_err = float(np.abs(np.hypot(out[:, 0], out[:, 1])
                              - np.hypot(z[:, 0], z[:, 1])).max())

    sweep = np.linspace(0.0, TWO_PI, 10_000)
    tau_vals = tau(sweep, params)
    monotone = bool(np.all(np.diff(tau_vals) > 0))

    anchor_err = max(
        abs(tau(theta_j, params) - (2 * j + 1) * math.pi / 4)
        for j, theta_j in enumerate(params.thetas)
    )

    x = rng.uniform(-1, 1, (5_000, 2))
    roundtrip_err = float(np.abs(rot.inverse(rot.forward(x)) - x).max())

    ok = (
        radius_err <= 1e-14
        and monotone
        and anchor_err <= 1e-12
        and roundtrip_err <= 1e-12
    )
    _report(3, "rotation contracts", ok,
            f"radius={radius_err:.1e} anchors={anchor_err:.1e} "
            f"roundtrip={roundtrip_err:.1e}")


def test_criterion_4_corner_coherence():
    rng = np.random.default_rng(3)
    maps = [swirl_truth()] + [
        family_map(random_bump_params(3, 7, rng), random_bump_params(3, 7, rng))
        for _ in range(10)
    ]
    ts = np.linspace(-1.0, 1.0, 100)
    boundary = np.concatenate([
        np.stack([np.full_like(ts, 1.0), ts], axis=1),
        np.stack([np.full_like(ts, -1.0), ts], axis=1),
        np.stack([ts, np.full_like(ts, 1.0)], axis=1),
        np.stack([ts, np.full_like(ts, -1.0)], axis=1),
    ])
    worst_corner = worst_edge = 0.0
    for f in maps:
        rot = exact_rotation(f)
        worst_corner = max(
            worst_corner, float(np.abs(rot.forward(f(CORNERS)) - CORNERS).max())
        )
        from invreg.estimator import g_hat

        g = g_hat(f, rot)
        imgs = g(boundary)
        # distance of each image to the boundary of the square
        dist = 1.0 - np.abs(imgs).max(axis=1)
        worst_edge = max(worst_edge, float(dist.max()))
    ok = worst_corner <= 1e-9 and worst_edge <= 1e-6
    _report(4, "corner coherence", ok,
            f"corner={worst_corner:.1e} edge={worst_edge:.1e}")


def test_criterion_5_invertibility_certification():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    bad = 0
    for _ in range(20):
        f = family_map(random_bump_params(3, 7, rng), random_bump_params(3, 7, rng))
        rep = check_invertible_on_grid(f, resolution=401, samples=100)
        if rep.multiple_count or rep.missing_count:
            bad += 1
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 120.0
    _report(5, "family maps certified invertible", ok,
            f"failed_maps={bad} {elapsed:.1f}s")


def test_criterion_6_packing_laboratory():
    codes_ok = all(vg_code(N).verified for N in (8, 16))

    # separation / Hamming constant over 20 random pairs
    m, M = 3, 7
    mass = single_bump_mass(m, M)
    rng = np.random.default_rng(5)
    ratio_ok = True
    checked = 0
    while checked < 20:
        t1 = rng.integers(0, 2, size=(m, m))
        t2 = rng.integers(0, 2, size=(m, m))
        h = int((t1 != t2).sum())
        if h == 0:
            continue
        from invreg.maps import BumpParams

        sep = separation_l2(
            BumpParams(m=m, M=M, theta=t1), BumpParams(m=m, M=M, theta=t2)
        )
        if abs(sep / h / mass - 1.0) > 0.01:
            ratio_ok = False
        checked += 1

    # KL scaling in m with the squared amplitude divisor M = m^2 + 1
    ms = [2, 4, 8]
    kls = []
    for mm in ms:
        word = np.zeros(mm * mm, dtype=int)
        word[0] = 1
        MM = mm * mm + 1
        # closed form: n/(2 sigma^2) * 0.25 * 2 * mass (density 1/4,
        # both components perturbed)
        kls.append(100.0 / (2.0 * 0.1) * 0.25 * 2.0 * single_bump_mass(mm, MM))
    slope = np.polyfit(np.log(ms), np.log(kls), 1)[0]
    slope_ok = abs(slope - (-6.0)) <= 0.6

    # the Monte Carlo KL agrees with the closed form where support is wide
    f1 = hypothesis_map(np.eye(2, dtype=int).ravel() * 0, 2, 5)
    w = np.zeros(4, dtype=int)
    w[0] = 1
    f2 = hypothesis_map(w, 2, 5)
    mc = kl_gaussian_model(f2, f1, 100, 0.1, n_mc=400_000, seed=6)
    closed = 100.0 / (2.0 * 0.1) * 0.25 * 2.0 * single_bump_mass(2, 5)
    mc_ok = abs(mc / closed - 1.0) <= 0.05

    ok = codes_ok and ratio_ok and slope_ok and mc_ok
    _report(6, "packing laboratory", ok,
            f"slope={slope:.3f} mc/closed={mc / closed:.3f}")


def test_criterion_7_sawtooth_counterexample():
    def fallback_inverse(pts):
        return np.broadcast_to(FALLBACK, pts.shape).copy()

    truth = identity_map()
    ok = True
    details = []
    for d in (10, 100, 1000):
        saw = sawtooth_estimator(d)
        fmap = PlanarMap(fn=saw.fn, inverse_fn=fallback_inverse, name=saw.name)
        sup = sup_norm_error(fmap, truth, resolution=max(101, 3 * d + 1))
        rep = inverse_risk(fmap, truth, n_samples=20_000, seed=7, sup_error=sup)
        if sup > 2.0 / d or rep.total_inverse_risk < 4.0:
            ok = False
        details.append(f"D={d}:sup={sup:.2e},risk={rep.total_inverse_risk:.1f}")
    _report(7, "sawtooth counterexample", ok, " ".join(details))


def test_criterion_8_convergence_sweep(tmp_path):
    start = time.perf_counter()
    rc = cli_main([
        "sweep", "--truth", "swirl", "--sigma2", "1e-3", "--mc", "20000",
        "--replicates", "5", "--out", str(tmp_path),
    ])
    elapsed = time.perf_counter() - start
    slope = None
    for line in (tmp_path / "sweep.csv").read_text().splitlines():
        if line.startswith("# slope="):
            slope = float(line.split("slope=")[1].split()[0])
    ok = rc == 0 and slope is not None and -0.75 <= slope <= -0.25 and elapsed < 600
    _report(8, "convergence sweep slope", ok,
            f"slope={slope} {elapsed:.0f}s")


def test_criterion_9_twist_measure(swirl_fit):
    ds, e5 = swirl_fit
    e1 = fit(ds, 10, t_override=1)
    m5 = non_invertible_measure(e5, n_samples=20_000, seed=8).measure
    m1 = non_invertible_measure(e1, n_samples=20_000, seed=8).measure

    e_id = fit_from_pilot(identity_map(), 10_000)
    m_id = non_invertible_measure(e_id, n_samples=100_000, seed=9).measure

    ok = m5 <= m1 and m_id == 0.0
    _report(9, "twist measure behavior", ok,
            f"t5={m5:.4f} t1={m1:.4f} identity={m_id}")


def test_criterion_10_figure_reproduction(tmp_path):
    ok = True
    details = []
    for sigma2 in ("1e-3", "1e-1"):
        out = tmp_path / f"s{sigma2}"
        base = ["--truth", "swirl", "--n", "10000", "--sigma2", sigma2,
                "--seed", "0", "--out", str(out)]
        if cli_main(["gen"] + base) != 0 or cli_main(["fit"] + base) != 0:
            ok = False
            continue
        expected = [f"{name}_c{c}.{ext}"
                    for name in ("truth", "pilot", "ghat", "gdagger", "fhat",
                                 "fhat_t1", "fhat_t3", "fhat_t5")
                    for c in (1, 2) for ext in ("csv", "pgm")]
        if not all((out / n).exists() for n in expected):
            ok = False
        hashes = {
            n: hashlib.sha256((out / n).read_bytes()).hexdigest() for n in expected
        }
        if cli_main(["fit"] + base) != 0:
            ok = False
        stable = all(
            hashlib.sha256((out / n).read_bytes()).hexdigest() == hashes[n]
            for n in expected
        )
        if not stable:
            ok = False
        details.append(f"sigma2={sigma2}:stable={stable}")
    _report(10, "figure reproduction", ok, " ".join(details))
