"""Command-line experiment runner.

Subcommands: gen | fit | sweep | lowerbound | sawtooth.  Settings come
from an optional key=value config file overridden by flags; every output
file starts with a comment line carrying the full configuration, so any
artifact can be traced back to its run.  Exit codes: 0 success, 2
configuration error, 3 partial failure (sweep keeps the rows finished so
far).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import estimator as est
from . import heatmap, minimax, risk, synth
from .maps import PlanarMap, family_map, identity_map, random_bump_params, swirl_truth
from .pilot import knn_fit, sawtooth_estimator
from .rotation import estimate_rotation


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    truth: str = "swirl"
    n: int = 10_000
    sigma2: float = 1e-3
    # None = auto: 10 for single fits, round(sqrt(n)) inside sweeps (the
    # pilot must sharpen as n grows or fold overlaps stall the risk)
    k: int | None = None
    alpha_plus_beta: float = 1.0
    t_override: int | None = None
    mc_samples: int = 100_000
    seed: int = 0
    output_dir: str = "."
    heatmap_resolution: int = 201

    def validate(self) -> None:
        if self.n < 1 or self.mc_samples < 1:
            raise ConfigError("n and mc_samples must be positive")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be positive when given")
        if self.sigma2 < 0:
            raise ConfigError("sigma2 must be nonnegative")
        if self.t_override is not None and self.t_override < 1:
            raise ConfigError("t_override must be at least 1")
        if self.heatmap_resolution < 2:
            raise ConfigError("heatmap_resolution must be at least 2")
        truth_map(self.truth)  # raises on an unknown spec

    def pilot_k(self, n: int, sweep: bool = False) -> int:
        if self.k is not None:
            return self.k
        return max(10, round(math.sqrt(n))) if sweep else 10

    def line(self) -> str:
        vals = []
        for f in fields(self):
            vals.append(f"{f.name}={getattr(self, f.name)}")
        return " ".join(vals)


def truth_map(spec: str) -> PlanarMap:
    if spec == "identity":
        return identity_map()
    if spec == "swirl":
        return swirl_truth()
    if spec.startswith("family:"):
        try:
            fam_seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad family seed in truth spec {spec!r}") from None
        rng = np.random.default_rng(fam_seed)
        p1 = random_bump_params(3, 7, rng)
        p2 = random_bump_params(3, 7, rng)
        return family_map(p1, p2)
    raise ConfigError(f"unknown truth {spec!r} (want identity, swirl, family:<seed>)")


_INT_KEYS = {"n", "k", "t_override", "mc_samples", "seed", "heatmap_resolution"}
_FLOAT_KEYS = {"sigma2", "alpha_plus_beta"}


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    values: dict = {}
    if path is not None:
        text = Path(path)
        if not text.exists():
            raise ConfigError(f"config file {path} not found")
        for lineno, raw in enumerate(text.read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    cfg_kwargs: dict = {}
    for key, val in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _INT_KEYS:
                cfg_kwargs[key] = int(val)
            elif key in _FLOAT_KEYS:
                cfg_kwargs[key] = float(val)
            else:
                cfg_kwargs[key] = str(val)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {val!r}") from None
    cfg = ExperimentConfig(**cfg_kwargs)
    cfg.validate()
    return cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(cfg: ExperimentConfig) -> int:
    truth = truth_map(cfg.truth)
    ds = synth.sample_dataset(truth, cfg.n, cfg.sigma2, cfg.seed)
    path = _outdir(cfg) / "dataset.csv"
    synth.write_csv(ds, path, extra_comments=[f"config: {cfg.line()}"])
    print(f"wrote {path}")
    return 0


def _fallback_inverse(pts: np.ndarray) -> np.ndarray:
    return np.broadcast_to(est.FALLBACK, pts.shape).copy()


def cmd_fit(cfg: ExperimentConfig, data: str | None, triptych: tuple[int, ...] = (1, 3, 5)) -> int:
    out = _outdir(cfg)
    data_path = Path(data) if data else out / "dataset.csv"
    if not data_path.exists():
        raise ConfigError(f"dataset {data_path} not found")
    ds = synth.read_csv(data_path)
    truth = truth_map(cfg.truth)
    pilot = knn_fit(ds, cfg.pilot_k(ds.n))
    rotation = estimate_rotation(pilot)
    comments = [f"config: {cfg.line()}"]

    res = cfg.heatmap_resolution
    lin = np.linspace(-1.0, 1.0, res)
    g1, g2 = np.meshgrid(lin, lin, indexing="ij")
    grid = np.stack([g1.ravel(), g2.ravel()], axis=1)
    pilot_vals = pilot(grid)
    if rotation.degenerate:
        ghat_vals = np.zeros_like(pilot_vals)
    else:
        ghat_vals = est.boundary_project(grid, rotation.forward(pilot_vals))

    def to_image(flat_component: np.ndarray) -> np.ndarray:
        return flat_component.reshape(res, res).T[::-1]

    t_main = (
        cfg.t_override
        if cfg.t_override is not None
        else est.grid_resolution(cfg.n, cfg.alpha_plus_beta)
    )
    fitted = {
        t: est.fit_from_pilot(pilot, ds.n, cfg.alpha_plus_beta, t_override=t)
        for t in sorted(set(triptych) | {t_main})
    }

    for comp in (1, 2):
        panels = {
            "truth": to_image(truth(grid)[:, comp - 1]),
            "pilot": to_image(pilot_vals[:, comp - 1]),
            "ghat": to_image(ghat_vals[:, comp - 1]),
        }
        e_main = fitted[t_main]
        if e_main.degenerate:
            gdag = np.zeros(grid.shape[0])
        else:
            gdag = est.g_dagger(e_main.mesh, grid)[:, comp - 1]
        panels["gdagger"] = to_image(gdag)
        panels["fhat"] = to_image(est.evaluate(e_main, grid)[:, comp - 1])
        for name, mat in panels.items():
            tag = f"{name}_c{comp}"
            heatmap.write_matrix_csv(mat, out / f"{tag}.csv", comments)
            heatmap.write_pgm(mat, out / f"{tag}.pgm", comments)
        for t in triptych:
            mat = to_image(est.evaluate(fitted[t], grid)[:, comp - 1])
            tag = f"fhat_t{t}_c{comp}"
            heatmap.write_matrix_csv(mat, out / f"{tag}.csv", comments)
            heatmap.write_pgm(mat, out / f"{tag}.pgm", comments)
    print(f"wrote heatmaps to {out} (t={t_main}, triptych {list(triptych)})")
    return 0


SWEEP_HEADER = "n,replicate,t_used,forward_l2,total_inverse_risk,sup_error,nonminv_area"


def _sweep_row(cfg: ExperimentConfig, n: int, rep: int):
    truth = truth_map(cfg.truth)
    seed = cfg.seed + 1000 * rep + n
    ds = synth.sample_dataset(truth, n, cfg.sigma2, seed)
    e = est.fit(ds, cfg.pilot_k(n, sweep=True), cfg.alpha_plus_beta, cfg.t_override)
    fmap = e.as_planar_map()
    sup = risk.sup_norm_error(fmap, truth, resolution=101)
    area = est.non_invertible_measure(e, n_samples=cfg.mc_samples, seed=seed).measure
    rep_report = risk.inverse_risk(
        fmap,
        truth,
        n_samples=cfg.mc_samples,
        seed=seed,
        sup_error=sup,
        nonminv_area=area,
    )
    return (
        f"{n},{rep},{e.t},{rep_report.forward_l2:.17g},"
        f"{rep_report.total_inverse_risk:.17g},{sup:.17g},{area:.17g}",
        rep_report.total_inverse_risk,
    )


def cmd_sweep(cfg: ExperimentConfig, n_list: list[int], replicates: int) -> int:
    if not n_list or sorted(n_list) != n_list:
        raise ConfigError("n_list must be nonempty and ascending")
    if replicates < 1:
        raise ConfigError("replicates must be at least 1")
    out = _outdir(cfg)
    path = out / "sweep.csv"
    lines = [f"# config: {cfg.line()}", SWEEP_HEADER]
    totals: dict[int, list[float]] = {n: [] for n in n_list}
    failed = False
    for n in n_list:
        for rep in range(replicates):
            try:
                row, total = _sweep_row(cfg, n, rep)
            except Exception as exc:  # noqa: BLE001 - partial CSV must survive
                print(f"replicate n={n} rep={rep} failed: {exc}", file=sys.stderr)
                failed = True
                break
            lines.append(row)
            totals[n].append(total)
        if failed:
            break

    means = {n: np.mean(v) for n, v in totals.items() if v}
    usable = {n: m for n, m in means.items() if m > 0}
    if len(usable) >= 2:
        lx = np.log(np.array(sorted(usable)))
        ly = np.log(np.array([usable[n] for n in sorted(usable)]))
        slope, intercept = np.polyfit(lx, ly, 1)
        resid = ly - (slope * lx + intercept)
        dof = max(len(lx) - 2, 1)
        se = math.sqrt(float(resid @ resid) / dof / float(((lx - lx.mean()) ** 2).sum()))
        lines.append(f"# slope={slope:.6g} intercept={intercept:.6g} stderr={se:.6g}")
        lines.append("# reference slope (d=2): -0.5")
        print(f"log-log slope {slope:.4f} (reference -0.5)")
    else:
        lines.append("# slope=degenerate (fewer than 2 positive mean risks)")
        print("slope fit degenerate")
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 3 if failed else 0


def cmd_lowerbound(cfg: ExperimentConfig, amplitude: int | None) -> int:
    out = _outdir(cfg)
    try:
        report = minimax.lower_bound_report(
            cfg.n, cfg.sigma2, seed=cfg.seed, amplitude=amplitude
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    (out / "lowerbound.txt").write_text(
        f"# config: {cfg.line()}\n" + report.text() + "\n"
    )
    (out / "lowerbound.csv").write_text(
        f"# config: {cfg.line()}\n"
        + minimax.BOUND_CSV_HEADER
        + "\n"
        + minimax.bound_csv_row(report)
        + "\n"
    )
    code = minimax.vg_code(report.m * report.m, seed=cfg.seed)
    (out / "code.hex").write_text(
        f"# config: {cfg.line()}\n" + "\n".join(code.hex_lines()) + "\n"
    )
    print(f"m={report.m} code_size={report.code_size} bound={report.bound_value:.6g}")
    return 0


def cmd_sawtooth(cfg: ExperimentConfig, d_list: list[int]) -> int:
    if not d_list:
        raise ConfigError("D list must be nonempty")
    out = _outdir(cfg)
    truth = identity_map()
    lines = [f"# config: {cfg.line()}", "D,sup_error,forward_l2,total_inverse_risk"]
    for d in d_list:
        if d < 1:
            raise ConfigError("all D must be positive")
        saw = sawtooth_estimator(d)
        fmap = PlanarMap(fn=saw.fn, inverse_fn=_fallback_inverse, name=saw.name)
        sup = risk.sup_norm_error(fmap, truth, resolution=max(101, 3 * d + 1))
        rep = risk.inverse_risk(
            fmap, truth, n_samples=cfg.mc_samples, seed=cfg.seed, sup_error=sup
        )
        lines.append(
            f"{d},{sup:.17g},{rep.forward_l2:.17g},{rep.total_inverse_risk:.17g}"
        )
    path = out / "sawtooth.csv"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--truth", help="identity | swirl | family:<seed>")
    p.add_argument("--n", type=int)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha-plus-beta", type=float, dest="alpha_plus_beta")
    p.add_argument("--t", type=int, dest="t_override")
    p.add_argument("--mc", type=int, dest="mc_samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="output_dir")
    p.add_argument("--res", type=int, dest="heatmap_resolution")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invreg", description="planar invertible regression experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset CSV")
    _add_common(p)

    p = sub.add_parser("fit", help="fit the estimator and emit heatmaps")
    _add_common(p)
    p.add_argument("--data", help="dataset CSV (default <out>/dataset.csv)")

    p = sub.add_parser("sweep", help="convergence-rate sweep over n")
    _add_common(p)
    p.add_argument("--n-list", default="512,1024,2048,4096,8192,16384")
    p.add_argument("--replicates", type=int, default=5)

    p = sub.add_parser("lowerbound", help="minimax lower-bound report")
    _add_common(p)
    p.add_argument("--amplitude", type=int, help="override the amplitude divisor M")

    p = sub.add_parser("sawtooth", help="sup-consistent non-invertible demo")
    _add_common(p)
    p.add_argument("--d-list", default="10,100,1000")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key, None)
        for key in (f.name for f in fields(ExperimentConfig))
    }
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "fit":
            return cmd_fit(cfg, args.data)
        if args.command == "sweep":
            n_list = [int(s) for s in args.n_list.split(",") if s]
            return cmd_sweep(cfg, n_list, args.replicates)
        if args.command == "lowerbound":
            return cmd_lowerbound(cfg, args.amplitude)
        if args.command == "sawtooth":
            d_list = [int(s) for s in args.d_list.split(",") if s]
            return cmd_sawtooth(cfg, d_list)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
