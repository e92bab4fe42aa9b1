"""Command-line driver: configuration in, bit-exact JSON/CSV artifacts out.

Subcommands
-----------
check-metric     admissibility report per configured mode
spectrum         angular mode table as CSV
validate         squaring / factorization / norm-equivalence conformance
evolve           trajectory CSV per mode plus a JSON metadata header
strichartz-scan  growth-in-mu scan with fitted slopes

Exit codes: 0 pass, 2 contract violation, 3 non-admissible metric,
4 configuration error, 5 numerical failure.  Failed runs never leave
partial artifacts; every file is written via temp-and-rename after the
whole workflow has finished.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .admissibility import check_admissible
from .config import RunConfig, load_config
from .errors import ConfigurationError, WarpDiracError
from .estimates import mu_scan
from .evolution import evolve
from .operators import (RadialGrid, assemble_dirac, assemble_kg,
                        factorization_check, norm_equivalence_check,
                        sigma_log_derivative_bound, verify_square)
from .profiles import MetricProfile
from .reporting import write_csv_atomic, write_json_atomic
from .spectrum import band_index

OUT_DIR_ENV = "WARPDIRAC_OUT"
_NORM_EQUIV_SLACK = 1e-3
_ORDER_GATE = 1.9


def _profile_dict(profile: MetricProfile) -> dict:
    d = {"family": profile.family.value, "n": profile.n}
    if profile.family.value == "asymptotically_flat":
        d.update(epsilon=profile.epsilon, alpha=profile.alpha, beta=profile.beta)
    if profile.family.value == "polynomial":
        d.update(degree=profile.degree)
    return d


def _mu_label(mu: float) -> str:
    return f"{mu:g}"


def _resolve_out_dir(cfg: RunConfig, args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    return Path(cfg.out_dir)


def _write_all(out_dir: Path, files: list):
    for name, kind, payload in files:
        if kind == "json":
            write_json_atomic(out_dir / name, payload)
        else:
            header, rows = payload
            write_csv_atomic(out_dir / name, header, rows)


def cmd_check_metric(cfg: RunConfig, args) -> tuple[int, list]:
    mus = sorted({float(m.mu) for m in cfg.modes})
    reports = [check_admissible(cfg.profile, mu, cfg.scan) for mu in mus]
    payload = {
        "profile": _profile_dict(cfg.profile),
        "reports": [r.to_dict() for r in reports],
        "all_admissible": all(r.admissible for r in reports),
    }
    code = 0 if payload["all_admissible"] else 3
    return code, [("check_metric.json", "json", payload)]


def cmd_spectrum(cfg: RunConfig, args) -> tuple[int, list]:
    rows = []
    for mode in cfg.modes:
        rows.append((
            _mu_label(float(mode.mu)),
            mode.multiplicity if mode.multiplicity is not None else "",
            mode.degree_plus,
            mode.degree_minus,
            band_index(mode),
        ))
    header = ["mu", "multiplicity", "degree_plus", "degree_minus", "band_j"]
    return 0, [("spectrum.csv", "csv", (header, rows))]


def _ladder(n_cells: int) -> list[int]:
    # rungs below 256 cells are pre-asymptotic for the probe family
    steps = [n_cells // 8, n_cells // 4, n_cells // 2, n_cells]
    return [n for n in steps if n >= 256]


def _order(ns: list[int], residuals: list[float]) -> float:
    return float(-np.polyfit(np.log(ns), np.log(residuals), 1)[0])


def cmd_validate(cfg: RunConfig, args) -> tuple[int, list]:
    mus = sorted({abs(float(m.mu)) for m in cfg.modes})
    ns = _ladder(cfg.grid.n_cells)
    if len(ns) < 2:
        raise ConfigurationError("grid.n_cells too small for a refinement ladder")
    squaring = []
    factorization = []
    for mu in mus:
        sq_res, fa_res_m, fa_res_p = [], [], []
        for n_cells in ns:
            grid = RadialGrid(cfg.grid.r_max, n_cells)
            dirac = assemble_dirac(cfg.profile, mu, cfg.m, cfg.n, grid)
            kg_m = assemble_kg(cfg.profile, mu, cfg.m, cfg.n, -1, grid)
            kg_p = assemble_kg(cfg.profile, mu, cfg.m, cfg.n, +1, grid)
            sq_res.append(verify_square(dirac, kg_m, kg_p))
            rm, rp = factorization_check(cfg.profile, mu, cfg.m, cfg.n, grid)
            fa_res_m.append(rm)
            fa_res_p.append(rp)
        sq_order = _order(ns, sq_res)
        fa_order = min(_order(ns, fa_res_m), _order(ns, fa_res_p))
        squaring.append({
            "mu": mu,
            "ladder": [{"n_cells": k, "residual": r} for k, r in zip(ns, sq_res)],
            "order": sq_order,
            "pass": sq_order >= _ORDER_GATE,
        })
        factorization.append({
            "mu": mu,
            "ladder": [{"n_cells": k, "residual_minus": rm, "residual_plus": rp}
                       for k, rm, rp in zip(ns, fa_res_m, fa_res_p)],
            "order": fa_order,
            "pass": fa_order >= _ORDER_GATE,
        })
    c_phi = sigma_log_derivative_bound(cfg.profile, cfg.scan)
    equivalence = []
    for s in (0.0, 0.5, 1.0):
        worst, worst_inv = norm_equivalence_check(
            cfg.profile, cfg.n, s, trials=cfg.trials, grid=cfg.grid, seed=args.seed)
        bound = (1.0 + c_phi * (cfg.n - 1) / 2.0) ** s + _NORM_EQUIV_SLACK
        equivalence.append({
            "s": s, "worst_ratio": worst, "worst_inverse_ratio": worst_inv,
            "bound": bound, "pass": max(worst, worst_inv) <= bound,
        })
    passed = (all(e["pass"] for e in equivalence)
              and all(e["pass"] for e in squaring)
              and all(e["pass"] for e in factorization))
    payload = {
        "profile": _profile_dict(cfg.profile),
        "m": cfg.m,
        "grid": {"r_max": cfg.grid.r_max, "n_cells": cfg.grid.n_cells},
        "seed": args.seed,
        "c_phi": c_phi,
        "squaring": squaring,
        "factorization": factorization,
        "norm_equivalence": equivalence,
        "pass": passed,
    }
    return (0 if passed else 2), [("validate.json", "json", payload)]


def cmd_evolve(cfg: RunConfig, args) -> tuple[int, list]:
    times = np.linspace(0.0, cfg.t_max, cfg.samples)
    files = []
    meta_modes = []
    header = ["t", "r", "re_v_plus", "im_v_plus", "re_v_minus", "im_v_minus"]
    initial = cfg.data.realize(cfg.grid)
    for mode in cfg.modes:
        mu = float(mode.mu)
        op = assemble_dirac(cfg.profile, mu, cfg.m, cfg.n, cfg.grid)
        traj = evolve(op, initial, times)
        rows = []
        r = cfg.grid.nodes
        for t, state in zip(traj.times, traj.states):
            for i in range(cfg.grid.n_cells):
                rows.append((float(t), float(r[i]),
                             float(state.plus[i].real), float(state.plus[i].imag),
                             float(state.minus[i].real), float(state.minus[i].imag)))
        name = f"trajectory_mu_{_mu_label(mu)}.csv"
        files.append((name, "csv", (header, rows)))
        meta_modes.append({"mu": mu, "file": name,
                           "norm_drift": max(abs(s.norm() / traj.states[0].norm() - 1.0)
                                             for s in traj.states)})
    meta = {
        "profile": _profile_dict(cfg.profile),
        "m": cfg.m,
        "grid": {"r_max": cfg.grid.r_max, "n_cells": cfg.grid.n_cells},
        "times": [float(t) for t in times],
        "data": {"center": cfg.data.center, "width": cfg.data.width,
                 "amplitude": cfg.data.amplitude, "component": cfg.data.component},
        "modes": meta_modes,
    }
    files.insert(0, ("evolve_meta.json", "json", meta))
    return 0, files


def cmd_strichartz_scan(cfg: RunConfig, args) -> tuple[int, list]:
    mus = [float(m.mu) for m in cfg.modes]
    files = []
    scans = []
    failed = False
    for triple in cfg.triples:
        result = mu_scan(cfg.profile, triple, mus, data_template=cfg.data,
                         grid=cfg.grid, t_max=cfg.t_max, samples=cfg.samples,
                         n=cfg.n, epsilon_loss=cfg.epsilon_loss,
                         threads=args.threads)
        scans.append(result.to_dict())
        for ok in (result.strichartz_slope_ok, result.smoothing_slope_ok):
            if ok is False:
                failed = True
        header = ["mu", "ratio_strichartz", "ratio_smoothing"]
        rows = [(row.mu, row.ratio_strichartz, row.ratio_smoothing)
                for row in result.rows]
        p_label = "inf" if math.isinf(triple.p) else f"{triple.p:g}"
        files.append((f"strichartz_scan_p{p_label}_q{triple.q:g}.csv", "csv",
                      (header, rows)))
    files.insert(0, ("strichartz_scan.json", "json", {"scans": scans}))
    return (2 if failed else 0), files


_COMMANDS = {
    "check-metric": cmd_check_metric,
    "spectrum": cmd_spectrum,
    "validate": cmd_validate,
    "evolve": cmd_evolve,
    "strichartz-scan": cmd_strichartz_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warpdirac",
        description="Radial Dirac verification lab on warped-product manifolds")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory "
                       f"(overrides ${OUT_DIR_ENV} and the config)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker count for per-mode parallelism")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for random test functions")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        code, files = _COMMANDS[args.command](cfg, args)
        _write_all(_resolve_out_dir(cfg, args), files)
        return code
    except WarpDiracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
