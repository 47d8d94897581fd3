"""Command-line surface: solve, spectra, verify, sweep.

All numeric tables are CSV with 17-significant-digit fields; configs and
reports are JSON.  Angles cross the CLI boundary in degrees and are
radians internally.  Exit codes: 0 ok, 1 verification failure, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import rhstructure as rh
from .bie import SingularSystemError, solve_antisymmetric, solve_symmetric
from .edge import extract_c, extract_d
from .spectral import SpectralBundle, directivity, energy_balance
from .verify import RunConfig, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")


def _load_config(path: str) -> RunConfig:
    try:
        return RunConfig.from_json_file(path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _solve_all(rc: RunConfig):
    cfg = rc.problem()
    da, dga = solve_antisymmetric(cfg, rc.N, tail_tol=rc.tail_tol)
    ds, dgs = solve_symmetric(cfg, rc.N, tail_tol=rc.tail_tol)
    return cfg, da, ds, dga, dgs


def _directivity_rows(cfg, da, ds, rc):
    th = np.linspace(0.02, np.pi - 0.02, rc.n_theta)
    ba = SpectralBundle(cfg, da, tail_tol=rc.tail_tol)
    bs = SpectralBundle(cfg, ds, tail_tol=rc.tail_tol)
    tab = directivity(ba, bs, th)
    rows = []
    for i, t in enumerate(th):
        rows.append((np.degrees(t), tab.S[i].real, tab.S[i].imag,
                     tab.S_a[i].real, tab.S_a[i].imag,
                     tab.S_s[i].real, tab.S_s[i].imag))
    return rows, (ba, bs, tab)


DIRECTIVITY_HEADER = ["theta_deg", "S_re", "S_im", "Sa_re", "Sa_im", "Ss_re", "Ss_im"]


def cmd_solve(args) -> int:
    rc = _load_config(args.config)
    out = Path(args.out or rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg, da, ds, dga, dgs = _solve_all(rc)
    except SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    rows, _ = _directivity_rows(cfg, da, ds, rc)
    _write_csv(out / "directivity.csv", DIRECTIVITY_HEADER, rows)

    xg = cfg.a * np.cos(np.pi * (2 * np.arange(201) + 1) / 402)
    mu = da(xg)
    sg = ds(xg)
    _write_csv(out / "densities.csv",
               ["x", "mu_re", "mu_im", "sigma_re", "sigma_im"],
               [(x, m.real, m.imag, s.real, s.imag) for x, m, s in zip(xg, mu, sg)])

    diags = {
        "antisymmetric": _diag_dict(dga),
        "symmetric": _diag_dict(dgs),
        "config": rc.to_dict(),
    }
    (out / "diagnostics.json").write_text(json.dumps(diags, sort_keys=True, indent=1),
                                          encoding="utf-8")
    if not (dga.tail_converged and dgs.tail_converged):
        logger.warning("coefficient tails above target; see diagnostics.json")
        return EXIT_NUMERICAL if args.strict else EXIT_OK
    return EXIT_OK


def _diag_dict(dg) -> dict:
    return {
        "N": dg.N,
        "bc_residual": dg.bc_residual,
        "tail_decay": dg.tail_decay,
        "condition_estimate": dg.condition_estimate,
        "tail_converged": dg.tail_converged,
        "kernel_tail": dg.kernel_tail,
    }


def cmd_spectra(args) -> int:
    rc = _load_config(args.config)
    out = Path(args.out or rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = rc.problem()
    if complex(cfg.k0).imag <= 0:
        print("config error: spectra require Im(k0) > 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg, da, ds, _, _ = _solve_all(rc)
    except SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    ba = SpectralBundle(cfg, da, tail_tol=rc.tail_tol)
    bs = SpectralBundle(cfg, ds, tail_tol=rc.tail_tol)
    kmax = rc.k_grid_factor * abs(cfg.k0)
    if kmax > 8 * abs(cfg.k0):
        logger.warning("k grid extends beyond the truncation-validated window")
    kg = np.linspace(-kmax, kmax, rc.n_k)
    if np.any(np.abs(kg - cfg.k_star) < 1e-2 * abs(cfg.k0)):
        logger.warning("k grid contains rows inside the pole exclusion radius")

    header = ["k_re", "k_im"]
    for fam in ("U", "V"):
        for nm in ("m", "0", "p", "0t"):
            header += [f"{fam}{nm}_re", f"{fam}{nm}_im"]
        header += [f"res_{fam.lower()}"]
    rows = []
    data = {}
    for fam, b in (("U", ba), ("V", bs)):
        fp = np.atleast_1d(b.f_plus(kg))
        fm = np.atleast_1d(b.f_minus(kg))
        f0 = np.atleast_1d(b.f0(kg))
        f0t = np.atleast_1d(b.f0_tilde(kg))
        res = np.abs(fp + fm + f0) / np.max(np.maximum(np.maximum(np.abs(fp), np.abs(fm)),
                                                       np.abs(f0)))
        data[fam] = (fm, f0, fp, f0t, res)
    for i, k in enumerate(kg):
        row = [k.real if np.iscomplexobj(kg) else float(k), 0.0]
        for fam in ("U", "V"):
            fm, f0, fp, f0t, res = data[fam]
            row += [fm[i].real, fm[i].imag, f0[i].real, f0[i].imag,
                    fp[i].real, fp[i].imag, f0t[i].real, f0t[i].imag, res[i]]
        rows.append(row)
    _write_csv(out / "spectra.csv", header, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    rc = _load_config(args.config)
    out = Path(args.out or rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report, timings = run_suite(rc, args.suite)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "timings.json").write_text(
        json.dumps({k: round(v, 3) for k, v in timings.items()},
                   sort_keys=True, indent=1), encoding="utf-8")
    for line in report.summary_lines():
        print(line)
    print("overall:", "PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


SWEEP_PARAMS = ("theta_in", "eta_re", "eta_im", "k0a")


def cmd_sweep(args) -> int:
    rc = _load_config(args.config)
    if args.param not in SWEEP_PARAMS:
        print(f"config error: sweep parameter must be one of {SWEEP_PARAMS}",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        print(f"config error: bad --values: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not values:
        print("config error: empty --values", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    summary = []
    for iv, v in enumerate(values):
        d = rc.to_dict()
        if args.param == "theta_in":
            d["theta_in_deg"] = v
        elif args.param == "eta_re":
            d["eta"]["re"] = v
        elif args.param == "eta_im":
            d["eta"]["im"] = v
        else:
            scale = v / (abs(complex(d["k0"]["re"], d["k0"]["im"])) * d["a"])
            d["k0"]["re"] *= scale
            d["k0"]["im"] *= scale
        try:
            rci = RunConfig.from_dict(d)
            cfg, da, ds, dga, dgs = _solve_all(rci)
            rows, (ba, bs, tab) = _directivity_rows(cfg, da, ds, rci)
            _write_csv(out / f"directivity_{iv:03d}.csv", DIRECTIVITY_HEADER, rows)
            eb = energy_balance(cfg, N=rci.N) if complex(cfg.k0).imag < 1e-2 else None
            fwd = tab.S[np.argmin(np.abs(tab.theta - (np.pi - cfg.theta_in)))]
            summary.append((
                v,
                fwd.real, fwd.imag,
                float(np.mean(np.abs(tab.S) ** 2)),
                extract_c(da, cfg, "+").real, extract_c(da, cfg, "+").imag,
                extract_d(ds, cfg, "+").real, extract_d(ds, cfg, "+").imag,
                int(rh.deformation_needed(cfg)),
                "ok",
            ))
        except Exception as exc:  # per-point failures recorded, sweep continues
            logger.warning("sweep point %s=%g failed: %s", args.param, v, exc)
            summary.append((v, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, f"error:{exc}"))
    _write_csv(out / "sweep_summary.csv",
               ["value", "S_forward_re", "S_forward_im", "mean_abs_S2",
                "c_plus_re", "c_plus_im", "d_plus_re", "d_plus_im",
                "deformation_needed", "status"],
               summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stripscat",
        description="Impedance-strip diffraction: solve, spectra, verify, sweep.")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default=None, help="output directory (default from config)")
    common.add_argument("--threads", type=int, default=None,
                        help="max worker threads hint (computation is deterministic)")

    p = sub.add_parser("solve", parents=[common], help="solve and write directivity/densities")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when coefficient tails miss the target")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectra", parents=[common], help="tabulate the spectral families")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
