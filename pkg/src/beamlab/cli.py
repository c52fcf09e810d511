"""Command-line driver emitting the CSV/JSON artifacts of every workflow.

Subcommands: validate (structural identities), spectrum (discrete
eigenvalues cross-validated against the characteristic oracle), resolvent
(axis scan with decay fits), simulate (energy evolution), oracle-compare
(closed-form inverse agreement), and all. Flags override config-file
values; the effective configuration is echoed into every artifact. Exit
status: 0 all gated checks passed, 1 a gated check failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import chareq
from .config import ConfigError, default_config, parse_config
from .inverse import exact_inverse, interface_matrix
from .linalg import eig_dense
from .evolution import DEFAULT_FILTER, decay_rate, propagate
from .operator import (
    assemble_generator,
    discrete_h_norm,
    dissipation_identity_residual,
    random_rough_coords,
    random_smooth_statevector,
)
from .resolvent import CHANNEL_BOUNDS, CSV_COLUMNS, fit_exponents, scan

# gate thresholds, echoed next to every verdict
DET_M_RTOL = 1e-10
DISSIPATION_TOL = 1e-8
EIG_MATCH_TOL = 1e-6
AXIS_STRIP_RE = (-1e-6, 1.0)
NORM_SLOPE_SLACK = 0.01
CHANNEL_SLOPE_SLACK = 0.05
SCALED_NORM_RATIO_MAX = 10.0
DISS_RATIO_TOL = 1e-6
DECAY_MATCH_RTOL = 0.05
ENERGY_IDENTITY_TOL = 1e-10


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def _write_csv(path: Path, cfg, columns, rows):
    with open(path, "w", newline="\n") as fh:
        for key, value in cfg.to_dict().items():
            fh.write(f"# {key} = {value!r}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = [
                str(int(c)) if isinstance(c, (bool, int, np.integer)) else _fmt(float(c))
                for c in row
            ]
            fh.write(",".join(cells) + "\n")


class GateBook:
    """Collects named pass/fail verdicts with values and thresholds."""

    def __init__(self):
        self.gates = {}

    def check(self, name, value, threshold, passed):
        self.gates[name] = {
            "value": value,
            "threshold": threshold,
            "passed": bool(passed),
        }
        return bool(passed)

    def all_passed(self):
        return all(g["passed"] for g in self.gates.values())


def run_validate(cfg, out_dir, gates, n_samples=200, dump=False):
    op = assemble_generator(cfg)
    det = float(np.linalg.det(interface_matrix(cfg.geometry.ell0, cfg.geometry.ell)))
    det_exact = 12.0 * cfg.geometry.ell**4
    det_err = abs(det - det_exact) / abs(det_exact)
    gates.check("validate.det_m", det_err, DET_M_RTOL, det_err <= DET_M_RTOL)

    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(n_samples):
        c = random_rough_coords(op, rng)
        worst = max(worst, dissipation_identity_residual(op, c))
    gates.check(
        "validate.dissipation_identity", worst, DISSIPATION_TOL, worst <= DISSIPATION_TOL
    )
    gates.check(
        "validate.constraint_rank", op.constraint_rank, 14, op.constraint_rank == 14
    )
    gram_eigs = np.linalg.eigvalsh(op.gram)
    gates.check("validate.gram_spd", float(gram_eigs[0]), 0.0, gram_eigs[0] > 0.0)

    if dump:
        np.savetxt(out_dir / "a_full.txt", op.a_full)
        np.savetxt(out_dir / "gram.txt", op.gram)
        np.savetxt(out_dir / "constraints.txt", op.constraint_matrix)

    return {
        "det_m": det,
        "det_m_relative_error": det_err,
        "dissipation_identity_max": worst,
        "constraint_count": 14,
        "constraint_rank": op.constraint_rank,
        "gram_min_eigenvalue": float(gram_eigs[0]),
        "n_samples": n_samples,
    }


def run_spectrum(cfg, out_dir, gates, k_rightmost=6):
    op = assemble_generator(cfg)
    pairs = eig_dense(op.a_reduced)
    _write_csv(
        out_dir / "spectrum.csv",
        cfg,
        ("re", "im", "residual"),
        [(p.value.real, p.value.imag, p.residual) for p in pairs],
    )

    reliable = [p for p in pairs if p.residual <= cfg.eig_residual_tol]
    reliable_stable = all(p.value.real < 0.0 for p in reliable)
    gates.check(
        "spectrum.reliable_left_half_plane",
        max((p.value.real for p in reliable), default=float("-inf")),
        0.0,
        reliable_stable,
    )

    geom = cfg.geometry
    roots, distances = [], []
    for p in pairs[:k_rightmost]:
        root = chareq.refine_root(geom, p.value, "discrete-eigenvalue")
        roots.append(root)
        distances.append(abs(root.zeta - p.value))
    _write_csv(
        out_dir / "oracle_roots.csv",
        cfg,
        ("re", "im", "det_abs", "newton_iters"),
        [(r.zeta.real, r.zeta.imag, r.det_abs, r.newton_iters) for r in roots],
    )
    max_dist = max(distances)
    gates.check("spectrum.oracle_match", max_dist, EIG_MATCH_TOL, max_dist <= EIG_MATCH_TOL)
    max_re = max(r.zeta.real for r in roots)
    gates.check("spectrum.certified_stable", max_re, 0.0, max_re < 0.0)
    in_strip = any(AXIS_STRIP_RE[0] <= r.zeta.real <= AXIS_STRIP_RE[1] for r in roots)
    gates.check("spectrum.axis_strip_empty", int(in_strip), 0, not in_strip)

    return {
        "n_eigenvalues": len(pairs),
        "spectral_abscissa": pairs[0].value.real,
        "rightmost": [[p.value.real, p.value.imag] for p in pairs[:k_rightmost]],
        "certified_roots": [[r.zeta.real, r.zeta.imag] for r in roots],
        "max_match_distance": max_dist,
        "max_certified_re": max_re,
        "n_reliable": len(reliable),
    }


def run_resolvent(cfg, out_dir, gates, processes=1):
    op = assemble_generator(cfg)
    samples = scan(op, cfg, processes=processes)
    _write_csv(out_dir / "resolvent.csv", cfg, CSV_COLUMNS, [s.csv_row() for s in samples])

    report = fit_exponents(samples)
    slopes = {name: fit.slope for name, fit in report["fits"].items()}
    for name, bound in CHANNEL_BOUNDS.items():
        slack = NORM_SLOPE_SLACK if name == "norm" else CHANNEL_SLOPE_SLACK
        gates.check(
            f"resolvent.slope.{name}",
            slopes[name],
            bound + slack,
            slopes[name] <= bound + slack,
        )
    gates.check(
        "resolvent.scaled_norm_ratio",
        report["scaled_norm_ratio"],
        SCALED_NORM_RATIO_MAX,
        report["scaled_norm_ratio"] <= SCALED_NORM_RATIO_MAX,
    )
    worst_ratio = max(s.diss_ratio for s in samples)
    gates.check(
        "resolvent.diss_ratio",
        worst_ratio,
        1.0 + DISS_RATIO_TOL,
        worst_ratio <= 1.0 + DISS_RATIO_TOL,
    )
    gates.check(
        "resolvent.curvature_constant_bounded",
        report["curvature_constant_ratio"],
        10.0,
        report["curvature_constant_ratio"] <= 10.0,
    )
    return {
        "n_samples": len(samples),
        "n_window": report["n_window"],
        "slopes": slopes,
        "r_squared": {k: f.r_squared for k, f in report["fits"].items()},
        "bounds": CHANNEL_BOUNDS,
        "scaled_norm_ratio": report["scaled_norm_ratio"],
        "curvature_constant_ratio": report["curvature_constant_ratio"],
        "curvature_constant_max": report["curvature_constant_max"],
        "max_diss_ratio": worst_ratio,
        "max_solve_residual": max(s.solve_residual for s in samples),
        "conjectured_sharp_exponent": slopes["norm"],
    }


def run_simulate(cfg, out_dir, gates):
    op = assemble_generator(cfg)
    rng = np.random.default_rng(cfg.seed)
    z0 = random_rough_coords(op, rng)
    trace, _ = propagate(
        op, z0, cfg.t_final, cfg.dt, record_smoothing=True, stiff_filter=DEFAULT_FILTER
    )
    rate = decay_rate(trace, tail_fraction=0.5)
    sigma = eig_dense(op.a_reduced)[0].value.real

    rows = [
        (
            trace.times[k],
            trace.energy[k],
            trace.dissipation[k - 1] if k > 0 else 0.0,
            trace.smoothing[k],
        )
        for k in range(0, len(trace.times), max(1, len(trace.times) // 4000))
    ]
    _write_csv(
        out_dir / "energy.csv",
        cfg,
        ("t", "energy", "dissipation", "smoothing_indicator"),
        rows,
    )

    ident = float(np.max(trace.identity_residuals))
    rel = abs(rate - sigma) / abs(sigma)
    gates.check("simulate.rate_negative", rate, 0.0, rate < 0.0)
    gates.check("simulate.rate_matches_abscissa", rel, DECAY_MATCH_RTOL, rel <= DECAY_MATCH_RTOL)
    gates.check("simulate.energy_identity", ident, ENERGY_IDENTITY_TOL, ident <= ENERGY_IDENTITY_TOL)
    monotone = bool(np.all(np.diff(trace.energy) <= 1e-12 * trace.energy[:-1]))
    gates.check("simulate.energy_monotone", int(monotone), 1, monotone)

    return {
        "decay_rate": rate,
        "spectral_abscissa": sigma,
        "relative_mismatch": rel,
        "fit_r_squared": trace.decay_fit.r_squared,
        "energy_identity_max": ident,
        "final_energy": float(trace.energy[-1]),
        "n_steps": len(trace.times) - 1,
    }


def run_oracle_compare(cfg, out_dir, gates, n_samples=20, echo=print):
    op = assemble_generator(cfg)
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for i in range(n_samples):
        z_hat = random_smooth_statevector(op, rng)
        c_hat = op.coords_from_state(z_hat.to_flat())
        c_disc = np.linalg.solve(op.a_reduced, c_hat)
        z_exact, _ = exact_inverse(z_hat, op.left, op.right)
        err = op.h_norm_full(op.lift(c_disc) - z_exact.to_flat()) / discrete_h_norm(
            op, c_hat
        )
        worst = max(worst, err)
        echo(
            f"oracle-compare: smooth random input {i + 1}/{n_samples} "
            f"(n={cfg.n_left}) discrete-vs-exact relative error {err:.3e}"
        )
    gates.check("oracle.inverse_agreement", worst, cfg.oracle_tol, worst <= cfg.oracle_tol)
    return {"n_samples": n_samples, "max_relative_error": worst, "tolerance": cfg.oracle_tol}


PHASES = {
    "validate": run_validate,
    "spectrum": run_spectrum,
    "resolvent": run_resolvent,
    "simulate": run_simulate,
    "oracle-compare": run_oracle_compare,
}

# phase-specific resolution defaults, applied unless the user overrides
PHASE_N_DEFAULTS = {"spectrum": 64, "resolvent": 256}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="beamlab",
        description="Spectral laboratory for the damped transmission beam.",
    )
    parser.add_argument("--config", type=Path, default=None, help="configuration file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override RNG seed")
    parser.add_argument("--threads", type=int, default=1, help="scan worker processes")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--n", type=int, default=None, help="points per subdomain")

    p = sub.add_parser("validate", help="structural identities and ranks")
    add_common(p)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--dump-matrices", action="store_true")

    p = sub.add_parser("spectrum", help="eigenvalues and oracle cross-validation")
    add_common(p)
    p.add_argument("--k", type=int, default=6, help="rightmost eigenvalues to certify")

    p = sub.add_parser("resolvent", help="imaginary-axis scan and decay fits")
    add_common(p)
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--points", type=int, default=None)

    p = sub.add_parser("simulate", help="time evolution and decay rate")
    add_common(p)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)

    p = sub.add_parser("oracle-compare", help="closed-form inverse agreement")
    add_common(p)
    p.add_argument("--samples", type=int, default=20)

    p = sub.add_parser("all", help="run every phase with its defaults")
    return parser


def _effective_config(args, command):
    cfg = parse_config(args.config.read_text()) if args.config else default_config()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    n = getattr(args, "n", None)
    if n is None and args.config is None:
        n = PHASE_N_DEFAULTS.get(command)
    if n is not None:
        updates.update(n_left=n, n_right=n)
    if getattr(args, "lambda_min", None) is not None:
        updates["lambda_min"] = args.lambda_min
    if getattr(args, "lambda_max", None) is not None:
        updates["lambda_max"] = args.lambda_max
    if getattr(args, "points", None) is not None:
        updates["n_lambda"] = args.points
    if getattr(args, "t_final", None) is not None:
        updates["t_final"] = args.t_final
    if getattr(args, "dt", None) is not None:
        updates["dt"] = args.dt
    return cfg.replace(**updates)


def _run_phase(command, args, out_dir, gates, timings, phases_out):
    cfg = _effective_config(args, command)
    start = time.perf_counter()
    if command == "validate":
        result = run_validate(
            cfg, out_dir, gates,
            n_samples=getattr(args, "samples", 200),
            dump=getattr(args, "dump_matrices", False),
        )
    elif command == "spectrum":
        result = run_spectrum(cfg, out_dir, gates, k_rightmost=getattr(args, "k", 6))
    elif command == "resolvent":
        result = run_resolvent(cfg, out_dir, gates, processes=args.threads)
    elif command == "simulate":
        result = run_simulate(cfg, out_dir, gates)
    elif command == "oracle-compare":
        result = run_oracle_compare(cfg, out_dir, gates, n_samples=getattr(args, "samples", 20))
    else:  # pragma: no cover
        raise ValueError(command)
    timings[command] = time.perf_counter() - start
    result["config"] = cfg.to_dict()
    phases_out[command] = result


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    gates = GateBook()
    timings, phases_out = {}, {}
    try:
        if args.command == "all":
            for command in PHASES:
                _run_phase(command, args, out_dir, gates, timings, phases_out)
        else:
            _run_phase(args.command, args, out_dir, gates, timings, phases_out)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1

    summary = {
        "phases": phases_out,
        "gates": gates.gates,
        "passed": gates.all_passed(),
        "timings": timings,
    }
    with open(out_dir / "summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for name, gate in sorted(gates.gates.items()):
        status = "PASS" if gate["passed"] else "FAIL"
        print(f"[{status}] {name}: value={gate['value']} threshold={gate['threshold']}")
    print(f"summary: {'PASS' if gates.all_passed() else 'FAIL'} -> {out_dir / 'summary.json'}")
    return 0 if gates.all_passed() else 1


if __name__ == "__main__":
    sys.exit(main())
