"""Command-line front end.

Subcommands
-----------
transduce   photon/phonon populations of the write stage and swap efficiency
memory      one write/store/readout run with per-stage traces
sweep       protocol figures of merit over one or two parameter axes
benchmark   ensemble-averaged fidelity against the classical benchmark
validate    closed forms against the moment integrator

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import __version__, kernels
from .analytic import (
    conversion_efficiency,
    conversion_efficiency_max,
    transduction_populations_approx,
    transduction_populations_exact,
)
from .dynamics import build_stage_system, integrate_moments
from .gaussian import GaussianState
from .params import TWO_PI, SystemParams, optimal_pulse_duration
from .protocol import ensemble_average_fidelity, find_extremum, run_protocol
from .scenario import ParsedScenario, ScenarioError, _parse_grid, load_scenario
from .sweep import OutputTable, default_jobs, emit_csv, run_sweep
from .validation import run_validation

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _write_table(table, path):
    if path in (None, "-"):
        emit_csv(table, sys.stdout)
    else:
        emit_csv(table, path)


def _load(args, required=True) -> ParsedScenario | None:
    if args.config is None:
        if required:
            raise ConfigError("--config is required for this subcommand")
        return None
    try:
        parsed = load_scenario(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}") from None
    if getattr(args, "backend", None):
        parsed = replace(parsed, config=replace(parsed.config, backend=args.backend))
    return parsed


def _metadata(parsed, seed, **extra):
    meta = {"tool": f"brillouin-memory {__version__}", "seed": seed}
    if parsed is not None:
        meta["config_hash"] = parsed.config_hash
    meta.update(extra)
    return meta


def _seed(args, parsed):
    if args.seed is not None:
        return args.seed
    return parsed.seed if parsed is not None else 0


def _info(msg):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def transduction_defaults() -> SystemParams:
    """Write-stage parameters of the transduction demonstration."""
    return SystemParams.from_ratios(15.0, Gamma=TWO_PI * 1e6, gamma_over_Gamma=0.2, T_en=4.0,
                                    Delta_as_over_Gamma=0.2)


def cmd_transduce(args) -> int:
    parsed = _load(args, required=False)
    params = parsed.config.params if parsed is not None else transduction_defaults()
    seed = _seed(args, parsed)
    g = params.g1
    if not g > 0:
        raise ConfigError("transduction needs g1 > 0")
    if args.k_grid is not None:
        ks = _parse_grid(args.k_grid, "--k-grid", None)
        t = np.linspace(0.0, np.pi / g, args.points)
        rows = []
        for k in sorted(ks):
            eff = conversion_efficiency(params, t, k)
            t_pk, e_pk = find_extremum(t, eff, "max")
            rows.append([k, k * params.waveguide.v_o / params.Gamma, t_pk * 1e9, e_pk])
        table = OutputTable(("k_per_m", "Delta_as_over_Gamma", "t_peak_ns", "efficiency_peak"), rows,
                            _metadata(parsed, seed))
        _write_table(table, args.out)
        return EXIT_OK

    t = np.linspace(0.0, 2 * np.pi / g, args.points)
    n_a, n_b = transduction_populations_exact(params, args.n_a0, args.n_b0, None, t)
    a_apx, b_apx = transduction_populations_approx(params, args.n_a0, args.n_b0, params.n_th, t)
    # numeric reference: only second moments matter for the populations
    V0 = np.diag([args.n_a0 + 0.5] * 2 + [args.n_b0 + 0.5] * 2)
    traj = integrate_moments(build_stage_system("write", "squeezed", params), GaussianState(V0), t)
    num_a = (traj.covs[:, 0, 0] + traj.covs[:, 1, 1] - 1) / 2
    num_b = (traj.covs[:, 2, 2] + traj.covs[:, 3, 3] - 1) / 2
    eff = conversion_efficiency(params, t)
    half = t <= np.pi / g
    t_pk, e_pk = find_extremum(t[half], eff[half], "max")
    rows = np.column_stack([t * 1e9, n_a, n_b, a_apx, b_apx, num_a, num_b, eff])
    table = OutputTable(
        ("t_ns", "n_a", "n_b", "n_a_approx", "n_b_approx", "n_a_numeric", "n_b_numeric", "efficiency"),
        rows.tolist(),
        _metadata(parsed, seed, t_peak_ns=repr(t_pk * 1e9), efficiency_peak=repr(e_pk)),
    )
    _write_table(table, args.out)
    t_swap = optimal_pulse_duration(g)
    _info(f"peak transfer at t = {t_pk * 1e9:.4f} ns ({t_pk / t_swap:.4f} x pi/(2g))")
    _info(f"peak efficiency {e_pk:.4f}; 1 - pi(gamma+Gamma)/(4g) = {conversion_efficiency_max(params):.4f}")
    return EXIT_OK


_STAGE_COLUMNS = ("fidelity", "variance", "squeezing_factor", "lambda_minus", "log_negativity")


def cmd_memory(args) -> int:
    parsed = _load(args)
    seed = _seed(args, parsed)
    res = run_protocol(parsed.config)
    offsets = {"write": 0.0, "store": res.tau1, "readout": res.tau1 + parsed.config.schedule.tau_s}
    rows = []
    for i, (name, tr) in enumerate(res.stages.items()):
        for j, t in enumerate(tr.times):
            rows.append([i, t * 1e9, (t + offsets[name]) * 1e9] + [getattr(tr, c)[j] for c in _STAGE_COLUMNS])
    summary = res.summary()
    meta = _metadata(parsed, seed, stages="0=write 1=store 2=readout",
                     **{k: repr(v) if isinstance(v, float) else v for k, v in summary.items()})
    _write_table(OutputTable(("stage", "t_stage_ns", "t_total_ns") + _STAGE_COLUMNS, rows, meta), args.out)
    for msg in res.messages:
        _info(f"note: {msg}")
    _info(f"tau1 = {res.tau1 * 1e9:.4f} ns, tau2 = {res.tau2 * 1e9:.4f} ns, backend {res.backend_used}"
          + (" (fallback)" if res.fallback else ""))
    if parsed.config.entangled:
        _info(f"E_N write {summary['E_N_write']:.4f}, E_N read {summary['E_N_read']:.4f}, "
              f"two-mode fidelity {summary['F_read']:.4f}")
    else:
        _info(f"retrieved variance {summary['var_read']:.4f} "
              f"({summary['squeezing_factor_read_db']:.3f} dB), fidelity {summary['F_read']:.4f}")
    if res.backend_max_diff is not None:
        _info(f"analytic vs numeric max covariance difference {res.backend_max_diff:.3e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    parsed = _load(args)
    if not parsed.sweep.axes:
        raise ConfigError("scenario has no [sweep] axes")
    table = run_sweep(parsed.config, parsed.sweep, jobs=args.jobs,
                      metadata=_metadata(parsed, _seed(args, parsed), backend=parsed.config.backend))
    _write_table(table, args.out)
    n_fb = int(np.nansum(table.column("fallback")))
    if n_fb:
        _info(f"{n_fb} point(s) used the numeric fallback")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    parsed = _load(args)
    if parsed.config.entangled:
        raise ConfigError("the ensemble benchmark needs a squeezed-vacuum scenario")
    seed = _seed(args, parsed)
    ens = parsed.ensemble
    n = args.samples or ens.n_samples
    if n < 100:
        raise ConfigError("at least 100 ensemble samples are required")
    rows, results = [], []
    for conv in ens.conventions:
        res = ensemble_average_fidelity(parsed.config, ens.beta, n, seed, conv, jobs=args.jobs)
        results.append(res)
        rows.append([ens.beta, n, res.F_mean, res.F_stderr, res.benchmark, float(res.exceeds_benchmark)])
        _info(f"{conv:>8}: F_mean = {res.F_mean:.4f} +- {res.F_stderr:.4f}, benchmark "
              f"{res.benchmark:.4f}, {'exceeds' if res.exceeds_benchmark else 'does NOT exceed'} benchmark")
    meta = _metadata(parsed, seed, conventions=" ".join(ens.conventions))
    _write_table(OutputTable(("beta", "n_samples", "F_mean", "F_stderr", "benchmark", "exceeds_benchmark"),
                             rows, meta), args.out)
    if ens.target_F is not None:
        hits = [abs(r.F_mean - ens.target_F) <= ens.target_tol for r in results]
        if not any(hits):
            got = ", ".join(f"{r.convention} {r.F_mean:.4f}" for r in results)
            _info(f"DISCREPANCY: target F_mean {ens.target_F} +- {ens.target_tol} missed under "
                  f"every convention ({got})")
        else:
            _info("target reproduced by: " + ", ".join(r.convention for r, h in zip(results, hits) if h))
    if not any(r.exceeds_benchmark for r in results):
        _info("DISCREPANCY: no convention exceeds the classical benchmark")
    return EXIT_OK


def cmd_validate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    report = run_validation(args.draws, seed, args.tol)
    rows = [[c.draw, ["SqueezedVacuum", "SqueezedThermal", "SqueezedCoherent", "Entangled"].index(c.scenario),
             ["write", "store", "readout"].index(c.stage), c.max_abs_error, c.min_symplectic_eigenvalue,
             float(c.passed)] for c in report.checks]
    meta = _metadata(None, seed, scenarios="0=squeezed_vacuum 1=squeezed_thermal 2=squeezed_coherent 3=entangled",
                     stages="0=write 1=store 2=readout", tolerance=repr(args.tol))
    _write_table(OutputTable(("draw", "scenario", "stage", "max_abs_error", "min_symplectic_eigenvalue", "passed"),
                             rows, meta), args.out)
    n_bad = sum(not c.passed for c in report.checks)
    _info(f"{len(report.checks)} checks, {n_bad} failed, max error {report.max_abs_error:.3e}, "
          f"min symplectic eigenvalue {report.min_symplectic_eigenvalue:.9f}, "
          f"{report.runtime_s:.2f} s ({kernels.BACKEND} kernel)")
    return EXIT_OK if report.passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (INI with unit-suffixed keys)")
    common.add_argument("--out", default="-", help="CSV destination (default: stdout)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides [output] seed)")
    common.add_argument("--jobs", type=int, default=default_jobs(), help="worker processes")
    common.add_argument("--backend", choices=("analytic", "numeric", "both"), default=None,
                        help="override the scenario backend")

    parser = argparse.ArgumentParser(prog="brillouin-memory", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transduce", parents=[common], help="write-stage populations and efficiency")
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--n-a0", type=float, default=1.0, help="initial photon number")
    p.add_argument("--n-b0", type=float, default=0.0, help="initial phonon number")
    p.add_argument("--k-grid", default=None,
                   help="wave-number grid in 1/m, e.g. 'linspace(-1e-2, 1e-2, 41)'; outputs peak efficiency vs k")
    p.set_defaults(func=cmd_transduce)

    p = sub.add_parser("memory", parents=[common], help="single protocol run")
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("benchmark", parents=[common], help="ensemble fidelity vs classical benchmark")
    p.add_argument("--samples", type=int, default=None, help="override ensemble_samples")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("validate", parents=[common], help="oracle-equivalence suite")
    p.add_argument("--draws", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        _info("error: --jobs must be at least 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        _info(f"configuration error: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _info(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
