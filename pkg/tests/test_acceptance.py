"""Acceptance suite: one PASS/FAIL line per criterion, tolerances as agreed.

Criteria that the model does not reproduce are reported as FAIL and the test
fails; nothing here is tuned toward the targets.
"""
import csv
import io
from pathlib import Path

import numpy as np
import pytest

from brillouin_memory.analytic import (
    SqueezedCoherent,
    SqueezedThermal,
    SqueezedVacuum,
    approx_entanglement_metrics,
    approx_squeezing_metrics,
    conversion_efficiency,
    conversion_efficiency_max,
)
from brillouin_memory.cli import main
from brillouin_memory.gaussian import min_symplectic_eigenvalue_pt
from brillouin_memory.params import TWO_PI, SystemParams, coupling_for_pulse, optimal_pulse_duration
from brillouin_memory.protocol import (
    Entangled,
    ProtocolConfig,
    Schedule,
    classical_benchmark,
    find_extremum,
    run_protocol,
)
from brillouin_memory.sweep import default_jobs
from brillouin_memory.validation import run_validation

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def test_criterion_1_oracle_equivalence(acceptance_log):
    report = run_validation(n_draws=50, seed=0, tol=1e-6)
    ok = report.passed and report.max_abs_error <= 1e-6 and report.runtime_s < 60 and len(report.checks) == 600
    acceptance_log(1, ok, f"{len(report.checks)} checks (4 scenarios x 3 stages x 50 draws), "
                          f"max |closed form - integrator| = {report.max_abs_error:.2e} (tol 1e-6), "
                          f"runtime {report.runtime_s:.1f} s (limit 60 s)")
    assert ok


def test_criterion_2_transduction(acceptance_log):
    p = SystemParams.from_ratios(15.0, Gamma=TWO_PI * 1e6, gamma_over_Gamma=0.2, T_en=4.0,
                                 Delta_as_over_Gamma=0.2)
    assert p.waveguide.Omega_ac == pytest.approx(TWO_PI * 7.6e9)
    g = p.g1
    t = np.linspace(0, np.pi / g, 2001)
    t_pk, e_pk = find_extremum(t, conversion_efficiency(p, t), "max")
    t_swap = optimal_pulse_duration(g)
    formula = conversion_efficiency_max(p)
    ok_t = abs(t_pk / t_swap - 1) <= 0.02
    ok_e = abs(e_pk / formula - 1) <= 0.02 and round(formula, 3) == 0.937
    acceptance_log(2, ok_t and ok_e, f"peak at {t_pk / t_swap:.4f} x pi/(2g) (tol 2%), efficiency "
                                     f"{e_pk:.4f} vs 1 - pi(gamma+Gamma)/(4g) = {formula:.4f} (tol 2%)")
    assert ok_t and ok_e


def test_criterion_3_classical_benchmark(acceptance_log):
    value = classical_benchmark(1.0)
    ok = value == 2 / 3 and f"{value:.2f}" == "0.67"
    acceptance_log(3, ok, f"classical_benchmark(1) = {value!r}, reported as {value:.2f}")
    assert ok


def test_criterion_4_ensemble_fidelity(acceptance_log, tmp_path, capsys):
    out = tmp_path / "benchmark.csv"
    code = main(["benchmark", "--config", str(SCENARIOS / "ensemble_benchmark.ini"), "--out", str(out),
                 "--jobs", str(default_jobs())])
    err = capsys.readouterr().err
    assert code == 0
    rows = list(csv.DictReader(line for line in io.StringIO(out.read_text()) if not line.startswith("#")))
    conventions = ["complex", "real"]
    assert len(rows) == 2
    n = [int(float(r["n_samples"])) for r in rows]
    F = [float(r["F_mean"]) for r in rows]
    se = [float(r["F_stderr"]) for r in rows]
    exceeds = [r["exceeds_benchmark"] == "1" for r in rows]
    in_window = [0.76 <= f <= 0.82 for f in F]
    discrepancy_reported = "DISCREPANCY" in err
    ok = min(n) >= 10_000 and (
        any(w and e for w, e in zip(in_window, exceeds))
        or (any(exceeds) and not any(in_window) and discrepancy_reported))
    detail = ", ".join(f"{c} F_mean = {f:.4f} +- {s:.4f}" for c, f, s in zip(conventions, F, se))
    acceptance_log(4, ok, f"{detail} ({min(n)} samples each); window [0.76, 0.82], benchmark 0.6667; "
                          f"exceeds benchmark: {exceeds}; discrepancy reported: {discrepancy_reported}")
    assert ok


def _entanglement_params():
    return SystemParams.from_ratios(1.0, Gamma=TWO_PI * 1e6, T_en=1.0).with_updates(
        g1=coupling_for_pulse(7.8e-9), g2=coupling_for_pulse(5.2e-9))


def test_criterion_5a_entanglement_approximation(acceptance_log):
    p = _entanglement_params()
    tau1 = optimal_pulse_duration(p.g1)
    E = approx_entanglement_metrics(p, p.g1, p.g2, tau1, optimal_pulse_duration(p.g2)).E_N_read_max
    ok = abs(E - 0.524) <= 0.01
    acceptance_log("5a", ok, f"readout E_N approximation = {E:.4f} (target 0.524 +- 0.01)")
    assert ok


@pytest.fixture(scope="module")
def entanglement_scan():
    p = _entanglement_params()
    etas = np.linspace(0.2, 2.0, 91)
    E, F = [], []
    for eta in etas:
        s = run_protocol(ProtocolConfig(Entangled(float(eta)), p, Schedule(tau_s=30e-9),
                                        record_traces=False)).summary()
        E.append(s["E_N_read"])
        F.append(s["F_read"])
    return etas, np.array(E), np.array(F)


def test_criterion_5b_exact_entanglement(acceptance_log, entanglement_scan):
    etas, E, _ = entanglement_scan
    hit = (E >= 0.50) & (E <= 0.65)
    i = int(np.argmax(E))
    ok = bool(hit.any())
    acceptance_log("5b", ok, f"exact readout E_N over eta in [0.2, 2]: max {E[i]:.4f} at eta = {etas[i]:.2f}; "
                             f"{int(hit.sum())} of {len(E)} grid points in [0.50, 0.65]")
    assert ok


def test_criterion_5c_fidelity_at_target(acceptance_log, entanglement_scan):
    etas, E, F = entanglement_scan
    hit = (E >= 0.50) & (E <= 0.65)
    if hit.any():
        i = int(np.flatnonzero(hit)[np.argmin(np.abs(E[hit] - 0.59))])
        ok = F[i] >= 0.90
        detail = f"two-mode fidelity {F[i]:.4f} at eta = {etas[i]:.2f} (E_N = {E[i]:.4f}); need >= 0.90"
    else:
        j = int(np.argmax(F))
        ok = False
        detail = (f"no eta attains the E_N target, so there is no fidelity to check; "
                  f"max two-mode fidelity {F[j]:.4f} at eta = {etas[j]:.2f}")
    acceptance_log("5c", ok, detail)
    assert ok


def test_criterion_6_ideal_limits(acceptance_log):
    cold = SystemParams.from_ratios(100.0).with_updates(n_th_override=0.0)
    g = cold.g1
    E_write = approx_entanglement_metrics(cold, g, g, np.pi / (2 * g), np.pi / (2 * g)).E_N_write_max
    tiny = cold.with_updates(n_th_override=1e-12)
    E_tiny = approx_entanglement_metrics(tiny, g, g, np.pi / (2 * g), np.pi / (2 * g)).E_N_write_max
    ideal = SystemParams.from_ratios(1e4).with_updates(n_th_override=0.0)
    F = run_protocol(ProtocolConfig(SqueezedVacuum(1.0), ideal, Schedule(tau_s=0.0))).summary()["F_read"]
    ok = abs(E_write - np.log(2)) <= 1e-6 and abs(E_tiny - np.log(2)) <= 1e-6 and abs(F - 1) <= 1e-3
    acceptance_log(6, ok, f"E_N write max - ln 2 = {E_write - np.log(2):.1e} (n_th = 0), "
                          f"{E_tiny - np.log(2):.1e} (n_th = 1e-12); retrieval fidelity {F:.5f} "
                          f"at n_th = 0, g = 1e4 Gamma, tau_s = 0 (tol 1e-3)")
    assert ok


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_7_approximation_consistency(acceptance_log):
    worst = {}
    corrected = 0.0
    n_configs = 0
    for g_ratio in (50, 100, 150, 200):
        for T in (0.1, 0.25, 0.5, 0.75, 1.0):
            n_configs += 1
            p = SystemParams.from_ratios(g_ratio, T_en=T)
            g1, g2 = p.g1, p.g2
            sq = run_protocol(ProtocolConfig(SqueezedVacuum(1.0), p, Schedule(tau_s=0.0), record_traces=False))
            s = sq.summary()
            at_write = approx_squeezing_metrics(p, 1.0, g1, g2, sq.tau1, 0.0, sq.tau1)
            at_read = approx_squeezing_metrics(p, 1.0, g1, g2, sq.tau1, 0.0, sq.tau2)
            fixed = approx_squeezing_metrics(p, 1.0, g1, g2, sq.tau1, 0.0, sq.tau2, include_write_loss=True)
            en = run_protocol(ProtocolConfig(Entangled(2.0), p, Schedule(tau_s=0.0), record_traces=False))
            lam_w = min_symplectic_eigenvalue_pt(en.write_state)
            lam_r = min_symplectic_eigenvalue_pt(en.final_state)
            errs = {
                "variance(t) write": _rel(float(at_write.var_write), s["var_write"]),
                "variance min write": _rel(at_write.var_write_min, s["var_write"]),
                "variance min readout": _rel(at_read.var_read_min, s["var_read"]),
                "lambda_- write": _rel(float(approx_entanglement_metrics(p, g1, g2, en.tau1, en.tau1).lambda_write),
                                       lam_w),
                "lambda_- readout": _rel(float(approx_entanglement_metrics(p, g1, g2, en.tau1, en.tau2).lambda_read),
                                         lam_r),
            }
            for k, v in errs.items():
                worst[k] = max(worst.get(k, 0.0), v)
            corrected = max(corrected, _rel(fixed.var_read_min, s["var_read"]))
    ok = all(v <= 0.05 for v in worst.values())
    detail = "; ".join(f"{k} {100 * v:.2f}%" for k, v in worst.items())
    acceptance_log(7, ok, f"worst relative error over {n_configs} configurations (tol 5%): {detail}")
    acceptance_log(7, True, f"readout variance minimum with the write-stage loss term: worst "
                            f"{100 * corrected:.2f}% (not part of the criterion)", status="INFO")
    assert ok


def test_criterion_8_physicality_and_determinism(acceptance_log, tmp_path, capsys):
    report = run_validation(n_draws=10, seed=11, tol=1e-6)
    nu_closed = report.min_symplectic_eigenvalue
    nu_traj = np.inf
    for scenario in (SqueezedVacuum(1.5), SqueezedThermal(1.0, 0.5), SqueezedCoherent(0.8, 1 - 1j),
                     Entangled(2.0)):
        for T in (0.1, 4.0, 20.0):
            p = SystemParams.from_ratios(30.0, T_en=T, Delta_as_over_Gamma=0.2)
            res = run_protocol(ProtocolConfig(scenario, p, Schedule(tau_s=40e-9), backend="both", n_grid=41))
            num = run_protocol(ProtocolConfig(scenario, p, Schedule(res.tau1, 40e-9, res.tau2),
                                              backend="numeric", n_grid=41))
            for r in (res, num):
                for tr in r.stages.values():
                    nu_traj = min(nu_traj, min(_min_nu(V) for V in tr.covs))
    physical = nu_closed >= 0.5 - 1e-7 and nu_traj >= 0.5 - 1e-7

    cfg = str(SCENARIOS / "temperature_sweep.ini")
    outs = []
    for i, jobs in enumerate(("1", "2")):
        path = tmp_path / f"run{i}.csv"
        assert main(["sweep", "--config", cfg, "--out", str(path), "--jobs", jobs]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    identical = outs[0] == outs[1]
    ok = physical and identical
    acceptance_log(8, ok, f"min symplectic eigenvalue: closed forms {nu_closed:.9f}, trajectories "
                          f"{nu_traj:.9f} (floor 0.5 - 1e-7); repeated sweep CSV byte-identical: {identical}")
    assert ok


def _min_nu(V):
    """Smallest symplectic eigenvalue, computed independently of the package."""
    n = V.shape[0] // 2
    J = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return float(np.abs(np.linalg.eigvals(1j * J @ V).real).min())
