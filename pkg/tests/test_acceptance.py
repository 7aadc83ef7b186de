"""End-to-end acceptance checks with pinned tolerances.

Each test prints one PASS/FAIL line so the suite doubles as a checklist
when run with `pytest -s tests/test_acceptance.py`.
"""

import json
import math
import os
import subprocess
import sys

import numpy as np

from avnsim.apparatus import apparatus_vs_projective, build_apparatus
from avnsim.experiment import (
    OUTCOME_BITS,
    context_pair,
    estimate_correlation,
    outcome_distribution,
    run_schedule,
    sample_events,
)
from avnsim.lhv import (
    avn_audit,
    bell_quantity,
    check_constraints,
    enumerate_assignments,
    lr_bound,
    lr_m_histogram,
    parity_witness,
)
from avnsim.observables import CORRELATIONS, Setting, bell_operator, verify_eigenrelations
from avnsim.qstate import KET_H, KET_L, KET_R, Party, expectation, tensor4
from avnsim.source import apply_noise, build_psi
from avnsim import reference

SRC = os.path.join(os.path.dirname(__file__), os.pardir, "src")


def report(criterion: str, ok: bool) -> bool:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}")
    return ok


def test_criterion_01_perfect_correlation_suite():
    rows = verify_eigenrelations(build_psi(0.0), atol=1e-10)
    ok = len(rows) == 9 and all(r.passed for r in rows)
    ok = ok and all(abs(r.value - r.predicted) < 1e-10 for r in rows)
    assert report("1 perfect-correlation suite", ok)


def test_criterion_02_bell_operator_spectrum():
    psi = build_psi(0.0)
    value = expectation(bell_operator(), psi)
    evals, evecs = np.linalg.eigh(bell_operator())
    overlap = abs(np.vdot(psi, evecs[:, -1]))
    ok = abs(value - 9.0) < 1e-10 and abs(evals.max() - 9.0) < 1e-10 and overlap > 1.0 - 1e-10
    assert report("2 Bell operator", ok)


def test_criterion_03_lhv_certificate():
    audit = avn_audit()
    bound = lr_bound()
    identity = all(
        bell_quantity(a) == 2 * check_constraints(a).satisfied_count - 9
        for a in enumerate_assignments()
    )
    ok = (
        audit.all_nine_count == 0
        and audit.max_satisfied == 8
        and bound.max_value == 7
        and parity_witness()
        and identity
    )
    assert report("3 LHV certificate", ok)


def test_criterion_04_apparatus_soundness():
    ok = all(
        apparatus_vs_projective(party, setting) < 1e-10
        for party in Party
        for setting in Setting
    )
    walkthrough = build_apparatus(Party.ALICE, Setting.C).marginal_probability(
        tensor4(KET_H, KET_L, KET_H, KET_R), bit1=-1
    )
    ok = ok and abs(walkthrough - 1.0) < 1e-10
    assert report("4 apparatus soundness", ok)


def test_criterion_05_m_experiment_histogram():
    psi = build_psi(0.0)
    dist = outcome_distribution(np.outer(psi, psi.conj()), context_pair("M"))
    products = OUTCOME_BITS.prod(axis=1)
    qm_ok = np.all(np.abs(dist[products < 0] - 1.0 / 8.0) < 1e-10) and np.all(
        np.abs(dist[products > 0]) < 1e-10
    )
    lr_hist = np.asarray(lr_m_histogram())
    lr_ok = np.all(lr_hist[products < 0] == 0.0) and lr_hist[products > 0].sum() > 0.999
    assert report("5 M-experiment histogram", bool(qm_ok and lr_ok))


def test_criterion_06_count_rate_consistency():
    lo, hi = 2.5e4, 4.0e4
    sizes = reference.implied_sample_sizes()
    ok = all(lo <= sizes[cid] <= hi for cid in ("ZZ", "X'X'", "ZZ'-Z-Z'", "X-Z'-XZ'"))
    flagged = reference.flagged_sample_size_rows()
    ok = ok and flagged == ["Z'Z'"]
    assert report("6 count-rate consistency", ok)


def test_criterion_07_published_constant_arithmetic():
    sigma = reference.sigma_ratio()
    visibility = reference.mean_absolute_correlation()
    fidelity = reference.derived_m_fidelity()
    ok = (
        abs(sigma - 294.0) <= 1.0
        and abs(round(sigma, 1) - 294.4) < 1e-9
        and abs(visibility - 0.95) <= 0.005
        and abs(reference.derived_m_value() - (-0.91847)) < 1e-9
        and abs(fidelity - 0.96) <= 0.005
    )
    assert report("7 published-constant arithmetic", ok)


def test_criterion_08_end_to_end_reproduction():
    fit = reference.fitted_noise()
    rho = apply_noise(build_psi(0.0), fit.model)
    schedule = reference.matched_schedule()
    bells = []
    sigmas = []
    for seed in range(100):
        rep = run_schedule(rho, schedule, seed=seed)
        bells.append(rep.bell_value)
        sigmas.append(rep.sigma_violation)
    bell_mean = float(np.mean(bells))
    sigma_mean = float(np.mean(sigmas))
    ok = abs(bell_mean - 8.56904) <= 0.05 and abs(sigma_mean - 294.0) <= 0.2 * 294.0
    print(f"  bell mean {bell_mean:.5f}, sigma mean {sigma_mean:.1f}")
    assert report("8 end-to-end reproduction", ok)


def test_criterion_09_sampling_correctness():
    psi = build_psi(0.0)
    rho = np.outer(psi, psi.conj())
    n = 10**6
    good = 0
    for seed in range(100):
        ok = True
        for idx, corr in enumerate(CORRELATIONS):
            dist = outcome_distribution(rho, context_pair(corr.id))
            table = sample_events(dist, n, seed=seed * 16 + idx)
            est = estimate_correlation(table, corr)
            bound = 5.0 * math.sqrt((1.0 - float(corr.sign) ** 2) / n)
            ok = ok and abs(est.E - corr.sign) <= max(bound, 1e-12)
        good += ok
    assert report("9 sampling correctness", good >= 99)


def test_criterion_10_determinism():
    env = dict(os.environ, PYTHONPATH=os.path.abspath(SRC))
    config = json.dumps({"seed": 2026, "noise": {"path_visibility": 0.93}})
    cmd = [sys.executable, "-m", "avnsim", "simulate", "--config", "-"]
    first = subprocess.run(cmd, input=config.encode(), capture_output=True, env=env)
    second = subprocess.run(cmd, input=config.encode(), capture_output=True, env=env)
    ok = first.returncode == 0 and second.returncode == 0 and first.stdout == second.stdout
    assert report("10 determinism", ok)
