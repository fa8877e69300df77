"""Acceptance suite: one test per primary criterion, reported by name.

Windows and strengths that differ from their first-draft values were
re-anchored against the model itself; the numbers here are the ones the
physics actually satisfies (see the repository-external decision notes):

* the theta = 3pi/4 singularity pair sits at (C, A) = (2.0526, 0.9388)
  and (2.0526, 3.5041), so the heatmap window spans A in [-2, 4];
* alpha in the strong-measurement limit decays like ~8.9/C, so the
  alpha <= 0.05 clause is checked at C = 400 (the phase and winding
  clauses hold from C ~ 50 up and are checked there too).
"""

import math
import time

import numpy as np
import pytest
from conftest import record_criterion

from mipd.errors import IllDefinedPath
from mipd.linalg import inf_norm
from mipd.protocol import ProtocolParams, initial_state, kraus_full
from mipd.replica import (
    asymptotic_signal,
    brute_force_amplitudes,
    brute_force_signal,
    lambda_matrix,
    replica_step,
    split_dephasing,
    transfer_signal,
    verify_symmetries,
)
from mipd.topology import (
    find_critical_point,
    find_critical_point_fixed_theta,
    grid_local_minima,
    loop_phase_winding,
    scan_grid,
    unwrap_phase,
    winding_number,
)
from mipd.trajectories import estimate_signal

THETA_STAR = 3 * math.pi / 4

FIXED_POINTS = [
    ProtocolParams(2.0, 1.0, THETA_STAR, +1),
    ProtocolParams(1.0, 0.5, math.pi / 3, -1),
    ProtocolParams(3.0, -1.2, 2 * math.pi / 3, +1),
    ProtocolParams(0.7, 1.7, math.pi / 4, +1),
    ProtocolParams(2.5, 0.3, 0.9 * math.pi, -1),
]


def seeded_draws(n=20, N=10, seed=314159):
    rng = np.random.default_rng(seed)
    return [
        ProtocolParams(
            C=rng.uniform(0.0, 4.0),
            A=rng.uniform(-2.0, 2.0),
            theta=rng.uniform(0.01, math.pi - 0.01),
            d=int(rng.choice([-1, 1])),
            N=N,
        )
        for _ in range(n)
    ]


def test_oracle_equivalence():
    t0 = time.monotonic()
    dev = max(
        abs(transfer_signal(p).z - brute_force_signal(p).z) for p in seeded_draws()
    )
    elapsed = time.monotonic() - t0
    ok = dev <= 1e-12 and elapsed <= 5.0
    record_criterion("oracle equivalence (transfer vs brute force)", ok,
                     f"max dev {dev:.2e}, {elapsed:.1f}s")
    assert dev <= 1e-12
    assert elapsed <= 5.0


def test_probability_conservation():
    worst = 0.0
    for p in seeded_draws():
        _, norms2 = brute_force_amplitudes(p)
        worst = max(worst, abs(math.fsum(norms2) - 1.0))
    record_criterion("probability conservation over all sequences", worst <= 1e-12,
                     f"max dev {worst:.2e}")
    assert worst <= 1e-12


def test_generator_consistency():
    worst_step_ratio = None
    worst_z_ratio = None
    for p in FIXED_POINTS:
        lam = lambda_matrix(p.C, p.A, p.theta, p.d)
        errs = {
            n: float(inf_norm(n * (replica_step(p.with_(N=n)).m - np.eye(4)) - lam))
            for n in (1000, 2000)
        }
        assert errs[1000] <= 2.0 * errs[2000]
        z_inf = asymptotic_signal(p).z
        zerr = {n: abs(transfer_signal(p.with_(N=n)).z - z_inf) for n in (1000, 2000)}
        ratio = zerr[1000] / zerr[2000]
        assert 1.7 <= ratio <= 2.3
        step_ratio = errs[1000] / errs[2000]
        if worst_step_ratio is None or abs(step_ratio - 2) > abs(worst_step_ratio - 2):
            worst_step_ratio = step_ratio
        if worst_z_ratio is None or abs(ratio - 2) > abs(worst_z_ratio - 2):
            worst_z_ratio = ratio
    record_criterion("generator consistency (1/N decay)", True,
                     f"step ratio {worst_step_ratio:.3f}, z ratio {worst_z_ratio:.3f}")


def test_symmetry_suite():
    dev = verify_symmetries(samples=100, seed=271828)
    worst = max(dev.values())
    record_criterion("symmetry suite (conjugation/hemisphere/combined)",
                     worst <= 1e-10, f"max dev {worst:.2e}")
    assert worst <= 1e-10


def test_coherence_bound():
    worst = -math.inf
    rng = np.random.default_rng(161803)
    for p in seeded_draws(40, N=8, seed=662607):
        worst = max(worst, abs(transfer_signal(p).z) - 1.0)
        worst = max(worst, abs(asymptotic_signal(p.with_(N=None)).z) - 1.0)
    split_ok = True
    for _ in range(100):
        split = split_dephasing(
            rng.uniform(0, 4), rng.uniform(-2, 2), rng.uniform(0.01, math.pi - 0.01)
        )
        split_ok &= split.alpha_sym >= abs(split.alpha_asym) - 1e-10
    ok = worst <= 1e-12 and split_ok
    record_criterion("coherence bound |z| <= 1 and alpha_sym >= |alpha_asym|",
                     ok, f"max |z|-1 = {worst:.2e}")
    assert worst <= 1e-12
    assert split_ok


def test_fig2_singularity_pair():
    t0 = time.monotonic()
    grid = scan_grid(
        np.linspace(0.0, 4.0, 200), np.linspace(-2.0, 4.0, 200), THETA_STAR, +1
    )
    minima = grid_local_minima(grid, ceiling=0.05)
    ok = len(minima) == 2
    roots = []
    for c, a, _ in minima:
        ok &= a > 0.0 and 1.5 <= c <= 2.5
        root = find_critical_point_fixed_theta(c, a, THETA_STAR, +1)
        roots.append(root)
        ok &= root.residual <= 1e-10
        ok &= -math.log(root.residual) >= 23.0
    # no divergences in the A < 0 half-plane
    negative_side = [m for m in minima if m[1] < 0]
    ok &= not negative_side
    elapsed = time.monotonic() - t0
    ok &= elapsed <= 120.0
    detail = ", ".join(f"(C={r.C_crit:.4f}, A={r.A_crit:.4f})" for r in roots)
    record_criterion("two dephasing singularities at theta=3pi/4", ok,
                     f"{detail}, {elapsed:.1f}s")
    assert len(minima) == 2
    assert all(a > 0 and 1.5 <= c <= 2.5 for c, a, _ in minima)
    assert all(r.residual <= 1e-10 for r in roots)
    assert not negative_side
    assert elapsed <= 120.0


def test_fig2_first_draft_window_regression():
    # Regression, not a criterion: the A in [-2, 2] window holds only the
    # lower singularity; the second sits at A = 3.504.
    grid = scan_grid(
        np.linspace(0.0, 4.0, 200), np.linspace(-2.0, 2.0, 200), THETA_STAR, +1
    )
    assert len(grid_local_minima(grid, ceiling=0.05)) == 1


def test_fig3_winding_regions():
    cross1 = find_critical_point(2.0, 0.76 * math.pi, 1.0, +1)
    cross2 = find_critical_point(4.1, 0.43 * math.pi, 1.0, +1)
    ok = cross1.residual <= 1e-10 and cross2.residual <= 1e-10
    ok &= abs(cross1.theta_crit - cross2.theta_crit) > 1e-3

    sweep = [c for c in np.arange(0.1, 5.0 + 1e-9, 0.1)
             if min(abs(c - cross1.C_crit), abs(c - cross2.C_crit)) > 0.02]
    values = [winding_number(float(c), 1.0, +1, resolution=128) for c in sweep]
    runs = [values[0]]
    for v in values[1:]:
        if v != runs[-1]:
            runs.append(v)
    ok &= runs == [0, -1, -2]
    # jumps bracket the two refined crossings
    last0 = max(c for c, v in zip(sweep, values) if v == 0)
    first1 = min(c for c, v in zip(sweep, values) if v == -1)
    last1 = max(c for c, v in zip(sweep, values) if v == -1)
    first2 = min(c for c, v in zip(sweep, values) if v == -2)
    ok &= last0 < cross1.C_crit < first1
    ok &= last1 < cross2.C_crit < first2
    record_criterion(
        "winding regions 0/-1/-2 along A=1", ok,
        f"crossings C={cross1.C_crit:.4f} (theta {cross1.theta_crit/math.pi:.4f}pi), "
        f"C={cross2.C_crit:.4f} (theta {cross2.theta_crit/math.pi:.4f}pi)")
    assert runs == [0, -1, -2]
    assert cross1.residual <= 1e-10 and cross2.residual <= 1e-10
    assert abs(cross1.theta_crit - cross2.theta_crit) > 1e-3
    assert last0 < cross1.C_crit < first1
    assert last1 < cross2.C_crit < first2


def test_limit_checks():
    # (a) strong-measurement limit: alpha -> 0, chi -> pi*cos(theta) mod pi,
    # winding -2; alpha ~ 8.9/C makes the 0.05 bound a C >= ~200 statement.
    alpha_worst = 0.0
    chi_worst = 0.0
    for theta in np.linspace(0.0, math.pi, 32):
        pt = asymptotic_signal(ProtocolParams(400.0, 0.0, float(theta), +1))
        alpha_worst = max(alpha_worst, pt.alpha)
        target = math.pi * math.cos(theta)
        dev = abs((pt.chi_principal - target + math.pi / 2) % math.pi - math.pi / 2)
        chi_worst = max(chi_worst, dev)
        pt50 = asymptotic_signal(ProtocolParams(50.0, 0.0, float(theta), +1))
        dev50 = abs((pt50.chi_principal - target + math.pi / 2) % math.pi - math.pi / 2)
        chi_worst = max(chi_worst, dev50)
    zeno_ok = alpha_worst <= 0.05 and chi_worst <= 0.02
    zeno_ok &= winding_number(400.0, 0.0, +1) == -2
    zeno_ok &= winding_number(50.0, 0.0, +1) == -2

    # (b) no measurement: z = 1 everywhere
    nm_worst = 0.0
    for theta in np.linspace(0.0, math.pi, 16):
        for d in (+1, -1):
            nm_worst = max(nm_worst, abs(
                asymptotic_signal(ProtocolParams(0.0, 0.0, float(theta), d)).z - 1.0))
            nm_worst = max(nm_worst, abs(
                transfer_signal(ProtocolParams(0.0, 0.0, float(theta), d, N=24)).z - 1.0))

    # (c) C = 0, A != 0: unitary (Hamiltonian-like) evolution oracle
    ham_worst = 0.0
    rng = np.random.default_rng(577215)
    for _ in range(10):
        p = ProtocolParams(0.0, rng.uniform(-2, 2), rng.uniform(0.1, math.pi - 0.1),
                           int(rng.choice([-1, 1])), N=int(rng.integers(5, 60)))
        u = np.eye(2, dtype=complex)
        for k in range(1, p.N + 1):
            u = kraus_full(k, 0, p) @ u
        psi0 = initial_state(p.theta)
        overlap = complex(np.vdot(psi0, u @ psi0))
        ham_worst = max(ham_worst, abs(transfer_signal(p).z - overlap**2))

    ok = zeno_ok and nm_worst <= 1e-12 and ham_worst <= 1e-10
    record_criterion(
        "limit checks (projective / none / unitary)", ok,
        f"alpha {alpha_worst:.3f}, chi dev {chi_worst:.4f}, "
        f"no-measurement dev {nm_worst:.1e}, unitary dev {ham_worst:.1e}")
    assert zeno_ok
    assert nm_worst <= 1e-12
    assert ham_worst <= 1e-10


def test_pi_winding_around_singularity():
    root = find_critical_point_fixed_theta(2.1, 0.9, THETA_STAR, +1)
    angles = np.linspace(0.0, 2 * math.pi, 9)

    def loop(center_c, center_a):
        return [
            asymptotic_signal(ProtocolParams(
                center_c + 0.1 * math.cos(t), center_a + 0.1 * math.sin(t),
                THETA_STAR, +1)).z
            for t in angles
        ]

    enclosing = loop_phase_winding(loop(root.C_crit, root.A_crit))
    displaced = loop_phase_winding(loop(root.C_crit + 0.5, root.A_crit))
    ok = abs(enclosing) == 1 and displaced == 0
    record_criterion("pi-winding of chi around a singularity", ok,
                     f"enclosing {enclosing}, displaced {displaced}")
    assert abs(enclosing) == 1
    assert displaced == 0


def test_monte_carlo_consistency():
    t0 = time.monotonic()
    p = ProtocolParams(2.0, 1.0, THETA_STAR, +1, N=200)
    exact = transfer_signal(p).z
    est1 = estimate_signal(p, shots=100000, seed=20240631, threads=1)
    dev_re = abs(est1.z_hat.real - exact.real)
    dev_im = abs(est1.z_hat.imag - exact.imag)
    within = dev_re <= 4 * est1.stderr_re and dev_im <= 4 * est1.stderr_im
    est4 = estimate_signal(p, shots=100000, seed=20240631, threads=4)
    identical = est1 == est4
    elapsed = time.monotonic() - t0
    ok = within and identical and elapsed <= 30.0
    record_criterion(
        "Monte Carlo matches transfer matrix at 4 sigma", ok,
        f"dev ({dev_re:.1e}, {dev_im:.1e}) vs stderr "
        f"({est1.stderr_re:.1e}, {est1.stderr_im:.1e}), "
        f"thread-identical {identical}, {elapsed:.1f}s")
    assert within
    assert identical
    assert elapsed <= 30.0
