"""Bundled self-verification suite.

Runs the cross-engine and symmetry invariants that the package is built
on and reports one line per check with its worst observed deviation.
Intended both as the ``mipd verify`` subcommand and as a quick health
check after installs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import inf_norm, tensor2
from .protocol import ProtocolParams, kraus_full
from .replica import (
    asymptotic_signal,
    brute_force_amplitudes,
    brute_force_signal,
    lambda_matrix,
    replica_step,
    transfer_signal,
    verify_symmetries,
)
from .topology import unwrap_phase
from .trajectories import estimate_signal

__all__ = ["CheckResult", "run_suite"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.bound


def _random_params(rng, N=10) -> ProtocolParams:
    return ProtocolParams(
        C=rng.uniform(0.0, 4.0),
        A=rng.uniform(-2.0, 2.0),
        theta=rng.uniform(0.05, math.pi - 0.05),
        d=int(rng.choice([-1, 1])),
        N=N,
    )


def run_suite(seed: int = 2024, samples: int = 20) -> list[CheckResult]:
    """Run every invariant check; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    results = []
    draws = [_random_params(rng) for _ in range(samples)]

    dev = max(
        abs(transfer_signal(p).z - brute_force_signal(p).z) for p in draws
    )
    results.append(CheckResult("oracle_equivalence", dev, 1e-12))

    dev = 0.0
    for p in draws:
        _, norms2 = brute_force_amplitudes(p)
        dev = max(dev, abs(math.fsum(norms2) - 1.0))
    results.append(CheckResult("probability_conservation", dev, 1e-12))

    dev = 0.0
    for p in draws[:5]:
        for k in (1, p.N):
            k0 = kraus_full(k, 0, p)
            k1 = kraus_full(k, 1, p)
            total = k0.conj().T @ k0 + k1.conj().T @ k1
            dev = max(dev, float(np.abs(total - np.eye(2)).max()))
    results.append(CheckResult("kraus_completeness", dev, 1e-14))

    sym = verify_symmetries(samples=max(samples, 50), seed=seed + 1)
    results.append(CheckResult("symmetries", max(sym.values()), 1e-10))

    mags = [abs(transfer_signal(p).z) for p in draws]
    mags += [abs(asymptotic_signal(p.with_(N=None)).z) for p in draws]
    results.append(CheckResult("coherence_bound", max(mags) - 1.0, 1e-12))

    # Generator consistency: ||N(m - I) - Lambda|| must decay ~1/N and the
    # finite-N signal must approach the asymptotic one at the same rate.
    fixed = [
        ProtocolParams(2.0, 1.0, 3 * math.pi / 4, +1),
        ProtocolParams(1.0, 0.5, math.pi / 3, -1),
        ProtocolParams(3.0, -1.2, 2 * math.pi / 3, +1),
        ProtocolParams(0.7, 1.7, math.pi / 4, +1),
        ProtocolParams(2.5, 0.3, 0.9 * math.pi, -1),
    ]
    worst_ratio_err = 0.0
    for p in fixed:
        lam = lambda_matrix(p.C, p.A, p.theta, p.d)
        errs = []
        for n in (1000, 2000):
            m = replica_step(p.with_(N=n)).m
            errs.append(float(inf_norm(n * (m - np.eye(4)) - lam)))
        ratio = errs[0] / errs[1]
        worst_ratio_err = max(worst_ratio_err, abs(ratio - 2.0))
        z_inf = asymptotic_signal(p).z
        zerrs = [abs(transfer_signal(p.with_(N=n)).z - z_inf) for n in (1000, 2000)]
        worst_ratio_err = max(worst_ratio_err, abs(zerrs[0] / zerrs[1] - 2.0))
    results.append(CheckResult("generator_consistency_ratio", worst_ratio_err, 0.3))

    worst = 0.0
    for C, A, d in ((0.5, 1.0, +1), (3.0, 1.0, +1), (4.5, 1.0, +1), (1.0, -0.7, -1)):
        curve = unwrap_phase(C, A, d, resolution=128)
        worst = max(worst, abs(curve.chi_unwrapped[-1] / math.pi - curve.winding))
    results.append(CheckResult("winding_integrality", worst, 0.05))

    p = ProtocolParams(2.0, 1.0, 3 * math.pi / 4, +1, N=50)
    est = estimate_signal(p, shots=20000, seed=seed)
    exact = transfer_signal(p).z
    dev = max(
        abs(est.z_hat.real - exact.real) / max(est.stderr_re, 1e-300),
        abs(est.z_hat.imag - exact.imag) / max(est.stderr_im, 1e-300),
    )
    results.append(CheckResult("monte_carlo_4sigma", dev, 4.0))

    return results


def render_report(results) -> tuple[str, bool]:
    lines = []
    all_pass = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_pass &= r.passed
        lines.append(f"{r.name:32s} deviation {r.deviation:11.3e}  bound {r.bound:9.3e}  {status}")
    return "\n".join(lines), all_pass
