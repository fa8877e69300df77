"""Stochastic quantum-trajectory sampling of the measurement protocol.

Each shot draws the N readouts step by step with Born probabilities,
keeps the unnormalized state (its norm squared is the running sequence
probability), and finally draws the projective postselection outcome.
An accepted shot contributes exp(2i arg(amplitude)) to the signal
estimator and a rejected one contributes 0; since a shot lands on a given
(sequence, accepted) pair with probability |amplitude|^2, the estimator
mean is exactly sum_r amplitude^2 = z.

Randomness is counter-based: shot j uses its own Philox stream keyed by
(master seed, j), so results are bit-identical regardless of how shots
are batched or threaded.  Accumulation uses exact (fsum) summation in
shot order, which makes the estimate independent of chunking as well.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProbability
from .linalg import dagger
from .protocol import ProtocolParams, initial_state, kraus_backaction, rotation

__all__ = [
    "TrajectoryRecord",
    "McEstimate",
    "sample_trajectory",
    "estimate_signal",
    "thread_count",
]

# Tolerated rounding excursion of probabilities outside [0, 1]; worse than
# this is a logic bug and raises instead of clamping.
PROB_BAND = 1e-12


@dataclass(frozen=True)
class TrajectoryRecord:
    """One protocol run: readouts, postselected amplitude, acceptance."""

    readouts: tuple[int, ...]
    amplitude: complex
    pre_postselection_norm2: float
    accepted: bool


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate of z with componentwise standard errors."""

    z_hat: complex
    stderr_re: float
    stderr_im: float
    shots: int
    accept_rate: float
    seed: int

    @property
    def stderr(self) -> float:
        return max(self.stderr_re, self.stderr_im)


def thread_count() -> int:
    """Parallelism cap from MIPD_THREADS (>= 1); defaults to 1."""
    raw = os.environ.get("MIPD_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"MIPD_THREADS must be an integer >= 1, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"MIPD_THREADS must be >= 1, got {n}")
    return n


def _shot_rng(seed: int, shot: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, shot]))


def _check_prob(p: float) -> float:
    if p < -PROB_BAND or p > 1.0 + PROB_BAND:
        raise DegenerateProbability(f"branch probability {p!r} outside [0, 1]")
    return min(1.0, max(0.0, p))


def _step_matrices(p: ProtocolParams) -> tuple[np.ndarray, np.ndarray]:
    """Lab-frame Kraus operators for every step, shapes (N, 2, 2)."""
    n = p.require_finite_N()
    m0, m1 = kraus_backaction(p.C, p.A, n)
    k0 = np.empty((n, 2, 2), dtype=complex)
    k1 = np.empty((n, 2, 2), dtype=complex)
    for k in range(1, n + 1):
        rk = rotation(p.theta, p.phi(k))
        rkd = dagger(rk)
        k0[k - 1] = rkd @ m0 @ rk
        k1[k - 1] = rkd @ m1 @ rk
    return k0, k1


def sample_trajectory(p: ProtocolParams, rng: np.random.Generator) -> TrajectoryRecord:
    """Simulate one run, drawing N readouts and the final postselection."""
    n = p.require_finite_N()
    k0, k1 = _step_matrices(p)
    psi0 = initial_state(p.theta)
    v = psi0.copy()
    uniforms = rng.random(n + 1)
    readouts = []
    for k in range(n):
        norm2 = float(np.real(np.vdot(v, v)))
        v0 = k0[k] @ v
        p0 = _check_prob(float(np.real(np.vdot(v0, v0))) / norm2)
        if uniforms[k] < p0:
            readouts.append(0)
            v = v0
        else:
            readouts.append(1)
            v = k1[k] @ v
    norm2 = float(np.real(np.vdot(v, v)))
    amp = complex(np.vdot(psi0, v))
    p_accept = _check_prob(abs(amp) ** 2 / norm2) if norm2 > 0.0 else 0.0
    accepted = bool(uniforms[n] < p_accept)
    return TrajectoryRecord(
        readouts=tuple(readouts),
        amplitude=amp,
        pre_postselection_norm2=norm2,
        accepted=accepted,
    )


def _run_chunk(p, seed, k0, k1, psi0, lo, hi, contrib, accepted, amps, readout_bits):
    """Evolve shots [lo, hi) together, one vectorized pass over the N steps."""
    n = p.N
    count = hi - lo
    uniforms = np.empty((count, n + 1))
    for j in range(count):
        uniforms[j] = _shot_rng(seed, lo + j).random(n + 1)
    v = np.broadcast_to(psi0, (count, 2)).copy()
    for k in range(n):
        norm2 = np.abs(v[:, 0]) ** 2 + np.abs(v[:, 1]) ** 2
        v0 = v @ k0[k].T
        p0 = (np.abs(v0[:, 0]) ** 2 + np.abs(v0[:, 1]) ** 2) / norm2
        if p0.min() < -PROB_BAND or p0.max() > 1.0 + PROB_BAND:
            raise DegenerateProbability(
                f"branch probability outside [0, 1] at step {k + 1}"
            )
        np.clip(p0, 0.0, 1.0, out=p0)
        took0 = uniforms[:, k] < p0
        v = np.where(took0[:, np.newaxis], v0, v @ k1[k].T)
        if readout_bits is not None:
            readout_bits[lo:hi, k] = ~took0
    norm2 = np.abs(v[:, 0]) ** 2 + np.abs(v[:, 1]) ** 2
    amp = v @ psi0.conj()
    p_acc = np.abs(amp) ** 2 / norm2
    if p_acc.min() < -PROB_BAND or p_acc.max() > 1.0 + PROB_BAND:
        raise DegenerateProbability("acceptance probability outside [0, 1]")
    np.clip(p_acc, 0.0, 1.0, out=p_acc)
    acc = uniforms[:, n] < p_acc
    phase = np.zeros(count, dtype=complex)
    nz = acc & (np.abs(amp) > 0.0)
    phase[nz] = (amp[nz] / np.abs(amp[nz])) ** 2
    contrib[lo:hi] = phase
    accepted[lo:hi] = acc
    if amps is not None:
        amps[lo:hi] = amp


def estimate_signal(
    p: ProtocolParams,
    shots: int,
    seed: int,
    threads: int | None = None,
    trajectory_log=None,
    _return_readouts: bool = False,
):
    """Monte Carlo estimate of z over ``shots`` independent runs.

    ``threads`` defaults to the MIPD_THREADS cap; the result is
    bit-identical for any thread count.  If ``trajectory_log`` is a
    writable text stream, a per-shot CSV
    (shot, readouts, re_amp, im_amp, accepted) is emitted, readout of
    step 1 leftmost.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = p.require_finite_N()
    if threads is None:
        threads = thread_count()
    k0, k1 = _step_matrices(p)
    psi0 = initial_state(p.theta)

    want_detail = trajectory_log is not None or _return_readouts
    contrib = np.empty(shots, dtype=complex)
    accepted = np.empty(shots, dtype=bool)
    readout_bits = np.empty((shots, n), dtype=bool) if want_detail else None
    amps = np.empty(shots, dtype=complex) if want_detail else None

    chunk = max(1, min(shots, 4096))
    spans = [(lo, min(lo + chunk, shots)) for lo in range(0, shots, chunk)]

    def work(span):
        lo, hi = span
        _run_chunk(p, seed, k0, k1, psi0, lo, hi, contrib, accepted, amps, readout_bits)

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)

    if trajectory_log is not None:
        trajectory_log.write("shot,readouts,re_amp,im_amp,accepted\n")
        for j in range(shots):
            bits = "".join("1" if b else "0" for b in readout_bits[j])
            trajectory_log.write(
                f"{j},{bits},{amps[j].real!r},{amps[j].imag!r},{int(accepted[j])}\n"
            )

    re_vals = contrib.real
    im_vals = contrib.imag
    z_hat = complex(math.fsum(re_vals), math.fsum(im_vals)) / shots
    if shots > 1:
        var_re = math.fsum((re_vals - z_hat.real) ** 2) / (shots - 1)
        var_im = math.fsum((im_vals - z_hat.imag) ** 2) / (shots - 1)
    else:
        var_re = var_im = 0.0
    est = McEstimate(
        z_hat=z_hat,
        stderr_re=math.sqrt(var_re / shots),
        stderr_im=math.sqrt(var_im / shots),
        shots=shots,
        accept_rate=float(accepted.sum()) / shots,
        seed=seed,
    )
    if _return_readouts:
        return est, readout_bits
    return est
