"""Averaged coherence signal z = <exp(2i chi)> over readout sequences.

For a readout sequence {r_k} the postselected amplitude
a({r_k}) = <psi0| M_N^(r_N) ... M_1^(r_1) |psi0> carries the sequence
probability |a|^2 and phase arg(a).  Averaging exp(2i chi) over sequences
weights each phase by its probability, which is the same as summing a^2
(not |a|^2) over all 2^N sequences:

    z = sum_{r} a({r_k})^2 = exp(2i chi_bar - alpha).

Three independent routes compute z here:

* ``brute_force_signal``   -- explicit sum over all 2^N sequences;
* ``transfer_signal``      -- exact finite-N contraction of the 4x4
                              two-replica step matrix, O(N);
* ``asymptotic_signal``    -- N -> infinity limit, the (uu,uu) element of
                              exp(Lambda) with Lambda the step generator.

The two-replica step is built in the gauge in which its large-N generator
is ``lambda_matrix``: the frame increment used per step is
exp(i*pi*d/(N+1)) * sigma_z * delta_R * sigma_z.  z is exactly invariant
under this regauging (the sigma_z factors cancel against the diagonal
back-action matrices and the pure phase sums to exp(2*pi*i*d) over the
closed path), so brute force and transfer agree to rounding while the
generator has the compact form below.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationTooLarge, SymmetryViolation, UndefinedSignal
from .linalg import mat_exp, tensor2
from .protocol import ProtocolParams, delta_R, initial_state, kraus_backaction, kraus_full

__all__ = [
    "SignalPoint",
    "ReplicaStep",
    "DephasingSplit",
    "SIGNAL_FLOOR",
    "BRUTE_FORCE_MAX_N",
    "amplitude_for_sequence",
    "brute_force_signal",
    "brute_force_amplitudes",
    "transfer_signal",
    "replica_step",
    "lambda_matrix",
    "lambda_matrix_for",
    "asymptotic_signal",
    "asymptotic_z_grid",
    "signal",
    "split_dephasing",
    "verify_symmetries",
]

# Below this |z| the dephasing exponent and phase are treated as undefined;
# genuine zeros of z (critical points) land here.
SIGNAL_FLOOR = 1e-14

BRUTE_FORCE_MAX_N = 20

_SZ = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class SignalPoint:
    """Averaged signal z with its derived dephasing and phase views.

    ``alpha = -ln|z|`` and ``chi_principal = arg(z)/2 in (-pi/2, pi/2]``
    (the phase is only defined modulo pi).  When |z| is below
    ``SIGNAL_FLOOR`` both views are undefined: alpha is +inf and
    chi_principal is NaN.
    """

    z: complex
    defined: bool
    alpha: float
    chi_principal: float

    @classmethod
    def from_z(cls, z: complex) -> "SignalPoint":
        z = complex(z)
        if abs(z) < SIGNAL_FLOOR:
            return cls(z=z, defined=False, alpha=math.inf, chi_principal=math.nan)
        return cls(
            z=z,
            defined=True,
            alpha=-math.log(abs(z)),
            chi_principal=cmath.phase(z) / 2.0,
        )


@dataclass(frozen=True)
class ReplicaStep:
    """Exact finite-N two-replica step ``m`` and boundary factor.

    ``m`` is sum_r (M^(r) dR) tensor (M^(r) dR) and ``boundary`` is
    dR tensor dR, both with the regauged frame increment dR described in
    the module docstring.  At C = A = 0 the back-action is trivial and
    ``m == boundary`` exactly.
    """

    m: np.ndarray
    boundary: np.ndarray


@dataclass(frozen=True)
class DephasingSplit:
    """Direction-symmetric and -antisymmetric dephasing components.

    alpha for directionality d splits as alpha^s + d * alpha^a; the
    components follow from runs at (C, A) and (C, -A) with d = +1 because
    reversing d is equivalent to flipping A.
    """

    alpha_sym: float
    alpha_asym: float
    chi_plus: float
    chi_minus: float


def _gauged_delta_R(p: ProtocolParams) -> np.ndarray:
    n = p.require_finite_N()
    phase = cmath.exp(1j * math.pi * p.d / (n + 1))
    return phase * (_SZ @ delta_R(p) @ _SZ)


def replica_step(p: ProtocolParams) -> ReplicaStep:
    """Exact one-step 4x4 transfer matrix and boundary for finite N."""
    n = p.require_finite_N()
    m0, m1 = kraus_backaction(p.C, p.A, n)
    dr = _gauged_delta_R(p)
    m = tensor2(m0 @ dr, m0 @ dr) + tensor2(m1 @ dr, m1 @ dr)
    return ReplicaStep(m=m, boundary=tensor2(dr, dr))


def amplitude_for_sequence(p: ProtocolParams, readouts) -> complex:
    """Postselected amplitude <psi0| M_N^(r_N) ... M_1^(r_1) |psi0>."""
    n = p.require_finite_N()
    readouts = list(readouts)
    if len(readouts) != n:
        raise ValueError(f"need {n} readouts, got {len(readouts)}")
    psi0 = initial_state(p.theta)
    v = psi0.copy()
    for k, r in enumerate(readouts, start=1):
        v = kraus_full(k, r, p) @ v
    return complex(np.vdot(psi0, v))


def brute_force_amplitudes(p: ProtocolParams) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes of all 2^N readout sequences, with end-of-run norms.

    Returns ``(amps, norms2)`` where entry ``i`` corresponds to the
    sequence whose bit ``k-1`` of ``i`` is readout r_k, ``amps[i]`` is the
    postselected amplitude and ``norms2[i]`` the squared state norm just
    before the final projective measurement.  States are evolved for all
    sequences at once by doubling the state stack at each step.
    """
    n = p.require_finite_N()
    if n > BRUTE_FORCE_MAX_N:
        raise EnumerationTooLarge(
            f"N={n} exceeds brute-force limit {BRUTE_FORCE_MAX_N}"
        )
    psi0 = initial_state(p.theta)
    states = psi0[np.newaxis, :]
    for k in range(1, n + 1):
        k0 = kraus_full(k, 0, p)
        k1 = kraus_full(k, 1, p)
        states = np.concatenate([states @ k0.T, states @ k1.T], axis=0)
    amps = states @ psi0.conj()
    norms2 = np.abs(states[:, 0]) ** 2 + np.abs(states[:, 1]) ** 2
    return amps, norms2


def brute_force_signal(p: ProtocolParams) -> SignalPoint:
    """z as the explicit sum of squared amplitudes over all 2^N sequences."""
    amps, _ = brute_force_amplitudes(p)
    return SignalPoint.from_z(complex(np.sum(amps * amps)))


def transfer_signal(p: ProtocolParams) -> SignalPoint:
    """z from the exact finite-N two-replica contraction, O(N) matvecs."""
    n = p.require_finite_N()
    step = replica_step(p)
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    for _ in range(n):
        v = step.m @ v
    v = step.boundary @ v
    return SignalPoint.from_z(complex(v[0]))


def lambda_matrix(C: float, A: float, theta: float, d: int) -> np.ndarray:
    """Large-N generator of the two-replica step, in basis (uu, ud, du, dd).

    Diagonal: (2*i*pi*d*cos(theta), -2(C+iA), -2(C+iA),
    -2*i*pi*d*cos(theta) - 4iA).  Couplings -i*pi*d*sin(theta) connect
    uu <-> {ud, du} and {ud, du} <-> dd; uu <-> dd and ud <-> du vanish.
    """
    if d not in (+1, -1):
        raise ValueError(f"d must be +1 or -1, got {d}")
    diag_phase = 2j * math.pi * d * math.cos(theta)
    coupling = -1j * math.pi * d * math.sin(theta)
    damp = -2.0 * (C + 1j * A)
    lam = np.zeros((4, 4), dtype=complex)
    lam[0, 0] = diag_phase
    lam[1, 1] = lam[2, 2] = damp
    lam[3, 3] = -diag_phase - 4j * A
    for i, j in ((0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2)):
        lam[i, j] = coupling
    return lam


def lambda_matrix_for(p: ProtocolParams) -> np.ndarray:
    return lambda_matrix(p.C, p.A, p.theta, p.d)


def asymptotic_signal(p: ProtocolParams) -> SignalPoint:
    """z in the quasicontinuous limit: the (uu,uu) element of exp(Lambda)."""
    z = mat_exp(lambda_matrix(p.C, p.A, p.theta, p.d))[0, 0]
    return SignalPoint.from_z(complex(z))


def signal(p: ProtocolParams) -> SignalPoint:
    """Dispatch on the mode: finite-N transfer or asymptotic exp(Lambda)."""
    return asymptotic_signal(p) if p.asymptotic else transfer_signal(p)


def asymptotic_z_grid(C, A, theta: float, d: int) -> np.ndarray:
    """Vectorized asymptotic z over broadcastable C and A arrays."""
    C, A = np.broadcast_arrays(np.asarray(C, float), np.asarray(A, float))
    lam = np.zeros(C.shape + (4, 4), dtype=complex)
    diag_phase = 2j * math.pi * d * math.cos(theta)
    coupling = -1j * math.pi * d * math.sin(theta)
    damp = -2.0 * (C + 1j * A)
    lam[..., 0, 0] = diag_phase
    lam[..., 1, 1] = damp
    lam[..., 2, 2] = damp
    lam[..., 3, 3] = -diag_phase - 4j * A
    for i, j in ((0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2)):
        lam[..., i, j] = coupling
    return mat_exp(lam)[..., 0, 0]


def split_dephasing(C: float, A: float, theta: float) -> DephasingSplit:
    """Symmetric/antisymmetric dephasing at (C, A, theta) from d = +1 runs."""
    plus = asymptotic_signal(ProtocolParams(C=C, A=A, theta=theta, d=+1))
    minus = asymptotic_signal(ProtocolParams(C=C, A=-A, theta=theta, d=+1))
    if not (plus.defined and minus.defined):
        raise UndefinedSignal(
            f"dephasing split undefined at (C={C}, A={A}, theta={theta}): "
            "|z| below floor"
        )
    return DephasingSplit(
        alpha_sym=0.5 * (plus.alpha + minus.alpha),
        alpha_asym=0.5 * (plus.alpha - minus.alpha),
        chi_plus=plus.chi_principal,
        chi_minus=minus.chi_principal,
    )


def verify_symmetries(samples: int = 100, seed: int = 0, tol: float = 1e-10) -> dict:
    """Check the three z-level symmetry identities on random parameters.

    For draws C in [0,4], A in [-2,2], theta in [0,pi]:

      S1: z(-d)(C,-A,theta)      == conj(z(d)(C,A,theta))
      S2: z(-d)(C, A, pi-theta)  == z(d)(C,A,theta)
      S3: z(+1)(C,-A, pi-theta)  == conj(z(+1)(C,A,theta))

    Returns the max deviation per identity; raises
    :class:`SymmetryViolation` naming the offending draw if any deviation
    exceeds ``tol``.
    """
    rng = np.random.default_rng(seed)
    dev = {"conjugation": 0.0, "hemisphere": 0.0, "combined": 0.0}

    def z(C, A, theta, d):
        return asymptotic_signal(ProtocolParams(C=C, A=A, theta=theta, d=d)).z

    for _ in range(samples):
        C = rng.uniform(0.0, 4.0)
        A = rng.uniform(-2.0, 2.0)
        theta = rng.uniform(0.0, math.pi)
        d = int(rng.choice([-1, 1]))
        base = z(C, A, theta, d)
        checks = {
            "conjugation": abs(z(C, -A, theta, -d) - base.conjugate()),
            "hemisphere": abs(z(C, A, math.pi - theta, -d) - base),
            "combined": abs(z(C, -A, math.pi - theta, d) - base.conjugate()),
        }
        for name, value in checks.items():
            dev[name] = max(dev[name], value)
            if value > tol:
                raise SymmetryViolation(
                    f"{name} symmetry violated by {value:.3e} "
                    f"at (C={C}, A={A}, theta={theta}, d={d})",
                    params=(C, A, theta, d),
                    deviation=value,
                )
    return dev
