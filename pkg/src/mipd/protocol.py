"""The steered-measurement protocol on a single spin 1/2.

A qubit starts in the +1/2 eigenstate of n0.S with
n0 = (sin(theta), 0, cos(theta)) and is hit by N generalized measurements
whose axes n_k share the polar angle theta and wind azimuthally by
phi_k = 2*pi*k*d/(N+1); d = +-1 sets the winding direction.  A final
projective measurement along n_{N+1} = n0, postselected on readout 0,
closes the path.

Each generalized measurement has two readouts.  In the frame where the
measured axis is z, the back-action matrices are

    M0 = diag(1, exp(-2(C + iA)/N)),   M1 = diag(0, sqrt(1 - exp(-4C/N))),

so C sets the measurement strength (C -> infinity is projective, C = 0 is
no measurement) and A tilts the r = 0 back-action by an extra rotation
around the measurement axis, which is what makes dephasing direction-
asymmetric.  The lab-frame Kraus operator for step k and readout r is
R(n_k)^{-1} M^(r) R(n_k) with the frame rotation R given by
``rotation`` below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import dagger

__all__ = [
    "ProtocolParams",
    "rotation",
    "kraus_backaction",
    "kraus_full",
    "delta_R",
    "initial_state",
]


@dataclass(frozen=True)
class ProtocolParams:
    """Full description of one protocol run.

    ``N=None`` selects the asymptotic (quasicontinuous) mode in which the
    replica engine evaluates exp(Lambda) instead of an N-step product.
    """

    C: float
    A: float
    theta: float
    d: int
    N: int | None = None

    def __post_init__(self):
        if not (self.C >= 0 and math.isfinite(self.C)):
            raise ValueError(f"C must be finite and >= 0, got {self.C}")
        if not math.isfinite(self.A):
            raise ValueError(f"A must be finite, got {self.A}")
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.d not in (+1, -1):
            raise ValueError(f"d must be +1 or -1, got {self.d}")
        if self.N is not None and (self.N < 1 or self.N != int(self.N)):
            raise ValueError(f"N must be an integer >= 1, got {self.N}")

    @property
    def asymptotic(self) -> bool:
        return self.N is None

    def require_finite_N(self) -> int:
        if self.N is None:
            raise ValueError("operation requires finite N")
        return self.N

    def with_(self, **kw) -> "ProtocolParams":
        return replace(self, **kw)

    def phi(self, k: int) -> float:
        """Azimuth of measurement axis k (k = 0 is the initial axis)."""
        return 2.0 * math.pi * k * self.d / (self.require_finite_N() + 1)


def rotation(theta: float, phi: float) -> np.ndarray:
    """Frame rotation mapping the n(theta, phi) spin frame onto the z frame.

    Unitary; its rows are the (phase-convention-fixed) bras of the +-
    eigenstates of n.S, so R (n.S) R^{-1} = S_z and R maps the +1/2
    eigenstate of n.S to |up>.
    """
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    e = complex(math.cos(phi), -math.sin(phi))
    return np.array([[c, s * e], [s, -c * e]], dtype=complex)


def kraus_backaction(C: float, A: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Back-action matrices (M0, M1) in the measured-axis frame."""
    if C < 0:
        raise ValueError("C must be >= 0")
    if N < 1:
        raise ValueError("N must be >= 1")
    decay = np.exp(-2.0 * (C + 1j * A) / N)
    m0 = np.array([[1.0, 0.0], [0.0, decay]], dtype=complex)
    m1 = np.array(
        [[0.0, 0.0], [0.0, math.sqrt(max(0.0, 1.0 - math.exp(-4.0 * C / N)))]],
        dtype=complex,
    )
    return m0, m1


def kraus_full(k: int, r: int, p: ProtocolParams) -> np.ndarray:
    """Lab-frame Kraus operator for step k (1..N) and readout r."""
    n = p.require_finite_N()
    if not 1 <= k <= n:
        raise ValueError(f"step index {k} outside 1..{n}")
    if r not in (0, 1):
        raise ValueError(f"readout must be 0 or 1, got {r}")
    rk = rotation(p.theta, p.phi(k))
    m = kraus_backaction(p.C, p.A, n)[r]
    return dagger(rk) @ m @ rk


def delta_R(p: ProtocolParams) -> np.ndarray:
    """One-step frame increment R(n_1) R(n_0)^{-1}.

    Independent of the step index because the axes are equally spaced in
    azimuth, and (delta_R)^(N+1) telescopes to the identity because the
    final axis coincides with the initial one.
    """
    r1 = rotation(p.theta, p.phi(1))
    r0 = rotation(p.theta, 0.0)
    return r1 @ dagger(r0)


def initial_state(theta: float) -> np.ndarray:
    """+1/2 eigenstate of n0.S: (cos(theta/2), sin(theta/2))."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return np.array(
        [math.cos(theta / 2.0), math.sin(theta / 2.0)], dtype=complex
    )
