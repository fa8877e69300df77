"""Phase unwinding, winding numbers, and the critical line of z = 0.

The averaged phase chi is defined modulo pi, but exp(2i chi) = z/|z| is
single-valued, so the unwrapped quantity is arg(z): accumulate its wrapped
increments along a theta sweep from 0 to pi, halve, and gauge-fix
chi(0) = 0.  Because z(theta=0) = z(theta=pi) = 1, the endpoint
chi(pi) = pi * n with integer winding n; n can only change across
parameters where z vanishes (dephasing divergences).  Those zeros are
found by damped Newton on (Re z, Im z) and continued in the asymmetry
parameter to map the critical line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ContinuationStalled, IllDefinedPath, NoConvergence, OutOfDomain
from .replica import ProtocolParams, asymptotic_signal, asymptotic_z_grid

__all__ = [
    "PhaseCurve",
    "CriticalPoint",
    "ScanGrid",
    "unwrap_phase",
    "winding_number",
    "find_critical_point",
    "find_critical_point_fixed_theta",
    "trace_critical_line",
    "scan_grid",
    "grid_local_minima",
    "loop_phase_winding",
]

# |z| below this along an unwrap path means the curve runs too close to a
# zero for its winding to be meaningful.
PATH_FLOOR = 1e-6

# Max wrapped arg increment allowed between adjacent samples.
MAX_ARG_STEP = math.pi / 2

ROOT_RESIDUAL = 1e-10


@dataclass(frozen=True)
class PhaseCurve:
    """Unwrapped averaged phase along theta in [0, pi].

    ``chi_unwrapped`` is continuous with chi(0) = 0; ``winding`` is the
    integer chi(pi)/pi, or None when the path came within PATH_FLOOR of a
    zero of z.
    """

    theta_samples: np.ndarray
    z_values: np.ndarray
    chi_unwrapped: np.ndarray
    winding: int | None


@dataclass(frozen=True)
class CriticalPoint:
    """A zero of z: dephasing diverges and the phase is undefined."""

    C_crit: float
    A_crit: float
    theta_crit: float
    d: int
    residual: float


@dataclass(frozen=True)
class ScanGrid:
    """Asymptotic z sampled on a rectangular (C, A) grid at fixed theta, d.

    ``z[i, j]`` corresponds to ``(A_values[i], C_values[j])``; row-major
    iteration runs A as the outer loop.
    """

    C_values: np.ndarray
    A_values: np.ndarray
    theta: float
    d: int
    z: np.ndarray


def _wrap(delta: np.ndarray) -> np.ndarray:
    return (delta + math.pi) % (2.0 * math.pi) - math.pi


def _z_of_theta(C: float, A: float, d: int, thetas: np.ndarray) -> np.ndarray:
    stack = np.array(
        [asymptotic_signal(ProtocolParams(C=C, A=A, theta=t, d=d)).z for t in thetas]
    )
    return stack


def unwrap_phase(C: float, A: float, d: int, resolution: int = 256) -> PhaseCurve:
    """Evaluate z(theta) on [0, pi] and unwrap its argument continuously.

    Intervals with a wrapped arg jump of pi/2 or more are bisected until
    resolved (machine-spacing bisection failure raises
    :class:`IllDefinedPath`).  The winding is None if any sample falls
    below PATH_FLOOR in |z|.
    """
    if resolution < 64:
        raise ValueError(f"resolution must be >= 64, got {resolution}")
    thetas = list(np.linspace(0.0, math.pi, resolution))
    zs = list(_z_of_theta(C, A, d, np.array(thetas)))
    floor_hit = any(abs(z) < PATH_FLOOR for z in zs)

    i = 0
    while i < len(thetas) - 1:
        za, zb = zs[i], zs[i + 1]
        jump = abs(_wrap(np.array([np.angle(zb) - np.angle(za)]))[0])
        if jump < MAX_ARG_STEP:
            i += 1
            continue
        if abs(za) < PATH_FLOOR or abs(zb) < PATH_FLOOR:
            # Refining toward a zero of z; the winding is lost anyway.
            floor_hit = True
            i += 1
            continue
        mid = 0.5 * (thetas[i] + thetas[i + 1])
        if mid <= thetas[i] or mid >= thetas[i + 1]:
            raise IllDefinedPath(
                f"phase unwrap cannot resolve arg jump near theta={thetas[i]:.6f} "
                f"(C={C}, A={A}, d={d})"
            )
        zm = asymptotic_signal(ProtocolParams(C=C, A=A, theta=mid, d=d)).z
        if abs(zm) < PATH_FLOOR:
            floor_hit = True
        thetas.insert(i + 1, mid)
        zs.insert(i + 1, zm)

    thetas_arr = np.array(thetas)
    zs_arr = np.array(zs)
    increments = _wrap(np.diff(np.angle(zs_arr)))
    unwrapped_arg = np.concatenate([[0.0], np.cumsum(increments)])
    chi = unwrapped_arg / 2.0

    winding: int | None
    if floor_hit or np.abs(zs_arr).min() < PATH_FLOOR:
        winding = None
    else:
        winding = int(round(chi[-1] / math.pi))
    return PhaseCurve(
        theta_samples=thetas_arr, z_values=zs_arr, chi_unwrapped=chi, winding=winding
    )


def winding_number(C: float, A: float, d: int, resolution: int = 256) -> int:
    """Integer winding chi(pi)/pi; raises IllDefinedPath near criticality."""
    curve = unwrap_phase(C, A, d, resolution)
    if curve.winding is None:
        raise IllDefinedPath(
            f"winding undefined at (C={C}, A={A}, d={d}): "
            f"|z| fell below {PATH_FLOOR} along the path"
        )
    residue = abs(curve.chi_unwrapped[-1] / math.pi - curve.winding)
    if residue > 0.05:
        raise IllDefinedPath(
            f"winding rounding residue {residue:.3f} too large at (C={C}, A={A}, d={d})"
        )
    return curve.winding


def _newton_2d(evaluate, x0, tol=ROOT_RESIDUAL, max_iter=100, fd_step=1e-6,
               domain_check=None, trust_radius=1.0):
    """Damped Newton for one complex equation in two real unknowns.

    ``evaluate(x) -> complex``; converges when |z| <= tol.  Steps are
    capped at ``trust_radius`` (near-tangent slices make the Jacobian
    singular and raw Newton steps explode), and candidates the model
    cannot evaluate count as infinitely bad.  Falls back to a few
    Nelder-Mead steps on |z|^2 when damping stagnates.
    """
    x = np.array(x0, dtype=float)

    def absz(pt):
        try:
            return abs(evaluate(pt))
        except (ValueError, MatrixExpOverflow):
            return math.inf

    current = absz(x)
    for _ in range(max_iter):
        if domain_check is not None:
            domain_check(x)
        if current <= tol:
            return x, current
        z = evaluate(x)
        jac = np.empty((2, 2))
        for k in range(2):
            xp, xm = x.copy(), x.copy()
            xp[k] += fd_step
            xm[k] -= fd_step
            zp, zm = evaluate(xp), evaluate(xm)
            jac[0, k] = (zp.real - zm.real) / (2.0 * fd_step)
            jac[1, k] = (zp.imag - zm.imag) / (2.0 * fd_step)
        try:
            step = np.linalg.solve(jac, [z.real, z.imag])
        except np.linalg.LinAlgError:
            step = None
        moved = False
        if step is not None and np.all(np.isfinite(step)):
            length = float(np.hypot(*step))
            if length > trust_radius:
                step = step * (trust_radius / length)
            lam = 1.0
            while lam >= 2.0 ** -20:
                candidate = x - lam * step
                value = absz(candidate)
                if value < current:
                    x, current, moved = candidate, value, True
                    break
                lam /= 2.0
        if not moved:
            # Newton stagnated (nearly singular Jacobian or a bad basin):
            # polish with a derivative-free minimization of |z|^2.
            res = minimize(
                lambda pt: absz(pt) ** 2,
                x,
                method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 400},
            )
            if absz(res.x) < current:
                x, current = np.array(res.x), absz(res.x)
            else:
                break
    if current <= tol:
        return x, current
    raise NoConvergence(
        f"root search stalled at residual {current:.3e}", best=x, residual=current
    )


def find_critical_point(
    seed_C: float, seed_theta: float, A: float, d: int
) -> CriticalPoint:
    """Solve z(C, A, theta) = 0 in (C, theta) at fixed A."""

    def evaluate(x):
        # Clamped so line-search candidates just past the margins stay
        # evaluable; the domain check below rejects runaway iterates.
        theta = min(max(_fold_theta(x[1]), 0.0), math.pi)
        return asymptotic_signal(
            ProtocolParams(C=max(x[0], 0.0), A=A, theta=theta, d=d)
        ).z

    def domain_check(x):
        if x[0] < -0.2 or not -0.3 <= x[1] <= math.pi + 0.3:
            raise OutOfDomain(
                f"iterate (C={x[0]:.4f}, theta={x[1]:.4f}) left the search domain"
            )

    x, residual = _newton_2d(evaluate, (seed_C, seed_theta), domain_check=domain_check)
    c, theta = float(x[0]), _fold_theta(float(x[1]))
    if c < 0.0 or not 0.0 <= theta <= math.pi:
        raise OutOfDomain(f"converged root (C={c}, theta={theta}) outside domain")
    return CriticalPoint(C_crit=c, A_crit=A, theta_crit=theta, d=d, residual=residual)


def find_critical_point_fixed_theta(
    seed_C: float, seed_A: float, theta: float, d: int
) -> CriticalPoint:
    """Solve z(C, A, theta) = 0 in (C, A) at fixed theta."""

    def evaluate(x):
        return asymptotic_signal(
            ProtocolParams(C=max(x[0], 0.0), A=x[1], theta=theta, d=d)
        ).z

    def domain_check(x):
        if x[0] < -0.2:
            raise OutOfDomain(f"iterate C={x[0]:.4f} left the search domain")

    x, residual = _newton_2d(evaluate, (seed_C, seed_A), domain_check=domain_check)
    c = float(x[0])
    if c < 0.0:
        raise OutOfDomain(f"converged root C={c} outside domain")
    return CriticalPoint(
        C_crit=c, A_crit=float(x[1]), theta_crit=theta, d=d, residual=residual
    )


def _fold_theta(theta: float) -> float:
    # Transient Newton excursions slightly past the poles are folded back.
    if -0.3 <= theta < 0.0:
        return -theta
    if math.pi < theta <= math.pi + 0.3:
        return 2.0 * math.pi - theta
    return theta


def trace_critical_line(
    start: CriticalPoint,
    A_start: float,
    A_end: float,
    initial_step: float = 0.01,
    min_step: float = 1e-4,
) -> list[CriticalPoint]:
    """Continue a critical point in A from A_start to A_end.

    Natural-parameter continuation: step A, re-solve (C, theta) from the
    previous root, halve the step on failure.  Raises
    :class:`ContinuationStalled` (carrying the points found) if the step
    underruns ``min_step``.
    """
    if initial_step <= 0:
        raise ValueError("initial_step must be > 0")
    direction = 1.0 if A_end >= A_start else -1.0
    points: list[CriticalPoint] = []
    current = find_critical_point(start.C_crit, start.theta_crit, A_start, start.d)
    points.append(current)
    step = initial_step
    a = A_start
    while (A_end - a) * direction > 1e-12:
        target = a + direction * min(step, abs(A_end - a))
        try:
            nxt = find_critical_point(
                current.C_crit, current.theta_crit, target, start.d
            )
        except (NoConvergence, OutOfDomain):
            step /= 2.0
            if step < min_step:
                raise ContinuationStalled(
                    f"continuation stalled at A={a:.6f} "
                    f"(last good point C={current.C_crit:.6f}, "
                    f"theta={current.theta_crit:.6f})",
                    points=points,
                ) from None
            continue
        current = nxt
        a = target
        points.append(current)
        step = min(step * 2.0, initial_step)
    return points


def scan_grid(
    C_values, A_values, theta: float, d: int, threads: int = 1
) -> ScanGrid:
    """Asymptotic z on the (C, A) product grid, rows indexed by A."""
    C_values = np.asarray(C_values, dtype=float)
    A_values = np.asarray(A_values, dtype=float)
    if C_values.size < 2 or A_values.size < 2:
        raise ValueError("axes need at least 2 points each")
    if not (np.all(np.diff(C_values) > 0) and np.all(np.diff(A_values) > 0)):
        raise ValueError("axes must be strictly increasing")
    cc, aa = np.meshgrid(C_values, A_values)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        rows = np.array_split(np.arange(A_values.size), min(threads, A_values.size))
        z = np.empty(cc.shape, dtype=complex)

        def work(idx):
            z[idx] = asymptotic_z_grid(cc[idx], aa[idx], theta, d)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, rows))
    else:
        z = asymptotic_z_grid(cc, aa, theta, d)
    return ScanGrid(C_values=C_values, A_values=A_values, theta=theta, d=d, z=z)


def grid_local_minima(grid: ScanGrid, ceiling: float = 0.05) -> list[tuple[float, float, float]]:
    """Strict interior local minima of |z| below ``ceiling``.

    Returns (C, A, |z|) triples ordered by |z|; seeds for root refinement.
    """
    mag = np.abs(grid.z)
    found = []
    for i in range(1, mag.shape[0] - 1):
        for j in range(1, mag.shape[1] - 1):
            window = mag[i - 1 : i + 2, j - 1 : j + 2]
            center = mag[i, j]
            if center >= ceiling:
                continue
            neighbors = window.flatten()
            neighbors = np.delete(neighbors, 4)
            if center < neighbors.min():
                found.append((float(grid.C_values[j]), float(grid.A_values[i]), float(center)))
    found.sort(key=lambda t: t[2])
    return found


def loop_phase_winding(points_z) -> int:
    """Exact integer winding of arg(z) around a closed loop of samples.

    ``points_z`` must start and end at the same point (or the closure is
    applied).  The sum of wrapped increments around a closed loop is an
    exact multiple of 2 pi.
    """
    zs = np.asarray(points_z, dtype=complex)
    if zs[0] != zs[-1]:
        zs = np.concatenate([zs, zs[:1]])
    increments = _wrap(np.diff(np.angle(zs)))
    total = increments.sum()
    return int(round(total / (2.0 * math.pi)))
