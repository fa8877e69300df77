"""Small dense complex linear algebra for the single- and two-replica spaces.

Matrices are plain ``numpy`` complex arrays: 2x2 in the spin basis
(up, down) and 4x4 in the replica-doubled basis, ordered

    (up,up), (up,down), (down,up), (down,down)

with replica 1 as the high bit, i.e. ``tensor2(a, b)`` places replica-1
indices on ``a``.  The matrix exponential is a degree-13 Pade approximant
with scaling and squaring, which stays accurate for the non-normal and
near-defective generators that appear close to dephasing singularities
(an eigendecomposition would not).
"""

from __future__ import annotations

import numpy as np

from .errors import MatrixExpOverflow

# Max-absolute-row-sum norm cutoff for mat_exp; far above the ~30 reached
# by physical generators, but finite so pathological inputs fail loudly.
EXP_NORM_LIMIT = 1.0e4

# Pade-13 numerator coefficients (b[0] multiplies the identity).
_PADE13 = np.array(
    [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ]
)
# Largest scaled norm for which Pade-13 meets double precision.
_PADE13_THETA = 5.371920351148152


def as_complex(m) -> np.ndarray:
    """Validate and return ``m`` as a finite complex ndarray."""
    a = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix entries must be finite")
    return a


def inf_norm(m) -> np.ndarray:
    """Max absolute row sum, broadcast over any leading stack axes."""
    a = np.asarray(m)
    return np.abs(a).sum(axis=-1).max(axis=-1)


def mat_mul(a, b) -> np.ndarray:
    """Matrix product of equal-sized square complex matrices."""
    a = as_complex(a)
    b = as_complex(b)
    if a.shape[-2:] != b.shape[-2:]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def dagger(m) -> np.ndarray:
    """Conjugate transpose (of the trailing two axes)."""
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def tensor2(a, b) -> np.ndarray:
    """Replica (Kronecker) product of two 2x2 matrices.

    ``tensor2(a, b)[2*i1 + i2, 2*j1 + j2] == a[i1, j1] * b[i2, j2]``,
    which realizes the fixed basis order (uu, ud, du, dd).
    """
    return np.kron(as_complex(a), as_complex(b))


def mat_exp(m) -> np.ndarray:
    """Matrix exponential by Pade-13 with scaling and squaring.

    Accepts a single square matrix or a stack ``(..., n, n)``; stacks are
    grouped by scaling power so every member gets the same accuracy as a
    standalone call.  Raises :class:`MatrixExpOverflow` when the max
    absolute row sum exceeds ``EXP_NORM_LIMIT``.
    """
    a = as_complex(m)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")

    norms = np.atleast_1d(inf_norm(a))
    if np.any(norms > EXP_NORM_LIMIT):
        raise MatrixExpOverflow(
            f"matrix norm {norms.max():.3g} exceeds supported range {EXP_NORM_LIMIT:.3g}"
        )

    stack = a.reshape((-1,) + a.shape[-2:])
    flat_norms = norms.reshape(-1)
    # Scaling powers: 2^-s brings each norm under the Pade-13 radius.
    s = np.zeros(stack.shape[0], dtype=int)
    big = flat_norms > _PADE13_THETA
    s[big] = np.ceil(np.log2(flat_norms[big] / _PADE13_THETA)).astype(int)

    out = np.empty_like(stack)
    for sv in np.unique(s):
        idx = np.nonzero(s == sv)[0]
        r = _pade13_exp(stack[idx] / (2.0 ** sv))
        for _ in range(sv):
            r = r @ r
        out[idx] = r
    return out.reshape(a.shape)


def _pade13_exp(a: np.ndarray) -> np.ndarray:
    """Pade-13 approximant of exp(a) for ||a|| <= theta_13 (batched)."""
    b = _PADE13
    n = a.shape[-1]
    ident = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return np.linalg.solve(v - u, v + u)
