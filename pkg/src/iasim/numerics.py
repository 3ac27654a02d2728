"""Dense complex linear algebra for small matrices.

Everything the precoding pipeline needs is implemented here directly
(no LAPACK): Sylvester-Hadamard trunk construction, a one-sided Jacobi
SVD that returns both unitary factors in full (the null-space columns
of the left factor are what the alignment step consumes), Gaussian
elimination with partial pivoting, and a singular-value condition
estimate. Matrices are plain 2-D complex128 ndarrays.

All routines are pure functions; they never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailureError, SingularMatrixError, UnsupportedOrderError

_EPS = float(np.finfo(np.float64).eps)

# Returned instead of an infinite condition number so comparisons stay total.
COND_SENTINEL = 1e300

# Relative pivot floor for Gaussian elimination.
PIVOT_FLOOR = 1e-12

# Jacobi sweep controls: converge when a full sweep performs no rotation
# above the pairwise relative threshold and the accumulated off-diagonal
# mass of the implicit Gram matrix is below OFF_DIAG_TOL * ||A||_F^2.
OFF_DIAG_TOL = 1e-13
_PAIR_TOL = 32.0 * _EPS
MAX_SWEEPS = 100


def as_matrix(a) -> np.ndarray:
    """Coerce input to a 2-D complex128 array and validate it.

    Rejects empty shapes and non-finite entries (NaN/Inf never enter the
    linear algebra kernels).
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {np.shape(a)}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite entries")
    return m


@dataclass
class SvdResult:
    """Full singular value decomposition a = u @ diag(s) @ v^H.

    u is m x m unitary, v is n x n unitary, s has length min(m, n) and is
    sorted in descending order. The phase of every singular vector is
    normalized so the largest-magnitude entry of each left singular vector
    is real and positive, which makes repeated factorizations bit-stable.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def hadamard_trunk(k: int, n_s: int) -> np.ndarray:
    """First n_s columns of the order-k Sylvester Hadamard matrix, scaled 1/sqrt(k).

    The columns are orthonormal, so the result restricts transmission to an
    n_s-dimensional subspace of the k available dimensions.
    """
    if k < 1 or (k & (k - 1)) != 0:
        raise UnsupportedOrderError(f"Hadamard order {k} is not a power of two")
    if not 1 <= n_s <= k:
        raise ValueError(f"need 1 <= n_s <= k, got n_s={n_s}, k={k}")
    h = np.ones((1, 1), dtype=np.complex128)
    while h.shape[0] < k:
        h = np.block([[h, h], [h, -h]])
    return h[:, :n_s] / np.sqrt(k)


def _complete_basis(u: np.ndarray, filled: list[int], empty: list[int]) -> None:
    """Fill the `empty` columns of u with an orthonormal completion.

    Greedy choice over canonical basis vectors: at each step pick the e_k
    whose residual after projection onto the current columns is largest
    (ties go to the lowest index), then re-orthogonalize once for
    stability. Deterministic, which keeps downstream regression output
    stable.
    """
    m = u.shape[0]
    have = list(filled)
    for slot in empty:
        if have:
            uh = u[:, have]
            resid = np.eye(m, dtype=np.complex128) - uh @ uh.conj().T
        else:
            resid = np.eye(m, dtype=np.complex128)
        norms = np.sqrt(np.sum(np.abs(resid) ** 2, axis=0))
        cand = int(np.argmax(norms))  # first occurrence wins ties
        vec = resid[:, cand]
        for idx in have:
            vec = vec - u[:, idx] * np.vdot(u[:, idx], vec)
        nrm = float(np.sqrt(np.vdot(vec, vec).real))
        if nrm <= 0.0:
            raise NumericalFailureError("basis completion failed")
        u[:, slot] = vec / nrm
        have.append(slot)


def _jacobi_sweeps(work: np.ndarray, v: np.ndarray | None) -> None:
    """Orthogonalize the columns of `work` in place by plane rotations.

    When `v` is given, the same rotations accumulate into it (its columns
    become the right singular vectors). Convergence requires a full sweep
    with no rotation above the pairwise relative threshold and an
    off-diagonal Gram mass below OFF_DIAG_TOL * ||A||_F^2.
    """
    n = work.shape[1]
    norms2 = [float(np.vdot(work[:, i], work[:, i]).real) for i in range(n)]
    scale = sum(norms2)
    converged = scale == 0.0 or n == 1
    sweeps = 0
    while not converged:
        sweeps += 1
        if sweeps > MAX_SWEEPS:
            raise NumericalFailureError(
                f"Jacobi SVD did not converge after {MAX_SWEEPS} sweeps", sweeps=MAX_SWEEPS
            )
        off2 = 0.0
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                p = work[:, i]
                q = work[:, j]
                apq = complex(np.vdot(p, q))
                r = abs(apq)
                off2 += 2.0 * r * r
                if r == 0.0:
                    continue
                app = norms2[i]
                aqq = norms2[j]
                if r <= _PAIR_TOL * np.sqrt(app * aqq):
                    continue
                if 2.0 * r <= _EPS * abs(aqq - app):
                    # rotation angle below machine significance (one column is
                    # rounding residue of a rank-deficient input); treat as done
                    continue
                rotated = True
                phase = apq / r
                tau = (aqq - app) / (2.0 * r)
                root = abs(tau) + np.sqrt(1.0 + tau * tau)
                t = 1.0 / root if tau >= 0.0 else -1.0 / root
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                qc = np.conj(phase) * q
                pnew = c * p - s * qc
                qnew = s * p + c * qc
                work[:, i] = pnew
                work[:, j] = qnew
                norms2[i] = float(np.vdot(pnew, pnew).real)
                norms2[j] = float(np.vdot(qnew, qnew).real)
                if v is not None:
                    vp = v[:, i]
                    vq = np.conj(phase) * v[:, j]
                    vpn = c * vp - s * vq
                    vqn = s * vp + c * vq
                    v[:, i] = vpn
                    v[:, j] = vqn
        if not rotated and np.sqrt(off2) <= OFF_DIAG_TOL * max(scale, 1e-300):
            converged = True


def _svd_tall(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided Jacobi SVD of a with m >= n. No phase normalization here."""
    m, n = a.shape
    work = a.copy()
    v = np.eye(n, dtype=np.complex128)
    _jacobi_sweeps(work, v)

    norms = np.sqrt(np.sum(np.abs(work) ** 2, axis=0))
    order = np.argsort(-norms, kind="stable")
    s_vals = norms[order]
    v = v[:, order]
    cols = work[:, order]

    u = np.zeros((m, m), dtype=np.complex128)
    cutoff = max(m, n) * _EPS * (s_vals[0] if n > 0 else 0.0)
    filled: list[int] = []
    empty: list[int] = []
    for i in range(n):
        if s_vals[i] > cutoff and s_vals[i] > 0.0:
            u[:, i] = cols[:, i] / s_vals[i]
            filled.append(i)
        else:
            empty.append(i)
    empty.extend(range(n, m))
    if empty:
        _complete_basis(u, filled, empty)
    return u, s_vals, v


def _fix_phases(u: np.ndarray, v: np.ndarray, paired: int) -> None:
    """Rotate singular-vector phases so each left vector's largest entry is real-positive.

    Paired columns co-rotate in v, leaving u @ diag(s) @ v^H unchanged; the
    surplus columns of either factor are normalized independently.
    """
    m = u.shape[1]
    n = v.shape[1]
    for i in range(m):
        k = int(np.argmax(np.abs(u[:, i])))
        entry = u[k, i]
        if abs(entry) > 0.0:
            rot = np.conj(entry) / abs(entry)
            u[:, i] *= rot
            if i < paired:
                v[:, i] *= rot
    for i in range(paired, n):
        k = int(np.argmax(np.abs(v[:, i])))
        entry = v[k, i]
        if abs(entry) > 0.0:
            v[:, i] *= np.conj(entry) / abs(entry)


def svd(a) -> SvdResult:
    """Full SVD with both unitary factors complete.

    Includes the null-space directions of the left factor, which is the
    part the interference-projection step reads. Raises
    NumericalFailureError (carrying the sweep count) if the Jacobi
    iteration does not converge.
    """
    mat = as_matrix(a)
    m, n = mat.shape
    if m >= n:
        u, s_vals, v = _svd_tall(mat)
    else:
        uh, s_vals, vh = _svd_tall(mat.conj().T)
        u, v = vh, uh
    _fix_phases(u, v, paired=min(m, n))
    return SvdResult(u=u, s=s_vals, v=v)


def invert(a) -> np.ndarray:
    """Inverse of a square matrix by Gauss-Jordan elimination with partial pivoting.

    Raises SingularMatrixError when a pivot falls below
    PIVOT_FLOOR * max|a_ij| (the signature of fully correlated precoder rows).
    """
    mat = as_matrix(a)
    n, n2 = mat.shape
    if n != n2:
        raise ValueError(f"matrix must be square, got {mat.shape}")
    amax = float(np.abs(mat).max())
    floor = PIVOT_FLOOR * amax
    aug = np.hstack([mat, np.eye(n, dtype=np.complex128)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[piv, col]) <= floor:
            raise SingularMatrixError(f"pivot {abs(aug[piv, col]):.3e} below floor {floor:.3e}")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(n):
            if row != col and aug[row, col] != 0.0:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, n:]


def singular_values(a) -> np.ndarray:
    """Singular values only (descending), skipping factor accumulation.

    Same Jacobi iteration as svd(), roughly twice as fast; used on hot
    paths that only need a condition gate.
    """
    mat = as_matrix(a)
    if mat.shape[0] < mat.shape[1]:
        mat = mat.conj().T
    work = mat.copy()
    _jacobi_sweeps(work, None)
    norms = np.sqrt(np.sum(np.abs(work) ** 2, axis=0))
    norms[::-1].sort()
    return norms


def condition_estimate(a) -> float:
    """Ratio of extreme singular values of a square matrix.

    Returns COND_SENTINEL when the smallest singular value is zero, so
    callers can gate on a plain float comparison.
    """
    mat = as_matrix(a)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got {mat.shape}")
    s = singular_values(mat)
    if s[-1] <= 0.0:
        return COND_SENTINEL
    return float(min(s[0] / s[-1], COND_SENTINEL))


def singular_value_spread(a) -> float:
    """s_max / s_min for an arbitrary (possibly rectangular) matrix.

    Same sentinel convention as condition_estimate; used to gate stacked
    precoder-row matrices that are wide rather than square.
    """
    s = singular_values(a)
    if s[-1] <= 0.0:
        return COND_SENTINEL
    return float(min(s[0] / s[-1], COND_SENTINEL))


def random_orthonormal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Random matrix with orthonormal columns (Gaussian draw + twice-iterated MGS)."""
    if not 1 <= cols <= rows:
        raise ValueError(f"need 1 <= cols <= rows, got {rows}x{cols}")
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q = np.zeros_like(g)
    for i in range(cols):
        vec = g[:, i]
        for _ in range(2):
            for j in range(i):
                vec = vec - q[:, j] * np.vdot(q[:, j], vec)
        nrm = np.sqrt(np.vdot(vec, vec).real)
        if nrm <= 0.0:
            raise NumericalFailureError("degenerate random draw during orthonormalization")
        q[:, i] = vec / nrm
    return q
