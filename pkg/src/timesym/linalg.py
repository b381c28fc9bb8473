"""Dense complex linear algebra with explicit tolerances.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Tensor products
are ordered ``first (x) second`` throughout; for Choi matrices this means
``H_out (x) H_in``.
"""

from __future__ import annotations

import numpy as np

from timesym.config import get_tolerances
from timesym.errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NonSquare,
    NotHermitian,
    NotPSD,
)


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array (a read-only copy is not made)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + dagger(m)) / 2


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - dagger(m)))


def _checked_hermitian(m, tol: float | None) -> np.ndarray:
    a = _square(m)
    tol = get_tolerances().hermiticity_tol if tol is None else tol
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds {tol:.1e}", defect=defect)
    return hermitian_part(a)


def hermitian_eig(m, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, V)`` with ``m ~= V @ diag(w) @ V^dagger``.
    """
    h = _checked_hermitian(m, tol)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def min_eigenvalue(m, tol: float | None = None) -> float:
    return float(np.linalg.eigvalsh(_checked_hermitian(m, tol))[0])


def is_psd(m, tol: float | None = None) -> bool:
    """True iff ``m`` is Hermitian within ``tol`` and its least eigenvalue is >= ``-tol``."""
    tols = get_tolerances()
    psd_tol = tols.psd_tol if tol is None else tol
    herm_tol = tols.hermiticity_tol if tol is None else tol
    return min_eigenvalue(m, herm_tol) >= -psd_tol


def psd_defect(m) -> float:
    """How far ``m`` is from PSD: ``max(0, -lambda_min)`` of its Hermitian part."""
    a = _square(m)
    return max(0.0, -float(np.linalg.eigvalsh(hermitian_part(a))[0]))


def _psd_eig(m, tol: float | None) -> tuple[np.ndarray, np.ndarray]:
    psd_tol = get_tolerances().psd_tol if tol is None else tol
    w, v = hermitian_eig(m, tol)
    if w[-1] < -psd_tol:
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3e} below -{psd_tol:.1e}", min_eigenvalue=w[-1])
    return w, v


def _from_eig(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v * w) @ dagger(v)


def matrix_sqrt_psd(m, tol: float | None = None) -> np.ndarray:
    """Principal square root of a PSD matrix; slightly negative eigenvalues are clipped to 0."""
    w, v = _psd_eig(m, tol)
    return _from_eig(np.sqrt(np.clip(w, 0.0, None)), v)


def support_pinv_sqrt(m, cutoff: float | None = None, tol: float | None = None) -> np.ndarray:
    """``m^(-1/2)`` on the support of ``m``: eigenvalues below ``cutoff`` map to 0."""
    cutoff = get_tolerances().support_cutoff if cutoff is None else cutoff
    w, v = _psd_eig(m, tol)
    inv = np.zeros_like(w)
    keep = w >= cutoff
    inv[keep] = w[keep] ** -0.5
    return _from_eig(inv, v)


def support_projector(m, cutoff: float | None = None, tol: float | None = None) -> np.ndarray:
    cutoff = get_tolerances().support_cutoff if cutoff is None else cutoff
    w, v = _psd_eig(m, tol)
    return _from_eig((w >= cutoff).astype(float), v)


def partial_trace(m, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    """Partial trace of an operator on ``H_a (x) H_b``; ``keep`` is ``"A"`` or ``"B"``."""
    a = _square(m)
    if a.shape[0] != dim_a * dim_b:
        raise DimensionMismatch(f"matrix of size {a.shape[0]} is not {dim_a}x{dim_b}")
    t = a.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep.upper() == "A":
        return np.einsum("ikjk->ij", t)
    if keep.upper() == "B":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def swap_operator(dim_a: int, dim_b: int) -> np.ndarray:
    """Permutation ``H_a (x) H_b -> H_b (x) H_a`` with ``u (x) v -> v (x) u``."""
    if dim_a < 1 or dim_b < 1:
        raise ValueError("dimensions must be positive")
    n = dim_a * dim_b
    s = np.zeros((n, n), dtype=np.complex128)
    for i in range(dim_a):
        for j in range(dim_b):
            s[j * dim_a + i, i * dim_b + j] = 1.0
    return s


def transpose_permutation(d: int) -> np.ndarray:
    """Matrix ``P`` with ``P @ vec(X) = vec(X.T)`` for row-major vectorisation of d x d matrices."""
    return swap_operator(d, d)


def rng_from(seed) -> np.random.Generator:
    """PCG64 generator (numpy's ``default_rng``) from an int seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed or Generator is required")
    return np.random.default_rng(seed)


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_random_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary: QR of a complex Ginibre matrix, R's diagonal made positive."""
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = rng_from(seed)
    q, r = np.linalg.qr(ginibre(d, d, rng))
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases


def vec_identity(d: int) -> np.ndarray:
    """Unnormalised ``sum_m |m> (x) |m>`` as a ``d^2 x 1`` column."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return np.eye(d, dtype=np.complex128).reshape(d * d, 1)


def fix_phase(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Multiply by a global phase so the first entry (row-major) with modulus > tol is real positive."""
    flat = m.reshape(-1)
    idx = np.flatnonzero(np.abs(flat) > tol)
    if idx.size == 0:
        return m
    z = flat[idx[0]]
    return m * (np.conj(z) / abs(z))


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]))) <= tol


def opnorm(m: np.ndarray) -> float:
    """Spectral norm."""
    return float(np.linalg.norm(m, 2)) if m.size else 0.0
