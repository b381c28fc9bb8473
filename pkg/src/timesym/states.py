"""Density matrices (subnormalised allowed), fidelity and conditioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from timesym import linalg as la
from timesym.config import get_tolerances
from timesym.errors import (
    DimensionMismatch,
    InvalidState,
    NotNormalized,
    NotUnitVector,
    ZeroTrace,
)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """PSD operator with ``0 <= trace <= 1``; trace below one means subnormalised."""

    mat: np.ndarray

    def __post_init__(self):
        tol = get_tolerances()
        m = la.as_matrix(self.mat, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise InvalidState(f"density matrix must be square, got {m.shape}")
        defect = la.hermiticity_defect(m)
        if defect > tol.hermiticity_tol:
            raise InvalidState(f"not Hermitian (defect {defect:.3e})", defect=defect)
        m = la.hermitian_part(m)
        neg = la.psd_defect(m)
        if neg > tol.psd_tol:
            raise InvalidState(f"not PSD (min eigenvalue {-neg:.3e})", defect=neg)
        tr = float(np.trace(m).real)
        if tr > 1 + tol.equality_tol:
            raise InvalidState(f"trace {tr!r} exceeds 1", defect=tr - 1)
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def is_normalized(self, tol: float | None = None) -> bool:
        tol = get_tolerances().equality_tol if tol is None else tol
        return abs(self.trace - 1) <= tol

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        v = _unit(psi)
        return cls(np.outer(v, v.conj()))

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, trace={self.trace:.6g})"


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def _unit(psi, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1) > tol:
        raise NotUnitVector(f"vector norm {norm:.12g} is not 1")
    return v


def _require_normalized(rho: DensityMatrix, what: str = "state"):
    if not rho.is_normalized():
        raise NotNormalized(f"{what} has trace {rho.trace:.12g}, expected 1")


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr|sqrt(rho) sqrt(sigma)|)^2`` of two normalised states."""
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions {rho.dim} and {sigma.dim} differ")
    _require_normalized(rho, "rho")
    _require_normalized(sigma, "sigma")
    s = np.linalg.svd(la.matrix_sqrt_psd(rho.mat) @ la.matrix_sqrt_psd(sigma.mat), compute_uv=False)
    return float(min(1.0, np.sum(s) ** 2))


def ray_product(psi, phi) -> float:
    """``|<psi|phi>|`` for unit vectors: the product of the two rays."""
    a, b = _unit(psi), _unit(phi)
    if a.shape != b.shape:
        raise DimensionMismatch("vectors have different lengths")
    return float(min(1.0, abs(np.vdot(a, b))))


def maximally_mixed(d: int) -> DensityMatrix:
    if d < 1:
        raise ValueError("d must be >= 1")
    return DensityMatrix(np.eye(d) / d)


def condition(rho) -> DensityMatrix:
    """Renormalise a subnormalised state, ``rho / Tr rho``."""
    rho = as_density(rho)
    tr = rho.trace
    if tr <= get_tolerances().support_cutoff:
        raise ZeroTrace(f"cannot condition on an event of probability {tr:.3e}")
    return DensityMatrix(rho.mat / tr)


def purify(rho) -> np.ndarray:
    """Purification ``sum_i sqrt(l_i) v_i (x) e_i`` with the ancilla as second factor.

    Eigenvectors are phase-fixed (first non-negligible entry real positive) so the
    output is deterministic.
    """
    rho = as_density(rho)
    _require_normalized(rho)
    w, v = la.hermitian_eig(rho.mat)
    d = rho.dim
    out = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        vi = la.fix_phase(v[:, i], tol=1e-9)
        out += np.sqrt(max(w[i], 0.0)) * np.kron(vi, np.eye(d)[i])
    return out / np.linalg.norm(out)


def random_density(d: int, seed) -> DensityMatrix:
    """``G G^dagger / Tr`` from a square complex Ginibre ``G`` (full rank almost surely)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    g = la.ginibre(d, d, la.rng_from(seed))
    m = g @ la.dagger(g)
    return DensityMatrix(m / np.trace(m).real)


def random_pure(d: int, seed) -> np.ndarray:
    g = la.ginibre(d, 1, la.rng_from(seed)).reshape(-1)
    return g / np.linalg.norm(g)
