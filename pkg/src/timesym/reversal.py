"""Time-reversal transforms of quantum operations.

Linear ones (double transpose, the scaled adjoint/transpose on time-symmetric
operations, the weak adjoint) and state-dependent ones built from the Petz
recovery map. Every output records which transform produced it in
``provenance``.
"""

from __future__ import annotations

import numpy as np

from timesym import linalg as la
from timesym.config import get_tolerances
from timesym.errors import (
    DimensionMismatch,
    NotChannel,
    NotComplementary,
    NotNormalized,
    NotTimeSymmetric,
    SupportMismatch,
)
from timesym.operations import (
    CPMap,
    LinearMap,
    QuantumOperation,
    _require_cp,
    adjoint_map,
    apply_map,
    cp_map_from_kraus,
    tp_defect,
    transpose_map,
    ts_defects,
)
from timesym.states import DensityMatrix, as_density


def double_transpose(q: LinearMap) -> CPMap:
    """``tau_out o Q o tau_in``: Kraus operators conjugated, Choi matrix transposed."""
    _require_cp(q)
    cls = type(q) if isinstance(q, CPMap) else CPMap
    return cls(q.d_in, q.d_out, q.choi.T, {"transform": "double-transpose"})


def _require_ts(q: LinearMap):
    _require_cp(q)
    d_in, d_out = ts_defects(q)
    tol = get_tolerances().psd_tol
    if d_in > tol or d_out > tol:
        raise NotTimeSymmetric(
            "not a time-symmetric operation "
            f"(Q^dagger(I) excess {d_in:.3e}, Q(I/d_in) excess over I/d_out {d_out:.3e}); "
            "outside this set the scaled reversal can leave the set of quantum operations",
            defect_in=d_in,
            defect_out=d_out,
        )


def theta_scaled(q: LinearMap) -> QuantumOperation:
    """``Q -> (d_out/d_in) Q^dagger`` on time-symmetric operations."""
    _require_ts(q)
    r = adjoint_map(q)
    return QuantumOperation(r.d_in, r.d_out, r.choi * (q.d_out / q.d_in), {"transform": "theta"})


def theta_prime_scaled(q: LinearMap) -> QuantumOperation:
    """``Q -> (d_out/d_in) Q^T`` on time-symmetric operations."""
    _require_ts(q)
    r = transpose_map(q)
    return QuantumOperation(r.d_in, r.d_out, r.choi * (q.d_out / q.d_in), {"transform": "theta-prime"})


def weak_adjoint(q: LinearMap) -> QuantumOperation:
    """``Q -> Q^dagger / d_in``. Defined on every operation, but not onto."""
    _require_cp(q)
    r = adjoint_map(q)
    return QuantumOperation(r.d_in, r.d_out, r.choi / q.d_in, {"transform": "weak-adjoint"})


# ---------------------------------------------------------------------------
# Petz-type reversals


def _check_reference(omega, dim: int, label: str) -> DensityMatrix:
    omega = as_density(omega)
    if omega.dim != dim:
        raise DimensionMismatch(f"{label} has dimension {omega.dim}, expected {dim}")
    if not omega.is_normalized():
        raise NotNormalized(f"{label} must be normalised (trace {omega.trace:.12g})")
    return omega


def _support_excess(sigma: np.ndarray, omega: np.ndarray) -> float:
    """Weight of ``sigma`` outside the support of ``omega``."""
    proj = la.support_projector(omega)
    off = np.eye(omega.shape[0]) - proj
    return float(np.trace(off @ sigma @ off).real)


def _petz_kraus(q: LinearMap, omega_a: np.ndarray, omega_b: np.ndarray, transpose: bool) -> list:
    a_half = la.matrix_sqrt_psd(omega_a)
    b_inv_half = la.support_pinv_sqrt(omega_b)
    return [a_half @ (k.T if transpose else la.dagger(k)) @ b_inv_half for k in q.kraus()]


def _checked_references(q: LinearMap, omega_a, omega_b) -> tuple[DensityMatrix, DensityMatrix]:
    _require_cp(q)
    wa = _check_reference(omega_a, q.d_in, "omega_A")
    wb = _check_reference(omega_b, q.d_out, "omega_B")
    excess = _support_excess(la.hermitian_part(apply_map(q, wa.mat)), wb.mat)
    _support_guard(excess)
    return wa, wb


def petz_reversal(q: LinearMap, omega_a, omega_b) -> CPMap:
    """``rho -> omega_A^(1/2) Q^dagger(omega_B^(-1/2) rho omega_B^(-1/2)) omega_A^(1/2)``.

    ``omega_B^(-1/2)`` is taken on the support of ``omega_B``; input components
    outside that support are annihilated.
    """
    wa, wb = _checked_references(q, omega_a, omega_b)
    ops = _petz_kraus(q, wa.mat, wb.mat, transpose=False)
    return cp_map_from_kraus(ops, {"transform": "petz", "omega_A": wa.mat, "omega_B": wb.mat})


def petz_reversal_transpose(q: LinearMap, omega_a, omega_b) -> CPMap:
    """As :func:`petz_reversal` with ``Q^T`` in place of ``Q^dagger`` and conjugated reference states."""
    wa, wb = _checked_references(q, omega_a, omega_b)
    ops = _petz_kraus(q, np.conj(wa.mat), np.conj(wb.mat), transpose=True)
    return cp_map_from_kraus(ops, {"transform": "petz-transpose", "omega_A": wa.mat, "omega_B": wb.mat})


def _support_guard(excess: float):
    if excess > get_tolerances().equality_tol:
        raise SupportMismatch(
            f"Q(omega_A) has weight {excess:.3e} outside the support of omega_B", excess=excess
        )


def _require_channel(c: LinearMap, label: str = "channel"):
    _require_cp(c)
    defect = tp_defect(c)
    if defect > get_tolerances().equality_tol:
        raise NotChannel(f"{label} is not trace-preserving (defect {defect:.3e})", defect=defect)


def crooks_reversal(c: LinearMap, rho0) -> CPMap:
    """State-dependent reversal ``rho0^(1/2) C^dagger(C(rho0)^(-1/2) rho C(rho0)^(-1/2)) rho0^(1/2)``.

    Trace-preserving on the support of ``C(rho0)`` and sends ``C(rho0)`` back to ``rho0``.
    """
    _require_channel(c)
    r0 = _check_reference(rho0, c.d_in, "rho0")
    out = la.hermitian_part(apply_map(c, r0.mat))
    r = petz_reversal(c, r0, out)
    return CPMap(r.d_in, r.d_out, r.choi, {"transform": "crooks", "rho0": r0.mat})


def crooks_reversal_operation(q: LinearMap, c0: LinearMap, rho0) -> QuantumOperation:
    """Reversal of an operation ``q`` completed to the channel ``c0 = q + q'``.

    Uses the Petz map of ``q`` with reference states ``rho0`` and ``c0(rho0)``;
    the result is dominated by ``crooks_reversal(c0, rho0)`` in CP order.
    """
    _require_cp(q)
    _require_channel(c0, "c0")
    if (q.d_in, q.d_out) != (c0.d_in, c0.d_out):
        raise DimensionMismatch("q and c0 act between different spaces")
    complement_defect = la.psd_defect(c0.choi - q.choi)
    if complement_defect > get_tolerances().psd_tol:
        raise NotComplementary(
            f"c0 - q is not completely positive (eigenvalue {-complement_defect:.3e})",
            defect=complement_defect,
        )
    r0 = _check_reference(rho0, q.d_in, "rho0")
    out = la.hermitian_part(apply_map(c0, r0.mat))
    r = petz_reversal(q, r0, out)
    return QuantumOperation(r.d_in, r.d_out, r.choi, {"transform": "crooks-operation", "rho0": r0.mat})


TRANSFORMS = {
    "double-transpose": double_transpose,
    "theta": theta_scaled,
    "theta-prime": theta_prime_scaled,
    "weak-adjoint": weak_adjoint,
}

