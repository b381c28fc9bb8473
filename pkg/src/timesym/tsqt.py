"""Time-symmetric operations, instruments and their realisation by conditioning.

A quantum operation ``Q`` is time-symmetric when ``Q^dagger(I_out) <= I_in``
and ``Q(I_in/d_in) <= I_out/d_out``; a time-symmetric channel satisfies both
with equality (for ``d_in == d_out`` these are the bistochastic channels).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from timesym import linalg as la
from timesym.config import get_tolerances
from timesym.errors import (
    DimensionMismatch,
    EmptyInstrument,
    Incomplete,
    InvariantViolation,
    NotComplete,
    NotNormalizedPOVM,
    NotOrthogonal,
    NotOrthonormal,
    NotProjector,
    NotPSDEffect,
)
from timesym.operations import (
    Instrument,
    LinearMap,
    QuantumOperation,
    choi_from_kraus,
    compose,
    ts_defects,
    ts_equality_defects,
    unitary_channel,
)
from timesym.states import DensityMatrix, _unit, as_density, random_density


@dataclass(frozen=True)
class TSReport:
    is_ts_operation: bool
    is_ts_channel: bool
    defect_in: float
    defect_out: float
    equality_in: float
    equality_out: float

    def __bool__(self):
        return self.is_ts_operation


def ts_classify(q: LinearMap) -> TSReport:
    """Both time-symmetry inequalities, and whether they hold with equality."""
    tol = get_tolerances()
    d_in, d_out = ts_defects(q)
    e_in, e_out = ts_equality_defects(q)
    is_op = d_in <= tol.psd_tol and d_out <= tol.psd_tol
    return TSReport(
        is_ts_operation=is_op,
        is_ts_channel=is_op and e_in <= tol.equality_tol and e_out <= tol.equality_tol,
        defect_in=d_in,
        defect_out=d_out,
        equality_in=e_in,
        equality_out=e_out,
    )


@dataclass(frozen=True)
class TSInstrumentReport:
    valid: bool
    branch_reports: tuple
    total_report: TSReport

    @property
    def defective_branches(self) -> list[int]:
        return [n for n, r in enumerate(self.branch_reports) if not r.is_ts_operation]

    def __bool__(self):
        return self.valid


def validate_ts_instrument(inst: Instrument) -> TSInstrumentReport:
    """Every branch a time-symmetric operation and the sum a time-symmetric channel."""
    if not len(inst.branches):
        raise EmptyInstrument("an instrument needs at least one branch")
    branches = tuple(ts_classify(b) for b in inst.branches)
    total = ts_classify(inst.total())
    valid = all(r.is_ts_operation for r in branches) and total.is_ts_channel
    return TSInstrumentReport(valid, branches, total)


# ---------------------------------------------------------------------------
# measurement constructors


def von_neumann_instrument(basis) -> Instrument:
    """Branches ``rho -> |n><n| rho |n><n|`` for an orthonormal basis ``(|n>)``."""
    vecs = np.array([np.asarray(v, dtype=np.complex128).reshape(-1) for v in basis])
    if vecs.ndim != 2 or vecs.shape[0] == 0:
        raise EmptyInstrument("an instrument needs at least one basis vector")
    n, d = vecs.shape
    gram_defect = float(np.abs(np.conj(vecs) @ vecs.T - np.eye(n)).max())
    if gram_defect > 1e-9:
        raise NotOrthonormal(f"vectors are not orthonormal (Gram defect {gram_defect:.3e})", defect=gram_defect)
    if n != d:
        raise Incomplete(f"{n} vectors cannot span dimension {d}")
    return Instrument(tuple(choi_from_kraus([np.outer(v, v.conj())]) for v in vecs))


def luders_instrument(projectors) -> Instrument:
    """Branches ``rho -> P_n rho P_n`` for a complete family of orthogonal projectors."""
    ps = [la.as_matrix(p, "projector") for p in projectors]
    if not ps:
        raise EmptyInstrument("an instrument needs at least one projector")
    d = ps[0].shape[0]
    for n, p in enumerate(ps):
        if p.shape != (d, d):
            raise DimensionMismatch(f"projector {n} has shape {p.shape}, expected {(d, d)}")
        defect = max(la.hermiticity_defect(p), float(np.linalg.norm(p @ p - p)))
        if defect > 1e-9:
            raise NotProjector(f"matrix {n} is not a Hermitian idempotent (defect {defect:.3e})", index=n)
    for a in range(len(ps)):
        for b in range(a + 1, len(ps)):
            overlap = float(np.linalg.norm(ps[a] @ ps[b]))
            if overlap > 1e-9:
                raise NotOrthogonal(f"projectors {a} and {b} overlap ({overlap:.3e})", pair=(a, b))
    gap = float(np.linalg.norm(sum(ps) - np.eye(d)))
    if gap > 1e-9:
        raise NotComplete(f"projectors do not sum to the identity (defect {gap:.3e})", defect=gap)
    return Instrument(tuple(choi_from_kraus([p]) for p in ps))


def sequential_instrument(first: Instrument, second: Instrument) -> Instrument:
    """``second`` after ``first``; outcome ``(m, n)`` is branch ``m * len(second) + n``."""
    return Instrument(tuple(compose(b, a) for a in first.branches for b in second.branches))


def unitary_instrument(u) -> Instrument:
    return Instrument((unitary_channel(u),))


def povm_to_ts_operations(effects) -> list[QuantumOperation]:
    """Demolition measurement ``rho -> Tr[P_n rho]`` as operations with one-dimensional output.

    The Choi matrix of ``rho -> Tr[P rho]`` is ``P^T``.
    """
    es = [la.as_matrix(e, "effect") for e in effects]
    if not es:
        raise EmptyInstrument("a POVM needs at least one effect")
    d = es[0].shape[0]
    tol = get_tolerances()
    for n, e in enumerate(es):
        if e.shape != (d, d):
            raise DimensionMismatch(f"effect {n} has shape {e.shape}, expected {(d, d)}")
        herm = la.hermiticity_defect(e)
        w = np.linalg.eigvalsh(la.hermitian_part(e))
        if herm > tol.hermiticity_tol or w[0] < -tol.psd_tol or w[-1] > 1 + tol.psd_tol:
            raise NotPSDEffect(
                f"effect {n} is not between 0 and I (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])", index=n
            )
    gap = float(np.linalg.norm(sum(es) - np.eye(d)))
    if gap > tol.equality_tol:
        raise NotNormalizedPOVM(f"effects sum to the identity only within {gap:.3e}", defect=gap)
    return [QuantumOperation(d, 1, la.hermitian_part(e).T, {"povm_effect": n}) for n, e in enumerate(es)]


# ---------------------------------------------------------------------------
# preparations and conditioning


def max_prep_probability(psi, d: int) -> float:
    """Largest ``p`` with ``p |psi><psi| <= I/d``, i.e. ``1/d``."""
    v = _unit(psi)
    if v.size != d:
        raise DimensionMismatch(f"vector of length {v.size} in dimension {d}")
    return 1.0 / d


def max_prep_probability_state(rho) -> float:
    """Largest ``p`` with ``p * rho_hat <= I/d`` for the normalised direction ``rho_hat`` of ``rho``."""
    rho = as_density(rho)
    tr = rho.trace
    if tr <= get_tolerances().support_cutoff:
        raise ValueError("the zero operator has no direction")
    top = float(np.linalg.eigvalsh(rho.mat / tr)[-1])
    return min(1.0, 1.0 / (rho.dim * top))


@dataclass(frozen=True, eq=False)
class Dilation:
    """``Q(rho) = Tr_aux'[(I_out (x) P) U (rho (x) |psi0><psi0|) U^dagger]``.

    ``U`` maps ``H_in (x) H_aux`` onto ``H_out (x) H_aux'``; ``aux_dims`` is
    ``(dim H_aux, dim H_aux')``.
    """

    u: np.ndarray
    psi0: np.ndarray
    p_effect: np.ndarray
    aux_dims: tuple
    d_in: int
    d_out: int

    def apply(self, rho) -> np.ndarray:
        _, b = self.aux_dims
        x = self.u @ np.kron(np.asarray(rho, dtype=np.complex128), np.outer(self.psi0, self.psi0.conj())) @ la.dagger(self.u)
        x = np.kron(np.eye(self.d_out), self.p_effect) @ x
        return la.partial_trace(x, self.d_out, b, keep="A")

    def realized_choi(self) -> np.ndarray:
        d = self.d_in
        c = np.zeros((self.d_out * d, self.d_out * d), dtype=np.complex128)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=np.complex128)
                e[i, j] = 1.0
                c += np.kron(self.apply(e), e)
        return c


def _complement_kraus(q: LinearMap, ops: list[np.ndarray]) -> list[np.ndarray]:
    """Operators ``R_j: H_in -> H_out`` with ``sum R_j^dagger R_j = I - sum K^dagger K``.

    ``R_j`` is the ``j``-th block of ``d_out`` rows of ``sqrt(I - sum K^dagger K)``,
    with eigenvalues below ``support_cutoff`` treated as zero (so a channel gets no complement).
    """
    deficit = la.hermitian_part(np.eye(q.d_in) - sum(la.dagger(k) @ k for k in ops))
    w, v = np.linalg.eigh(deficit)
    keep = w > get_tolerances().support_cutoff
    if not keep.any():
        return []
    root = (v[:, keep] * np.sqrt(w[keep])) @ la.dagger(v[:, keep])
    blocks = -(-q.d_in // q.d_out)
    padded = np.zeros((blocks * q.d_out, q.d_in), dtype=np.complex128)
    padded[: q.d_in] = root
    return [padded[j * q.d_out:(j + 1) * q.d_out] for j in range(blocks)]


def realize_via_dilation(q: LinearMap) -> Dilation:
    """Unitary, ancilla state and ancilla effect reproducing ``q`` after conditioning.

    The Kraus operators of ``q`` are completed to a channel, stacked into an
    isometry ``H_in -> H_out (x) C^L``, and the isometry is extended to a
    unitary. ``P`` projects onto the labels of ``q``'s own Kraus operators.
    """
    if not isinstance(q, QuantumOperation):
        q = QuantumOperation(q.d_in, q.d_out, q.choi, q.provenance)
    ops = q.kraus()
    allops = ops + _complement_kraus(q, ops)
    labels = len(allops)
    while (q.d_out * labels) % q.d_in:
        labels += 1
    d_aux = q.d_out * labels // q.d_in
    iso = np.zeros((q.d_out, labels, q.d_in), dtype=np.complex128)
    iso[:, : len(allops), :] = np.stack(allops, axis=1)
    iso = iso.reshape(q.d_out * labels, q.d_in)
    full, _ = np.linalg.qr(iso, mode="complete")
    n = q.d_out * labels
    u = np.zeros((n, n), dtype=np.complex128)
    first = np.arange(q.d_in) * d_aux
    u[:, first] = iso
    rest = np.setdiff1d(np.arange(n), first)
    u[:, rest] = full[:, q.d_in:]
    psi0 = np.zeros(d_aux, dtype=np.complex128)
    psi0[0] = 1.0
    p = np.diag((np.arange(labels) < len(ops)).astype(np.complex128))
    dil = Dilation(u, psi0, p, (d_aux, labels), q.d_in, q.d_out)
    err = float(np.linalg.norm(dil.realized_choi() - q.choi))
    if err > 1e-7 or not la.is_unitary(u, 1e-9):
        raise InvariantViolation(f"dilation reproduces the operation only within {err:.3e}", error=err)
    return dil


def unitary_twirl_fixed_state(d: int, n_samples: int, seed, rho=None) -> tuple[DensityMatrix, float]:
    """Monte-Carlo average of ``U rho U^dagger`` over Haar ``U`` and its distance to ``I/d``.

    ``rho`` defaults to a random state drawn from the same generator.
    """
    if d < 2 or n_samples < 1:
        raise ValueError("need d >= 2 and at least one sample")
    rng = la.rng_from(seed)
    rho = random_density(d, rng) if rho is None else as_density(rho)
    if rho.dim != d:
        raise DimensionMismatch(f"state of dimension {rho.dim}, expected {d}")
    acc = np.zeros((d, d), dtype=np.complex128)
    for _ in range(n_samples):
        u = la.haar_random_unitary(d, rng)
        acc += u @ rho.mat @ la.dagger(u)
    twirled = la.hermitian_part(acc / max(n_samples, 1))
    return DensityMatrix(twirled), float(np.linalg.norm(twirled - np.eye(d) / d))
