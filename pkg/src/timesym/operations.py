"""Linear maps between operator spaces, stored by their Choi matrix.

``Choi(M) = sum_ij M(|i><j|) (x) |i><j|`` on ``H_out (x) H_in``. Reshaped to
four indices the Choi matrix reads ``C[a, i, b, j] = M(|i><j|)[a, b]``, which
is what most routines below work with.

Three record types, from least to most constrained:

* :class:`LinearMap`  any linear map (e.g. the transpose map, which is not CP)
* :class:`CPMap`      completely positive (Choi PSD), possibly trace-increasing
* :class:`QuantumOperation`  CP and trace-non-increasing
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from timesym import linalg as la
from timesym.config import get_tolerances
from timesym.errors import (
    DimensionMismatch,
    EmptyInstrument,
    InvalidInstrument,
    InvalidKraus,
    NotCP,
    NotTraceNonIncreasing,
    ZeroTrace,
)
from timesym.states import DensityMatrix, as_density, condition


# ---------------------------------------------------------------------------
# record types


@dataclass(frozen=True, eq=False)
class LinearMap:
    d_in: int
    d_out: int
    choi: np.ndarray
    provenance: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.d_in < 1 or self.d_out < 1:
            raise DimensionMismatch("dimensions must be positive")
        c = la.as_matrix(self.choi, "choi")
        n = self.d_in * self.d_out
        if c.shape != (n, n):
            raise DimensionMismatch(
                f"choi of shape {c.shape} does not match d_out*d_in = {self.d_out}*{self.d_in}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "choi", c)
        object.__setattr__(self, "provenance", dict(self.provenance))
        self._validate()

    def _validate(self):
        pass

    # -- views ---------------------------------------------------------------
    @property
    def choi4(self) -> np.ndarray:
        """Choi matrix as ``C[a, i, b, j]`` (out, in, out, in)."""
        return self.choi.reshape(self.d_out, self.d_in, self.d_out, self.d_in)

    def __call__(self, x) -> np.ndarray:
        return apply_map(self, x)

    def trace_out(self) -> np.ndarray:
        """``Tr_out Choi``, equal to ``(sum_k K_k^dagger K_k)^T`` for CP maps."""
        return np.einsum("aiaj->ij", self.choi4)

    # -- linear structure ----------------------------------------------------
    def _same_dims(self, other: "LinearMap"):
        if (self.d_in, self.d_out) != (other.d_in, other.d_out):
            raise DimensionMismatch("maps act between different spaces")

    def __add__(self, other: "LinearMap") -> "LinearMap":
        self._same_dims(other)
        return promote(self.d_in, self.d_out, self.choi + other.choi)

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        self._same_dims(other)
        return promote(self.d_in, self.d_out, self.choi - other.choi)

    def __mul__(self, c) -> "LinearMap":
        return promote(self.d_in, self.d_out, np.asarray(c) * self.choi)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "LinearMap":
        return self * (1 / c)

    def allclose(self, other: "LinearMap", atol: float = 1e-9) -> bool:
        return (self.d_in, self.d_out) == (other.d_in, other.d_out) and distance(self, other) <= atol

    def __repr__(self):
        return f"{type(self).__name__}(d_in={self.d_in}, d_out={self.d_out})"


@dataclass(frozen=True, eq=False, repr=False)
class CPMap(LinearMap):
    """Completely positive map with no normalisation constraint."""

    def _validate(self):
        tol = get_tolerances()
        herm = la.hermiticity_defect(self.choi)
        if herm > tol.hermiticity_tol:
            raise NotCP(f"choi is not Hermitian (defect {herm:.3e})", defect=herm)
        neg = la.psd_defect(self.choi)
        if neg > tol.psd_tol:
            raise NotCP(f"choi has eigenvalue {-neg:.3e} < 0", defect=neg)

    def kraus(self) -> list[np.ndarray]:
        return _kraus_ops(self)

    def as_operation(self) -> "QuantumOperation":
        return QuantumOperation(self.d_in, self.d_out, self.choi, self.provenance)


@dataclass(frozen=True, eq=False, repr=False)
class QuantumOperation(CPMap):
    """Completely positive, trace-non-increasing map."""

    def _validate(self):
        super()._validate()
        excess = tni_defect(self)
        if excess > get_tolerances().psd_tol:
            raise NotTraceNonIncreasing(
                f"Tr_out(choi) exceeds the identity by {excess:.3e}", defect=excess
            )

    @classmethod
    def from_kraus(cls, kraus_ops, provenance=None) -> "QuantumOperation":
        op = choi_from_kraus(kraus_ops)
        return op if provenance is None else cls(op.d_in, op.d_out, op.choi, provenance)


def promote(d_in: int, d_out: int, choi, provenance=None) -> LinearMap:
    """The most constrained record type that ``choi`` satisfies."""
    prov = provenance or {}
    for cls in (QuantumOperation, CPMap):
        try:
            return cls(d_in, d_out, choi, prov)
        except (NotCP, NotTraceNonIncreasing):
            continue
    return LinearMap(d_in, d_out, choi, prov)


def with_provenance(q: LinearMap, **prov) -> LinearMap:
    merged = {**q.provenance, **prov}
    return type(q)(q.d_in, q.d_out, q.choi, merged)


def distance(a: LinearMap, b: LinearMap) -> float:
    """Frobenius distance between Choi matrices."""
    return float(np.linalg.norm(a.choi - b.choi))


def tni_defect(q: LinearMap) -> float:
    """``max(0, lambda_max(Tr_out Choi - I))``; zero iff trace-non-increasing."""
    m = la.hermitian_part(q.trace_out()) - np.eye(q.d_in)
    return max(0.0, float(np.linalg.eigvalsh(m)[-1]))


def tp_defect(q: LinearMap) -> float:
    return la.opnorm(q.trace_out() - np.eye(q.d_in))


# ---------------------------------------------------------------------------
# Kraus form


@dataclass(frozen=True, eq=False)
class KrausForm:
    d_in: int
    d_out: int
    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(la.as_matrix(k, "Kraus operator") for k in self.kraus_ops)
        if not ops:
            raise InvalidKraus("a Kraus form needs at least one operator")
        for k in ops:
            if k.shape != (self.d_out, self.d_in):
                raise InvalidKraus(f"Kraus operator of shape {k.shape}, expected {(self.d_out, self.d_in)}")
        object.__setattr__(self, "kraus_ops", ops)
        s = sum(la.dagger(k) @ k for k in ops)
        excess = float(np.linalg.eigvalsh(la.hermitian_part(s) - np.eye(self.d_in))[-1])
        if excess > get_tolerances().psd_tol:
            raise InvalidKraus(f"sum K^dagger K exceeds the identity by {excess:.3e}", defect=excess)

    @classmethod
    def of(cls, ops: Sequence) -> "KrausForm":
        ops = [la.as_matrix(k) for k in ops]
        if not ops:
            raise InvalidKraus("a Kraus form needs at least one operator")
        d_out, d_in = ops[0].shape
        return cls(d_in, d_out, tuple(ops))


def _choi_of_kraus_list(ops: Sequence[np.ndarray]) -> np.ndarray:
    # vec_r(K) = (K (x) I)|I>> ; Choi = sum vec_r(K) vec_r(K)^dagger
    vs = np.stack([np.asarray(k, dtype=np.complex128).reshape(-1) for k in ops], axis=1)
    return vs @ la.dagger(vs)


def choi_from_kraus(k) -> QuantumOperation:
    """Choi matrix ``sum_i (K_i (x) I)|I>><<I|(K_i (x) I)^dagger`` of a Kraus form."""
    if not isinstance(k, KrausForm):
        k = KrausForm.of(k)
    return QuantumOperation(k.d_in, k.d_out, _choi_of_kraus_list(k.kraus_ops))


def cp_map_from_kraus(ops: Sequence, provenance=None) -> CPMap:
    """CP map from arbitrary Kraus operators (no normalisation check)."""
    ops = [la.as_matrix(k) for k in ops]
    d_out, d_in = ops[0].shape
    return CPMap(d_in, d_out, _choi_of_kraus_list(ops), provenance or {})


def _kraus_ops(q: LinearMap) -> list[np.ndarray]:
    cutoff = get_tolerances().support_cutoff
    w, v = la.hermitian_eig(q.choi)
    if w[-1] < -get_tolerances().psd_tol:
        raise NotCP(f"choi has eigenvalue {w[-1]:.3e} < 0")
    ops = [np.sqrt(w[i]) * v[:, i].reshape(q.d_out, q.d_in) for i in range(len(w)) if w[i] > cutoff]
    if not ops:
        ops = [np.zeros((q.d_out, q.d_in), dtype=np.complex128)]
    return ops


def kraus_from_choi(q: LinearMap) -> KrausForm:
    """Kraus operators from the eigen-decomposition of the Choi matrix.

    Eigenvalues at or below ``support_cutoff`` are dropped, so the number of
    operators equals the numerical rank of the Choi matrix.
    """
    return KrausForm(q.d_in, q.d_out, tuple(_kraus_ops(q)))


# ---------------------------------------------------------------------------
# action and algebra


def apply_map(q: LinearMap, x) -> np.ndarray:
    """``q(x)`` for any operator ``x`` on ``H_in``."""
    x = la.as_matrix(x)
    if x.shape != (q.d_in, q.d_in):
        raise DimensionMismatch(f"operator of shape {x.shape} does not act on dimension {q.d_in}")
    return np.einsum("aibj,ij->ab", q.choi4, x)


def apply(q: LinearMap, rho) -> DensityMatrix:
    """Output state ``Tr_in[Choi (I (x) rho^T)]``, possibly subnormalised."""
    rho = as_density(rho)
    return DensityMatrix(apply_map(q, rho.mat))


def compose(second: LinearMap, first: LinearMap) -> LinearMap:
    """``second o first``."""
    if first.d_out != second.d_in:
        raise DimensionMismatch(f"first outputs dimension {first.d_out}, second expects {second.d_in}")
    c = np.einsum("akbl,kilj->aibj", second.choi4, first.choi4)
    n = second.d_out * first.d_in
    return promote(first.d_in, second.d_out, c.reshape(n, n))


def tensor(a: LinearMap, b: LinearMap) -> LinearMap:
    """``a (x) b`` acting on ``H_in^a (x) H_in^b``."""
    c = np.einsum("aibj,ckel->acikbejl", a.choi4, b.choi4)
    d_in, d_out = a.d_in * b.d_in, a.d_out * b.d_out
    return promote(d_in, d_out, c.reshape(d_in * d_out, d_in * d_out))


def _require_cp(q: LinearMap):
    if not isinstance(q, CPMap):
        CPMap(q.d_in, q.d_out, q.choi)  # raises NotCP with the defect


def choi_to_superop(choi: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Matrix ``S`` with ``vec(M(X)) = S vec(X)`` (row-major vec) from the Choi matrix of ``M``."""
    c4 = np.asarray(choi).reshape(d_out, d_in, d_out, d_in)
    return c4.transpose(0, 2, 1, 3).reshape(d_out * d_out, d_in * d_in)


def superop_to_choi(superop: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    s4 = np.asarray(superop).reshape(d_out, d_out, d_in, d_in)
    return s4.transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in)


def transpose_map(q: LinearMap) -> CPMap:
    """``Q^T(rho) = sum_i K_i^T rho K_i^*``; Choi becomes ``SWAP Choi SWAP^dagger``."""
    _require_cp(q)
    c = q.choi4.transpose(1, 0, 3, 2).reshape(q.choi.shape)
    return CPMap(q.d_out, q.d_in, c, {"transform": "transpose"})


def adjoint_map(q: LinearMap) -> CPMap:
    """``Q^dagger(rho) = sum_i K_i^dagger rho K_i``; Choi becomes ``[SWAP Choi SWAP^dagger]^T``.

    No trace condition is imposed on the result: the adjoint of a quantum
    operation is in general trace-increasing.
    """
    _require_cp(q)
    c = q.choi4.transpose(1, 0, 3, 2).reshape(q.choi.shape).T
    return CPMap(q.d_out, q.d_in, c, {"transform": "adjoint"})


# ---------------------------------------------------------------------------
# classification


def ts_defects(q: LinearMap) -> tuple[float, float]:
    """Excess of ``Q^dagger(I_out)`` over ``I_in`` and of ``Q(I_in/d_in)`` over ``I_out/d_out``."""
    excess_in = tni_defect(q)
    out = la.hermitian_part(apply_map(q, np.eye(q.d_in) / q.d_in)) - np.eye(q.d_out) / q.d_out
    excess_out = max(0.0, float(np.linalg.eigvalsh(out)[-1]))
    return excess_in, excess_out


def ts_equality_defects(q: LinearMap) -> tuple[float, float]:
    """Deviation of both time-symmetry conditions from equality (spectral norm)."""
    d_in = tp_defect(q)
    out = apply_map(q, np.eye(q.d_in) / q.d_in) - np.eye(q.d_out) / q.d_out
    return d_in, la.opnorm(out)


@dataclass(frozen=True)
class Classification:
    cp: bool
    trace_nonincreasing: bool
    trace_preserving: bool
    bistochastic: bool
    unitary: bool
    time_symmetric: bool
    defects: Mapping = field(default_factory=dict)

    FLAGS = ("cp", "trace_nonincreasing", "trace_preserving", "bistochastic", "unitary", "time_symmetric")

    def flags(self) -> dict:
        return {k: getattr(self, k) for k in self.FLAGS}


def classify(q: LinearMap) -> Classification:
    """Evaluate every predicate independently; never raises on a failed predicate."""
    tol = get_tolerances()
    herm = la.hermiticity_defect(q.choi)
    neg = la.psd_defect(q.choi)
    cp = herm <= tol.hermiticity_tol and neg <= tol.psd_tol
    tni = tni_defect(q)
    tp = tp_defect(q)
    unital = la.opnorm(apply_map(q, np.eye(q.d_in)) - np.eye(q.d_out))
    ts_in, ts_out = ts_defects(q)
    w = np.linalg.eigvalsh(la.hermitian_part(q.choi))[::-1]
    rank_one_gap = float(max(abs(w[1]), abs(w[-1]))) / q.d_in if len(w) > 1 else 0.0
    trace_preserving = tp <= tol.equality_tol
    unitary = (
        cp
        and trace_preserving
        and q.d_in == q.d_out
        and abs(w[0] - q.d_in) <= tol.equality_tol * q.d_in
        and rank_one_gap <= tol.rank_gap
    )
    return Classification(
        cp=cp,
        trace_nonincreasing=tni <= tol.psd_tol,
        trace_preserving=trace_preserving,
        bistochastic=trace_preserving and q.d_in == q.d_out and unital <= tol.equality_tol,
        unitary=bool(unitary),
        time_symmetric=cp and ts_in <= tol.psd_tol and ts_out <= tol.psd_tol,
        defects={
            "hermiticity": herm,
            "cp": neg,
            "trace_nonincreasing": tni,
            "trace_preserving": tp,
            "unital": unital,
            "ts_in": ts_in,
            "ts_out": ts_out,
            "rank_one_gap": rank_one_gap,
        },
    )


# ---------------------------------------------------------------------------
# instruments


@dataclass(frozen=True, eq=False)
class Instrument:
    """Finite family of quantum operations; outcome ``n`` has probability ``Tr Q_n(rho)``.

    Construction only checks shapes; :func:`validate_instrument` checks that the
    branches sum to a channel.
    """

    branches: tuple

    def __post_init__(self):
        branches = tuple(self.branches)
        if not branches:
            raise EmptyInstrument("an instrument needs at least one branch")
        dims = {(b.d_in, b.d_out) for b in branches}
        if len(dims) != 1:
            raise DimensionMismatch(f"branches have different dimensions: {sorted(dims)}")
        object.__setattr__(self, "branches", branches)

    @property
    def d_in(self) -> int:
        return self.branches[0].d_in

    @property
    def d_out(self) -> int:
        return self.branches[0].d_out

    def __len__(self):
        return len(self.branches)

    def total(self) -> LinearMap:
        c = sum(b.choi for b in self.branches)
        return promote(self.d_in, self.d_out, c)


@dataclass(frozen=True)
class InstrumentReport:
    valid: bool
    cp_defect: float
    tp_defect: float
    branch_reports: tuple = ()

    def __bool__(self):
        return self.valid


def validate_instrument(inst: Instrument) -> InstrumentReport:
    if not len(inst.branches):
        raise EmptyInstrument("an instrument needs at least one branch")
    tol = get_tolerances()
    total = sum(b.choi for b in inst.branches)
    cp = la.psd_defect(total)
    tp = la.opnorm(np.einsum("aiaj->ij", total.reshape(inst.d_out, inst.d_in, inst.d_out, inst.d_in)) - np.eye(inst.d_in))
    return InstrumentReport(valid=cp <= tol.psd_tol and tp <= tol.equality_tol, cp_defect=cp, tp_defect=tp)


def outcome_probabilities(inst: Instrument, rho) -> np.ndarray:
    rho = as_density(rho)
    return np.array([float(np.trace(apply_map(b, rho.mat)).real) for b in inst.branches])


def _checked_probabilities(inst: Instrument, rho: DensityMatrix) -> np.ndarray:
    if not rho.is_normalized():
        raise InvalidInstrument(f"input state has trace {rho.trace:.12g}, expected 1")
    report = validate_instrument(inst)
    if not report.valid:
        raise InvalidInstrument(
            f"branches do not sum to a channel (cp defect {report.cp_defect:.3e}, tp defect {report.tp_defect:.3e})"
        )
    return np.clip(outcome_probabilities(inst, rho), 0.0, None)


def sample_instrument(inst: Instrument, rho, rng) -> tuple[int, DensityMatrix]:
    """Draw an outcome with the Born probabilities and return the conditioned post-state.

    Inverse-CDF sampling over the exact branch probabilities; the last branch with
    non-zero probability absorbs floating-point slack.
    """
    rho = as_density(rho)
    probs = _checked_probabilities(inst, rho)
    n = _draw(probs, la.rng_from(rng).random())
    try:
        return n, condition(apply(inst.branches[n], rho))
    except ZeroTrace as exc:  # pragma: no cover - excluded by _draw
        raise InvalidInstrument(str(exc)) from exc


def sample_outcomes(inst: Instrument, rho, shots: int, rng) -> np.ndarray:
    """``shots`` independent outcomes, each drawn as in :func:`sample_instrument`."""
    rho = as_density(rho)
    probs = _checked_probabilities(inst, rho)
    return np.array([_draw(probs, u) for u in la.rng_from(rng).random(shots)], dtype=int)


def _draw(probs: np.ndarray, u: float) -> int:
    cutoff = get_tolerances().support_cutoff
    live = np.flatnonzero(probs > cutoff)
    if live.size == 0:
        raise InvalidInstrument("every outcome has zero probability")
    cum = np.cumsum(probs[live])
    k = int(np.searchsorted(cum, u, side="right"))
    return int(live[min(k, live.size - 1)])


# ---------------------------------------------------------------------------
# constructors


def random_cptp(d_in: int, d_out: int, kraus_rank: int, seed) -> QuantumOperation:
    """Random channel: Haar unitary on ``d_out * kraus_rank`` truncated to an isometry from ``H_in``."""
    if kraus_rank < 1:
        raise ValueError("kraus_rank must be >= 1")
    if d_out * kraus_rank < d_in:
        raise ValueError(f"no isometry from dimension {d_in} into {d_out}*{kraus_rank}")
    u = la.haar_random_unitary(d_out * kraus_rank, seed)
    v = u[:, :d_in].reshape(d_out, kraus_rank, d_in)
    ops = [v[:, k, :] for k in range(kraus_rank)]
    return choi_from_kraus(ops)


def random_operation(d_in: int, d_out: int, kraus_rank: int, seed) -> QuantumOperation:
    """Random trace-non-increasing operation: one Kraus operator dropped from a random channel."""
    rank = kraus_rank + 1
    while d_out * rank < d_in:
        rank += 1
    u = la.haar_random_unitary(d_out * rank, seed)
    v = u[:, :d_in].reshape(d_out, rank, d_in)
    return choi_from_kraus([v[:, k, :] for k in range(kraus_rank)])


def random_cp_map(d_in: int, d_out: int, kraus_rank: int, seed) -> CPMap:
    """CP map with Ginibre Kraus operators (no normalisation)."""
    rng = la.rng_from(seed)
    return cp_map_from_kraus([la.ginibre(d_out, d_in, rng) for _ in range(kraus_rank)])


def identity_channel(d: int) -> QuantumOperation:
    return choi_from_kraus([np.eye(d)])


def unitary_channel(u) -> QuantumOperation:
    return choi_from_kraus([la.as_matrix(u)])


def null_operation(d_in: int, d_out: int) -> QuantumOperation:
    return QuantumOperation(d_in, d_out, np.zeros((d_in * d_out, d_in * d_out)))


def discard_and_prepare(state, d_in: int) -> QuantumOperation:
    """``rho -> Tr[rho] sigma``; ``state`` is a density matrix or a unit vector."""
    arr = np.asarray(state.mat if isinstance(state, DensityMatrix) else state, dtype=np.complex128)
    sigma = as_density(np.outer(arr, arr.conj()) if arr.ndim == 1 else arr).mat
    return QuantumOperation(d_in, sigma.shape[0], np.kron(sigma, np.eye(d_in)))


PAULIS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def pauli_channel(weights: Sequence[float]) -> QuantumOperation:
    return choi_from_kraus([np.sqrt(w) * p for w, p in zip(weights, PAULIS)])


def uniform_pauli_channel() -> QuantumOperation:
    """Qubit channel sending every state to ``I/2`` (uniform mixture of the four Paulis)."""
    return pauli_channel([0.25] * 4)


def transpose_linear_map(d: int) -> LinearMap:
    """The (non-CP) map ``rho -> rho^T``; its Choi matrix is the swap operator."""
    return LinearMap(d, d, la.swap_operator(d, d))
