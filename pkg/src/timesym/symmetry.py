"""Symmetries of state space and of operation space.

A state-space symmetry is unitary (``rho -> U rho U^dagger``) or antiunitary
(``rho -> U rho^T U^dagger``). An operation-space symmetry is represented by
a :class:`SuperMap`, a dense matrix acting on row-major vectorised Choi
matrices. Symmetries of the set of quantum operations have the form
``Q -> S2 o Q o S1`` with ``S1`` and ``S2`` state symmetries of the same kind;
:func:`decompose_operation_symmetry` recovers the pair from the matrix alone.

Superoperators on a single space are plain matrices ``S`` with
``vec(M(X)) = S vec(X)``, ``vec`` being row-major flattening.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from timesym import _manifold
from timesym import linalg as la
from timesym.config import get_tolerances
from timesym.errors import DimensionMismatch, MixedKinds, NotASymmetry
from timesym.operations import (
    LinearMap,
    choi_to_superop,
    classify,
    promote,
    random_cptp,
    superop_to_choi,
    tp_defect,
)
from timesym.states import DensityMatrix, as_density

UNITARITY_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-7


class Kind(str, enum.Enum):
    UNITARY = "unitary"
    ANTIUNITARY = "antiunitary"


@dataclass(frozen=True, eq=False)
class StateSymmetry:
    kind: Kind
    u: np.ndarray

    def __post_init__(self):
        u = la.as_matrix(self.u, "u")
        if not la.is_unitary(u, 1e-9):
            raise NotASymmetry("implementing matrix is not unitary", stage="state_symmetry")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def superop(self) -> np.ndarray:
        s = np.kron(self.u, np.conj(self.u))
        if self.kind is Kind.ANTIUNITARY:
            s = s @ la.transpose_permutation(self.dim)
        return s

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if self.kind is Kind.ANTIUNITARY:
            x = x.T
        return self.u @ x @ la.dagger(self.u)

    def __repr__(self):
        return f"StateSymmetry({self.kind.value}, dim={self.dim})"


def superop_from_function(f, d_in: int, d_out: int | None = None) -> np.ndarray:
    """Matrix of a linear map on operators, built column by column from matrix units."""
    d_out = d_in if d_out is None else d_out
    s = np.zeros((d_out * d_out, d_in * d_in), dtype=np.complex128)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=np.complex128)
            e[i, j] = 1.0
            s[:, i * d_in + j] = np.asarray(f(e), dtype=np.complex128).reshape(-1)
    return s


def _square_dim(superop: np.ndarray) -> int:
    n = superop.shape[0]
    d = int(round(np.sqrt(n)))
    if superop.shape != (n, n) or d * d != n:
        raise DimensionMismatch(f"superoperator of shape {superop.shape} is not square on one state space")
    return d


def _rank_one_factor(superop: np.ndarray, d: int) -> np.ndarray | None:
    """``A`` with ``superop = A (.) A^dagger`` if the Choi matrix is rank-one PSD, else None."""
    choi = superop_to_choi(superop, d, d)
    scale = max(float(np.linalg.norm(choi)), 1e-300)
    gap = get_tolerances().rank_gap
    if la.hermiticity_defect(choi) > gap * scale:
        return None
    w, v = np.linalg.eigh(la.hermitian_part(choi))
    top = w[-1]
    if top <= 0 or max(abs(w[0]), abs(w[-2]) if len(w) > 1 else 0.0) > gap * top:
        return None
    return np.sqrt(top) * v[:, -1].reshape(d, d)


def classify_state_symmetry(superop, stage: str = "state_symmetry") -> StateSymmetry:
    """Wigner type and implementing unitary of a superoperator on one state space.

    Tries the unitary branch first (rank-one PSD Choi matrix), then the same
    test after composing with the transpose. The unitary is phase-fixed so
    that its first non-negligible entry is real positive.
    """
    s = la.as_matrix(superop, "superop")
    d = _square_dim(s)
    for kind, m in ((Kind.UNITARY, s), (Kind.ANTIUNITARY, s @ la.transpose_permutation(d))):
        a = _rank_one_factor(m, d)
        if a is None:
            continue
        defect = float(np.linalg.norm(la.dagger(a) @ a - np.eye(d)))
        if defect > UNITARITY_TOL:
            raise NotASymmetry(
                f"rank-one factor is not unitary (defect {defect:.3e})", stage=stage, defect=defect
            )
        return StateSymmetry(kind, la.fix_phase(_manifold.polar(a), tol=1e-9))
    raise NotASymmetry("Choi matrix is not rank one in either branch", stage=stage)


def apply_state_symmetry(s: StateSymmetry, rho) -> DensityMatrix:
    rho = as_density(rho)
    if rho.dim != s.dim:
        raise DimensionMismatch(f"state of dimension {rho.dim}, symmetry of dimension {s.dim}")
    return DensityMatrix(la.hermitian_part(s(rho.mat)))


# ---------------------------------------------------------------------------
# supermaps


@dataclass(frozen=True, eq=False)
class SuperMap:
    """Linear map from Choi matrices of ``d_in -> d_out`` maps to those of ``k_in -> k_out`` maps."""

    in_dims: tuple
    out_dims: tuple
    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        d_in, d_out = (int(x) for x in self.in_dims)
        k_in, k_out = (int(x) for x in self.out_dims)
        if min(d_in, d_out, k_in, k_out) < 1:
            raise DimensionMismatch("dimensions must be positive")
        m = la.as_matrix(self.matrix, "supermap matrix")
        shape = ((k_in * k_out) ** 2, (d_in * d_out) ** 2)
        if m.shape != shape:
            raise DimensionMismatch(f"supermap matrix has shape {m.shape}, expected {shape}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "in_dims", (d_in, d_out))
        object.__setattr__(self, "out_dims", (k_in, k_out))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "provenance", dict(self.provenance))

    def apply_choi(self, choi) -> np.ndarray:
        n = self.out_dims[0] * self.out_dims[1]
        return (self.matrix @ np.asarray(choi, dtype=np.complex128).reshape(-1)).reshape(n, n)

    def __call__(self, q: LinearMap) -> LinearMap:
        if (q.d_in, q.d_out) != self.in_dims:
            raise DimensionMismatch(f"map is {q.d_in}->{q.d_out}, supermap expects {self.in_dims}")
        return promote(*self.out_dims, self.apply_choi(q.choi))

    def __repr__(self):
        return f"SuperMap(in_dims={self.in_dims}, out_dims={self.out_dims})"


def supermap_from_choi_function(f, in_dims, out_dims, provenance=None) -> SuperMap:
    """SuperMap of a linear function on Choi matrices."""
    n = in_dims[0] * in_dims[1]
    return SuperMap(tuple(in_dims), tuple(out_dims), superop_from_function(f, n, out_dims[0] * out_dims[1]),
                    provenance or {})


def identity_supermap(d_in: int, d_out: int) -> SuperMap:
    n = (d_in * d_out) ** 2
    return SuperMap((d_in, d_out), (d_in, d_out), np.eye(n), {"supermap": "identity"})


def double_transpose_supermap(d_in: int, d_out: int) -> SuperMap:
    n = d_in * d_out
    return SuperMap((d_in, d_out), (d_in, d_out), la.transpose_permutation(n), {"supermap": "double-transpose"})


def adjoint_supermap(d_in: int, d_out: int, scale: float = 1.0) -> SuperMap:
    """``Q -> scale * Q^dagger`` as a supermap; the Choi action is ``[SWAP C SWAP^dagger]^T``."""
    swap = la.swap_operator(d_out, d_in)

    def f(c):
        return scale * (swap @ c @ swap.T).T

    return supermap_from_choi_function(f, (d_in, d_out), (d_out, d_in), {"supermap": "adjoint", "scale": scale})


def weak_adjoint_supermap(d_in: int, d_out: int) -> SuperMap:
    s = adjoint_supermap(d_in, d_out, 1.0 / d_in)
    return SuperMap(s.in_dims, s.out_dims, s.matrix, {"supermap": "weak-adjoint"})


def sandwich_supermap(s1: StateSymmetry, s2: StateSymmetry) -> SuperMap:
    """``Q -> S2 o Q o S1`` by brute-force composition of superoperators; any kinds allowed.

    This is the literal definition and serves as the reference for
    :func:`build_operation_symmetry`; with mixed kinds it produces maps that
    are not symmetries of the set of quantum operations.
    """
    d_in, d_out = s1.dim, s2.dim
    a, b = s1.superop(), s2.superop()

    def f(c):
        return superop_to_choi(b @ choi_to_superop(c, d_in, d_out) @ a, d_in, d_out)

    return supermap_from_choi_function(f, (d_in, d_out), (d_in, d_out),
                                       {"supermap": "sandwich", "kinds": (s1.kind.value, s2.kind.value)})


def build_operation_symmetry(s1: StateSymmetry, s2: StateSymmetry) -> SuperMap:
    """SuperMap of ``Q -> S2 o Q o S1``, with ``S1`` acting on the input and ``S2`` on the output.

    With ``S1 = (kind, V)`` and ``S2 = (kind, W)`` the Choi action is
    ``C -> A C A^dagger`` with ``A = W (x) V^T`` (unitary) or
    ``C -> A C^T A^dagger`` with ``A = W (x) V^dagger`` (antiunitary).
    """
    if s1.kind is not s2.kind:
        raise MixedKinds(
            f"input symmetry is {s1.kind.value} but output symmetry is {s2.kind.value}; "
            "a mixed pair does not map quantum operations to quantum operations"
        )
    d_in, d_out = s1.dim, s2.dim
    if s1.kind is Kind.UNITARY:
        a = np.kron(s2.u, s1.u.T)
        m = np.kron(a, np.conj(a))
    else:
        a = np.kron(s2.u, la.dagger(s1.u))
        m = np.kron(a, np.conj(a)) @ la.transpose_permutation(d_in * d_out)
    return SuperMap((d_in, d_out), (d_in, d_out), m, {"supermap": "symmetry", "kind": s1.kind.value})


# ---------------------------------------------------------------------------
# channel preservation and decomposition


@dataclass(frozen=True)
class ChannelPreservationReport:
    n_samples: int
    n_passed: int
    worst_defect: float
    defects: tuple

    @property
    def passed(self) -> bool:
        return self.n_passed == self.n_samples


def verify_channel_preservation(s: SuperMap, n_samples: int = 8, seed=0) -> ChannelPreservationReport:
    """Apply ``s`` to random channels and test whether each image is trace-preserving."""
    rng = la.rng_from(seed)
    d_in, d_out = s.in_dims
    k_in, k_out = s.out_dims
    defects = []
    passed = 0
    for _ in range(n_samples):
        c = random_cptp(d_in, d_out, kraus_rank=d_in, seed=rng)
        image = promote(k_in, k_out, s.apply_choi(c.choi))
        defects.append(tp_defect(image))
        passed += bool(classify(image).trace_preserving)
    return ChannelPreservationReport(n_samples, passed, max(defects, default=0.0), tuple(defects))


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Result of :func:`decompose_operation_symmetry`; unpacks as ``(s1, s2)``."""

    s1: StateSymmetry
    s2: StateSymmetry
    residual: float

    @property
    def kind(self) -> Kind:
        return self.s1.kind

    def __iter__(self):
        return iter((self.s1, self.s2))


def _apply_superop(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    return (m @ x.reshape(-1)).reshape(n, n)


def decompose_operation_symmetry(s: SuperMap, n_channel_samples: int = 3, seed=0) -> Decomposition:
    """Recover ``(S1, S2)`` with ``s = build_operation_symmetry(S1, S2)``.

    Verification stages, in order, each raising :class:`NotASymmetry` with the
    stage name: ``dimension``, ``channel_preservation``, ``state_symmetry``
    (the matrix itself must be a Wigner symmetry of the joint space),
    ``input_marginal`` (``rho -> Tr_out[S(I (x) rho)] / d_out`` must be a
    unitary symmetry), ``output_symmetry`` (``rho -> Tr_in[S(rho (x) P_psi)]``
    must be a unitary symmetry) and ``reconstruction``.
    """
    d_in, d_out = s.in_dims
    k_in, k_out = s.out_dims
    if k_in * k_out != d_in * d_out:
        raise DimensionMismatch(f"total dimensions differ: {k_in}*{k_out} != {d_in}*{d_out}")
    if (k_in, k_out) != (d_in, d_out):
        raise NotASymmetry(
            f"input/output dimensions change from {s.in_dims} to {s.out_dims}", stage="dimension"
        )
    report = verify_channel_preservation(s, n_channel_samples, seed)
    if not report.passed:
        raise NotASymmetry(
            f"{report.n_samples - report.n_passed} of {report.n_samples} channels lose trace preservation "
            f"(worst defect {report.worst_defect:.3e})",
            stage="channel_preservation",
            worst_defect=report.worst_defect,
        )
    n = d_in * d_out
    joint = classify_state_symmetry(s.matrix, stage="state_symmetry")
    m = s.matrix
    if joint.kind is Kind.ANTIUNITARY:
        m = m @ la.transpose_permutation(n)

    def marginal(rho):
        x = _apply_superop(m, np.kron(np.eye(d_out), rho))
        j = la.partial_trace(x, d_out, d_in, keep="B") / d_out
        defect = float(np.linalg.norm(x - np.kron(np.eye(d_out), j)))
        if defect > RECONSTRUCTION_TOL:
            raise NotASymmetry(
                f"image of I (x) rho is not of product form (defect {defect:.3e})",
                stage="input_marginal", defect=defect,
            )
        return j

    j = _require_unitary(classify_state_symmetry(superop_from_function(marginal, d_in), "input_marginal"),
                         "input_marginal")
    probe = np.zeros((d_in, d_in), dtype=np.complex128)
    probe[0, 0] = 1.0

    def output(rho):
        return la.partial_trace(_apply_superop(m, np.kron(rho, probe)), d_out, d_in, keep="A")

    w = _require_unitary(classify_state_symmetry(superop_from_function(output, d_out), "output_symmetry"),
                         "output_symmetry")
    v = j.u.T if joint.kind is Kind.UNITARY else la.dagger(j.u)
    s1 = StateSymmetry(joint.kind, la.fix_phase(v, tol=1e-9))
    s2 = StateSymmetry(joint.kind, w.u)
    residual = float(np.linalg.norm(build_operation_symmetry(s1, s2).matrix - s.matrix))
    if residual > RECONSTRUCTION_TOL:
        raise NotASymmetry(
            f"rebuilt supermap differs by {residual:.3e}", stage="reconstruction", residual=residual
        )
    return Decomposition(s1, s2, residual)


def _require_unitary(sym: StateSymmetry, stage: str) -> StateSymmetry:
    if sym.kind is not Kind.UNITARY:
        raise NotASymmetry(f"extracted symmetry is {sym.kind.value}, expected unitary", stage=stage)
    return sym


# ---------------------------------------------------------------------------
# no-go residual search


class Target(str, enum.Enum):
    DAGGER = "dagger"
    TRANSPOSE = "transpose"
    IDENTITY = "identity"


def _target_dagger(target: Target, u: np.ndarray) -> np.ndarray:
    """``g(U)^dagger`` for the reversal target ``g``."""
    if target is Target.DAGGER:
        return u
    if target is Target.TRANSPOSE:
        return np.conj(u)
    return la.dagger(u)


def _branch(kind: Kind, u: np.ndarray) -> np.ndarray:
    return u if kind is Kind.UNITARY else np.conj(u)


def _nogo_loss(d: int, kind: Kind, target: Target, probes: np.ndarray):
    """Loss over batches of ``(W, V)`` pairs.

    For each probe ``U`` the squared residual ``min_gamma ||W f(U) V - e^{i gamma} g(U)||_F^2``
    equals ``2d - 2|Tr(g(U)^dagger W f(U) V)|``. The probe set is the fixed
    ``probes`` plus ``W`` and ``conj(W)``. With ``beta=None`` the loss is the
    plain maximum; otherwise a log-sum-exp smoothing at inverse temperature ``beta``.
    """
    g_fixed = _target_dagger(target, probes)
    f_fixed = _branch(kind, probes)

    def squared(batch):
        w, v = batch[:, 0], batch[:, 1]
        t = np.einsum("kab,nbc,kce,nea->nk", g_fixed, w, f_fixed, v, optimize=True)
        dyn = [
            np.einsum("nab,nbc,nce,nea->n", _target_dagger(target, p), w, _branch(kind, p), v)
            for p in (w, np.conj(w))
        ]
        t = np.concatenate([t, np.stack(dyn, axis=1)], axis=1)
        return np.clip(2 * d - 2 * np.abs(t), 0.0, None)

    def loss(batch, beta):
        r2 = squared(batch)
        top = r2.max(axis=1)
        if beta is None:
            return top
        return top + np.log(np.exp(beta * (r2 - top[:, None])).sum(axis=1)) / beta

    return loss


def _exact_residual(d: int, kind: Kind, target: Target, probes: np.ndarray, w: np.ndarray, v: np.ndarray) -> float:
    """Unsmoothed objective evaluated as a norm, avoiding the cancellation in ``2d - 2|t|``."""
    us = np.concatenate([probes, [w, np.conj(w)]])
    lhs = w[None] @ _branch(kind, us) @ v[None]
    rhs = la.dagger(_target_dagger(target, us))
    t = np.einsum("kab,kab->k", np.conj(rhs), lhs)
    phase = np.where(np.abs(t) > 0, t / np.where(np.abs(t) > 0, np.abs(t), 1), 1)
    return float(np.linalg.norm(lhs - phase[:, None, None] * rhs, axis=(1, 2)).max())


NOGO_STAGES = (2.0, 8.0, 32.0, 128.0, 512.0, 2048.0)
NOGO_ITERS = 60


@dataclass(frozen=True, eq=False)
class NogoResult:
    residual: float
    w: np.ndarray
    v: np.ndarray
    kind: Kind
    restart: int
    best_so_far: tuple
    d: int
    target: Target
    unitary_sample_size: int
    seed: int

    def __iter__(self):
        return iter((self.residual, self.w, self.v))


def nogo_search(d: int, target, unitary_sample_size: int = 200, restarts: int = 20, seed: int = 0) -> NogoResult:
    """Search for unitaries ``W, V`` with ``W f(U) V ~ g(U)`` (up to phase) for all sampled ``U``.

    ``g`` is the target reversal (``U^dagger``, ``U^T``, or ``U`` as a feasible
    control) and ``f`` ranges over both symmetry branches (``U`` and
    ``conj(U)``). The returned residual is the smallest value found of
    ``max_U min_gamma ||W f(U) V - e^{i gamma} g(U)||_F``. Restart ``i`` draws
    its starting point from its own seed stream, so the best-so-far sequence
    is a prefix property: adding restarts never increases the residual.
    """
    target = Target(str(getattr(target, "value", target)).lower())
    if d < 1:
        raise ValueError("d must be >= 1")
    if restarts < 1 or unitary_sample_size < 0:
        raise ValueError("need restarts >= 1 and a non-negative sample size")
    probe_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    probes = np.array([np.eye(d)] + [la.haar_random_unitary(d, probe_rng) for _ in range(unitary_sample_size)],
                      dtype=np.complex128)
    losses = {kind: _nogo_loss(d, kind, target, probes) for kind in Kind}
    best = (np.inf, np.eye(d), np.eye(d), Kind.UNITARY, 0)
    history = []
    for i in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, i)))
        start = np.array([la.haar_random_unitary(d, rng), la.haar_random_unitary(d, rng)])
        for kind in Kind:
            us = start if d == 1 else _manifold.descend(losses[kind], start, NOGO_STAGES, NOGO_ITERS)
            r = _exact_residual(d, kind, target, probes, us[0], us[1])
            if r < best[0]:
                best = (r, us[0], us[1], kind, i)
        history.append(best[0])
    r, w, v, kind, i = best
    return NogoResult(r, w, v, kind, i, tuple(history), d, target, unitary_sample_size, seed)


def nogo_residual(d: int, target, unitary_sample_size: int = 200, restarts: int = 20, seed: int = 0):
    """``(residual, best_w, best_v)`` of :func:`nogo_search`."""
    res = nogo_search(d, target, unitary_sample_size, restarts, seed)
    return res.residual, res.w, res.v
