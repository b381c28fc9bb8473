"""Derivative-free-gradient descent over tuples of unitary matrices.

Points are stacks ``us`` of shape ``(m, d, d)``. A step moves every factor
along its own one-parameter subgroup, ``U_j -> U_j exp(i t H_j)``, so iterates
stay on the manifold up to rounding (which is removed by a polar projection
after each accepted step). Gradients are central finite differences in the
``d^2`` Hermitian generator directions; every perturbed point and every
trial step size is evaluated in one batched call of the loss.
"""

from __future__ import annotations

import numpy as np


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of ``d x d`` Hermitian matrices, shape ``(d*d, d, d)``."""
    basis = []
    for a in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[a, a] = 1.0
        basis.append(e)
    for a in range(d):
        for b in range(a + 1, d):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[a, b] = sym[b, a] = 1 / np.sqrt(2)
            asym = np.zeros((d, d), dtype=np.complex128)
            asym[a, b], asym[b, a] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis += [sym, asym]
    return np.array(basis)


def expi(h: np.ndarray) -> np.ndarray:
    """``exp(i h)`` for (a stack of) Hermitian matrices."""
    w, q = np.linalg.eigh(h)
    return (q * np.exp(1j * w)[..., None, :]) @ np.conj(np.swapaxes(q, -1, -2))


def polar(u: np.ndarray) -> np.ndarray:
    """Nearest unitary (per matrix in a stack)."""
    a, _, bh = np.linalg.svd(u)
    return a @ bh


def descend(loss, us: np.ndarray, stages, iters_per_stage: int, fd_step: float = 1e-6,
            n_trial: int = 24) -> np.ndarray:
    """Minimise ``loss(batch, stage)`` from ``us`` with a fixed iteration budget per stage.

    ``loss`` maps a batch of points, shape ``(B, m, d, d)``, and a stage
    parameter to ``B`` real values. Each iteration evaluates the gradient, then
    a geometric grid of ``n_trial`` step sizes around the last accepted step,
    and keeps the best trial if it decreases the loss. A stage ends early when
    no trial step helps.
    """
    us = np.array(us, dtype=np.complex128)
    m, d = us.shape[0], us.shape[1]
    basis = hermitian_basis(d)
    n = basis.shape[0]
    shifts = np.stack([expi(fd_step * basis), expi(-fd_step * basis)])
    scales = 2.0 ** np.arange(2, 2 - n_trial, -1)
    for stage in stages:
        step = 1.0
        f0 = loss(us[None], stage)[0]
        for _ in range(iters_per_stage):
            cand = np.broadcast_to(us, (2, m, n, m, d, d)).copy()
            for j in range(m):
                cand[:, j, :, j] = us[j] @ shifts
            vals = loss(cand.reshape(-1, m, d, d), stage).reshape(2, m, n)
            grad = (vals[0] - vals[1]) / (2 * fd_step)
            h = -np.einsum("jk,kab->jab", grad, basis)
            w, q = np.linalg.eigh(h)
            ts = step * scales
            phases = np.exp(1j * ts[:, None, None] * w[None])
            moves = (q[None] * phases[..., None, :]) @ np.conj(np.swapaxes(q, -1, -2))[None]
            trials = us[None] @ moves
            tv = loss(trials, stage)
            best = int(np.argmin(tv))
            if not tv[best] < f0:
                break
            us, f0, step = polar(trials[best]), tv[best], ts[best]
    return us
