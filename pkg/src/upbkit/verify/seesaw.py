"""Alternating maximization of <x|P|x> over product vectors x.

P is factored once as P = F F^dagger (F = eigenvectors scaled by sqrt of
eigenvalues), so each local update only needs the contraction of F with
the other parties' current vectors.  All restarts run as one batch.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..constructions import ProductState, StateLabel, product_state
from ..linalg import DEFAULT_TOL, ToleranceConfig, check_dims, eigh, kron_all


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 200
    max_iters: int = 1000
    seed: int = 42
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


@dataclass
class SeesawResult:
    best_overlap: float
    witness: ProductState
    restarts: int
    iterations: int  # sweeps used by the best restart
    converged: bool
    monotone: bool
    overlaps: np.ndarray = field(repr=False)  # final value per restart

    @property
    def distance(self) -> float:
        """1 - best overlap: how far the best product vector is from the subspace."""
        return 1.0 - self.best_overlap


def _initial_locals(dims, config: SeesawConfig) -> list[np.ndarray]:
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    per_party = [np.empty((config.restarts, d), dtype=complex) for d in dims]
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        for p, d in enumerate(dims):
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            per_party[p][r] = v / np.linalg.norm(v)
    return per_party


def _contract(T, locs, skip: int) -> np.ndarray:
    """W[R, k, i] = sum over all parties but ``skip`` of conj(F_k) * x_q."""
    n = T.ndim - 1
    letters = string.ascii_letters[: n]
    operands, subs = [T], ["z" + letters]
    for q in range(n):
        if q != skip:
            operands.append(locs[q])
            subs.append("Y" + letters[q])
    out = "Yz" + letters[skip]
    return np.einsum(",".join(subs) + "->" + out, *operands, optimize=True)


def seesaw_product_overlap(
    P,
    dims: Sequence[int],
    config: SeesawConfig = SeesawConfig(),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> SeesawResult:
    """Estimate max over unit product x of <x|P|x> for a projector-like P >= 0.

    A value bounded away from 1 means no product vector lies in range(P).
    The estimate is a lower bound on the true maximum.
    """
    dims = check_dims(dims)
    D = int(np.prod(dims))
    P = np.asarray(P, dtype=complex)
    if P.shape != (D, D):
        raise ValueError(f"operator shape {P.shape} does not match dims {dims}")
    w, V = eigh(P, tol)
    if w[-1] < -tol.eig_tol * max(1.0, abs(w[0])):
        raise ValueError(f"operator is not positive semidefinite (min eigenvalue {w[-1]:.3g})")
    keep = w > tol.rank_tol * max(w[0], 0.0)
    if w[0] <= 0 or not np.any(keep):
        locs = [np.eye(d, dtype=complex)[0] for d in dims]
        witness = product_state(locs, StateLabel("witness"))
        return SeesawResult(0.0, witness, config.restarts, 0, True, True, np.zeros(config.restarts))

    F = V[:, keep] * np.sqrt(w[keep])
    T = F.T.conj().reshape((-1,) + dims)  # conj(F_k) as a tensor

    locs = _initial_locals(dims, config)
    R = config.restarts
    value = np.zeros(R)
    active = np.ones(R, dtype=bool)
    sweeps = np.zeros(R, dtype=int)
    monotone = True
    for it in range(config.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cur = [L[idx] for L in locs]
        for p in range(len(dims)):
            W = _contract(T, cur, p)
            M = np.einsum("Yki,Ykj->Yij", W.conj(), W)
            _, vecs = np.linalg.eigh(M)
            cur[p] = vecs[:, :, -1]
        W = _contract(T, cur, 0)
        new = np.sum(np.abs(np.einsum("Yki,Yi->Yk", W, cur[0])) ** 2, axis=1)
        old = value[idx]
        if it > 0 and np.any(new < old - 1e-12 * np.maximum(old, 1.0)):
            monotone = False
        for p in range(len(dims)):
            locs[p][idx] = cur[p]
        value[idx] = new
        sweeps[idx] += 1
        done = (it > 0) & (new - old <= config.rel_tol * np.maximum(new, 1e-300))
        active[idx[done]] = False

    best = int(np.argmax(value))
    witness = product_state([L[best] for L in locs], StateLabel("witness"))
    x = kron_all(witness.locals)
    # recompute on the dense operator rather than trusting the factorization
    best_overlap = float(np.real(np.vdot(x, P @ x)) / np.real(np.vdot(x, x)))
    return SeesawResult(
        best_overlap=best_overlap,
        witness=witness,
        restarts=R,
        iterations=int(sweeps[best]),
        converged=not bool(active[best]),
        monotone=monotone,
        overlaps=value,
    )
