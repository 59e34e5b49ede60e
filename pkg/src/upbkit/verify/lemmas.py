"""Checkable versions of the block-zeros and block-trivial lemmas.

Both functions first test the hypotheses and raise
:class:`LemmaHypothesisError` if any fails, so a caller can tell a bad
instance apart from a failed conclusion.  They return whether the
conclusion holds.

The ``random_*_instance`` helpers build instances that satisfy the
hypotheses by projecting a random Hermitian matrix onto the linear
constraint subspace and then shifting by a multiple of the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..linalg import DEFAULT_TOL, Bipartition, ToleranceConfig, nullspace, submatrix
from .nonlocality import ConstraintSystem, hermitian_to_params, params_to_hermitian, real_system


class LemmaHypothesisError(ValueError):
    """The supplied instance does not satisfy the lemma's hypotheses."""


def _check_psd(E, tol: ToleranceConfig) -> float:
    E = np.asarray(E, dtype=complex)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise LemmaHypothesisError("E must be square")
    scale = max(1.0, float(np.max(np.abs(E), initial=0.0)))
    if np.max(np.abs(E - E.conj().T)) > tol.zero_tol * scale:
        raise LemmaHypothesisError("E is not Hermitian")
    w = np.linalg.eigvalsh((E + E.conj().T) / 2)
    if w[0] < -tol.eig_tol * scale:
        raise LemmaHypothesisError(f"E is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    return max(1.0, float(w[-1]))


def _check_basis(vectors, support: Sequence[int], dim: int, tol: ToleranceConfig, name: str) -> np.ndarray:
    """Normalize and validate an orthogonal basis of span{e_s : s in support}."""
    V = np.array([np.asarray(v, dtype=complex).ravel() for v in vectors])
    if V.ndim != 2 or V.shape[1] != dim:
        raise LemmaHypothesisError(f"{name} vectors must have length {dim}")
    if len(V) != len(support):
        raise LemmaHypothesisError(f"need |{name}| = {len(support)} vectors, got {len(V)}")
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms == 0):
        raise LemmaHypothesisError(f"{name} contains a zero vector")
    V = V / norms[:, None]
    outside = np.setdiff1d(np.arange(dim), list(support))
    if outside.size and np.max(np.abs(V[:, outside])) > tol.zero_tol:
        raise LemmaHypothesisError(f"{name} not supported on its index set")
    G = V.conj() @ V.T
    if np.max(np.abs(G - np.eye(len(V)))) > tol.zero_tol:
        raise LemmaHypothesisError(f"{name} not mutually orthogonal")
    return V


def block_zeros_verify(E, S, T, psis, phis, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """If <psi_i|E|phi_j> = 0 for all i, j then E[S, T] = 0 and E[T, S] = 0."""
    E = np.asarray(E, dtype=complex)
    S, T = list(S), list(T)
    if not S or not T:
        raise LemmaHypothesisError("S and T must be nonempty")
    if set(S) & set(T):
        raise LemmaHypothesisError("S and T must be disjoint")
    if len(set(S)) != len(S) or len(set(T)) != len(T):
        raise LemmaHypothesisError("index sets contain repeats")
    norm = _check_psd(E, tol)
    D = E.shape[0]
    if max(S + T) >= D or min(S + T) < 0:
        raise LemmaHypothesisError("index out of range")
    P = _check_basis(psis, S, D, tol, "psis")
    Q = _check_basis(phis, T, D, tol, "phis")
    delta = tol.zero_tol * norm
    if np.max(np.abs(P.conj() @ E @ Q.T)) > delta:
        raise LemmaHypothesisError("<psi_i|E|phi_j> does not vanish")
    bound = 10 * max(len(S), len(T)) * delta
    return bool(
        np.max(np.abs(submatrix(E, S, T))) <= bound and np.max(np.abs(submatrix(E, T, S))) <= bound
    )


def block_trivial_verify(E, S, psis, u_t: int, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """If E is diagonal in the psi basis and e_{u_t} is an eigenvector of E_S
    with nonzero overlap on every psi, then E_S is a multiple of I_S."""
    E = np.asarray(E, dtype=complex)
    S = list(S)
    if not S or len(set(S)) != len(S):
        raise LemmaHypothesisError("S must be a nonempty set of indices")
    if u_t not in S:
        raise LemmaHypothesisError("u_t must lie in S")
    norm = _check_psd(E, tol)
    D = E.shape[0]
    if max(S) >= D or min(S) < 0:
        raise LemmaHypothesisError("index out of range")
    P = _check_basis(psis, S, D, tol, "psis")
    delta = tol.zero_tol * norm
    G = P.conj() @ E @ P.T
    off = G - np.diag(np.diag(G))
    if np.max(np.abs(off), initial=0.0) > delta:
        raise LemmaHypothesisError("<psi_i|E|psi_j> does not vanish for i != j")
    rest = [s for s in S if s != u_t]
    if rest and np.max(np.abs(E[u_t, rest])) > delta:
        raise LemmaHypothesisError("row u_t of E does not vanish on S minus {u_t}")
    c = np.abs(P[:, u_t])
    if np.min(c) <= tol.zero_tol:
        raise LemmaHypothesisError("some psi_j is orthogonal to u_t")
    ES = submatrix(E, S, S)
    mu = np.trace(ES) / len(S)
    bound = 10 * len(S) * delta / float(np.min(c))
    return bool(np.max(np.abs(ES - mu * np.eye(len(S)))) <= bound)


# ---------------------------------------------------------------------------
# instance generators


@dataclass
class LemmaInstance:
    E: np.ndarray
    S: list[int]
    T: list[int]
    psis: np.ndarray
    phis: np.ndarray
    u_t: int = -1


def _random_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _embedded_basis(rng, support, dim) -> np.ndarray:
    U = _random_unitary(rng, len(support))
    V = np.zeros((len(support), dim), dtype=complex)
    V[:, support] = U.T
    return V


def project_hermitian(H, bras, kets, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection of Hermitian H onto {E : <bra_r|E|ket_r> = 0 for all r}."""
    d = H.shape[0]
    cs = ConstraintSystem(Bipartition((0,), (1,)), (d,), np.asarray(bras), np.asarray(kets))
    N = np.real(nullspace(real_system(cs), tol))
    x = hermitian_to_params(H)
    return params_to_hermitian(N.T @ (N @ x), d)


def _random_hermitian(rng, d) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2


def _make_psd(E, rng) -> np.ndarray:
    lam = np.linalg.eigvalsh(E)[0]
    return E + (max(0.0, -lam) + rng.uniform(0.0, 1.0)) * np.eye(E.shape[0])


def random_block_zeros_instance(rng: np.random.Generator, dim: int | None = None) -> LemmaInstance:
    dim = dim or int(rng.integers(2, 7))
    perm = rng.permutation(dim)
    ns = int(rng.integers(1, dim))
    nt = int(rng.integers(1, dim - ns + 1))
    S, T = sorted(perm[:ns].tolist()), sorted(perm[ns : ns + nt].tolist())
    P, Q = _embedded_basis(rng, S, dim), _embedded_basis(rng, T, dim)
    bras = np.repeat(P, len(Q), axis=0)
    kets = np.tile(Q, (len(P), 1))
    E = _make_psd(project_hermitian(_random_hermitian(rng, dim), bras, kets), rng)
    return LemmaInstance(E, S, T, P, Q)


def random_block_trivial_instance(rng: np.random.Generator, dim: int | None = None) -> LemmaInstance:
    dim = dim or int(rng.integers(2, 7))
    k = int(rng.integers(1, dim + 1))
    S = sorted(rng.permutation(dim)[:k].tolist())
    u_t = int(rng.choice(S))
    while True:
        P = _embedded_basis(rng, S, dim)
        if np.min(np.abs(P[:, u_t])) > 1e-3:
            break
    bras, kets = [], []
    for i in range(k):
        for j in range(k):
            if i != j:
                bras.append(P[i])
                kets.append(P[j])
    e_u = np.eye(dim)[u_t]
    for s in S:
        if s != u_t:
            bras.append(e_u)
            kets.append(np.eye(dim)[s])
    H = _random_hermitian(rng, dim)
    E = H if not bras else project_hermitian(H, bras, kets)
    return LemmaInstance(_make_psd(E, rng), S, [], P, np.zeros((0, dim)), u_t)
