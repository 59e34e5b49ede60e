"""Orthogonality, completeness, and complement projectors for product sets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..constructions import StateSet, removed_states
from ..linalg import DEFAULT_TOL, ToleranceConfig, rank


@dataclass(frozen=True)
class OrthogonalityReport:
    passed: bool
    max_overlap: float
    worst_pair: tuple[str, str] | None
    n_states: int


def _normalized_locals(states) -> list[np.ndarray]:
    """Per party, an (N, d) array of unit local vectors."""
    nparties = len(states[0].locals)
    return [
        np.array([s.locals[p] / np.linalg.norm(s.locals[p]) for s in states])
        for p in range(nparties)
    ]


def overlap_matrix(states) -> np.ndarray:
    """|<psi_i|psi_j>| / norms, computed party by party."""
    G = np.ones((len(states), len(states)), dtype=complex)
    for L in _normalized_locals(states):
        G *= L.conj() @ L.T
    return np.abs(G)


def check_orthogonality(upb: StateSet, tol: ToleranceConfig = DEFAULT_TOL) -> OrthogonalityReport:
    n = len(upb)
    if n < 2:
        return OrthogonalityReport(True, 0.0, None, n)
    G = overlap_matrix(upb.states)
    np.fill_diagonal(G, 0.0)
    i, j = np.unravel_index(int(np.argmax(G)), G.shape)
    worst = float(G[i, j])
    names = upb.names()
    return OrthogonalityReport(worst <= tol.zero_tol, worst, (names[min(i, j)], names[max(i, j)]), n)


@dataclass(frozen=True)
class CompletenessReport:
    passed: bool
    total: int
    expected: int
    rank: int
    detail: str

    def __bool__(self):
        return self.passed


def completeness_witness(upb: StateSet, removed=None) -> StateSet:
    """Assemble (set minus stopper) + removed + flagged.

    ``removed`` may be a StateSet, or the (StateSet, flagged) pair from
    :func:`removed_states`.  If omitted it is regenerated for the layered
    families; sets without removal metadata are returned unchanged.
    """
    flagged = None
    if isinstance(removed, tuple):
        removed, flagged = removed
    if removed is None:
        if upb.family not in ("example334", "tripartite", "layered"):
            return upb
        removed, flagged = removed_states(upb.dims, upb.layer)
    if flagged is None and upb.family in ("example334", "tripartite", "layered"):
        flagged = removed_states(upb.dims, upb.layer)[1]
    states = [s for s in upb.states if s.label.tile != "S"] + list(removed.states)
    if flagged is not None:
        states.append(flagged)
    return StateSet(upb.dims, tuple(states), upb.layer, "custom")


def check_completeness(upb: StateSet, removed=None, tol: ToleranceConfig = DEFAULT_TOL) -> CompletenessReport:
    """Counting check: (set minus stopper) + removed + flagged spans the space.

    For families without removal metadata (and no ``removed`` given) the
    set itself must be a full orthogonal basis.
    """
    expected = int(np.prod(upb.dims))
    basis = completeness_witness(upb, removed)
    total = len(basis)
    r = rank(basis.vectors(), tol) if total else 0
    orth = check_orthogonality(basis, tol)
    if basis is upb:
        detail = "set itself"
    else:
        n_removed = total - (len(upb) - any(s.label.tile == "S" for s in upb.states))
        detail = f"{total - n_removed} kept + {n_removed} removed/flagged"
    ok = total == expected and r == expected and orth.passed
    return CompletenessReport(ok, total, expected, r, detail)


def complement_projector(upb: StateSet, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """I minus the projector onto span(upb); requires an orthogonal set."""
    orth = check_orthogonality(upb, tol)
    if not orth.passed:
        raise ValueError(f"set is not orthogonal (max overlap {orth.max_overlap:.3g} at {orth.worst_pair})")
    D = int(np.prod(upb.dims))
    if len(upb) == 0:
        return np.eye(D, dtype=complex)
    V = upb.vectors()
    V = V / np.linalg.norm(V, axis=1, keepdims=True)
    return np.eye(D, dtype=complex) - V.T @ V.conj()


@dataclass
class ProductWitness:
    """A vector expanded over the removed states and the flagged state.

    Any vector orthogonal to the set minus its stopper lies in the span of
    these states; the coefficients show which ones it uses.
    """

    labels: list
    coefficients: np.ndarray
    vector: np.ndarray
    basis: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        return self.basis.T @ self.coefficients

    @property
    def residual(self) -> float:
        """Part of the vector outside the removed-state span."""
        return float(np.linalg.norm(self.vector - self.reconstruct()))


def product_witness(x, upb: StateSet) -> ProductWitness:
    removed, flagged = removed_states(upb.dims, upb.layer)
    states = list(removed.states) + [flagged]
    B = np.array([s.vector() for s in states])
    x = np.asarray(x, dtype=complex).ravel()
    coeffs = (B.conj() @ x) / np.sum(np.abs(B) ** 2, axis=1)
    return ProductWitness([s.label for s in states], coeffs, x, B)
