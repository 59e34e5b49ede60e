"""Orthogonality-preserving measurement constraints and the triviality check.

For a cut spectator | joint, a positive operator E on the joint side
preserves orthogonality of the set if <psi_j|E|psi_i> = 0 for every pair
whose spectator parts overlap.  The set is strongly nonlocal across the
cut when the only Hermitian solution is a multiple of the identity.

The unknown Hermitian E is written in d^2 real coordinates: the d
diagonal entries, then (Re, Im) of each upper off-diagonal entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..constructions import StateLabel, StateSet
from ..linalg import DEFAULT_TOL, PARTY_NAMES, Bipartition, ToleranceConfig, kron_all, nullspace

IDENTITY_RESIDUAL_TOL = 1e-8
BRUTE_FORCE_MAX_DIM = 4


@dataclass
class ConstraintSystem:
    """Rows <bra_r| E |ket_r> = 0 on the joint space of ``cut.right``."""

    cut: Bipartition
    joint_dims: tuple[int, ...]
    bras: np.ndarray  # (R, d)
    kets: np.ndarray  # (R, d)
    provenance: list[tuple[StateLabel, StateLabel]] = field(default_factory=list)

    @property
    def joint_dim(self) -> int:
        return int(np.prod(self.joint_dims))

    def __len__(self):
        return self.bras.shape[0]

    def residuals(self, E) -> np.ndarray:
        return np.einsum("ri,ij,rj->r", self.bras.conj(), np.asarray(E), self.kets)


def _unit(v):
    return v / np.linalg.norm(v)


def op_constraints(upb: StateSet, cut: Bipartition | str, tol: ToleranceConfig = DEFAULT_TOL) -> ConstraintSystem:
    """Collect one row per pair (i < j) whose spectator overlap is nonzero."""
    n = len(upb.dims)
    if isinstance(cut, str):
        cut = Bipartition.parse(cut, n)
    cut.validate(n)
    states = upb.states
    N = len(states)
    spect = np.ones((N, N), dtype=complex)
    for p in cut.left:
        L = np.array([_unit(s.locals[p]) for s in states])
        spect *= L.conj() @ L.T
    iu, ju = np.triu_indices(N, k=1)
    mask = np.abs(spect[iu, ju]) > tol.zero_tol
    iu, ju = iu[mask], ju[mask]
    joint = [kron_all([_unit(s.locals[p]) for p in cut.right]) for s in states]
    joint = np.array(joint) if joint else np.zeros((0, 1))
    bras = joint[ju] if len(iu) else np.zeros((0, joint.shape[1]), dtype=complex)
    kets = joint[iu] if len(iu) else np.zeros((0, joint.shape[1]), dtype=complex)
    prov = [(states[j].label, states[i].label) for i, j in zip(iu, ju)]
    return ConstraintSystem(cut, tuple(upb.dims[p] for p in cut.right), bras, kets, prov)


def _param_index(d: int):
    iu, ju = np.triu_indices(d, k=1)
    return iu, ju


def real_system(cs: ConstraintSystem) -> np.ndarray:
    """Real (2R, d^2) matrix A with A @ params = 0 encoding every row."""
    d = cs.joint_dim
    R = len(cs)
    if R == 0:
        return np.zeros((0, d * d))
    G = cs.bras.conj()[:, :, None] * cs.kets[:, None, :]  # G[r,i,j] = conj(b_i) k_j
    iu, ju = _param_index(d)
    diag = np.einsum("rii->ri", G)
    re_part = G[:, iu, ju] + G[:, ju, iu]
    im_part = 1j * (G[:, iu, ju] - G[:, ju, iu])
    C = np.concatenate([diag, re_part, im_part], axis=1)
    return np.concatenate([C.real, C.imag], axis=0)


def params_to_hermitian(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    iu, ju = _param_index(d)
    m = len(iu)
    E = np.zeros((d, d), dtype=complex)
    E[np.arange(d), np.arange(d)] = x[:d]
    E[iu, ju] = x[d : d + m] + 1j * x[d + m :]
    E[ju, iu] = np.conj(E[iu, ju])
    return E


def hermitian_to_params(E) -> np.ndarray:
    E = np.asarray(E)
    d = E.shape[0]
    iu, ju = _param_index(d)
    return np.concatenate([np.real(np.diag(E)), E[iu, ju].real, E[iu, ju].imag])


@dataclass
class NonlocalityReport:
    cut: str
    solution_dim: int
    contains_identity: bool
    identity_residual: float
    n_constraints: int
    # smallest retained singular value relative to the largest; a small
    # value means the rank decision sat close to rank_tol
    rank_margin: float
    basis: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def certified_trivial(self) -> bool:
        return self.solution_dim == 1 and self.contains_identity


def solve_triviality(cs: ConstraintSystem, tol: ToleranceConfig = DEFAULT_TOL) -> NonlocalityReport:
    d = cs.joint_dim
    A = real_system(cs)
    if A.shape[0]:
        s = np.linalg.svd(A, compute_uv=False)
        r = int(np.sum(s > tol.rank_tol * s[0])) if s[0] > 0 else 0
        margin = float(s[r - 1] / s[0]) if r else 0.0
    else:
        margin = 0.0
    N = nullspace(A, tol) if A.shape[0] else np.eye(d * d)
    N = np.real_if_close(N).real
    ident = hermitian_to_params(np.eye(d))
    ident = ident / np.linalg.norm(ident)
    proj = N.T @ (N @ ident) if N.shape[0] else np.zeros_like(ident)
    resid = float(np.linalg.norm(ident - proj))
    return NonlocalityReport(
        cut=str(cs.cut),
        solution_dim=int(N.shape[0]),
        contains_identity=resid <= IDENTITY_RESIDUAL_TOL,
        identity_residual=resid,
        n_constraints=len(cs),
        rank_margin=margin,
        basis=[params_to_hermitian(x, d) for x in N],
    )


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Explicit basis matrices in the same coordinate order as the solver."""
    out = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1
        out.append(m)
    iu, ju = _param_index(d)
    for i, j in zip(iu, ju):
        m = np.zeros((d, d), dtype=complex)
        m[i, j] = m[j, i] = 1
        out.append(m)
    for i, j in zip(iu, ju):
        m = np.zeros((d, d), dtype=complex)
        m[i, j], m[j, i] = 1j, -1j
        out.append(m)
    return out


def brute_force_solution_dim(cs: ConstraintSystem, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Reference count by evaluating every row on every basis matrix.

    Only meant for tiny joint spaces; it shares no assembly code with
    :func:`real_system`.
    """
    d = cs.joint_dim
    if d > BRUTE_FORCE_MAX_DIM:
        raise ValueError(f"brute force limited to joint dimension <= {BRUTE_FORCE_MAX_DIM}")
    basis = hermitian_basis(d)
    rows = []
    for b, k in zip(cs.bras, cs.kets):
        vals = [complex(np.vdot(b, H @ k)) for H in basis]
        rows.append([v.real for v in vals])
        rows.append([v.imag for v in vals])
    if not rows:
        return d * d
    r = np.linalg.matrix_rank(np.array(rows), tol=tol.rank_tol * np.abs(np.array(rows)).max())
    return d * d - int(r)


def bipartite_cuts(nparties: int) -> list[Bipartition]:
    """Every cut with a single spectator party: A|BC, B|AC, C|AB, ..."""
    return [Bipartition.measuring(tuple(q for q in range(nparties) if q != p), nparties) for p in range(nparties)]


def check_strong_nonlocality(
    upb: StateSet,
    cuts: Sequence[Bipartition | str] | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[NonlocalityReport]:
    """Run the triviality test on each cut (joint BC, AC, AB by default).

    The set is certified strongly nonlocal iff every report is
    ``certified_trivial``; anything else is inconclusive, not "local".
    """
    n = len(upb.dims)
    if cuts is None:
        cuts = bipartite_cuts(n)
    return [solve_triviality(op_constraints(upb, cut, tol), tol) for cut in cuts]


def all_certified(reports: Sequence[NonlocalityReport]) -> bool:
    return bool(reports) and all(r.certified_trivial for r in reports)


def joint_party_name(cut: Bipartition) -> str:
    return "".join(PARTY_NAMES[p] for p in cut.right)
