"""Dense complex linear algebra used by every other module.

Composite indices are row-major in party order, so for three parties the
basis state |i, j, k> sits at ``i * d_B * d_C + j * d_C + k``.  States are
kept unnormalized; every orthogonality decision is made relative to the
norms of the vectors involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PARTY_NAMES = "ABCDEFGH"


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds.

    zero_tol  absolute cutoff for (normalized) inner products and entries
    rank_tol  relative singular-value cutoff, sigma_k > rank_tol * sigma_max
    eig_tol   allowed eigenvalue negativity
    """

    zero_tol: float = 1e-9
    rank_tol: float = 1e-9
    eig_tol: float = 1e-9

    def __post_init__(self):
        for name in ("zero_tol", "rank_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


def check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError("need at least two parties")
    if any(d < 2 for d in dims):
        raise ValueError(f"every local dimension must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True)
class Bipartition:
    """Split of the parties into two non-empty groups.

    For orthogonality-preserving measurements the right-hand group is the
    measuring (joint) side and the left-hand group is the spectator.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("both sides of a cut must be non-empty")
        if set(self.left) & set(self.right):
            raise ValueError("the two sides of a cut must be disjoint")

    @classmethod
    def parse(cls, text: str, nparties: int = 3) -> "Bipartition":
        """Parse ``"A|BC"`` style notation."""
        if text.count("|") != 1:
            raise ValueError(f"malformed cut {text!r}; expected e.g. 'A|BC'")
        names = PARTY_NAMES[:nparties]
        sides = []
        for part in text.split("|"):
            part = part.strip().upper()
            try:
                sides.append(tuple(names.index(ch) for ch in part))
            except ValueError:
                raise ValueError(f"unknown party in cut {text!r}") from None
        cut = cls(*sides)
        cut.validate(nparties)
        return cut

    @classmethod
    def measuring(cls, joint: Sequence[int], nparties: int) -> "Bipartition":
        joint = tuple(joint)
        rest = tuple(p for p in range(nparties) if p not in joint)
        return cls(rest, joint)

    def validate(self, nparties: int):
        if sorted(self.left + self.right) != list(range(nparties)):
            raise ValueError(f"cut {self} does not cover all {nparties} parties")

    def __str__(self):
        return (
            "".join(PARTY_NAMES[p] for p in self.left)
            + "|"
            + "".join(PARTY_NAMES[p] for p in self.right)
        )


def kron(u, v) -> np.ndarray:
    """Row-major tensor product of two vectors."""
    return np.kron(np.asarray(u, dtype=complex).ravel(), np.asarray(v, dtype=complex).ravel())


def kron_all(vectors) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = kron(out, v)
    return out


def inner(u, v) -> complex:
    """<u|v>, conjugate-linear in the first argument."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.size} vs {v.size}")
    return complex(np.vdot(u, v))


def relative_overlap(u, v) -> float:
    """|<u|v>| / (|u| |v|); zero if either vector vanishes."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return abs(inner(u, v)) / (nu * nv)


def matricize(v, dims: Sequence[int], cut: Bipartition) -> np.ndarray:
    """Reshape a composite vector into a matrix across ``cut``.

    Rows enumerate the left parties and columns the right parties, each in
    row-major order of the party list as given in the cut.
    """
    dims = tuple(dims)
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != int(np.prod(dims)):
        raise ValueError(f"vector of size {v.size} does not match dims {dims}")
    cut.validate(len(dims))
    t = v.reshape(dims).transpose(cut.left + cut.right)
    nrows = int(np.prod([dims[p] for p in cut.left]))
    return t.reshape(nrows, -1)


def singular_values(m) -> np.ndarray:
    m = np.asarray(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def rank(m, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    s = singular_values(m)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol.rank_tol * s[0]))


def nullspace(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the right nullspace, one basis vector per row.

    Returns an array of shape (k, ncols); k = 0 for full column rank.
    """
    m = np.atleast_2d(np.asarray(m))
    ncols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(ncols, dtype=m.dtype)
    # thin SVD suffices when rows >= cols; vh is then already square
    _, s, vh = np.linalg.svd(m, full_matrices=m.shape[0] < ncols)
    if s.size == 0 or s[0] == 0:
        return np.eye(ncols, dtype=vh.dtype)
    r = int(np.sum(s > tol.rank_tol * s[0]))
    return vh[r:].conj()


def is_hermitian(m, atol: float) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= atol


def eigh(m, tol: ToleranceConfig = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol.zero_tol):
        raise ValueError("matrix is not Hermitian within zero_tol")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1], v[:, ::-1]


def partial_transpose(rho, dims: Sequence[int], party: int) -> np.ndarray:
    """Transpose the index pair belonging to ``party`` only."""
    dims = tuple(dims)
    n = len(dims)
    if not 0 <= party < n:
        raise ValueError(f"party index {party} out of range for {n} parties")
    rho = np.asarray(rho)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"matrix shape {rho.shape} does not match dims {dims}")
    axes = list(range(2 * n))
    axes[party], axes[party + n] = axes[party + n], axes[party]
    return rho.reshape(dims + dims).transpose(axes).reshape(total, total)


def submatrix(E, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Entries of E with the given row and column coordinates, order preserved."""
    E = np.asarray(E)
    rows = list(rows)
    cols = list(cols)
    for idx, bound in ((rows, E.shape[0]), (cols, E.shape[1])):
        if any(not 0 <= i < bound for i in idx):
            raise IndexError(f"index out of range 0..{bound - 1}: {idx}")
    return E[np.ix_(rows, cols)]


def projector(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of mutually orthogonal vectors."""
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    if not vectors:
        raise ValueError("need at least one vector")
    dim = vectors[0].size
    P = np.zeros((dim, dim), dtype=complex)
    for v in vectors:
        v = v / np.linalg.norm(v)
        P += np.outer(v, v.conj())
    return P


def root_of_unity(n: int) -> complex:
    return complex(np.exp(2j * np.pi / n))
