"""The mixed state built from the complement of a UPB, and its PPT check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constructions import StateSet
from .linalg import DEFAULT_TOL, PARTY_NAMES, ToleranceConfig, check_dims, eigh, partial_transpose
from .verify.basis import complement_projector
from .verify.seesaw import SeesawConfig, SeesawResult, seesaw_product_overlap


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        dims = check_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        m = np.asarray(self.matrix, dtype=complex)
        D = int(np.prod(dims))
        if m.shape != (D, D):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        if np.max(np.abs(m - m.conj().T)) > self.tol.zero_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-10:
            raise ValueError(f"trace {np.trace(m).real:.12g} != 1")
        if np.linalg.eigvalsh(m)[0] < -self.tol.eig_tol:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return eigh(self.matrix, self.tol)[0]

    def rank(self) -> int:
        w = self.eigenvalues()
        return int(np.sum(w > self.tol.eig_tol))


def upb_to_state(upb: StateSet, tol: ToleranceConfig = DEFAULT_TOL) -> DensityMatrix:
    """rho = (I - Pi) / k with Pi the projector onto span(upb), k = D - |upb|."""
    D = int(np.prod(upb.dims))
    k = D - len(upb)
    if k <= 0:
        raise ValueError("set spans the whole space; complement is empty")
    return DensityMatrix(complement_projector(upb, tol) / k, upb.dims, tol)


@dataclass
class PPTReport:
    min_eigenvalues: dict[str, float]  # per transposed party
    rank: int
    range_evidence: SeesawResult | None

    tol: ToleranceConfig = DEFAULT_TOL

    @property
    def ppt(self) -> bool:
        return all(v >= -self.tol.eig_tol for v in self.min_eigenvalues.values())

    @property
    def product_in_range(self) -> bool | None:
        """Whether the seesaw found a product vector in range(rho)."""
        if self.range_evidence is None:
            return None
        return self.range_evidence.best_overlap >= 1 - 1e-9

    @property
    def entangled_evidence(self) -> bool:
        """PPT and the best product overlap with the range stays below 1."""
        return self.ppt and self.product_in_range is False


def check_ppt(
    rho: DensityMatrix,
    seesaw: SeesawConfig | None = SeesawConfig(),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> PPTReport:
    mins = {}
    for p in range(len(rho.dims)):
        pt = partial_transpose(rho.matrix, rho.dims, p)
        mins[PARTY_NAMES[p]] = float(eigh(pt, tol)[0][-1])
    w, v = eigh(rho.matrix, tol)
    r = int(np.sum(w > tol.eig_tol))
    evidence = None
    if seesaw is not None:
        V = v[:, :r]
        evidence = seesaw_product_overlap(V @ V.conj().T, rho.dims, seesaw, tol)
    return PPTReport(mins, r, evidence, tol)
