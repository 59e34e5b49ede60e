"""Register layouts, local operators, and the P[...] projector notation.

A composite register space is the row-major tensor product of named
registers, each owned by one party.  A :class:`LocalOp` acts on a few
registers and as the identity everywhere else; it is never expanded into
the full space unless explicitly requested.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Register:
    name: str
    owner: str
    dim: int


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]

    def __post_init__(self):
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")
        if any(r.dim < 1 for r in self.registers):
            raise ValueError("register dimensions must be positive")

    @classmethod
    def of(cls, *specs) -> "RegisterLayout":
        """``RegisterLayout.of(("A", "Alice", 3), ...)``"""
        return cls(tuple(Register(*s) for s in specs))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.registers)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def parties(self) -> tuple[str, ...]:
        seen = []
        for r in self.registers:
            if r.owner not in seen:
                seen.append(r.owner)
        return tuple(seen)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown register {name!r}") from None

    def register(self, name: str) -> Register:
        return self.registers[self.index(name)]

    def owned_by(self, party: str) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers if r.owner == party)

    def owner(self, name: str) -> str:
        return self.register(name).owner

    def sort(self, names) -> tuple[str, ...]:
        return tuple(sorted(set(names), key=self.index))


def _subsystem_apply(matrix, vec, layout: RegisterLayout, regs: Sequence[str]) -> np.ndarray:
    axes = [layout.index(r) for r in regs]
    k = len(axes)
    t = np.asarray(vec, dtype=complex).reshape(layout.dims)
    t = np.moveaxis(t, axes, range(k))
    front = t.shape[:k]
    out = (matrix @ t.reshape(int(np.prod(front)), -1)).reshape(t.shape)
    return np.moveaxis(out, range(k), axes).reshape(-1)


@dataclass(frozen=True)
class LocalOp:
    """Operator ``matrix`` on ``registers`` (in layout order), identity elsewhere."""

    registers: tuple[str, ...]
    matrix: np.ndarray
    name: str = ""

    def local_dim(self, layout: RegisterLayout) -> int:
        return int(np.prod([layout.register(r).dim for r in self.registers]))

    def apply(self, vec, layout: RegisterLayout) -> np.ndarray:
        return _subsystem_apply(self.matrix, vec, layout, self.registers)

    def extend(self, registers, layout: RegisterLayout) -> "LocalOp":
        """Same operator written on a larger register set."""
        target = layout.sort(registers)
        if not set(self.registers) <= set(target):
            raise ValueError("cannot extend onto a register set that drops registers")
        if target == self.registers:
            return self
        sub = RegisterLayout(tuple(layout.register(r) for r in target))
        d = sub.total_dim
        cols = [_subsystem_apply(self.matrix, np.eye(d)[:, j], sub, self.registers) for j in range(d)]
        return LocalOp(target, np.array(cols).T, self.name)

    def conjugated(self, unitaries: dict, layout: RegisterLayout, name: str | None = None) -> "LocalOp":
        """U K U^dagger with U a product of per-register unitaries (missing ones = I)."""
        U = np.ones((1, 1), dtype=complex)
        for r in self.registers:
            U = np.kron(U, unitaries.get(r, np.eye(layout.register(r).dim)))
        return LocalOp(self.registers, U @ self.matrix @ U.conj().T, self.name if name is None else name)

    def to_full(self, layout: RegisterLayout) -> np.ndarray:
        """Dense matrix on the whole layout, built by an explicit index permutation."""
        own = [layout.index(r) for r in self.registers]
        rest = [i for i in range(len(layout.registers)) if i not in own]
        order = own + rest
        dims = layout.dims
        d_rest = int(np.prod([dims[i] for i in rest])) if rest else 1
        big = np.kron(self.matrix, np.eye(d_rest))
        # perm[p] = composite index (layout order) of the p-th basis state in `order`
        grid = np.arange(layout.total_dim).reshape(dims).transpose(order).reshape(-1)
        full = np.zeros_like(big)
        full[np.ix_(grid, grid)] = big
        return full


# ---------------------------------------------------------------------------
# P[...] notation

_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")
_KET_TERM = re.compile(r"\s*([+-]?)\s*\|\s*(\d+)\s*>")


def _normalize_text(text: str) -> str:
    return (
        text.translate(_SUBSCRIPTS)
        .replace("⟩", ">")
        .replace("〉", ">")
        .replace("−", "-")
        .replace("–", "-")
    )


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced brackets in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise ValueError(f"unbalanced brackets in {text!r}")
    parts.append("".join(cur))
    return parts


def parse_ket(text: str, dim: int) -> np.ndarray:
    """``"|1>-|2>"`` -> normalized vector of length ``dim``."""
    text = _normalize_text(text).strip()
    pos, v = 0, np.zeros(dim, dtype=complex)
    if not text:
        raise ValueError("empty ket")
    while pos < len(text):
        m = _KET_TERM.match(text, pos)
        if not m:
            raise ValueError(f"malformed ket expression {text!r}")
        k = int(m.group(2))
        if k >= dim:
            raise ValueError(f"|{k}> out of range for a {dim}-dimensional register")
        v[k] += -1 if m.group(1) == "-" else 1
        pos = m.end()
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError(f"ket {text!r} is the zero vector")
    return v / n


def _group_projector(text: str, dim: int, tol: float) -> np.ndarray:
    text = text.strip()
    kets = [text]
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1]
        kets = _split_top(inner, ",") if "," in inner else [inner]
    vecs = [parse_ket(k, dim) for k in kets]
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            if abs(np.vdot(vecs[i], vecs[j])) > tol:
                raise ValueError(f"kets in group {text!r} are not orthogonal")
    return sum(np.outer(v, v.conj()) for v in vecs)


def parse_projector(spec: str, layout: RegisterLayout, name: str = "", tol: float = 1e-10) -> LocalOp:
    """Parse ``P[(|0>,|1>)_A; |0>_a] + P[|2>_A; |1>_a]`` into a LocalOp.

    Each P-term is a tensor product of per-register projectors (sums over
    the listed orthonormal kets); registers a term does not mention carry
    the identity.  The sum must itself be a projector.
    """
    text = _normalize_text(spec).strip()
    terms = []
    for term in _split_top(text, "+"):
        term = term.strip()
        m = re.fullmatch(r"P\s*\[(.*)\]", term, flags=re.S)
        if not m:
            raise ValueError(f"malformed projector term {term!r}")
        groups = {}
        for group in _split_top(m.group(1), ";"):
            gm = re.fullmatch(r"\s*(.+?)\s*_\s*([A-Za-z]\w*)\s*", group, flags=re.S)
            if not gm:
                raise ValueError(f"malformed register group {group!r}")
            reg = gm.group(2)
            if reg not in layout.names:
                raise ValueError(f"unknown register {reg!r} in {term!r}")
            dim = layout.register(reg).dim
            if reg in groups:
                raise ValueError(f"register {reg} listed twice in {term!r}")
            groups[reg] = _group_projector(gm.group(1), dim, tol)
        terms.append(groups)
    regs = layout.sort(r for g in terms for r in g)
    total = None
    for groups in terms:
        mat = np.ones((1, 1), dtype=complex)
        for r in regs:
            mat = np.kron(mat, groups.get(r, np.eye(layout.register(r).dim)))
        total = mat if total is None else total + mat
    if np.max(np.abs(total @ total - total)) > tol or np.max(np.abs(total - total.conj().T)) > tol:
        raise ValueError(f"{spec!r} is not a projector (terms overlap)")
    return LocalOp(regs, total, name or spec)


def projector_from_spec(spec: str, layout: RegisterLayout) -> np.ndarray:
    return parse_projector(spec, layout).to_full(layout)
