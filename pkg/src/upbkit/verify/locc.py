"""Greedy search for a local protocol that tells a set of orthogonal states apart.

Two kinds of move are tried at each node:

grouping  a party splits the candidates into classes whose local ranges
          are mutually orthogonal, then projects onto each class.  This
          never disturbs a candidate, so it is applied greedily.
register  a party measures one of its registers in the computational
          basis, the Fourier basis, or a two-outcome {|k><k|, rest}
          split.  Such a move is admissible only if, for every outcome,
          the surviving candidates stay mutually orthogonal.  These are
          searched with backtracking under a depth and node budget.

Success is sufficient for LOCC distinguishability; failure is reported
as "unknown", never as "not distinguishable".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from ..constructions import ProductState
from ..linalg import DEFAULT_TOL, PARTY_NAMES, ToleranceConfig, root_of_unity
from ..registers import LocalOp, RegisterLayout


@dataclass
class SketchBranch:
    outcome: str
    op: LocalOp
    child: "SketchNode | Hashable | None"  # None: no candidate reaches this outcome


@dataclass
class SketchNode:
    party: str
    move: str
    branches: list[SketchBranch] = field(default_factory=list)

    def lines(self, indent: int = 0) -> list[str]:
        pad = "  " * indent
        out = [f"{pad}{self.party}: {self.move}"]
        for b in self.branches:
            if isinstance(b.child, SketchNode):
                out.append(f"{pad}  [{b.outcome}]")
                out.extend(b.child.lines(indent + 2))
            else:
                out.append(f"{pad}  [{b.outcome}] -> {b.child if b.child is not None else '(none)'}")
        return out


@dataclass
class GreedyResult:
    distinguishable: bool
    sketch: "SketchNode | Hashable | None"
    nodes_visited: int
    reason: str = ""

    @property
    def verdict(self) -> str:
        return "distinguishable" if self.distinguishable else "unknown"

    def __iter__(self):
        yield self.distinguishable
        yield self.sketch

    def describe(self) -> str:
        if not self.distinguishable:
            return f"unknown ({self.reason})"
        if isinstance(self.sketch, SketchNode):
            return "\n".join(self.sketch.lines())
        return f"single candidate {self.sketch}"


class _BudgetExceeded(Exception):
    pass


def _fourier(d: int) -> np.ndarray:
    w = root_of_unity(d)
    return np.array([[w ** (k * t) for t in range(d)] for k in range(d)]) / np.sqrt(d)


class GreedySearch:
    def __init__(
        self,
        layout: RegisterLayout,
        tol: ToleranceConfig = DEFAULT_TOL,
        allow_register_moves: bool = True,
        max_depth: int = 4,
        budget: int = 2000,
    ):
        self.layout = layout
        self.tol = tol
        self.allow_register_moves = allow_register_moves
        self.max_depth = max_depth
        self.budget = budget
        self.visited = 0
        self._moves = self._register_moves() if allow_register_moves else []

    # -- helpers -----------------------------------------------------------

    def _party_matrix(self, vec, regs) -> np.ndarray:
        axes = [self.layout.index(r) for r in regs]
        t = np.moveaxis(vec.reshape(self.layout.dims), axes, range(len(axes)))
        d = int(np.prod(t.shape[: len(axes)]))
        return t.reshape(d, -1)

    def _range(self, M) -> np.ndarray:
        u, s, _ = np.linalg.svd(M, full_matrices=False)
        if s.size == 0 or s[0] == 0:
            return u[:, :0]
        return u[:, s > self.tol.rank_tol * s[0]]

    def _groups(self, cands: Mapping, party: str):
        """Classes of candidates whose local ranges on ``party`` are
        mutually orthogonal, with the projector onto each class."""
        regs = self.layout.owned_by(party)
        keys = list(cands)
        ranges = [self._range(self._party_matrix(cands[k], regs)) for k in keys]
        U = np.concatenate(ranges, axis=1)
        G = np.abs(U.conj().T @ U)
        edges = np.cumsum([0] + [r.shape[1] for r in ranges])
        linked = np.array(
            [[G[edges[i] : edges[i + 1], edges[j] : edges[j + 1]].max(initial=0.0) for j in range(len(keys))] for i in range(len(keys))]
        ) > self.tol.zero_tol
        parent = list(range(len(keys)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                if linked[i, j] and find(i) != find(j):
                    parent[find(i)] = find(j)
        classes: dict[int, list[int]] = {}
        for i in range(len(keys)):
            classes.setdefault(find(i), []).append(i)
        if len(classes) < 2:
            return None
        out = []
        for members in classes.values():
            Q = self._range(np.concatenate([ranges[i] for i in members], axis=1))
            out.append(([keys[i] for i in members], Q @ Q.conj().T))
        return regs, out

    def _register_moves(self):
        moves = []
        for reg in self.layout.registers:
            d = reg.dim
            comp = [(f"|{k}>", np.outer(np.eye(d)[k], np.eye(d)[k]).astype(complex)) for k in range(d)]
            moves.append(((reg.name, "computational"), reg, comp))
            F = _fourier(d)
            four = [(f"f{k}", np.outer(F[k], F[k].conj())) for k in range(d)]
            moves.append(((reg.name, "fourier"), reg, four))
            if d > 2:
                for k in range(d):
                    p = comp[k][1]
                    moves.append(((reg.name, f"split{k}"), reg, [(f"|{k}>", p), (f"not {k}", np.eye(d) - p)]))
        return moves

    def _orthogonal(self, vecs) -> bool:
        if len(vecs) < 2:
            return True
        V = np.array(vecs)
        n = np.linalg.norm(V, axis=1)
        G = np.abs(V.conj() @ V.T) / np.outer(n, n)
        np.fill_diagonal(G, 0.0)
        return float(G.max()) <= self.tol.zero_tol

    def _apply_outcomes(self, cands, ref_norms, reg, outcomes):
        """Post-measurement candidate sets, or None if orthogonality breaks."""
        posts = []
        for name, mat in outcomes:
            op = LocalOp((reg.name,), mat, name)
            surv = {}
            for k, v in cands.items():
                w = op.apply(v, self.layout)
                if np.linalg.norm(w) > self.tol.zero_tol * ref_norms[k]:
                    surv[k] = w
            if not self._orthogonal(list(surv.values())):
                return None
            posts.append((name, op, surv))
        return posts

    def _score(self, cands, posts) -> int:
        score = 0
        for _, _, surv in posts:
            if len(surv) < len(cands):
                score += 1
            if len(surv) <= 1:
                score += 1
            elif any(self._groups(surv, p) for p in self.layout.parties):
                score += 1
        return score

    # -- search ------------------------------------------------------------

    def solve(self, cands: Mapping, ref_norms: Mapping | None = None):
        cands = {k: np.asarray(v, dtype=complex).ravel() for k, v in cands.items()}
        if ref_norms is None:
            ref_norms = {k: np.linalg.norm(v) for k, v in cands.items()}
        self.visited = 0
        if not self._orthogonal(list(cands.values())):
            return GreedyResult(False, None, 0, "input states are not mutually orthogonal")
        try:
            sketch = self._solve(cands, ref_norms, frozenset(), 0)
        except _BudgetExceeded:
            return GreedyResult(False, None, self.visited, f"node budget {self.budget} exhausted")
        if sketch is None and len(cands) > 1:
            return GreedyResult(False, None, self.visited, "no admissible local move found")
        return GreedyResult(True, sketch, self.visited)

    def _solve(self, cands, ref_norms, used, depth):
        if len(cands) == 1:
            return next(iter(cands))
        if not cands:
            return None
        self.visited += 1
        if self.visited > self.budget:
            raise _BudgetExceeded
        for party in self.layout.parties:
            split = self._groups(cands, party)
            if split is None:
                continue
            regs, groups = split
            node = SketchNode(party, "group by local support on " + ",".join(regs))
            total = np.zeros_like(groups[0][1])
            for i, (members, Q) in enumerate(groups):
                total = total + Q
                op = LocalOp(regs, Q, f"group{i}")
                sub = {k: op.apply(cands[k], self.layout) for k in members}
                child = self._solve(sub, ref_norms, used, depth)
                if child is None:
                    return None
                node.branches.append(SketchBranch(f"group{i}", op, child))
            rest = np.eye(total.shape[0]) - total
            if np.max(np.abs(rest)) > self.tol.zero_tol:
                node.branches.append(SketchBranch("rest", LocalOp(regs, rest, "rest"), None))
            return node
        if not self.allow_register_moves or depth >= self.max_depth:
            return None
        ranked = []
        for key, reg, outcomes in self._moves:
            if key in used:
                continue
            posts = self._apply_outcomes(cands, ref_norms, reg, outcomes)
            if posts is None:
                continue
            ranked.append((self._score(cands, posts), len(ranked), key, reg, posts))
        ranked.sort(key=lambda t: (-t[0], t[1]))
        for _, _, key, reg, posts in ranked:
            node = SketchNode(reg.owner, f"measure {reg.name} in {key[1]} basis")
            for name, op, surv in posts:
                child = self._solve(surv, ref_norms, used | {key}, depth + 1) if surv else None
                if surv and child is None:
                    break
                node.branches.append(SketchBranch(name, op, child))
            else:
                return node
        return None


def identify(sketch, vec, layout: RegisterLayout, threshold: float = 1e-18) -> dict:
    """Run a sketch on one vector: {final label: norm^2 reaching it}."""
    vec = np.asarray(vec, dtype=complex).ravel()
    base = float(np.vdot(vec, vec).real)
    out: dict = {}

    def walk(node, v):
        if not isinstance(node, SketchNode):
            out[node] = out.get(node, 0.0) + float(np.vdot(v, v).real)
            return
        for b in node.branches:
            w = b.op.apply(v, layout)
            if np.vdot(w, w).real > threshold * base:
                walk(b.child, w)

    walk(sketch, vec)
    return out


def product_layout(dims: Sequence[int]) -> RegisterLayout:
    return RegisterLayout.of(*[(PARTY_NAMES[p], PARTY_NAMES[p], d) for p, d in enumerate(dims)])


def greedy_locc_distinguishable(
    states: Sequence[ProductState],
    tol: ToleranceConfig = DEFAULT_TOL,
) -> GreedyResult:
    """Grouping-only greedy test on product states, keyed by their labels."""
    states = list(states)
    if not states:
        return GreedyResult(True, None, 0)
    layout = product_layout(states[0].dims)
    search = GreedySearch(layout, tol, allow_register_moves=False)
    return search.solve({s.label: s.vector() for s in states})
