"""Entanglement-assisted discrimination of the 3x3x4 UPB with two ebits.

Alice holds (A, a), Bob holds (B, b1, b2), Charlie holds (C, c).  Bob
shares |00>+|11> with Alice on (a, b1) and with Charlie on (b2, c).  The
measurement tree is written in P[...] notation (see
:mod:`upbkit.registers`); every outcome operator is a projector local to
the acting party.

Only the M1 & L1 branch of the first round is written out.  The other
three are generated by a symmetry map and then validated; if validation
fails the tree is downgraded to "detailed-branch-only" mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constructions import ProductState, StateSet, build_334
from .linalg import DEFAULT_TOL, ToleranceConfig, kron_all
from .registers import LocalOp, RegisterLayout, parse_projector
from .verify.locc import GreedyResult, GreedySearch, identify

LAYOUT = RegisterLayout.of(
    ("A", "Alice", 3),
    ("B", "Bob", 3),
    ("C", "Charlie", 4),
    ("a", "Alice", 2),
    ("b1", "Bob", 2),
    ("b2", "Bob", 2),
    ("c", "Charlie", 2),
)
DETAILED_BRANCH = ("M1", "L1")
SYMMETRIES = ("ancilla-flip", "tile-reflection")
PROB_EPS = 1e-18  # squared-amplitude cutoff relative to the input norm


# ---------------------------------------------------------------------------
# tree types


@dataclass
class Leaf:
    name: str
    expected: frozenset | None = None


@dataclass
class Outcome:
    name: str
    op: LocalOp
    child: "MeasurementNode | Leaf"


@dataclass
class MeasurementNode:
    party: str
    step: str
    outcomes: list[Outcome]

    def registers(self) -> tuple[str, ...]:
        return LAYOUT.sort(r for o in self.outcomes for r in o.op.registers)

    def completeness_residual(self, layout: RegisterLayout = LAYOUT) -> float:
        regs = self.registers()
        ops = [o.op.extend(regs, layout) for o in self.outcomes]
        total = sum(K.matrix.conj().T @ K.matrix for K in ops)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def local_to_party(self, layout: RegisterLayout = LAYOUT) -> bool:
        return all(layout.owner(r) == self.party for r in self.registers())


def _node(party: str, step: str, outcomes, complement: tuple | None = None) -> MeasurementNode:
    """Outcomes given as (name, P-spec or LocalOp, child); the complement,
    if requested, is I minus their sum."""
    built = []
    for name, spec, child in outcomes:
        op = spec if isinstance(spec, LocalOp) else parse_projector(spec, LAYOUT, name)
        built.append(Outcome(name, LocalOp(op.registers, op.matrix, name), child))
    if complement is not None:
        name, child = complement
        regs = LAYOUT.sort(r for o in built for r in o.op.registers)
        ops = [o.op.extend(regs, LAYOUT) for o in built]
        rest = np.eye(ops[0].matrix.shape[0]) - sum(K.matrix for K in ops)
        built.append(Outcome(name, LocalOp(regs, rest, name), child))
    node = MeasurementNode(party, step, built)
    if not node.local_to_party():
        raise ValueError(f"{step}: operator acts outside {party}'s registers")
    return node


def _names(stem: str, shape: tuple[int, int], skip_zero: bool = True) -> set[str]:
    return {
        f"{stem}({i},{j})"
        for i in range(shape[0])
        for j in range(shape[1])
        if not (skip_zero and (i, j) == (0, 0))
    }


def detailed_subtree() -> MeasurementNode:
    """Everything after M1 and L1 have both clicked."""
    psi1 = _names("psi1", (2, 3))
    leaves_5 = {}
    for a_name, a_spec in (("M5,1", "P[(|0>+|1>)_a]"), ("M5,1bar", "P[(|0>-|1>)_a]")):
        step52 = _node(
            "Bob",
            "Step 5 (Bob, b1)",
            [
                ("M5,2", "P[(|0>+|1>)_b1]", Leaf(f"{a_name}/M5,2", frozenset(psi1 | {"S"}))),
                ("M5,2bar", "P[(|0>-|1>)_b1]", Leaf(f"{a_name}/M5,2bar", frozenset(psi1 | {"S"}))),
            ],
        )
        leaves_5[a_name] = (a_spec, step52)
    step51 = _node("Alice", "Step 5 (Alice, a)", [(n, s, c) for n, (s, c) in leaves_5.items()])

    # printed as P[|0>_A], which annihilates every remaining candidate; the
    # stated outcomes (psi3 and S on the click) require A = 2
    step6 = _node(
        "Alice",
        "Step 6 (Alice)",
        [("M6", "P[|2>_A]", Leaf("M6", frozenset(_names("psi3", (2, 3)) | {"S"})))],
        complement=("M6bar", Leaf("M6bar", frozenset({"varphi(1)", "S"}))),
    )
    step5 = _node("Bob", "Step 5 (Bob)", [("M5", "P[|0>_B]", step51)], complement=("M5bar", step6))
    step4 = _node(
        "Charlie",
        "Step 4 (Charlie)",
        [("M4", "P[|3>_C]", Leaf("M4", frozenset(_names("psi2", (2, 2)) | {"S"})))],
        complement=("M4bar", step5),
    )
    step3 = _node(
        "Alice",
        "Step 3 (Alice)",
        [("M3", "P[|0>_A]", Leaf("M3", frozenset(_names("phi3", (2, 3)) | {"S"})))],
        complement=("M3bar", step4),
    )
    step21 = _node(
        "Alice",
        "Step 2 (Alice)",
        [("M2,1,1", "P[(|0>-|1>)_A]", Leaf("M2,1,1", frozenset({f"phi1(1,{j})" for j in range(3)})))],
        complement=("M2,1,1bar", Leaf("M2,1,1bar", frozenset({"phi1(0,1)", "phi1(0,2)", "S"}))),
    )
    return _node(
        "Bob",
        "Step 2 (Bob)",
        [
            ("M2,1", "P[|2>_B; |0>_b1; |0>_b2]", step21),
            ("M2,2", "P[(|1>-|2>)_B; |0>_b1; |1>_b2]", Leaf("M2,2", frozenset({"phi2(0,1)", "phi2(1,1)"}))),
            ("M2,3", "P[(|1>+|2>)_B; |0>_b1; |1>_b2]", Leaf("M2,3", frozenset({"phi2(1,0)", "S"}))),
        ],
        complement=("M2bar", step3),
    )


def transform_subtree(node, unitaries: dict, suffix: str = "*"):
    """Conjugate every operator by a product of per-register unitaries.

    Leaves lose their expected candidate sets: generated branches are
    validated by invariants only.
    """
    if isinstance(node, Leaf):
        return Leaf(node.name + suffix, None)
    outs = [
        Outcome(o.name + suffix, o.op.conjugated(unitaries, LAYOUT, o.name + suffix), transform_subtree(o.child, unitaries, suffix))
        for o in node.outcomes
    ]
    return MeasurementNode(node.party, node.step, outs)


_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _reflection(d: int) -> np.ndarray:
    return np.eye(d)[::-1].astype(complex)


def _branch_maps(symmetry: str) -> dict[tuple[str, str], dict]:
    """Per non-detailed first-round branch, the unitaries mapping the
    detailed subtree onto it."""
    if symmetry == "ancilla-flip":
        # M1bar = X_a M1 X_a and X_a acts on the (a, b1) pair like X_b1,
        # so that branch sees the detailed post-states with a, b1 flipped
        alice_bob = {"a": _X, "b1": _X}
        bob_charlie = {"b2": _X, "c": _X}
        return {
            ("M1", "L1bar"): bob_charlie,
            ("M1bar", "L1"): alice_bob,
            ("M1bar", "L1bar"): {**alice_bob, **bob_charlie},
        }
    if symmetry == "tile-reflection":
        refl = {r: _reflection(LAYOUT.register(r).dim) for r in ("A", "B", "C")}
        return {b: refl for b in (("M1", "L1bar"), ("M1bar", "L1"), ("M1bar", "L1bar"))}
    raise ValueError(f"unknown symmetry {symmetry!r}; choose from {SYMMETRIES}")


# ---------------------------------------------------------------------------
# validation


@dataclass
class LeafAnalysis:
    path: tuple[str, ...]
    candidates: tuple[str, ...]
    expected: frozenset | None
    greedy: GreedyResult

    @property
    def matches_expected(self) -> bool:
        return self.expected is None or set(self.candidates) == set(self.expected)

    @property
    def ok(self) -> bool:
        return self.greedy.distinguishable and self.matches_expected


@dataclass
class NodeAnalysis:
    path: tuple[str, ...]
    step: str
    party: str
    completeness_residual: float
    max_overlap: float  # worst relative overlap among surviving candidates, any outcome
    local: bool


@dataclass
class BranchValidation:
    branch: tuple[str, str]
    generated: bool
    valid: bool
    problems: list[str] = field(default_factory=list)


@dataclass
class ProtocolTree:
    root: MeasurementNode
    upb: StateSet
    symmetry: str
    layout: RegisterLayout = LAYOUT
    nodes: dict = field(default_factory=dict)
    leaves: dict = field(default_factory=dict)
    branches: list[BranchValidation] = field(default_factory=list)
    tol: ToleranceConfig = DEFAULT_TOL

    @property
    def mode(self) -> str:
        return "full" if self.branches and all(b.valid for b in self.branches) else "detailed-branch-only"

    def covers(self, path: Sequence[str]) -> bool:
        """Whether runs along ``path`` are trusted in the current mode."""
        return self.mode == "full" or tuple(path[:2]) == DETAILED_BRANCH

    def find_leaf(self, name: str) -> LeafAnalysis:
        for la in self.leaves.values():
            if la.path[-1] == name and la.path[:2] == DETAILED_BRANCH:
                return la
        raise KeyError(name)


def initial_state(psi: ProductState | np.ndarray) -> np.ndarray:
    """|psi>_ABC (|00>+|11>)_{a,b1} (|00>+|11>)_{b2,c} in layout order."""
    v = psi.vector() if isinstance(psi, ProductState) else np.asarray(psi, dtype=complex).ravel()
    if v.size != 36:
        raise ValueError(f"expected a 3x3x4 state, got dimension {v.size}")
    bell = np.array([1, 0, 0, 1], dtype=complex)
    # (ABC) (a b1) (b2 c) -> reorder to A B C a b1 b2 c: already contiguous
    return kron_all([v, bell, bell])


def _orth_max(vecs: list[np.ndarray]) -> float:
    if len(vecs) < 2:
        return 0.0
    V = np.array(vecs)
    n = np.linalg.norm(V, axis=1)
    G = np.abs(V.conj() @ V.T) / np.outer(n, n)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def validate_tree(tree: ProtocolTree) -> ProtocolTree:
    names = tree.upb.names()
    start = {n: initial_state(s) for n, s in zip(names, tree.upb.states)}
    ref = {n: np.linalg.norm(v) for n, v in start.items()}
    search = GreedySearch(tree.layout, tree.tol)
    tree.nodes.clear()
    tree.leaves.clear()

    def walk(node, cands, path):
        if isinstance(node, Leaf):
            g = search.solve(cands, ref)
            tree.leaves[path] = LeafAnalysis(path, tuple(cands), node.expected, g)
            return
        worst = 0.0
        children = []
        for o in node.outcomes:
            post = {}
            for k, v in cands.items():
                w = o.op.apply(v, tree.layout)
                if np.linalg.norm(w) > tree.tol.zero_tol * ref[k]:
                    post[k] = w
            worst = max(worst, _orth_max(list(post.values())))
            children.append((o, post))
        tree.nodes[path] = NodeAnalysis(
            path, node.step, node.party, node.completeness_residual(tree.layout), worst, node.local_to_party(tree.layout)
        )
        for o, post in children:
            if post:
                walk(o.child, post, path + (o.name,))

    walk(tree.root, start, ())

    maps = _branch_maps(tree.symmetry)
    tree.branches = []
    for branch in [DETAILED_BRANCH] + list(maps):
        problems = []
        for path, na in tree.nodes.items():
            if tuple(path[:2]) != branch and len(path) >= 2:
                continue
            if na.completeness_residual > 1e-9:
                problems.append(f"{'/'.join(path) or 'root'}: completeness residual {na.completeness_residual:.2e}")
            if na.max_overlap > tree.tol.zero_tol:
                problems.append(f"{'/'.join(path) or 'root'}: orthogonality broken ({na.max_overlap:.2e})")
            if not na.local:
                problems.append(f"{'/'.join(path)}: operator not local")
        for path, la in tree.leaves.items():
            if tuple(path[:2]) != branch:
                continue
            if not la.matches_expected:
                problems.append(f"{'/'.join(path)}: candidates {sorted(la.candidates)} != expected {sorted(la.expected)}")
            if not la.greedy.distinguishable:
                problems.append(f"{'/'.join(path)}: leaf {sorted(la.candidates)} {la.greedy.verdict}")
        tree.branches.append(BranchValidation(branch, branch != DETAILED_BRANCH, not problems, problems))
    return tree


def build_appendix_d_tree(symmetry: str = "ancilla-flip", validate: bool = True, tol: ToleranceConfig = DEFAULT_TOL) -> ProtocolTree:
    maps = _branch_maps(symmetry)
    detailed = detailed_subtree()
    m1 = "P[(|0>,|1>)_A; |0>_a] + P[|2>_A; |1>_a]"
    l1 = "P[(|1>,|2>,|3>)_C; |0>_c] + P[|0>_C; |1>_c]"

    def charlie(alice_outcome):
        kids = {}
        for lname in ("L1", "L1bar"):
            key = (alice_outcome, lname)
            kids[lname] = detailed if key == DETAILED_BRANCH else transform_subtree(detailed, maps[key])
        return _node("Charlie", "Step 1 (Charlie)", [("L1", l1, kids["L1"])], complement=("L1bar", kids["L1bar"]))

    root = _node("Alice", "Step 1 (Alice)", [("M1", m1, charlie("M1"))], complement=("M1bar", charlie("M1bar")))
    tree = ProtocolTree(root, build_334(), symmetry, tol=tol)
    return validate_tree(tree) if validate else tree


# ---------------------------------------------------------------------------
# running


@dataclass
class PathRecord:
    steps: list[tuple[str, str, float]]  # (node step, outcome, post-state norm^2)
    probability: float
    leaf: str
    candidates: tuple[str, ...]
    verdict: str | None  # None on paths the current mode does not cover
    covered: bool

    @property
    def outcome_path(self) -> tuple[str, ...]:
        return tuple(s[1] for s in self.steps)


@dataclass
class RunTrace:
    input: str
    paths: list[PathRecord]
    verdict: str
    success: bool
    mode: str

    @property
    def total_probability(self) -> float:
        return float(sum(p.probability for p in self.paths))

    @property
    def covered_probability(self) -> float:
        return float(sum(p.probability for p in self.paths if p.covered))

    def transcript(self) -> str:
        lines = [f"input {self.input}: verdict {self.verdict} ({'ok' if self.success else 'FAILED'})"]
        for p in self.paths:
            route = " > ".join(p.outcome_path)
            tail = p.verdict if p.covered else "not covered in detailed-branch-only mode"
            lines.append(f"  {route}  p={p.probability:.6f}  -> {tail}")
        return "\n".join(lines)


def _resolve_input(tree: ProtocolTree, psi) -> tuple[str | None, np.ndarray | None]:
    names = tree.upb.names()
    if isinstance(psi, str):
        return (psi, tree.upb.find(psi).vector()) if psi in names else (None, None)
    v = psi.vector() if isinstance(psi, ProductState) else np.asarray(psi, dtype=complex).ravel()
    if v.size != 36:
        return None, None
    for n, s in zip(names, tree.upb.states):
        u = s.vector()
        c = np.vdot(u, v) / np.vdot(u, u)
        if abs(c) > 0 and np.linalg.norm(v - c * u) <= tree.tol.zero_tol * np.linalg.norm(v):
            return n, v
    return None, None


def run_discrimination(tree: ProtocolTree, psi) -> RunTrace:
    """Expand every branch reachable from ``psi`` and apply the leaf sketches."""
    name, v = _resolve_input(tree, psi)
    if name is None:
        return RunTrace(str(getattr(getattr(psi, "label", None), "tile", psi)), [], "unknown input", False, tree.mode)
    x0 = initial_state(v)
    base = float(np.vdot(x0, x0).real)
    records: list[PathRecord] = []

    def walk(node, x, steps):
        if isinstance(node, Leaf):
            path = tuple(s[1] for s in steps)
            covered = tree.covers(path)
            la = tree.leaves.get(path)
            verdict = None
            if covered:
                if la is None or not la.greedy.distinguishable:
                    verdict = "unresolved"
                else:
                    hits = identify(la.greedy.sketch, x, tree.layout)
                    hits = {k: w for k, w in hits.items() if w > PROB_EPS * base}
                    verdict = next(iter(hits)) if len(hits) == 1 else "ambiguous"
            records.append(
                PathRecord(steps, float(np.vdot(x, x).real) / base, node.name, la.candidates if la else (), verdict, covered)
            )
            return
        for o in node.outcomes:
            w = o.op.apply(x, tree.layout)
            nrm = float(np.vdot(w, w).real)
            if nrm > PROB_EPS * base:
                walk(o.child, w, steps + [(node.step, o.name, nrm / base)])

    walk(tree.root, x0, [])
    covered = [r for r in records if r.covered]
    success = bool(covered) and all(r.verdict == name for r in covered)
    return RunTrace(name, records, name if success else "failed", success, tree.mode)


# ---------------------------------------------------------------------------
# resources


@dataclass(frozen=True)
class ResourceLedger:
    """Maximally entangled pairs: (count, local dimension) per party pair."""

    ab: tuple[int, int] = (0, 2)
    ac: tuple[int, int] = (0, 2)
    bc: tuple[int, int] = (0, 2)

    def __post_init__(self):
        for count, dim in (self.ab, self.ac, self.bc):
            if count < 0:
                raise ValueError("pair counts must be non-negative")
            if count and dim < 2:
                raise ValueError("entangled pairs need local dimension >= 2")


def resource_cost(ledger: ResourceLedger) -> float:
    return float(sum(count * np.log2(dim) for count, dim in (ledger.ab, ledger.ac, ledger.bc) if count))


PROTOCOL_LEDGER = ResourceLedger(ab=(1, 2), bc=(1, 2))
TELEPORTATION_LEDGER = ResourceLedger(ab=(1, 3), bc=(1, 3))


def discriminate_all(tree: ProtocolTree | None = None, inputs: Iterable | None = None) -> list[RunTrace]:
    tree = tree or build_appendix_d_tree()
    inputs = tree.upb.names() if inputs is None else inputs
    return [run_discrimination(tree, psi) for psi in inputs]
