import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upbkit.constructions import (
    StateLabel,
    StateSet,
    build_334,
    build_layered,
    complete_basis,
    product_state,
    removed_states,
)
from upbkit.linalg import Bipartition, submatrix
from upbkit.verify import (
    ConstraintSystem,
    LemmaHypothesisError,
    SeesawConfig,
    block_trivial_verify,
    block_zeros_verify,
    brute_force_solution_dim,
    check_completeness,
    check_orthogonality,
    check_strong_nonlocality,
    complement_projector,
    greedy_locc_distinguishable,
    op_constraints,
    product_witness,
    seesaw_product_overlap,
    solve_triviality,
)
from upbkit.verify.lemmas import random_block_trivial_instance, random_block_zeros_instance
from upbkit.verify.nonlocality import hermitian_basis, hermitian_to_params, params_to_hermitian

e = np.eye


def custom(dims, locs_list):
    states = tuple(product_state(l, StateLabel("x", 0, (i,))) for i, l in enumerate(locs_list))
    return StateSet(tuple(dims), states)


# -- orthogonality / completeness --------------------------------------------


def test_orthogonality_examples(upb334, shifts):
    r = check_orthogonality(upb334)
    assert r.passed and r.max_overlap <= 1e-12
    assert check_orthogonality(shifts).passed
    copy = product_state(upb334.find("psi1(0,1)").locals, StateLabel("dup"))
    bad = check_orthogonality(StateSet(upb334.dims, upb334.states + (copy,), family="example334"))
    assert not bad.passed
    assert "psi1(0,1)" in bad.worst_pair
    assert np.isclose(bad.max_overlap, 1.0)


def test_orthogonality_is_scale_invariant(upb334):
    scaled = custom(upb334.dims, [[7.0 * s.locals[0], 1e-3j * s.locals[1], s.locals[2]] for s in upb334])
    assert check_orthogonality(scaled).max_overlap <= 1e-12


def test_completeness_examples(upb334):
    removed = removed_states((3, 3, 4), 0)
    r = check_completeness(upb334, removed)
    assert r.passed and r.total == 36
    short = (StateSet(removed[0].dims, removed[0].states[1:]), removed[1])
    assert not check_completeness(upb334, short).passed
    r = check_completeness(build_layered((3, 4, 5), 0))
    assert r.passed and r.total == 60 and r.rank == 60


def test_completeness_oracle_gram_rank():
    upb = build_layered((3, 4, 5), 0)
    removed, flagged = removed_states((3, 4, 5), 0)
    V = np.array([s.vector() for s in upb if s.label.tile != "S"] + [s.vector() for s in removed] + [flagged.vector()])
    assert np.linalg.matrix_rank(V.conj() @ V.T) == 60


def test_complement_projector_examples(upb334):
    P = complement_projector(upb334)
    assert np.allclose(P @ P, P) and np.allclose(P, P.conj().T)
    assert round(np.trace(P).real) == 8
    assert np.allclose(P @ upb334.vectors().T, 0)
    assert np.allclose(complement_projector(complete_basis((3, 3, 4), 0)), 0, atol=1e-12)
    empty = StateSet((2, 2, 2), ())
    assert np.allclose(complement_projector(empty), np.eye(8))
    copy = product_state(upb334.states[0].locals, StateLabel("dup"))
    dup = StateSet(upb334.dims, upb334.states + (copy,))
    with pytest.raises(ValueError):
        complement_projector(dup)


def test_product_witness_reconstructs_complement_vectors(upb334):
    P = complement_projector(upb334)
    x = P @ np.random.default_rng(0).standard_normal(36)
    w = product_witness(x, upb334)
    assert w.residual < 1e-10
    assert len(w.labels) == 9


# -- seesaw ------------------------------------------------------------------


def test_seesaw_positive_control():
    cb = complete_basis((3, 3, 4), 0)
    missing = cb.states[5]
    rest = StateSet(cb.dims, cb.states[:5] + cb.states[6:])
    res = seesaw_product_overlap(complement_projector(rest), cb.dims, SeesawConfig(restarts=20))
    assert res.best_overlap >= 1 - 1e-9
    v = missing.vector() / np.linalg.norm(missing.vector())
    assert abs(np.vdot(v, res.witness.vector() / np.linalg.norm(res.witness.vector()))) ** 2 >= 1 - 1e-8


def test_seesaw_upb_and_shifts(upb334, shifts):
    res = seesaw_product_overlap(complement_projector(upb334), upb334.dims, SeesawConfig(restarts=50))
    assert res.best_overlap <= 1 - 1e-3
    assert res.monotone
    res = seesaw_product_overlap(complement_projector(shifts), shifts.dims, SeesawConfig(restarts=50))
    assert res.best_overlap <= 1 - 1e-3


def test_seesaw_deterministic_and_bounded(upb334):
    P = complement_projector(upb334)
    a = seesaw_product_overlap(P, upb334.dims, SeesawConfig(restarts=10, seed=3))
    b = seesaw_product_overlap(P, upb334.dims, SeesawConfig(restarts=10, seed=3))
    assert a.best_overlap == b.best_overlap
    assert np.array_equal(a.overlaps, b.overlaps)
    assert 0.0 <= a.best_overlap <= 1.0 + 1e-12
    w = a.witness.vector()
    assert np.isclose(np.vdot(w, P @ w).real / np.vdot(w, w).real, a.best_overlap)


def test_seesaw_edge_cases():
    res = seesaw_product_overlap(np.zeros((8, 8)), (2, 2, 2), SeesawConfig(restarts=2))
    assert res.best_overlap == 0.0
    with pytest.raises(ValueError):
        seesaw_product_overlap(-np.eye(8), (2, 2, 2))
    with pytest.raises(ValueError):
        SeesawConfig(restarts=0)


# -- constraints and triviality ----------------------------------------------


def test_shifts_constraint_rows(shifts):
    cs = op_constraints(shifts, "A|BC")
    pairs = {(a.index, b.index) for a, b in cs.provenance}
    assert len(cs) == 4
    assert {tuple(sorted((p[0][0], p[1][0]))) for p in pairs} == {(0, 2), (0, 3), (1, 2), (1, 3)}


def pair_loop_rows(upb, spectator):
    count = 0
    for s, t in itertools.combinations(upb.states, 2):
        a, b = s.locals[spectator], t.locals[spectator]
        if abs(np.vdot(a, b)) > 1e-9 * np.linalg.norm(a) * np.linalg.norm(b):
            count += 1
    return count


@pytest.mark.parametrize("cut,spec", [("A|BC", 0), ("B|AC", 1), ("C|AB", 2)])
def test_row_counts_match_pair_loop(upb334, cut, spec):
    assert len(op_constraints(upb334, cut)) == pair_loop_rows(upb334, spec)


def test_constraint_rows_oracle(upb334):
    cs = op_constraints(upb334, "A|BC")
    for (la, lb), bra, ket in zip(cs.provenance, cs.bras, cs.kets):
        s, t = upb334.get(la), upb334.get(lb)
        assert {s.label, t.label} == {la, lb}
        for u in (bra, ket):
            assert np.isclose(np.linalg.norm(u), 1)
    # rows vanish on the identity because the pairs are orthogonal overall
    assert np.max(np.abs(cs.residuals(np.eye(12)))) < 1e-12


def test_complete_basis_rows_only_from_spectator_overlaps():
    cb = complete_basis((3, 3, 4), 0)
    assert len(op_constraints(cb, "A|BC")) == pair_loop_rows(cb, 0)


def test_param_round_trip():
    rng = np.random.default_rng(5)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = z + z.conj().T
    assert np.allclose(params_to_hermitian(hermitian_to_params(H), 4), H)
    assert len(hermitian_basis(3)) == 9


def test_triviality_examples(upb334, shifts):
    r = solve_triviality(op_constraints(upb334, "A|BC"))
    assert r.solution_dim == 1 and r.certified_trivial
    r = solve_triviality(op_constraints(shifts, "A|BC"))
    assert r.solution_dim >= 2 and not r.certified_trivial
    cs = ConstraintSystem(Bipartition((0,), (1, 2)), (2, 3), np.zeros((0, 6)), np.zeros((0, 6)))
    assert solve_triviality(cs).solution_dim == 36


def test_shifts_exact_dimension_against_explicit_system(shifts):
    cs = op_constraints(shifts, "A|BC")
    rows = []
    for bra, ket in zip(cs.bras, cs.kets):
        vals = [np.vdot(bra, B @ ket) for B in hermitian_basis(4)]
        rows += [np.real(vals), np.imag(vals)]
    M = np.array(rows)
    assert M.shape == (8, 16)
    dim = M.shape[1] - np.linalg.matrix_rank(M, tol=1e-9 * np.linalg.svd(M, compute_uv=False)[0])
    assert dim == solve_triviality(cs).solution_dim == brute_force_solution_dim(cs) == 8


def test_strong_nonlocality_examples(upb334, shifts):
    reps = check_strong_nonlocality(upb334)
    assert [r.cut for r in reps] == ["A|BC", "B|AC", "C|AB"]
    assert all(r.certified_trivial for r in reps)
    assert all(r.certified_trivial for r in check_strong_nonlocality(build_layered((3, 3, 3), 0)))
    assert not all(r.certified_trivial for r in check_strong_nonlocality(shifts))


def test_solution_is_identity_not_just_contains(upb334):
    r = solve_triviality(op_constraints(upb334, "C|AB"))
    E = r.basis[0]
    E = E / np.trace(E)
    assert np.allclose(E, np.eye(9) / 9, atol=1e-9)


def test_brute_force_rejects_large_joint_dim(upb334):
    with pytest.raises(ValueError):
        brute_force_solution_dim(op_constraints(upb334, "A|BC"))


ALPHABET = [e(2)[0], e(2)[1], np.array([1, 1.0]), np.array([1, -1.0]), np.array([1, 1j]), np.array([1, -1j])]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(*[st.integers(0, 5)] * 3), min_size=1, max_size=8, unique=True))
def test_brute_force_equivalence(idx):
    upb = custom((2, 2, 2), [[ALPHABET[i] for i in t] for t in idx])
    for cut in ("A|BC", "B|AC", "C|AB"):
        cs = op_constraints(upb, cut)
        assert solve_triviality(cs).solution_dim == brute_force_solution_dim(cs)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(*[st.integers(0, 5)] * 3), min_size=1, max_size=8, unique=True), st.integers(0, 10**6))
def test_triviality_scale_invariant(idx, seed):
    rng = np.random.default_rng(seed)
    a = custom((2, 2, 2), [[ALPHABET[i] for i in t] for t in idx])
    b = custom((2, 2, 2), [[ALPHABET[i] * rng.uniform(0.01, 100) * np.exp(1j * rng.uniform(0, 6)) for i in t] for t in idx])
    for cut in ("A|BC", "C|AB"):
        assert solve_triviality(op_constraints(a, cut)).solution_dim == solve_triviality(op_constraints(b, cut)).solution_dim


# -- lemmas ------------------------------------------------------------------


def fourier(k, support, dim):
    w = np.exp(2j * np.pi / k)
    V = np.zeros((k, dim), dtype=complex)
    for i in range(k):
        V[i, support] = [w ** (i * t) for t in range(k)]
    return V / np.sqrt(k)


def test_block_zeros_identity():
    S, T = [0, 1], [2, 3, 4]
    assert block_zeros_verify(np.eye(6), S, T, fourier(2, S, 6), fourier(3, T, 6))


def test_block_zeros_detects_planted_coupling():
    S, T = [0, 1], [2, 3]
    E = np.eye(4, dtype=complex)
    E[0, 2] = E[2, 0] = 0.3
    with pytest.raises(LemmaHypothesisError):
        block_zeros_verify(E, S, T, fourier(2, S, 4), fourier(2, T, 4))


def test_block_zeros_input_errors():
    with pytest.raises(LemmaHypothesisError):
        block_zeros_verify(np.eye(4), [0, 1], [1, 2], fourier(2, [0, 1], 4), fourier(2, [1, 2], 4))
    with pytest.raises(LemmaHypothesisError):
        block_zeros_verify(-np.eye(4), [0], [1], e(4)[:1], e(4)[1:2])
    with pytest.raises(LemmaHypothesisError):
        block_zeros_verify(np.eye(4), [0, 1], [2], e(4)[:1], e(4)[2:3])


def test_block_trivial_examples():
    S = [1, 2, 3]
    E = np.zeros((5, 5))
    E[1:4, 1:4] = 2.5 * np.eye(3)
    E += np.diag([1.0, 0, 0, 0, 4.0])
    assert block_trivial_verify(E, S, fourier(3, S, 5), 2)
    D = np.diag([1.0, 2.0, 3.0, 1.0, 1.0])
    with pytest.raises(LemmaHypothesisError):
        block_trivial_verify(D, S, fourier(3, S, 5), 2)


def test_block_trivial_on_solved_operator(upb334):
    r = solve_triviality(op_constraints(upb334, "A|BC"))
    E = r.basis[0] * np.sign(np.trace(r.basis[0]).real)
    # B in {1, 2} with C = 0, a support pair met while pinning down E
    S = [1 * 4 + 0, 2 * 4 + 0]
    assert block_trivial_verify(E, S, fourier(2, S, 12), S[0])


def test_lemma_fuzz_short(rng):
    for _ in range(100):
        inst = random_block_zeros_instance(rng)
        assert block_zeros_verify(inst.E, inst.S, inst.T, inst.psis, inst.phis)
        inst = random_block_trivial_instance(rng)
        assert block_trivial_verify(inst.E, inst.S, inst.psis, inst.u_t)


def test_random_instances_satisfy_hypotheses(rng):
    inst = random_block_zeros_instance(rng, dim=5)
    assert np.max(np.abs(inst.psis.conj() @ inst.E @ inst.phis.T)) < 1e-10
    assert np.linalg.eigvalsh(inst.E)[0] >= -1e-12
    assert np.max(np.abs(submatrix(inst.E, inst.S, inst.T))) < 1e-9


# -- greedy ------------------------------------------------------------------


def test_greedy_trivial_pair():
    s = custom((2, 2), [[e(2)[0], e(2)[0]], [e(2)[1], e(2)[0]]])
    ok, sketch = greedy_locc_distinguishable(s.states)
    assert ok and sketch.party == "A"


def test_greedy_phi1_leaf(upb334):
    states = [upb334.find(f"phi1(1,{j})") for j in range(3)]
    res = greedy_locc_distinguishable(states)
    assert res.distinguishable
    assert res.sketch.party == "C"
    assert {b.child for b in res.sketch.branches if b.child is not None} == {s.label for s in states}


def test_greedy_domino_unknown():
    k = [e(3)[i] for i in range(3)]
    p, m = lambda a, b: (k[a] + k[b]), lambda a, b: (k[a] - k[b])
    domino = [
        [k[1], k[1]],
        [k[0], p(0, 1)], [k[0], m(0, 1)],
        [k[2], p(1, 2)], [k[2], m(1, 2)],
        [p(1, 2), k[0]], [m(1, 2), k[0]],
        [p(0, 1), k[2]], [m(0, 1), k[2]],
    ]
    s = custom((3, 3), domino)
    assert check_orthogonality(s).passed
    res = greedy_locc_distinguishable(s.states)
    assert not res.distinguishable and res.verdict == "unknown"


def test_greedy_rejects_nonorthogonal():
    s = custom((2, 2), [[e(2)[0], e(2)[0]], [ALPHABET[2], e(2)[0]]])
    assert not greedy_locc_distinguishable(s.states).distinguishable
