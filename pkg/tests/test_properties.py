"""Randomized invariants over generated networks (1000 instances each)."""

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from randomnet import best_detector, random_circuit
from twostate import scene_dsl
from twostate.circuit import forward_amplitudes, overlap
from twostate.errors import InconsistentPostselection, SceneError
from twostate.hilbert import StateVector, make_basis, projector_on, rank_one
from twostate.tsvf import abl_probabilities, partial_postselect, two_state_vector_at

N = 1000
many = settings(max_examples=N, deadline=None, suppress_health_check=[HealthCheck.too_slow])
circuits = st.integers(0, 2**63 - 1).map(lambda seed: random_circuit(np.random.default_rng(seed)))


@many
@given(circuits)
def test_overlap_is_cut_independent(c):
    det, p = best_detector(c)
    assume(p > 1e-8)
    ref = overlap(c, det)
    for cut in c.stage_cuts:
        assert two_state_vector_at(c, det, cut).overlap == pytest.approx(ref, abs=1e-10)


@many
@given(circuits)
def test_weak_values_on_a_cut_sum_to_one(c):
    det, p = best_detector(c)
    assume(p > 1e-6)
    for cut in c.stage_cuts:
        tsv = two_state_vector_at(c, det, cut)
        local = [
            np.vdot(tsv.backward.amps, projector_on(tsv.basis, [w]).matrix @ tsv.forward.amps) for w in cut
        ]
        assert sum(local) / tsv.overlap == pytest.approx(1, abs=1e-8)


@many
@given(circuits)
def test_abl_probabilities_are_normalized(c):
    det, p = best_detector(c)
    assume(p > 1e-8)
    cut = max(c.stage_cuts, key=len)
    tsv = two_state_vector_at(c, det, cut)
    try:
        probs = abl_probabilities(tsv, [projector_on(tsv.basis, [w]) for w in cut])
    except InconsistentPostselection:
        return
    assert sum(probs) == pytest.approx(1, abs=1e-12)
    assert all(-1e-15 <= q <= 1 + 1e-15 for q in probs)


@many
@given(circuits)
def test_scene_text_round_trips(c):
    text = scene_dsl.dump(c)
    again = scene_dsl.load(text)
    assert scene_dsl.dump(again) == text
    fa, fb = forward_amplitudes(c), forward_amplitudes(again)
    for w in fa:
        assert np.allclose(fa[w], fb[w], atol=1e-14)


@many
@given(st.text(alphabet=st.characters(codec="utf-8"), max_size=120))
def test_parser_is_total(text):
    try:
        scene_dsl.load('scene "f"\n' + text)
    except SceneError as e:
        assert e.line >= 1 and e.column >= 1


@many
@given(st.integers(0, 2**63 - 1))
def test_partial_postselection_is_certain(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    basis = make_basis([str(k) for k in range(n)])
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi = StateVector(basis, v / np.linalg.norm(v))
    # random subspace projector of rank 1..n-1
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    k = int(rng.integers(1, n))
    from twostate.hilbert import Operator

    sub = Operator(basis, q[:, :k] @ q[:, :k].conj().T, projector=True)
    tsv = partial_postselect(psi, sub)
    phi = rank_one(tsv.backward)
    from twostate.hilbert import identity

    probs = abl_probabilities(tsv, [phi, identity(basis) - phi])
    assert probs[0] == pytest.approx(1, abs=1e-12)
