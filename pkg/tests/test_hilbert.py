import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twostate.errors import BasisError
from twostate.hilbert import (
    JONES,
    BasisLabel,
    Operator,
    StateVector,
    apply,
    expectation,
    identity,
    inner,
    make_basis,
    pol_projector,
    projector_on,
    rank_one,
)

R = 1 / math.sqrt(2)


@pytest.fixture
def two():
    return make_basis(["1", "2"])


def test_inner_unit_and_orthogonal(two):
    e1 = StateVector(two, [1, 0])
    e2 = StateVector(two, [0, 1])
    assert inner(e1, e1) == 1
    assert inner(e1, e2) == 0


def test_inner_conjugates_first_argument(two):
    # <(e1 + i e2)/sqrt2 | e2> = conj(i)/sqrt2
    s = StateVector(two, [R, 1j * R])
    e2 = StateVector(two, [0, 1])
    assert inner(s, e2) == pytest.approx(-1j * R)
    assert inner(e2, s) == pytest.approx(1j * R)


def test_basis_mismatch_raises(two):
    other = make_basis(["1", "3"])
    with pytest.raises(BasisError):
        inner(StateVector(two, [1, 0]), StateVector(other, [1, 0]))
    with pytest.raises(BasisError):
        apply(identity(other), StateVector(two, [1, 0]))


def test_state_validation():
    b = make_basis(["a"])
    with pytest.raises(BasisError):
        StateVector(make_basis(["a", "a"]), [1, 0])
    with pytest.raises(ValueError):
        StateVector(b, [1.1])
    with pytest.raises(BasisError):
        StateVector((BasisLabel("a"), BasisLabel("b", "H")), [1, 0])
    with pytest.raises(BasisError):
        BasisLabel("a", "L")


def test_state_is_immutable(two):
    s = StateVector(two, [1, 0])
    with pytest.raises(ValueError):
        s.amps[0] = 0


def test_apply_identity_and_projector():
    b = make_basis(["A", "B", "C"])
    s = StateVector(b, np.ones(3) / math.sqrt(3))
    assert apply(identity(b), s).isclose(s)
    c = StateVector(b, [0, 0, 1])
    assert apply(projector_on(b, ["C"]), c).isclose(c)
    assert apply(projector_on(b, ["A"]), s).isclose(StateVector(b, [1 / math.sqrt(3), 0, 0]))
    assert np.allclose(projector_on(b, ["A", "B", "C"]).matrix, np.eye(3))


def test_balanced_splitter_output(two):
    bs = Operator(two, R * np.array([[1, 1j], [1j, 1]]), unitary=True)
    out = apply(bs, StateVector(two, [1, 0]))
    assert out.norm() == pytest.approx(1)
    assert np.abs(out.amps) ** 2 == pytest.approx([0.5, 0.5])


def test_claimed_flags_are_checked(two):
    with pytest.raises(ValueError):
        Operator(two, [[1, 1], [0, 1]], unitary=True)
    with pytest.raises(ValueError):
        Operator(two, [[1, 1], [0, 0]], projector=True)
    with pytest.raises(BasisError):
        Operator(two, np.eye(3))


def test_projector_unknown_label(two):
    with pytest.raises(BasisError):
        projector_on(two, ["nope"])


def test_circular_projector_expectation():
    b = make_basis(["B"], polarization=True)
    h = StateVector(b, JONES["H"])
    p_l = pol_projector(b, ["B"], "L")
    assert expectation(h, p_l, h) == pytest.approx(0.5)
    assert p_l.is_projector()
    # the bare wire name selects both polarizations
    assert np.allclose(projector_on(b, ["B"]).matrix, np.eye(2))


def test_rank_one_normalizes(two):
    p = rank_one(StateVector(two, [0.3, 0.4j]))
    assert p.is_projector()
    with pytest.raises(ValueError):
        rank_one(StateVector(two, [0, 0]))


def test_operator_algebra(two):
    p = projector_on(two, ["1"])
    q = identity(two) - p
    assert np.allclose((p + q).matrix, np.eye(2))
    assert np.allclose((p @ q).matrix, 0)
    assert p.adjoint().is_projector()


unit = st.floats(-1, 1, allow_nan=False)


@given(st.lists(st.tuples(unit, unit), min_size=2, max_size=6))
def test_inner_is_hermitian(pairs):
    v = np.array([complex(a, b) for a, b in pairs])
    n = np.linalg.norm(v)
    if n == 0:
        return
    v = v / n
    b = make_basis([str(k) for k in range(len(v))])
    s, t = StateVector(b, v), StateVector(b, np.roll(v, 1))
    assert inner(s, t) == pytest.approx(np.conj(inner(t, s)), abs=1e-12)
    assert inner(s, s) == pytest.approx(1, abs=1e-12)
