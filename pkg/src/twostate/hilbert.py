"""Dense complex linear algebra over small labeled Hilbert spaces.

A basis is an ordered tuple of :class:`BasisLabel` values, one per optical
mode (wire) and, when polarization is switched on, per polarization tag.
Dimensions stay tiny (a few dozen at most), so everything is a dense numpy
array.

.. note::
   :func:`inner` conjugates its **first** argument, matching the physics
   convention ``<a|b>``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisError

DEFAULT_TOL = 1e-10
NORM_SLACK = 1e-12
POLARIZATIONS = ("H", "V")

_SQRT_HALF = 1.0 / np.sqrt(2.0)

# Jones vectors in the (H, V) basis.
JONES = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "L": np.array([_SQRT_HALF, 1j * _SQRT_HALF]),
    "R": np.array([_SQRT_HALF, -1j * _SQRT_HALF]),
    "D": np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    "A": np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
}


@dataclass(frozen=True, order=True)
class BasisLabel:
    wire: str
    pol: str | None = None

    def __post_init__(self):
        if self.pol not in (None, "H", "V"):
            raise BasisError(f"polarization tag must be H, V or None, got {self.pol!r}")

    def __str__(self) -> str:
        return self.wire if self.pol is None else f"{self.wire}:{self.pol}"


Basis = tuple[BasisLabel, ...]


def make_basis(wires: Iterable[str], polarization: bool = False) -> Basis:
    """Basis over ``wires`` (in order), doubled by H/V when ``polarization``."""
    if polarization:
        return tuple(BasisLabel(w, p) for w in wires for p in POLARIZATIONS)
    return tuple(BasisLabel(w) for w in wires)


def _check_basis(basis: Sequence[BasisLabel]) -> Basis:
    basis = tuple(basis)
    if len(set(basis)) != len(basis):
        raise BasisError("basis labels must be distinct")
    pols = {lab.pol is None for lab in basis}
    if len(pols) > 1:
        raise BasisError("polarization must be on for all labels or for none")
    return basis


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over a labeled basis; may be subnormalized."""

    basis: Basis
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        basis = _check_basis(self.basis)
        amps = _frozen(self.amps).reshape(-1)
        if amps.shape != (len(basis),):
            raise BasisError(f"{len(amps)} amplitudes for a {len(basis)}-label basis")
        norm2 = float(np.vdot(amps, amps).real)
        if norm2 > 1.0 + NORM_SLACK:
            raise ValueError(f"squared norm {norm2!r} exceeds 1")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_dict(cls, basis: Sequence[BasisLabel], amps: dict) -> StateVector:
        """Build from ``{label_or_wire: amplitude}``; missing labels are zero."""
        basis = tuple(basis)
        index = {lab: i for i, lab in enumerate(basis)}
        vec = np.zeros(len(basis), dtype=complex)
        for key, val in amps.items():
            lab = key if isinstance(key, BasisLabel) else BasisLabel(key)
            if lab not in index:
                raise BasisError(f"label {lab} not in basis")
            vec[index[lab]] = val
        return cls(basis, vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, label: BasisLabel | str) -> complex:
        lab = label if isinstance(label, BasisLabel) else BasisLabel(label)
        try:
            return complex(self.amps[self.basis.index(lab)])
        except ValueError:
            raise BasisError(f"label {lab} not in basis") from None

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(self.basis, self.amps * factor)

    def isclose(self, other: StateVector, tol: float = DEFAULT_TOL) -> bool:
        return self.basis == other.basis and bool(np.allclose(self.amps, other.amps, rtol=0, atol=tol))


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on a labeled basis.

    ``unitary`` and ``projector`` are claims; they are checked numerically
    at construction to ``tol``.
    """

    basis: Basis
    matrix: np.ndarray = field(repr=False)
    unitary: bool = False
    projector: bool = False
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        basis = _check_basis(self.basis)
        m = _frozen(self.matrix)
        n = len(basis)
        if m.shape != (n, n):
            raise BasisError(f"matrix shape {m.shape} does not match basis of size {n}")
        if self.unitary and not np.allclose(m.conj().T @ m, np.eye(n), atol=self.tol, rtol=0):
            raise ValueError("operator claimed unitary but U^dag U != 1")
        if self.projector and not (
            np.allclose(m @ m, m, atol=self.tol, rtol=0) and np.allclose(m, m.conj().T, atol=self.tol, rtol=0)
        ):
            raise ValueError("operator claimed projector but is not a Hermitian idempotent")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: Operator) -> Operator:
        if not isinstance(other, Operator):
            return NotImplemented
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.matrix @ other.matrix)

    def __add__(self, other: Operator) -> Operator:
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: Operator) -> Operator:
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.matrix - other.matrix)

    def adjoint(self) -> Operator:
        return Operator(self.basis, self.matrix.conj().T, unitary=self.unitary, projector=self.projector)

    def is_projector(self, tol: float = DEFAULT_TOL) -> bool:
        m = self.matrix
        return bool(np.allclose(m @ m, m, atol=tol, rtol=0) and np.allclose(m, m.conj().T, atol=tol, rtol=0))


def _same_basis(a: Basis, b: Basis) -> None:
    if a != b:
        raise BasisError("operands are defined on different bases")


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _same_basis(a.basis, b.basis)
    return complex(np.vdot(a.amps, b.amps))


def apply(op: Operator, s: StateVector) -> StateVector:
    _same_basis(op.basis, s.basis)
    return StateVector(s.basis, op.matrix @ s.amps)


def expectation(bra: StateVector, op: Operator, ket: StateVector) -> complex:
    """``<bra|op|ket>`` without building an intermediate StateVector."""
    _same_basis(bra.basis, op.basis)
    _same_basis(op.basis, ket.basis)
    return complex(np.vdot(bra.amps, op.matrix @ ket.amps))


def identity(basis: Sequence[BasisLabel]) -> Operator:
    basis = tuple(basis)
    return Operator(basis, np.eye(len(basis)), unitary=True, projector=True)


def projector_on(basis: Sequence[BasisLabel], labels: Iterable[BasisLabel | str]) -> Operator:
    """Diagonal projector onto ``labels``.

    A bare wire name selects every label on that wire (both polarizations
    when polarization is on).
    """
    basis = tuple(basis)
    diag = np.zeros(len(basis))
    for item in labels:
        if isinstance(item, BasisLabel):
            hits = [i for i, lab in enumerate(basis) if lab == item]
        else:
            hits = [i for i, lab in enumerate(basis) if lab.wire == item]
        if not hits:
            raise BasisError(f"label {item} not in basis")
        diag[hits] = 1.0
    return Operator(basis, np.diag(diag), projector=True)


def pol_projector(basis: Sequence[BasisLabel], wires: Iterable[str], axis: str) -> Operator:
    """Projector onto polarization ``axis`` (H, V, L, R, D, A) on ``wires``.

    This is the product of the spatial projector on ``wires`` with
    ``|axis><axis|`` on the polarization factor.
    """
    basis = tuple(basis)
    if axis not in JONES:
        raise BasisError(f"unknown polarization axis {axis!r}")
    jones = JONES[axis]
    local = np.outer(jones, jones.conj())
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for w in wires:
        try:
            ih = basis.index(BasisLabel(w, "H"))
            iv = basis.index(BasisLabel(w, "V"))
        except ValueError:
            raise BasisError(f"wire {w!r} has no polarization labels in this basis") from None
        idx = [ih, iv]
        m[np.ix_(idx, idx)] = local
    return Operator(basis, m, projector=True)


def rank_one(state: StateVector) -> Operator:
    """``|s><s| / <s|s>``."""
    n2 = float(np.vdot(state.amps, state.amps).real)
    if n2 == 0.0:
        raise ValueError("cannot build a projector onto the zero vector")
    return Operator(state.basis, np.outer(state.amps, state.amps.conj()) / n2, projector=True)
