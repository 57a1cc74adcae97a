"""Staged linear-optical networks and forward/backward state propagation.

A :class:`Circuit` is a single-assignment DAG: every wire is written once
(by the source or an element) and read once (by an element or a detector).
The photon is a single excitation, so the state at any cut is just the
list of per-wire amplitudes (a 2-vector per wire when polarization is on).

Beam splitter convention (rows = outputs, columns = inputs)::

    [[cos t,             i e^{+i p} sin t],
     [i e^{-i p} sin t,  cos t           ]]

``t = pi/4, p = 0`` is the symmetric 50/50 splitter.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import ClassVar

import numpy as np

from .errors import BasisError, TopologyError, UnknownNameError
from .hilbert import JONES, Basis, BasisLabel, StateVector, make_basis

PROBE_SUFFIX = "~probe"


@dataclass(frozen=True)
class VibrationSpec:
    freq: float
    amp: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.freq) and self.freq > 0):
            raise ValueError(f"vibration frequency must be positive, got {self.freq!r}")
        if not (math.isfinite(self.amp) and self.amp >= 0):
            raise ValueError(f"vibration amplitude must be non-negative, got {self.amp!r}")
        if not math.isfinite(self.phase):
            raise ValueError("vibration phase must be finite")

    def displacement(self, t):
        return self.amp * np.sin(2 * np.pi * self.freq * np.asarray(t) + self.phase)


@dataclass(frozen=True)
class Element:
    """Base class; subclasses fix ``kind`` and the port counts."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    kind: ClassVar[str] = ""
    n_in: ClassVar[int | None] = 1
    n_out: ClassVar[int | None] = 1
    needs_polarization: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.n_in is not None and len(self.inputs) != self.n_in:
            raise TopologyError(f"{self.kind} takes {self.n_in} input(s), got {len(self.inputs)}")
        if self.n_out is not None and len(self.outputs) != self.n_out:
            raise TopologyError(f"{self.kind} takes {self.n_out} output(s), got {len(self.outputs)}")

    def block(self) -> np.ndarray:
        """Action on the spatial/polarization factor, before port expansion."""
        raise NotImplementedError

    def local_matrix(self, dim: int) -> np.ndarray:
        """Matrix on ``(port, pol)`` amplitudes, shape ``(n_out*dim, n_in*dim)``."""
        return np.kron(self.block(), np.eye(dim))

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class BeamSplitter(Element):
    theta: float = math.pi / 4
    phi: float = 0.0

    kind: ClassVar[str] = "beamsplitter"
    n_in: ClassVar[int] = 2
    n_out: ClassVar[int] = 2

    def block(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array(
            [[c, 1j * np.exp(1j * self.phi) * s], [1j * np.exp(-1j * self.phi) * s, c]],
            dtype=complex,
        )

    def params(self) -> dict:
        return {"theta": self.theta, "phi": self.phi}


@dataclass(frozen=True)
class Phase(Element):
    theta: float = 0.0

    kind: ClassVar[str] = "phase"

    def block(self) -> np.ndarray:
        return np.array([[np.exp(1j * self.theta)]])

    def params(self) -> dict:
        return {"theta": self.theta}


@dataclass(frozen=True)
class Mirror(Element):
    """Identity on amplitudes; its vibration only matters to the pointer model."""

    vibration: VibrationSpec | None = None
    name: str | None = None

    kind: ClassVar[str] = "mirror"

    def __post_init__(self):
        super().__post_init__()
        if self.name is None:
            object.__setattr__(self, "name", self.outputs[0])

    def block(self) -> np.ndarray:
        return np.eye(1, dtype=complex)

    def params(self) -> dict:
        out = {"name": self.name}
        if self.vibration is not None:
            v = self.vibration
            out.update(freq=v.freq, amp=v.amp, phase=v.phase)
        return out


@dataclass(frozen=True)
class Attenuator(Element):
    t: float = 1.0

    kind: ClassVar[str] = "attenuate"

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"amplitude transmissivity must lie in [0, 1], got {self.t!r}")

    def block(self) -> np.ndarray:
        return np.array([[self.t]], dtype=complex)

    def params(self) -> dict:
        return {"t": self.t}


@dataclass(frozen=True)
class Block(Element):
    outputs: tuple[str, ...] = ()

    kind: ClassVar[str] = "block"
    n_out: ClassVar[int] = 0

    def block(self) -> np.ndarray:
        return np.zeros((0, 1), dtype=complex)


@dataclass(frozen=True)
class PolRotator(Element):
    angle: float = 0.0

    kind: ClassVar[str] = "polrot"
    needs_polarization: ClassVar[bool] = True

    def block(self) -> np.ndarray:
        return np.eye(1, dtype=complex)

    def local_matrix(self, dim: int) -> np.ndarray:
        if dim != 2:
            raise BasisError("polrot needs polarization")
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]], dtype=complex)

    def params(self) -> dict:
        return {"angle": self.angle}


@dataclass(frozen=True)
class Polarizer(Element):
    axis: str = "H"

    kind: ClassVar[str] = "polarizer"
    needs_polarization: ClassVar[bool] = True

    def __post_init__(self):
        super().__post_init__()
        if self.axis not in ("H", "V", "L", "R"):
            raise ValueError(f"polarizer axis must be H, V, L or R, got {self.axis!r}")

    def block(self) -> np.ndarray:
        return np.eye(1, dtype=complex)

    def local_matrix(self, dim: int) -> np.ndarray:
        if dim != 2:
            raise BasisError("polarizer needs polarization")
        j = JONES[self.axis]
        return np.outer(j, j.conj())

    def params(self) -> dict:
        return {"axis": self.axis}


@dataclass(frozen=True, eq=False)
class Linear(Element):
    """Arbitrary linear map given at full local dimension.

    Not expressible in scene files; used for probes and reversed circuits.
    """

    matrix: np.ndarray = field(default_factory=lambda: np.eye(1, dtype=complex))

    kind: ClassVar[str] = "linear"
    n_in: ClassVar[None] = None
    n_out: ClassVar[None] = None

    def local_matrix(self, dim: int) -> np.ndarray:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.outputs) * dim, len(self.inputs) * dim):
            raise BasisError(f"linear element matrix has shape {m.shape}")
        return m


ELEMENT_KINDS = {
    cls.kind: cls for cls in (BeamSplitter, Phase, Mirror, Attenuator, Block, PolRotator, Polarizer)
}


@dataclass(frozen=True, eq=False)
class ElementMap:
    """Labeled rectangular matrix of one element (rows: outputs)."""

    inputs: Basis
    outputs: Basis
    matrix: np.ndarray = field(repr=False)

    def is_unitary(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        return m.shape[0] == m.shape[1] and bool(np.allclose(m.conj().T @ m, np.eye(m.shape[1]), atol=tol))


def element_matrix(e: Element, polarization: bool = False) -> ElementMap:
    dim = 2 if polarization else 1
    return ElementMap(
        make_basis(e.inputs, polarization), make_basis(e.outputs, polarization), e.local_matrix(dim)
    )


@dataclass(frozen=True)
class Detector:
    name: str
    wire: str
    pol: str | None = None


@dataclass(frozen=True, eq=False)
class CutState:
    cut: tuple[str, ...]
    state: StateVector


class Circuit:
    """Validated, topologically staged optical network.

    ``source`` maps wire names (or :class:`BasisLabel`) to amplitudes.
    With polarization on, a bare wire name means horizontal polarization.
    """

    def __init__(
        self,
        source: Mapping[str | BasisLabel, complex],
        elements: Sequence[Element],
        detectors: Sequence[Detector],
        *,
        name: str = "circuit",
        polarization: bool = False,
    ):
        self.name = name
        self.polarization = bool(polarization)
        self.dim = 2 if self.polarization else 1
        self.elements: tuple[Element, ...] = tuple(elements)
        self.detectors: tuple[Detector, ...] = tuple(detectors)
        self.source: dict[str, np.ndarray] = {}
        for key, amp in source.items():
            lab = key if isinstance(key, BasisLabel) else BasisLabel(key, "H" if self.polarization else None)
            if (lab.pol is not None) != self.polarization:
                raise BasisError(f"source label {lab} does not match the polarization setting")
            vec = self.source.setdefault(lab.wire, np.zeros(self.dim, dtype=complex))
            vec[0 if lab.pol in (None, "H") else 1] = amp
        for vec in self.source.values():
            vec.setflags(write=False)
        self._validate()
        self._stage()

    # -- structure -------------------------------------------------------

    def _validate(self) -> None:
        producer: dict[str, object] = {w: "source" for w in self.source}
        consumer: dict[str, object] = {}
        for e in self.elements:
            if e.needs_polarization and not self.polarization:
                raise BasisError(f"{e.kind} element needs a polarization-on circuit")
            for w in e.outputs:
                if w in producer:
                    raise TopologyError(f"wire {w!r} is produced more than once")
                producer[w] = e
            for w in e.inputs:
                if w in consumer:
                    raise TopologyError(f"wire {w!r} is consumed more than once")
                consumer[w] = e
        names = set()
        for d in self.detectors:
            if d.name in names:
                raise TopologyError(f"duplicate detector name {d.name!r}")
            names.add(d.name)
            if d.pol is not None and not self.polarization:
                raise BasisError(f"detector {d.name!r} postselects polarization in a polarization-off circuit")
            if d.pol is not None and d.pol not in JONES:
                raise BasisError(f"unknown detector polarization {d.pol!r}")
            if d.wire in consumer:
                raise TopologyError(f"wire {d.wire!r} is consumed more than once")
            consumer[d.wire] = d
        if not self.detectors:
            raise TopologyError("circuit has no detector")
        for w in consumer:
            if w not in producer:
                raise TopologyError(f"wire {w!r} is consumed but never produced")
        for w in producer:
            if w not in consumer:
                raise TopologyError(f"wire {w!r} is neither consumed nor detected")
        self._producer = producer
        self._consumer = consumer

    def _stage(self) -> None:
        ready = set(self.source)
        pending = list(range(len(self.elements)))
        order: list[int] = []
        while pending:
            for pos, idx in enumerate(pending):
                if all(w in ready for w in self.elements[idx].inputs):
                    break
            else:
                stuck = sorted({w for i in pending for w in self.elements[i].inputs} - ready)
                raise TopologyError(f"cyclic or unreachable wiring involving {stuck}")
            pending.pop(pos)
            order.append(idx)
            ready.update(self.elements[idx].outputs)
        self.order: tuple[Element, ...] = tuple(self.elements[i] for i in order)

        wire_order = list(self.source)
        for e in self.order:
            wire_order.extend(e.outputs)
        self.wires: tuple[str, ...] = tuple(wire_order)
        self._rank = {w: i for i, w in enumerate(self.wires)}

        live = list(self.source)
        cuts = [tuple(live)]
        for e in self.order:
            live = [w for w in live if w not in e.inputs] + list(e.outputs)
            live.sort(key=self._rank.__getitem__)
            cuts.append(tuple(live))
        self.stage_cuts: tuple[tuple[str, ...], ...] = tuple(cuts)
        self._matrices = [e.local_matrix(self.dim) for e in self.order]

    def detector(self, name: str) -> Detector:
        for d in self.detectors:
            if d.name == name:
                return d
        raise UnknownNameError(f"unknown detector {name!r}")

    def check_wire(self, wire: str) -> None:
        if wire not in self._rank:
            raise UnknownNameError(f"unknown wire {wire!r}")

    def basis(self, wires: Iterable[str]) -> Basis:
        return make_basis(wires, self.polarization)

    def mirrors(self) -> list[Mirror]:
        return [e for e in self.order if isinstance(e, Mirror)]

    def successors(self, wire: str) -> tuple[str, ...]:
        c = self._consumer.get(wire)
        return c.outputs if isinstance(c, Element) else ()

    def consumer(self, wire: str):
        return self._consumer[wire]

    def is_valid_cut(self, cut: Iterable[str]) -> bool:
        """True if every source-to-detector path crosses ``cut`` exactly once.

        Paths absorbed by a block before reaching the cut need not cross it.
        """
        cut = set(cut)
        if not cut or any(w not in self._rank for w in cut):
            return False

        def reach(start: str) -> set[str]:
            seen, stack = set(), list(self.successors(start))
            while stack:
                w = stack.pop()
                if w not in seen:
                    seen.add(w)
                    stack.extend(self.successors(w))
            return seen

        for w in cut:
            if reach(w) & cut:
                return False
        stack, seen = [w for w in self.source if w not in cut], set()
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            nxt = self.successors(w)
            if not nxt and isinstance(self.consumer(w), Detector):
                return False
            stack.extend(n for n in nxt if n not in cut)
        return True

    # -- rewriting -------------------------------------------------------

    def with_elements(self, elements: Sequence[Element], detectors: Sequence[Detector] | None = None) -> Circuit:
        src = {
            BasisLabel(w, p) if self.polarization else BasisLabel(w): v[i]
            for w, v in self.source.items()
            for i, p in enumerate(("H", "V")[: self.dim])
        }
        return Circuit(
            src,
            elements,
            self.detectors if detectors is None else detectors,
            name=self.name,
            polarization=self.polarization,
        )

    def with_probe(self, wire: str, matrix: np.ndarray) -> Circuit:
        """Insert a 1-in/1-out linear map on ``wire`` (between producer and consumer)."""
        self.check_wire(wire)
        new = wire + PROBE_SUFFIX
        elements = []
        for e in self.elements:
            if wire in e.inputs:
                e = replace(e, inputs=tuple(new if w == wire else w for w in e.inputs))
            elements.append(e)
        elements.append(Linear((wire,), (new,), matrix=np.asarray(matrix, dtype=complex)))
        detectors = [replace(d, wire=new) if d.wire == wire else d for d in self.detectors]
        return self.with_elements(elements, detectors)

    def reversed(self, detector: str) -> Circuit:
        """Time-reversed network seeded at ``detector``.

        Elements become their adjoints with ports swapped; the detector's
        postselection vector becomes the source. Former source wires are
        the detectors of the reversed circuit.
        """
        det = self.detector(detector)
        phi = backward_amplitudes(self, detector)
        source: dict[BasisLabel, complex] = {}
        labels = ("H", "V") if self.polarization else (None,)
        for w, cons in self._consumer.items():
            terminal = isinstance(cons, Detector) or isinstance(cons, Block)
            if terminal:
                vec = phi[det.wire] if w == det.wire else np.zeros(self.dim)
                for i, p in enumerate(labels):
                    source[BasisLabel(w, p)] = vec[i]
        elements = [
            Linear(e.outputs, e.inputs, matrix=m.conj().T)
            for e, m in zip(reversed(self.order), reversed(self._matrices))
            if not isinstance(e, Block)
        ]
        detectors = [Detector(w, w) for w in self.source]
        return Circuit(source, elements, detectors, name=self.name + "-reversed", polarization=self.polarization)


# -- propagation ---------------------------------------------------------


def _split(c: Circuit, wires: Sequence[str], vec: np.ndarray, amps: dict) -> None:
    for k, w in enumerate(wires):
        amps[w] = vec[k * c.dim : (k + 1) * c.dim]


def forward_amplitudes(c: Circuit) -> dict[str, np.ndarray]:
    """Forward amplitude vector on every wire."""
    amps = {w: v.copy() for w, v in c.source.items()}
    for e, m in zip(c.order, c._matrices):
        vin = np.concatenate([amps[w] for w in e.inputs]) if e.inputs else np.zeros(0, dtype=complex)
        _split(c, e.outputs, m @ vin, amps)
    return amps


def detector_vector(c: Circuit, detector: str, forward: Mapping[str, np.ndarray] | None = None) -> np.ndarray:
    """Postselection vector at the detector wire.

    A polarization-insensitive detector in a polarization-on circuit
    postselects a subspace; its backward state is the normalized
    projection of the forward state onto that subspace.
    """
    det = c.detector(detector)
    if not c.polarization:
        return np.ones(1, dtype=complex)
    if det.pol is not None:
        return JONES[det.pol].copy()
    fw = forward_amplitudes(c) if forward is None else forward
    psi = fw[det.wire]
    n = np.linalg.norm(psi)
    return psi / n if n > 0 else np.zeros(2, dtype=complex)


def backward_amplitudes(c: Circuit, detector: str) -> dict[str, np.ndarray]:
    """Backward amplitude (as a ket) on every wire: ``<Phi| = phi^dagger``."""
    det = c.detector(detector)
    phi = {w: np.zeros(c.dim, dtype=complex) for w, cons in c._consumer.items() if isinstance(cons, Detector)}
    phi[det.wire] = detector_vector(c, detector)
    for e, m in zip(reversed(c.order), reversed(c._matrices)):
        vout = np.concatenate([phi[w] for w in e.outputs]) if e.outputs else np.zeros(0, dtype=complex)
        _split(c, e.inputs, m.conj().T @ vout, phi)
    return phi


def _cut_states(c: Circuit, amps: Mapping[str, np.ndarray]) -> list[CutState]:
    return [
        CutState(cut, StateVector(c.basis(cut), np.concatenate([amps[w] for w in cut]))) for cut in c.stage_cuts
    ]


def state_on_cut(c: Circuit, amps: Mapping[str, np.ndarray], cut: Sequence[str]) -> StateVector:
    cut = tuple(sorted(cut, key=c._rank.__getitem__))
    return StateVector(c.basis(cut), np.concatenate([amps[w] for w in cut]))


def propagate_forward(c: Circuit) -> list[CutState]:
    return _cut_states(c, forward_amplitudes(c))


def propagate_backward(c: Circuit, detector: str) -> list[CutState]:
    return _cut_states(c, backward_amplitudes(c, detector))


def overlap(c: Circuit, detector: str) -> complex:
    """``<Phi|Psi>``, evaluated on the detector wire."""
    wire = c.detector(detector).wire
    psi = forward_amplitudes(c)[wire]
    return complex(np.vdot(detector_vector(c, detector), psi))


def postselection_probability(c: Circuit, detector: str) -> float:
    return min(1.0, abs(overlap(c, detector)) ** 2)
