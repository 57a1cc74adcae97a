"""Two-state vector computations on a circuit, for one chosen detector.

For every wire, ``psi_w`` is the forward amplitude and ``phi_w`` the
backward one, so ``<Phi| = phi^dagger`` on any cut through the wire. A
wire's local overlap is ``a_w = <phi_w|psi_w>``. The total overlap ``O``
is the same on every valid cut, even behind lossy elements, because the
backward state is carried by adjoints. Weak values, ABL probabilities and
presence tests are all built from these numbers.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Circuit,
    backward_amplitudes,
    detector_vector,
    forward_amplitudes,
    state_on_cut,
)
from .errors import (
    BasisError,
    EmptyPostselection,
    InconsistentPostselection,
    PostselectionImpossible,
    TopologyError,
)
from .hilbert import (
    DEFAULT_TOL,
    JONES,
    NORM_SLACK,
    Operator,
    StateVector,
    identity,
    inner,
    make_basis,
    projector_on,
)

OVERLAP_FLOOR = 1e-12
EPS_PRESENCE = 1e-6
EPS_DERIV = 1e-6
DEFAULT_STEP = 1e-5
PROBE_FAMILIES = ("phase", "attenuation", "polrot")
POL_AXES = ("H", "V", "L", "R")


@dataclass(frozen=True, eq=False)
class TwoStateVector:
    forward: StateVector
    backward: StateVector
    overlap: complex = field(init=False)

    def __post_init__(self):
        ov = inner(self.backward, self.forward)
        if abs(ov) > self.forward.norm() * self.backward.norm() + NORM_SLACK:
            raise ValueError("overlap exceeds the Cauchy-Schwarz bound")
        object.__setattr__(self, "overlap", ov)

    @property
    def basis(self):
        return self.forward.basis


def _widest_cut(c: Circuit) -> tuple[str, ...]:
    return max(c.stage_cuts, key=len)


def two_state_vector_at(
    c: Circuit,
    detector: str,
    cut: Iterable[str] | None = None,
    overlap_floor: float = OVERLAP_FLOOR,
) -> TwoStateVector:
    """Pair the forward and backward states on ``cut`` (default: widest stage cut)."""
    cut = tuple(_widest_cut(c) if cut is None else cut)
    for w in cut:
        c.check_wire(w)
    if not c.is_valid_cut(cut):
        raise TopologyError(f"{list(cut)} is not a valid cut of the network")
    fw = forward_amplitudes(c)
    bw = backward_amplitudes(c, detector)
    tsv = TwoStateVector(state_on_cut(c, fw, cut), state_on_cut(c, bw, cut))
    if abs(tsv.overlap) < overlap_floor:
        raise PostselectionImpossible(f"overlap {abs(tsv.overlap):.3g} with detector {detector!r} is below the floor")
    return tsv


def weak_value(tsv: TwoStateVector, op: Operator, overlap_floor: float = OVERLAP_FLOOR) -> complex:
    """``<Phi|op|Psi> / <Phi|Psi>``."""
    if op.basis != tsv.basis:
        raise BasisError("operator and two-state vector live on different bases")
    if abs(tsv.overlap) < overlap_floor:
        raise PostselectionImpossible("overlap below floor; weak value undefined")
    num = np.vdot(tsv.backward.amps, op.matrix @ tsv.forward.amps)
    return complex(num / tsv.overlap)


def abl_probabilities(tsv: TwoStateVector, projectors: Sequence[Operator], tol: float = DEFAULT_TOL) -> list[float]:
    """Aharonov-Bergmann-Lebowitz probabilities of a complete projective measurement."""
    if not projectors:
        raise ValueError("need at least one projector")
    total = np.zeros((len(tsv.basis),) * 2, dtype=complex)
    for p in projectors:
        if p.basis != tsv.basis:
            raise BasisError("projector basis differs from the two-state vector basis")
        total += p.matrix
    if not np.allclose(total, np.eye(len(tsv.basis)), atol=tol, rtol=0):
        raise ValueError("projectors do not sum to the identity")
    nums = [abs(np.vdot(tsv.backward.amps, p.matrix @ tsv.forward.amps)) ** 2 for p in projectors]
    denom = math.fsum(nums)
    if denom == 0.0:
        raise InconsistentPostselection("every outcome has zero ABL weight")
    return [n / denom for n in nums]


def partial_postselect(pre_state: StateVector, subspace: Operator, floor: float = OVERLAP_FLOOR) -> TwoStateVector:
    """Two-state vector for postselection on a subspace.

    The backward state is the normalized projection of the preselected
    state, so the overlap equals ``|P psi|``.
    """
    if pre_state.basis != subspace.basis:
        raise BasisError("state and subspace projector live on different bases")
    if not subspace.is_projector():
        raise ValueError("subspace operator is not a projector")
    proj = subspace.matrix @ pre_state.amps
    n = float(np.linalg.norm(proj))
    if n < floor:
        raise EmptyPostselection("the preselected state has no component in the subspace")
    return TwoStateVector(pre_state, StateVector(pre_state.basis, proj / n))


def no_postselection_abl(p: float) -> tuple[list[float], list[float]]:
    """ABL versus Born probabilities for a qubit with no postselection.

    Returns ``(abl, born)`` for the measurement ``{|0><0|, |1><1|}`` on
    ``sqrt(p)|0> + sqrt(1-p)|1>``, where "no postselection" is the
    projection on the whole space (backward state equal to the forward one).
    The two disagree unless ``p`` is 0, 1/2 or 1.
    """
    basis = make_basis(["0", "1"])
    psi = StateVector(basis, [math.sqrt(p), math.sqrt(1 - p)])
    tsv = partial_postselect(psi, identity(basis))
    abl = abl_probabilities(tsv, [projector_on(basis, ["0"]), projector_on(basis, ["1"])])
    return abl, [p, 1 - p]


# -- per-wire quantities ------------------------------------------------


@dataclass(frozen=True)
class _Waves:
    forward: dict
    backward: dict
    overlap: complex


def _waves(c: Circuit, detector: str) -> _Waves:
    fw = forward_amplitudes(c)
    bw = backward_amplitudes(c, detector)
    wire = c.detector(detector).wire
    ov = complex(np.vdot(detector_vector(c, detector, fw), fw[wire]))
    return _Waves(fw, bw, ov)


def _require_overlap(waves: _Waves, floor: float) -> None:
    if abs(waves.overlap) < floor:
        raise PostselectionImpossible(f"postselection overlap {abs(waves.overlap):.3g} is below the floor")


def _parse_target(c: Circuit, target: str) -> tuple[str, str | None]:
    wire, _, axis = target.partition("@")
    c.check_wire(wire)
    if axis:
        if not c.polarization:
            raise BasisError(f"target {target!r} resolves polarization in a polarization-off circuit")
        if axis not in JONES:
            raise BasisError(f"unknown polarization axis {axis!r}")
    return wire, axis or None


def _local(waves: _Waves, wire: str, axis: str | np.ndarray | None = None) -> complex:
    """``<Phi| P_wire [x |u><u|] |Psi>``."""
    phi, psi = waves.backward[wire], waves.forward[wire]
    if axis is None:
        return complex(np.vdot(phi, psi))
    u = JONES[axis] if isinstance(axis, str) else axis
    return complex(np.vdot(phi, u) * np.vdot(u, psi))


def _weak_values(waves: _Waves, targets: Sequence[tuple[str, str | None]]) -> np.ndarray:
    return np.array([_local(waves, w, a) / waves.overlap for w, a in targets])


def wire_weak_values(c: Circuit, detector: str, overlap_floor: float = OVERLAP_FLOOR) -> dict[str, complex]:
    """Weak value of the projector onto each wire."""
    waves = _waves(c, detector)
    _require_overlap(waves, overlap_floor)
    return {w: _local(waves, w) / waves.overlap for w in c.wires}


@dataclass(frozen=True)
class WeakValueReport:
    overlap_magnitude: float
    wires: dict[str, complex]
    polarized: dict[str, dict[str, complex]] = field(default_factory=dict)


def weak_value_report(c: Circuit, detector: str, overlap_floor: float = OVERLAP_FLOOR) -> WeakValueReport:
    waves = _waves(c, detector)
    _require_overlap(waves, overlap_floor)
    wires = {w: _local(waves, w) / waves.overlap for w in c.wires}
    polarized = {}
    if c.polarization:
        polarized = {w: {ax: _local(waves, w, ax) / waves.overlap for ax in POL_AXES} for w in c.wires}
    return WeakValueReport(abs(waves.overlap), wires, polarized)


def _best_internal_axis(phi: np.ndarray, psi: np.ndarray) -> np.ndarray | None:
    """Unit polarization vector maximizing ``|<phi|u><u|psi>|``."""
    nphi, npsi = np.linalg.norm(phi), np.linalg.norm(psi)
    if nphi == 0 or npsi == 0:
        return None
    ph, ps = phi / nphi, psi / npsi
    gamma = np.angle(np.vdot(ph, ps))
    u = np.exp(1j * gamma) * ph + ps
    return u / np.linalg.norm(u)


def _abl_find(waves: _Waves, wire: str, axis=None) -> float:
    num = _local(waves, wire, axis)
    rest = waves.overlap - num
    denom = abs(num) ** 2 + abs(rest) ** 2
    if denom == 0.0:
        raise InconsistentPostselection("every outcome has zero ABL weight")
    return abs(num) ** 2 / denom


def find_probability(c: Circuit, detector: str, wire: str, axis: str | None = None) -> float:
    """ABL probability that a nondemolition check finds the photon on ``wire``.

    ``axis`` restricts the check to one polarization (H, V, L, R, D, A).
    """
    c.check_wire(wire)
    if axis is not None:
        _parse_target(c, f"{wire}@{axis}")
    return _abl_find(_waves(c, detector), wire, axis)


def unconditional_trace(c: Circuit, wire: str) -> float:
    """Detector-independent trace weight ``<Psi|P_wire|Psi>``."""
    c.check_wire(wire)
    psi = forward_amplitudes(c)[wire]
    return float(np.vdot(psi, psi).real)


def cross_world_backward(c: Circuit, wire: str) -> np.ndarray:
    """Sum over all detectors of backward amplitudes at ``wire``.

    Each detector's backward wave is weighted by the forward amplitude that
    reaches it (its Born probability is the squared modulus). For a
    lossless network the sum reproduces the forward amplitude, so it
    vanishes exactly where the forward wave does.
    """
    c.check_wire(wire)
    fw = forward_amplitudes(c)
    total = np.zeros(c.dim, dtype=complex)
    for d in c.detectors:
        branch = np.vdot(detector_vector(c, d.name, fw), fw[d.wire])
        total = total + branch * backward_amplitudes(c, d.name)[wire]
    return total


# -- perturbations ------------------------------------------------------


@dataclass(frozen=True)
class ProbeSpec:
    """Local one-parameter perturbation on ``wire``; ``theta=0`` is the identity.

    ``phase`` multiplies by ``exp(i theta)``, ``attenuation`` by ``1 - theta``
    and ``polrot`` rotates the polarization by ``theta``.
    """

    wire: str
    family: str = "attenuation"
    theta: float = 0.0

    def __post_init__(self):
        if self.family not in PROBE_FAMILIES:
            raise ValueError(f"unknown probe family {self.family!r}")

    def matrix(self, dim: int, theta: float | None = None) -> np.ndarray:
        th = self.theta if theta is None else theta
        if self.family == "phase":
            return np.exp(1j * th) * np.eye(dim)
        if self.family == "attenuation":
            return (1.0 - th) * np.eye(dim, dtype=complex)
        if dim != 2:
            raise BasisError("polrot probes need polarization")
        cs, sn = math.cos(th), math.sin(th)
        return np.array([[cs, -sn], [sn, cs]], dtype=complex)


@dataclass(frozen=True)
class ProbeResult:
    probe: ProbeSpec
    dP_post: float
    dWV: dict[str, complex]
    consistent: bool
    step: float


def _probe_eval(c: Circuit, detector: str, probe: ProbeSpec, theta: float, targets) -> np.ndarray:
    waves = _waves(c.with_probe(probe.wire, probe.matrix(c.dim, theta)), detector)
    return np.concatenate([[abs(waves.overlap) ** 2], _weak_values(waves, targets)])


def perturbation_response(
    c: Circuit,
    detector: str,
    probe: ProbeSpec,
    targets: Sequence[str] = (),
    step: float = DEFAULT_STEP,
    overlap_floor: float = OVERLAP_FLOOR,
    rtol: float = 1e-6,
) -> ProbeResult:
    """Derivatives of the postselection probability and target weak values.

    Central differences at ``step`` and ``step/2``; the Richardson
    combination is returned. ``consistent`` is False if the two estimates
    disagree beyond ``rtol`` (relative, floored at 1).
    """
    c.check_wire(probe.wire)
    if probe.family == "polrot" and not c.polarization:
        raise BasisError("polrot probes need polarization")
    parsed = [_parse_target(c, t) for t in targets]
    _require_overlap(_waves(c, detector), overlap_floor)

    def central(h: float) -> np.ndarray:
        hi = _probe_eval(c, detector, probe, probe.theta + h, parsed)
        lo = _probe_eval(c, detector, probe, probe.theta - h, parsed)
        return (hi - lo) / (2 * h)

    d1, d2 = central(step), central(step / 2)
    est = (4 * d2 - d1) / 3
    consistent = bool(np.all(np.abs(d1 - d2) <= rtol * np.maximum(1.0, np.abs(d2))))
    return ProbeResult(
        probe=probe,
        dP_post=float(est[0].real),
        dWV={t: complex(v) for t, v in zip(targets, est[1:])},
        consistent=consistent,
        step=step,
    )


# -- presence -----------------------------------------------------------


@dataclass(frozen=True)
class WirePresence:
    weak_trace: bool
    findable: bool
    affects_postselection: bool
    affects_overlap_trace: bool
    classification: str
    trace_strength: float
    find_probability: float
    max_dP_post: float
    max_dWV: float


@dataclass(frozen=True)
class PresenceReport:
    detector: str
    wires: dict[str, WirePresence]

    def classified(self, kind: str) -> list[str]:
        return [w for w, p in self.wires.items() if p.classification == kind]


def classify_presence(
    c: Circuit,
    detector: str,
    eps_presence: float = EPS_PRESENCE,
    eps_deriv: float = EPS_DERIV,
    step: float = DEFAULT_STEP,
    overlap_floor: float = OVERLAP_FLOOR,
) -> PresenceReport:
    """Per-wire presence tests relative to one detector.

    * weak trace: some local projector (spatial, or spatial times a
      polarization state) has a nonzero ``<Phi|.|Psi>``;
    * findable: the best such nondemolition check has nonzero ABL
      probability;
    * affects postselection: a local probe changes the detection rate;
    * affects overlap trace: a local probe changes a weak value on a wire
      that carries a weak trace.

    A wire is *primary* when it has a trace and is findable, *secondary*
    when it is not primary but its probes move the traces elsewhere.
    """
    waves = _waves(c, detector)
    _require_overlap(waves, overlap_floor)

    strengths, finds = {}, {}
    for w in c.wires:
        phi, psi = waves.backward[w], waves.forward[w]
        a = abs(np.vdot(phi, psi))
        if c.polarization:
            strengths[w] = 0.5 * (a + np.linalg.norm(phi) * np.linalg.norm(psi))
            u = _best_internal_axis(phi, psi)
            best = _abl_find(waves, w, u) if u is not None else 0.0
            finds[w] = max(_abl_find(waves, w), best)
        else:
            strengths[w] = a
            finds[w] = _abl_find(waves, w)

    overlap_wires = [w for w in c.wires if strengths[w] > eps_presence]
    targets = list(overlap_wires)
    if c.polarization:
        targets += [f"{w}@{ax}" for w in overlap_wires for ax in POL_AXES]
    families = PROBE_FAMILIES if c.polarization else PROBE_FAMILIES[:2]

    wires = {}
    for w in c.wires:
        dps, dwvs = [], [0.0]
        for fam in families:
            res = perturbation_response(c, detector, ProbeSpec(w, fam), targets, step=step, overlap_floor=overlap_floor)
            dps.append(abs(res.dP_post))
            dwvs.extend(abs(v) for t, v in res.dWV.items() if t.partition("@")[0] != w)
        weak_trace = bool(strengths[w] > eps_presence)
        findable = bool(finds[w] > eps_presence**2)
        affects_post = bool(max(dps) > eps_deriv)
        affects_trace = bool(max(dwvs) > eps_deriv)
        if weak_trace and findable:
            kind = "primary"
        elif affects_trace:
            kind = "secondary"
        else:
            kind = "none"
        wires[w] = WirePresence(
            weak_trace=weak_trace,
            findable=findable,
            affects_postselection=affects_post,
            affects_overlap_trace=affects_trace,
            classification=kind,
            trace_strength=float(strengths[w]),
            find_probability=float(finds[w]),
            max_dP_post=float(max(dps)),
            max_dWV=float(max(dwvs)),
        )
    return PresenceReport(detector, wires)

