"""Built-in networks for the five reference setups.

Wire naming
-----------
``fig1``
    ``s`` (source to splitter) and ``d`` (splitter to detector ``D``) carry
    both waves. ``c_in`` is the empty input port, which only the backward
    wave reaches. ``e_out`` is the other output, which only the forward wave
    reaches and which ends at detector ``D_other``.
``fig2``
    Nested interferometer: outer arm ``C``, inner arms ``A``/``B``,
    ``pre_inner`` (source side of the inner interferometer), ``E`` (inner
    output heading to the final splitter) and ``F`` (inner output heading
    to detector ``D3``).
``fig3`` / ``fig4``
    Same geometry, lettered after the vibrating mirrors: ``E`` sits before
    the inner interferometer and ``F`` after it, on the way to the final
    splitter. ``fig4`` blocks the beam between mirror ``F`` and the final
    splitter.
``fig5``
    Polarized interferometer; arm ``B`` is rotated to vertical and the
    detector ``D`` passes horizontal light only.

The nested scenes are tuned so that, for detector ``D2``, the forward
state inside is ``(|A> + |B> + |C>)/sqrt3`` and the backward state is
``(<A| - <B| + <C|)/sqrt3``. The inner interferometer sends all forward
light toward ``D3``.
"""

from __future__ import annotations

import math

from .circuit import (
    BeamSplitter,
    Block,
    Circuit,
    Detector,
    Mirror,
    PolRotator,
    VibrationSpec,
)
from .errors import UnknownNameError

SCENE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5")

# outer splitter: 1/3 of the intensity to arm C
OUTER_THETA = math.acos(1 / math.sqrt(3))
# final splitter: D2 row is (1/sqrt3, sqrt(2/3)) on (C, inner output)
FINAL_THETA = math.acos(math.sqrt(2 / 3))
REAL_PHI = math.pi / 2  # phi=pi/2 makes the splitter matrix real

DEFAULT_VIBRATION_AMP = 0.01
MIRROR_FREQS = {"A": 3.0, "B": 5.0, "C": 7.0, "E": 11.0, "F": 13.0}


def fig1() -> Circuit:
    return Circuit(
        {"s": 1.0, "c_in": 0.0},
        [BeamSplitter(("s", "c_in"), ("d", "e_out"))],
        [Detector("D", "d"), Detector("D_other", "e_out")],
        name="fig1",
    )


def fig2() -> Circuit:
    return Circuit(
        {"src": 1.0, "vac": 0.0, "vac_inner": 0.0},
        [
            BeamSplitter(("src", "vac"), ("C", "pre_inner"), theta=OUTER_THETA, phi=REAL_PHI),
            BeamSplitter(("pre_inner", "vac_inner"), ("A", "B"), phi=REAL_PHI),
            BeamSplitter(("A", "B"), ("E", "F"), phi=REAL_PHI),
            BeamSplitter(("C", "E"), ("d1", "d2"), theta=FINAL_THETA, phi=REAL_PHI),
        ],
        [Detector("D2", "d2"), Detector("D1", "d1"), Detector("D3", "F")],
        name="fig2",
    )


def _vibrating(inp: str, out: str, amp: float) -> Mirror:
    return Mirror((inp,), (out,), vibration=VibrationSpec(MIRROR_FREQS[out], amp), name=out)


def fig3(amp: float = DEFAULT_VIBRATION_AMP, blocked: bool = False) -> Circuit:
    source = {"src": 1.0, "vac": 0.0, "vac_inner": 0.0}
    elements = [
        BeamSplitter(("src", "vac"), ("c0", "e0"), theta=OUTER_THETA, phi=REAL_PHI),
        _vibrating("c0", "C", amp),
        _vibrating("e0", "E", amp),
        BeamSplitter(("E", "vac_inner"), ("a0", "b0"), phi=REAL_PHI),
        _vibrating("a0", "A", amp),
        _vibrating("b0", "B", amp),
        BeamSplitter(("A", "B"), ("f0", "d3"), phi=REAL_PHI),
        _vibrating("f0", "F", amp),
    ]
    if blocked:
        source["fb"] = 0.0
        elements += [
            Block(("F",)),
            BeamSplitter(("C", "fb"), ("d1", "d2"), theta=FINAL_THETA, phi=REAL_PHI),
        ]
    else:
        elements.append(BeamSplitter(("C", "F"), ("d1", "d2"), theta=FINAL_THETA, phi=REAL_PHI))
    return Circuit(
        source,
        elements,
        [Detector("D2", "d2"), Detector("D1", "d1"), Detector("D3", "d3")],
        name="fig4" if blocked else "fig3",
    )


def fig4(amp: float = DEFAULT_VIBRATION_AMP) -> Circuit:
    return fig3(amp, blocked=True)


def fig5() -> Circuit:
    return Circuit(
        {"src": 1.0, "vac": 0.0},
        [
            BeamSplitter(("src", "vac"), ("A", "b0"), phi=REAL_PHI),
            PolRotator(("b0",), ("B",), angle=math.pi / 2),
            BeamSplitter(("A", "B"), ("d", "d_other")),
        ],
        [Detector("D", "d", pol="H"), Detector("D_other", "d_other")],
        name="fig5",
        polarization=True,
    )


_BUILDERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}


def build(scene_id: str) -> Circuit:
    try:
        return _BUILDERS[scene_id]()
    except KeyError:
        raise UnknownNameError(f"unknown scene id {scene_id!r}; choose from {', '.join(SCENE_IDS)}") from None


def emit(scene_id: str) -> str:
    """Scene-file text for a built-in scene (deterministic)."""
    from .scene_dsl import dump

    return dump(build(scene_id))

