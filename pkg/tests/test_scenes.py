from pathlib import Path

import pytest

from twostate import scene_dsl, scenes
from twostate.circuit import forward_amplitudes
from twostate.errors import UnknownNameError
from twostate.tsvf import wire_weak_values

SCENE_DIR = Path(__file__).resolve().parents[1] / "scenes"


def test_ids():
    assert scenes.SCENE_IDS == ("fig1", "fig2", "fig3", "fig4", "fig5")


def test_unknown_id():
    with pytest.raises(UnknownNameError):
        scenes.build("fig9")


@pytest.mark.parametrize("scene_id", scenes.SCENE_IDS)
def test_emit_round_trips(scene_id):
    text = scenes.emit(scene_id)
    assert scenes.emit(scene_id) == text
    c = scene_dsl.load(text)
    ref = scenes.build(scene_id)
    assert scene_dsl.dump(c) == text
    fa, fb = forward_amplitudes(c), forward_amplitudes(ref)
    assert fa.keys() == fb.keys()
    for w in fa:
        assert fa[w] == pytest.approx(fb[w], abs=1e-15)


@pytest.mark.parametrize("scene_id", scenes.SCENE_IDS)
def test_shipped_files_are_current(scene_id):
    assert (SCENE_DIR / f"{scene_id}.scn").read_text() == scenes.emit(scene_id)


def test_nested_scenes_share_weak_values():
    wv2 = wire_weak_values(scenes.fig2(), "D2")
    wv3 = wire_weak_values(scenes.fig3(), "D2")
    for w in "ABC":
        assert wv2[w] == pytest.approx(wv3[w])
    # fig3 letters E before the inner interferometer and F after it
    assert wv3["E"] == pytest.approx(0, abs=1e-12)
    assert wv3["F"] == pytest.approx(0, abs=1e-12)


def test_fig3_mirror_frequencies():
    freqs = {m.name: m.vibration.freq for m in scenes.fig3().mirrors()}
    assert freqs == {"A": 3.0, "B": 5.0, "C": 7.0, "E": 11.0, "F": 13.0}
