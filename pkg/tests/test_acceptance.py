"""Acceptance criteria, one test per criterion.

Each criterion prints a single ``[PASS]``/``[FAIL]`` line (also collected
into the pytest terminal summary). Run standalone with
``python tests/test_acceptance.py``.
"""

import math
import string
import time

import numpy as np
import pytest

from oracles import abl_no_postselection, nested_mzi_weak_values
from randomnet import best_detector, random_circuit
from twostate import scene_dsl, scenes
from twostate.circuit import forward_amplitudes, overlap
from twostate.errors import InconsistentPostselection, SceneError
from twostate.hilbert import Operator, StateVector, identity, make_basis, projector_on, rank_one
from twostate.tsvf import (
    ProbeSpec,
    abl_probabilities,
    classify_presence,
    cross_world_backward,
    no_postselection_abl,
    partial_postselect,
    perturbation_response,
    two_state_vector_at,
    unconditional_trace,
    weak_value_report,
    wire_weak_values,
)
from twostate.weaktrace import SpectrumConfig, scale_vibrations, simulate_spectrum

RESULTS: dict[int, str] = {}


def report(number: int, title: str, checks: dict[str, bool], detail: str) -> bool:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2} {title}: {detail}"
    if failed:
        line += f" (failing: {', '.join(failed)})"
    RESULTS[number] = line
    print(line)
    return ok


def criterion_1() -> bool:
    ref = nested_mzi_weak_values()
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        wv = wire_weak_values(scenes.fig2(), "D2")
        best = min(best, time.perf_counter() - t0)
    err = max(abs(wv[w] - ref[w]) for w in "ABCEF")
    target = dict(zip("ABCEF", (1, -1, 1, 0, 0)))
    err_target = max(abs(wv[w] - target[w]) for w in "ABCEF")
    return report(
        1,
        "nested-MZI weak values",
        {"oracle": err < 1e-10, "values": err_target < 1e-10, "runtime": best < 0.010},
        f"max |err| {max(err, err_target):.1e}, {best * 1e3:.2f} ms",
    )


def criterion_2() -> bool:
    rep = weak_value_report(scenes.fig5(), "D")
    pb, pbl = rep.wires["B"], rep.polarized["B"]["L"]
    return report(
        2,
        "Cheshire-cat weak values",
        {"P_B": abs(pb) < 1e-10, "P_B P_L": abs(pbl - 0.5) < 1e-10},
        f"(P_B)_w = {pb.real:.2e}, (P_B P_L)_w = {pbl.real:.12f}",
    )


def criterion_3() -> bool:
    t0 = time.perf_counter()
    rep = simulate_spectrum(scenes.fig3(), "D2", SpectrumConfig())
    elapsed = time.perf_counter() - t0
    p = {k: v.power for k, v in rep.peaks.items()}
    main = [p["A"], p["B"], p["C"]]
    spread = max(main) / min(main) - 1
    residual = max(p["E"], p["F"]) / p["A"]
    return report(
        3,
        "spectrum pattern",
        {"A/B/C within 5%": spread < 0.05, "E,F < 1% of A": residual < 0.01, "runtime": elapsed < 5.0},
        f"A/B/C spread {spread:.2e}, max(E,F)/A {residual:.1e}, {elapsed:.2f} s for {len(rep.freqs) * 2 - 2} samples",
    )


def criterion_4() -> bool:
    rep = simulate_spectrum(scenes.fig4(), "D2")
    p = {k: v.power for k, v in rep.peaks.items()}
    ra, rb = p["A"] / p["C"], p["B"] / p["C"]
    return report(
        4,
        "block removes f_A and f_B",
        {"A < 1% of C": ra < 0.01, "B < 1% of C": rb < 0.01},
        f"A/C {ra:.1e}, B/C {rb:.1e}",
    )


def criterion_5() -> bool:
    full = simulate_spectrum(scenes.fig3(), "D2")
    half = simulate_spectrum(scale_vibrations(scenes.fig3(), 0.5), "D2")
    amp_ratio = [math.sqrt(full.peaks[k].power / half.peaks[k].power) for k in "ABC"]
    e_ratio = full.peaks["E"].power / half.peaks["E"].power
    return report(
        5,
        "second-order suppression",
        {
            "main peaks 2x +-10%": all(abs(r - 2) <= 0.2 for r in amp_ratio),
            "f_E power 16x within factor 2": 8 <= e_ratio <= 32,
        },
        f"main amplitude ratios {', '.join(f'{r:.4f}' for r in amp_ratio)}; f_E power ratio {e_ratio:.1f}",
    )


def criterion_6() -> bool:
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        basis = make_basis([str(k) for k in range(n)])
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi = StateVector(basis, v / np.linalg.norm(v))
        q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        k = int(rng.integers(1, n))
        sub = Operator(basis, q[:, :k] @ q[:, :k].conj().T, projector=True)
        tsv = partial_postselect(psi, sub)
        phi = rank_one(tsv.backward)
        prob = abl_probabilities(tsv, [phi, identity(basis) - phi])[0]
        worst = max(worst, abs(prob - 1))
    return report(6, "partial postselection certainty", {"1000 pairs": worst < 1e-12}, f"max |P - 1| {worst:.1e}")


def criterion_7() -> bool:
    abl, born = no_postselection_abl(0.8)
    closed = abl_no_postselection(0.8)
    return report(
        7,
        "ABL versus Born",
        {"closed form": abs(abl[0] - closed) < 1e-12, "gap > 0.14": abl[0] - born[0] > 0.14},
        f"ABL {abl[0]:.4f} (16/17 = {16 / 17:.4f}), Born {born[0]:.1f}",
    )


def criterion_8() -> bool:
    c = scenes.fig2()
    res = perturbation_response(c, "D2", ProbeSpec("E", "attenuation"), ["A"])
    kinds = {w: p.classification for w, p in classify_presence(c, "D2").wires.items()}
    return report(
        8,
        "secondary presence",
        {
            "dP_post ~ 0": abs(res.dP_post) < 1e-8,
            "d(P_A)_w > 0.1": abs(res.dWV["A"]) > 0.1,
            "E secondary": kinds["E"] == "secondary",
            "A,B,C primary": all(kinds[w] == "primary" for w in "ABC"),
            "F none": kinds["F"] == "none",
        },
        f"dP_post {res.dP_post:.1e}, d(P_A)_w {res.dWV['A'].real:.4f}, E={kinds['E']}, F={kinds['F']}",
    )


def criterion_9() -> bool:
    c = scenes.fig2()
    cancel = float(np.abs(cross_world_backward(c, "E")).max())
    trace = unconditional_trace(c, "E")
    return report(
        9,
        "cross-world cancellation",
        {"backward sum at E vanishes": cancel < 1e-10, "unconditional_trace(E) = 2/3": abs(trace - 2 / 3) < 1e-10},
        f"|sum| {cancel:.1e}, unconditional_trace(E) {trace:.3e}",
    )


_FUZZ_ALPHABET = string.ascii_letters + string.digits + ' \t"#@:=,->+-./\\\n'


def criterion_10() -> bool:
    rng = np.random.default_rng(10)
    counts = dict.fromkeys(("cut", "completeness", "abl", "roundtrip", "fuzz"), 0)
    bad = dict.fromkeys(counts, 0)
    t0 = time.perf_counter()
    for _ in range(1000):
        c = random_circuit(rng)
        text = scene_dsl.dump(c)
        again = scene_dsl.load(text)
        counts["roundtrip"] += 1
        same = scene_dsl.dump(again) == text and all(
            np.allclose(v, forward_amplitudes(again)[w], atol=1e-14) for w, v in forward_amplitudes(c).items()
        )
        bad["roundtrip"] += not same

        det, p = best_detector(c)
        if p > 1e-6:
            ref = overlap(c, det)
            counts["cut"] += 1
            counts["completeness"] += 1
            cut_ok = comp_ok = True
            for cut in c.stage_cuts:
                tsv = two_state_vector_at(c, det, cut)
                cut_ok &= abs(tsv.overlap - ref) < 1e-10
                local = sum(np.vdot(tsv.backward.amps, projector_on(tsv.basis, [w]).matrix @ tsv.forward.amps) for w in cut)
                comp_ok &= abs(local / tsv.overlap - 1) < 1e-8
            bad["cut"] += not cut_ok
            bad["completeness"] += not comp_ok
            cut = max(c.stage_cuts, key=len)
            tsv = two_state_vector_at(c, det, cut)
            try:
                probs = abl_probabilities(tsv, [projector_on(tsv.basis, [w]) for w in cut])
                counts["abl"] += 1
                bad["abl"] += not (abs(sum(probs) - 1) < 1e-12 and min(probs) >= -1e-15)
            except InconsistentPostselection:
                pass

        chars = rng.choice(list(_FUZZ_ALPHABET), size=int(rng.integers(0, 80)))
        fuzz = "".join(chars)
        if rng.random() < 0.5:
            lines = text.splitlines()
            k = int(rng.integers(len(lines)))
            pos = int(rng.integers(len(lines[k]) + 1))
            lines[k] = lines[k][:pos] + fuzz[:6] + lines[k][pos + int(rng.integers(0, 4)) :]
            fuzz = "\n".join(lines)
        counts["fuzz"] += 1
        try:
            scene_dsl.load(fuzz)
        except SceneError as e:
            bad["fuzz"] += not (e.line >= 1 and e.column >= 1)
        except Exception:  # noqa: BLE001 - any other exception breaks totality
            bad["fuzz"] += 1
    elapsed = time.perf_counter() - t0
    checks = {k: bad[k] == 0 for k in counts}
    checks["runtime < 60 s"] = elapsed < 60
    detail = ", ".join(f"{k} {counts[k] - bad[k]}/{counts[k]}" for k in counts) + f"; {elapsed:.1f} s"
    return report(10, "property suites on 1000 instances", checks, detail)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]  # fmt: skip


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 11)])
def test_acceptance(criterion):
    assert criterion(), RESULTS[CRITERIA.index(criterion) + 1]


if __name__ == "__main__":
    outcomes = [fn() for fn in CRITERIA]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria pass")
