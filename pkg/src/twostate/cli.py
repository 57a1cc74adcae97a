"""Command-line front end: ``twostate`` or ``python -m twostate``.

Commands
--------
``run SCENE [--detector NAME] [--json | --table]``
    Postselection probability, per-wire weak values, find probabilities,
    unconditional traces and presence classification.
``spectrum SCENE [--detector NAME] [--rate HZ] [--duration S] [--noise STD] [--seed N] [--out FILE]``
    Simulated quad-cell spectrum. The peaks map goes to stdout; ``--out``
    writes the full spectrum (``.json`` extension for JSON, anything else CSV).
``probe SCENE --wire W [--family phase|attenuation|polrot] [--targets A,B,...]``
    Finite-difference response of the detection rate and target weak values.
``scenes list`` / ``scenes emit ID [--out FILE] [--force]``
    Built-in scene ids, or the scene-file text of one of them.

``SCENE`` is a scene-file path, ``-`` for stdin, or a built-in scene id
when no file of that name exists.

Output formats
--------------
JSON objects use sorted keys and two-space indentation; complex numbers are
``{"re": x, "im": y}``; floats use Python's shortest round-trip repr. The
shapes are fixed by the schemas in ``twostate/schemas``.

Spectrum CSV: first line ``freq_hz,power``, then one ``repr(freq),repr(power)``
row per rfft bin in increasing frequency, each line terminated by ``\\n``.

Exit codes
----------
0 success; 1 other tool error; 2 parse error; 3 semantic error, unknown
name or unreadable file; 4 topology error; 5 impossible or inconsistent
postselection; 6 configuration error; 7 refusing to overwrite a file.
Diagnostics go to stderr as ``ErrorClass: message``.

Environment
-----------
``TSVF_TOLERANCE`` overrides the presence and derivative thresholds.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import scene_dsl, scenes
from .circuit import Circuit, postselection_probability
from .errors import (
    ComplexityError,
    ConfigError,
    EmptyPostselection,
    InconsistentPostselection,
    ParseError,
    PostselectionImpossible,
    SceneError,
    TopologyError,
    TsvfError,
    UnknownNameError,
)
from .tsvf import (
    EPS_DERIV,
    EPS_PRESENCE,
    PROBE_FAMILIES,
    ProbeSpec,
    classify_presence,
    perturbation_response,
    unconditional_trace,
    weak_value_report,
)
from .weaktrace import SpectrumConfig, simulate_spectrum

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3
EXIT_TOPOLOGY = 4
EXIT_POSTSELECTION = 5
EXIT_CONFIG = 6
EXIT_EXISTS = 7

TOLERANCE_ENV = "TSVF_TOLERANCE"


class FileExistsRefusal(TsvfError):
    """Output path exists and ``--force`` was not given."""


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, TopologyError):
        return EXIT_TOPOLOGY
    if isinstance(exc, (SceneError, UnknownNameError, OSError)):
        return EXIT_SEMANTIC
    if isinstance(exc, (PostselectionImpossible, InconsistentPostselection, EmptyPostselection)):
        return EXIT_POSTSELECTION
    if isinstance(exc, (ConfigError, ComplexityError)):
        return EXIT_CONFIG
    if isinstance(exc, FileExistsRefusal):
        return EXIT_EXISTS
    if isinstance(exc, TsvfError):
        return EXIT_SEMANTIC if isinstance(exc, ValueError) else EXIT_OTHER
    return EXIT_OTHER


def tolerances() -> tuple[float, float]:
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or raw == "":
        return EPS_PRESENCE, EPS_DERIV
    try:
        eps = float(raw)
    except ValueError:
        raise ConfigError(f"{TOLERANCE_ENV}={raw!r} is not a number") from None
    if not (math.isfinite(eps) and eps > 0):
        raise ConfigError(f"{TOLERANCE_ENV} must be a positive finite number")
    return eps, eps


def load_scene(ref: str) -> Circuit:
    if ref == "-":
        return scene_dsl.load(sys.stdin.read())
    path = Path(ref)
    if path.exists():
        return scene_dsl.load(path.read_text(encoding="utf-8"))
    if ref in scenes.SCENE_IDS:
        return scenes.build(ref)
    raise UnknownNameError(f"no scene file or built-in scene named {ref!r}")


def _detector(c: Circuit, name: str | None) -> str:
    if name is None:
        return c.detectors[0].name
    c.detector(name)
    return name


def cx(z: complex) -> dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


# -- run -------------------------------------------------------------------


def run_report(c: Circuit, detector: str) -> dict:
    eps_presence, eps_deriv = tolerances()
    wv = weak_value_report(c, detector)
    presence = classify_presence(c, detector, eps_presence=eps_presence, eps_deriv=eps_deriv)
    weak_values = {w: cx(v) for w, v in wv.wires.items()}
    for w, axes in wv.polarized.items():
        for ax, v in axes.items():
            weak_values[f"{w}@{ax}"] = cx(v)
    return {
        "scene": c.name,
        "detector": detector,
        "postselection_probability": postselection_probability(c, detector),
        "overlap_magnitude": wv.overlap_magnitude,
        "tolerance": eps_presence,
        "weak_values": weak_values,
        "find_probabilities": {w: p.find_probability for w, p in presence.wires.items()},
        "unconditional_traces": {w: unconditional_trace(c, w) for w in c.wires},
        "presence": {
            w: {
                "classification": p.classification,
                "weak_trace": p.weak_trace,
                "findable": p.findable,
                "affects_postselection": p.affects_postselection,
                "affects_overlap_trace": p.affects_overlap_trace,
                "trace_strength": p.trace_strength,
                "max_dP_post": p.max_dP_post,
                "max_dWV": p.max_dWV,
            }
            for w, p in presence.wires.items()
        },
    }


def _num(x: float) -> str:
    return "0" if abs(x) < 1e-12 else f"{x:.6g}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    fmt = lambda r: "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()  # noqa: E731
    return "\n".join([fmt(header), fmt(["-" * w for w in widths]), *map(fmt, rows)])


def render_run_table(report: dict) -> str:
    lines = [
        f"scene {report['scene']}  detector {report['detector']}",
        f"postselection probability {_num(report['postselection_probability'])}",
        "",
    ]
    rows = []
    for w, pres in report["presence"].items():
        v = report["weak_values"][w]
        rows.append(
            [
                w,
                _num(v["re"]),
                _num(v["im"]),
                _num(report["find_probabilities"][w]),
                _num(report["unconditional_traces"][w]),
                pres["classification"],
            ]
        )
    lines.append(_table(["wire", "wv.re", "wv.im", "find", "trace", "presence"], rows))
    pol = [k for k in report["weak_values"] if "@" in k]
    if pol:
        lines.append("")
        rows = [[k, _num(report["weak_values"][k]["re"]), _num(report["weak_values"][k]["im"])] for k in pol]
        lines.append(_table(["wire@pol", "wv.re", "wv.im"], rows))
    return "\n".join(lines)


def cmd_run(args) -> int:
    c = load_scene(args.scene)
    report = run_report(c, _detector(c, args.detector))
    print(render_run_table(report) if args.table else dumps(report))
    return EXIT_OK


# -- spectrum --------------------------------------------------------------


def spectrum_csv(report) -> str:
    rows = ["freq_hz,power"]
    rows += [f"{float(f)!r},{float(p)!r}" for f, p in zip(report.freqs, report.powers)]
    return "\n".join(rows) + "\n"


def spectrum_peaks(report) -> dict:
    return {
        name: {"freq_hz": p.freq, "power": p.power, "relative_power": p.relative_power}
        for name, p in report.peaks.items()
    }


def spectrum_json(c: Circuit, detector: str, report) -> dict:
    cfg = report.config
    return {
        "scene": c.name,
        "detector": detector,
        "config": {
            "sample_rate": cfg.sample_rate,
            "duration": cfg.duration,
            "noise_std": cfg.noise_std,
            "seed": cfg.seed,
            "grid_halfwidth": cfg.grid_halfwidth,
            "grid_points": cfg.grid_points,
        },
        "peaks": spectrum_peaks(report),
    }


def cmd_spectrum(args) -> int:
    c = load_scene(args.scene)
    detector = _detector(c, args.detector)
    cfg = SpectrumConfig(sample_rate=args.rate, duration=args.duration, noise_std=args.noise, seed=args.seed)
    report = simulate_spectrum(c, detector, cfg)
    doc = spectrum_json(c, detector, report)
    if args.out:
        out = Path(args.out)
        text = dumps(doc) + "\n" if out.suffix.lower() == ".json" else spectrum_csv(report)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print(dumps(doc))
    return EXIT_OK


# -- probe -----------------------------------------------------------------


def cmd_probe(args) -> int:
    c = load_scene(args.scene)
    detector = _detector(c, args.detector)
    c.check_wire(args.wire)
    targets = [t for t in args.targets.split(",") if t] if args.targets else [w for w in c.wires if w != args.wire]
    res = perturbation_response(c, detector, ProbeSpec(args.wire, args.family), targets, step=args.step)
    print(
        dumps(
            {
                "scene": c.name,
                "detector": detector,
                "wire": args.wire,
                "family": args.family,
                "step": res.step,
                "consistent": res.consistent,
                "dP_post": res.dP_post,
                "dWV": {t: cx(v) for t, v in res.dWV.items()},
            }
        )
    )
    return EXIT_OK


# -- scenes ----------------------------------------------------------------


def cmd_scenes(args) -> int:
    if args.action == "list":
        print("\n".join(scenes.SCENE_IDS))
        return EXIT_OK
    if not args.id:
        raise UnknownNameError("scenes emit needs a scene id")
    text = scenes.emit(args.id)
    if args.out:
        out = Path(args.out)
        if out.exists() and not args.force:
            raise FileExistsRefusal(f"{out} exists; pass --force to overwrite")
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twostate", description="Two-state vector analysis of optical networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="propagation, weak values and presence report")
    p.add_argument("scene")
    p.add_argument("--detector")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--table", action="store_true", help="aligned text table")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("spectrum", help="simulated quad-cell spectrum")
    p.add_argument("scene")
    p.add_argument("--detector")
    p.add_argument("--rate", type=float, default=SpectrumConfig.sample_rate)
    p.add_argument("--duration", type=float, default=SpectrumConfig.duration)
    p.add_argument("--noise", type=float, default=SpectrumConfig.noise_std)
    p.add_argument("--seed", type=int, default=SpectrumConfig.seed)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("probe", help="finite-difference response to a local perturbation")
    p.add_argument("scene")
    p.add_argument("--detector")
    p.add_argument("--wire", required=True)
    p.add_argument("--family", choices=PROBE_FAMILIES, default="attenuation")
    p.add_argument("--targets", help="comma-separated wires, optionally wire@H/V/L/R")
    p.add_argument("--step", type=float, default=1e-5)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("scenes", help="list or emit built-in scenes")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("id", nargs="?")
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_scenes)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TsvfError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
