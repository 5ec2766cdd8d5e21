"""Command-line front end.

Subcommands: rabi-surface, channel-fidelity, teleport, fidelity-surface,
swap, run-script. Tables are emitted as CSV (with a ``# key=value`` metadata
comment block) or as one JSON object with ``meta`` and ``rows``. Flag values
override config-file values, which override built-in defaults; config files
are flat ``key = value`` text. ``IONSIM_THREADS`` caps sweep parallelism;
row order always follows grid order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import linalg, protocol
from .motional import (
    ModeParams,
    cutoff_for,
    matched_nbar_r,
    rabi_frequency,
    thermal_distribution,
)
from .dynamics import PulseSpec
from .protocol import (
    CARDINAL_STATES,
    InputQubit,
    OUTCOMES,
    PhaseConfig,
    TeleportConfig,
)
from .pulsescript import (
    MeasureStatement,
    RotateStatement,
    ScriptError,
    execute_script,
    parse_pulse_script,
)

DEFAULTS = {
    "eta": 0.2,
    "eta_r": None,
    "nbar": 0.0,
    "eps": 0.0,
    "k": 1,
    "phi": None,
    "phi0": protocol.DEFAULT_PHI0,
    "cutoff": None,
    "tail_tol": 1e-6,
    "input_state": "average",
    "format": "csv",
    "out": None,
    "seed": None,
    "grid": None,
}

_CASTS = {
    "eta": float,
    "eta_r": float,
    "nbar": str,
    "eps": float,
    "k": int,
    "phi": float,
    "phi0": float,
    "cutoff": int,
    "tail_tol": float,
    "input_state": str,
    "format": str,
    "out": str,
    "seed": int,
    "grid": str,
}


def _thread_count(n_items: int) -> int:
    try:
        t = int(os.environ.get("IONSIM_THREADS", "1"))
    except ValueError:
        t = 1
    return max(1, min(t, max(1, n_items)))


def _map_ordered(fn, items):
    """Map preserving item order; parallel only when IONSIM_THREADS > 1."""
    items = list(items)
    t = _thread_count(len(items))
    if t == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=t) as pool:
        return list(pool.map(fn, items))


def _plain(obj):
    """Recursively convert numpy scalars/arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return repr(obj)
    return obj


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key = value lines; '#' comments and blank lines ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CASTS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def resolve_options(
    args: argparse.Namespace, keys: list[str], overrides: dict | None = None
) -> dict:
    """Apply precedence: command line > config file > built-in default."""
    from_file: dict[str, str] = {}
    if getattr(args, "config", None):
        from_file = parse_config_file(args.config)
    defaults = {**DEFAULTS, **(overrides or {})}
    out = {}
    for key in keys:
        given = getattr(args, key, None)
        if given is not None:
            out[key] = given
        elif key in from_file:
            out[key] = _CASTS[key](from_file[key])
        else:
            out[key] = defaults.get(key)
    return out


def write_table(rows: list[dict], columns: list[str], meta: dict, fmt: str, out: str | None) -> None:
    meta = _plain(meta)
    if fmt == "csv":
        buf = io.StringIO()
        for key in sorted(meta):
            buf.write(f"# {key}={meta[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_plain(row[c]) for c in columns])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"meta": meta, "rows": _plain(rows)}, indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_grid(spec: str, expect: dict[str, tuple]) -> dict:
    """Parse 'name=start:stop[:count],...' against expected axis names.

    Integer axes (count omitted) produce inclusive index ranges; float axes
    produce ``count`` evenly spaced points.
    """
    axes = dict(expect)
    out = {}
    parts = [p for p in spec.split(",") if p.strip()] if spec.strip() else []
    for part in parts:
        name, _, rng = part.strip().partition("=")
        if name not in axes:
            raise ValueError(f"unknown grid axis {name!r}; expected {sorted(axes)}")
        pieces = rng.split(":")
        kind = axes[name][0]
        if kind == "int":
            if len(pieces) != 2:
                raise ValueError(f"grid axis {name!r} expects start:stop")
            lo, hi = int(pieces[0]), int(pieces[1])
            if lo < 0 or hi < lo:
                raise ValueError(f"grid axis {name!r} has an empty or negative range")
            out[name] = list(range(lo, hi + 1))
        else:
            if len(pieces) != 3:
                raise ValueError(f"grid axis {name!r} expects start:stop:count")
            lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
            if count < 1:
                raise ValueError(f"grid axis {name!r} needs at least one point")
            out[name] = [float(v) for v in np.linspace(lo, hi, count)]
    for name, (_, default) in axes.items():
        out.setdefault(name, default)
    return out


def _phases(opts: dict) -> PhaseConfig:
    phi0 = opts.get("phi0")
    phi = opts.get("phi")
    if phi0 is None:
        phi0 = protocol.DEFAULT_PHI0
    return PhaseConfig(phi0_a=phi0, phi0_b=phi0, phi_a=phi, phi_b=phi)


def _validate(opts: dict) -> None:
    if not 0 < opts["eta"] < 1:
        raise ValueError(f"eta must lie in (0, 1), got {opts['eta']}")
    if not abs(opts["eps"]) < 1:
        raise ValueError(f"eps must satisfy |eps| < 1, got {opts['eps']}")
    if opts["format"] not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {opts['format']!r}")


# --------------------------------------------------------------------------
# subcommands


def cmd_rabi_surface(args: argparse.Namespace) -> int:
    opts = resolve_options(
        args, ["eta", "eta_r", "k", "grid", "format", "out"], overrides={"eta": 0.15}
    )
    if opts["format"] not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {opts['format']!r}")
    modes = ModeParams(eta=opts["eta"], eta_r=opts["eta_r"])
    grid = _parse_grid(opts["grid"] or "", {"n": ("int", list(range(26))), "nr": ("int", list(range(26)))})
    k = opts["k"]
    rows = [
        {"n": n, "n_r": nr, "rabi": rabi_frequency(k, n, nr, modes)}
        for n in grid["n"]
        for nr in grid["nr"]
    ]
    meta = {"command": "rabi-surface", "eta": modes.eta, "eta_r": modes.eta_r, "k": k,
            "n_range": f"{grid['n'][0]}..{grid['n'][-1]}", "nr_range": f"{grid['nr'][0]}..{grid['nr'][-1]}"}
    write_table(rows, ["n", "n_r", "rabi"], meta, opts["format"], opts["out"])
    return 0


def _channel_point(nbar: float, eta: float, eta_r: float | None, phases: PhaseConfig,
                   eps: float, cutoff: int | None, tail_tol: float) -> dict:
    modes = ModeParams(eta=eta, eta_r=eta_r)
    nbar_r = matched_nbar_r(nbar, modes.nu_ratio)
    c = cutoff if cutoff is not None else cutoff_for(nbar, tail_tol / 2)
    c_r = cutoff if cutoff is not None else cutoff_for(nbar_r, tail_tol / 2)
    thermal = thermal_distribution(nbar, nbar_r, c, c_r, tail_tol)
    pulse = PulseSpec(phi=phases.phi_b, phi0=phases.phi0_b, epsilon=eps)
    return {
        "nbar": nbar,
        "nbar_r": nbar_r,
        "fidelity": protocol.channel_fidelity(thermal, pulse, modes),
    }


def cmd_channel_fidelity(args: argparse.Namespace) -> int:
    opts = resolve_options(
        args,
        ["eta", "eta_r", "nbar", "eps", "phi", "phi0", "cutoff", "tail_tol", "format", "out"],
        overrides={"nbar": "0.2,1,5"},
    )
    _validate(opts)
    nbars = [float(v) for v in str(opts["nbar"]).split(",")]
    phases = _phases(opts)
    rows = _map_ordered(
        lambda nb: _channel_point(nb, opts["eta"], opts["eta_r"], phases,
                                  opts["eps"], opts["cutoff"], opts["tail_tol"]),
        nbars,
    )
    meta = {"command": "channel-fidelity", "eta": opts["eta"],
            "eta_r": ModeParams(eta=opts["eta"], eta_r=opts["eta_r"]).eta_r,
            "eps": opts["eps"], "tail_tol": opts["tail_tol"],
            "cutoff": "auto" if opts["cutoff"] is None else opts["cutoff"],
            "phi_b": phases.phi_b, "phi0": phases.phi0_b}
    write_table(rows, ["nbar", "nbar_r", "fidelity"], meta, opts["format"], opts["out"])
    return 0


def _teleport_config(opts: dict) -> TeleportConfig:
    k = opts.get("k")
    return TeleportConfig(
        eta=opts["eta"],
        eta_r=opts["eta_r"],
        nbar=float(opts["nbar"]),
        epsilon=opts["eps"],
        phases=_phases(opts),
        k=1 if k is None else k,
        tail_tol=opts["tail_tol"],
        cutoff=opts["cutoff"],
        cutoff_r=opts["cutoff"],
    )


def _print_report(report: protocol.FidelityReport, stream) -> None:
    p = report.params
    stream.write("teleportation report\n")
    stream.write(f"  input state: {report.input_state}\n")
    stream.write(
        f"  nbar={p['nbar']:.6g} nbar_r={p['nbar_r']:.6g} nbar_b={p['nbar_b']:.6g} "
        f"eta={p['eta']:.6g} eta_r={p['eta_r']:.6g} eps={p['epsilon']:.6g}\n"
    )
    stream.write("  outcome  probability    fidelity\n")
    for o in OUTCOMES:
        stream.write(f"  {o}       {report.outcome_probs[o]:<12.8f}  {report.outcome_fidelities[o]:.8f}\n")
    stream.write(f"  aggregate fidelity: {report.aggregate:.8f}\n")


def cmd_teleport(args: argparse.Namespace) -> int:
    opts = resolve_options(
        args,
        ["eta", "eta_r", "nbar", "eps", "k", "phi", "phi0", "cutoff", "tail_tol",
         "input_state", "format", "out", "seed"],
    )
    _validate(opts)
    cfg = _teleport_config(opts)
    report = protocol.teleport_fidelity(opts["input_state"], cfg)
    payload = json.dumps(_plain(report.to_dict()), indent=2, sort_keys=True) + "\n"
    if opts["format"] == "json" and not opts["out"]:
        sys.stdout.write(payload)
    else:
        _print_report(report, sys.stdout)
        if opts["seed"] is not None:
            rng = np.random.default_rng(opts["seed"])
            probs = [report.outcome_probs[o] for o in OUTCOMES]
            sampled = rng.choice(len(OUTCOMES), p=np.array(probs) / sum(probs))
            sys.stdout.write(f"  sampled outcome (seed={opts['seed']}): {OUTCOMES[sampled]}\n")
    if opts["out"]:
        Path(opts["out"]).write_text(payload)
    return 0


def cmd_fidelity_surface(args: argparse.Namespace) -> int:
    opts = resolve_options(
        args,
        ["eta_r", "eps", "phi", "phi0", "tail_tol", "cutoff", "grid", "input_state", "format", "out"],
    )
    if not abs(opts["eps"]) < 1:
        raise ValueError(f"eps must satisfy |eps| < 1, got {opts['eps']}")
    if opts["format"] not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {opts['format']!r}")
    grid = _parse_grid(
        opts["grid"] or "",
        {
            "nbar": ("float", [float(v) for v in np.linspace(0.0, 0.2, 20)]),
            "eta": ("float", [float(v) for v in np.linspace(0.05, 0.25, 20)]),
        },
    )
    points = [(nb, et) for nb in grid["nbar"] for et in grid["eta"]]

    def evaluate(point):
        nb, et = point
        cfg = TeleportConfig(
            eta=et, eta_r=opts["eta_r"], nbar=nb, epsilon=opts["eps"],
            phases=_phases(opts), tail_tol=opts["tail_tol"],
            cutoff=opts["cutoff"], cutoff_r=opts["cutoff"],
        )
        report = protocol.teleport_fidelity(opts["input_state"], cfg)
        return {"nbar": nb, "eta": et, "fidelity": report.aggregate}

    rows = _map_ordered(evaluate, points)
    meta = {"command": "fidelity-surface", "eps": opts["eps"], "input_state": opts["input_state"],
            "tail_tol": opts["tail_tol"], "cutoff": "auto" if opts["cutoff"] is None else opts["cutoff"],
            "nbar_points": len(grid["nbar"]), "eta_points": len(grid["eta"])}
    write_table(rows, ["nbar", "eta", "fidelity"], meta, opts["format"], opts["out"])
    return 0


def cmd_swap(args: argparse.Namespace) -> int:
    opts = resolve_options(
        args, ["eta", "eta_r", "nbar", "eps", "phi", "phi0", "tail_tol", "cutoff", "format", "out"]
    )
    _validate(opts)
    phases = _phases(opts)
    pulse = PulseSpec(phi=phases.phi_a, phi0=phases.phi0_a, epsilon=opts["eps"])
    nbar = float(opts["nbar"])
    thermal = None
    modes = None
    if nbar > 0:
        modes = ModeParams(eta=opts["eta"], eta_r=opts["eta_r"])
        nbar_r = matched_nbar_r(nbar, modes.nu_ratio)
        c = opts["cutoff"] if opts["cutoff"] is not None else cutoff_for(nbar, opts["tail_tol"] / 2)
        c_r = opts["cutoff"] if opts["cutoff"] is not None else cutoff_for(nbar_r, opts["tail_tol"] / 2)
        thermal = thermal_distribution(nbar, nbar_r, c, c_r, opts["tail_tol"])
    outcomes = protocol.entanglement_swap(pulse, phases, thermal, modes)
    rows = [
        {"outcome": oc.label, "probability": oc.probability, "herald": oc.herald, "fidelity": oc.fidelity}
        for oc in outcomes
    ]
    sys.stdout.write("entanglement swapping report\n")
    for r in rows:
        sys.stdout.write(
            f"  outcome {r['outcome']}: p={r['probability']:.8f} heralds {r['herald']} "
            f"fidelity {r['fidelity']:.8f}\n"
        )
    if opts["out"]:
        meta = {"command": "swap", "nbar": nbar, "eps": opts["eps"], "eta": opts["eta"]}
        write_table(rows, ["outcome", "probability", "herald", "fidelity"], meta, opts["format"], opts["out"])
    return 0


def cmd_run_script(args: argparse.Namespace) -> int:
    opts = resolve_options(args, ["eps", "phi", "phi0", "input_state", "format", "out"])
    text = Path(args.script).read_text()
    script = parse_pulse_script(text)
    phases = _phases(opts)
    max_ion = 0
    measures = []
    for st in script.statements:
        ions = (st.ion,) if isinstance(st, RotateStatement) else st.ions
        max_ion = max(max_ion, *ions)
        if isinstance(st, MeasureStatement):
            measures.append(st)
    n_ions = max(3, max_ion)
    input_spec = opts["input_state"]
    if input_spec == "average":
        input_spec = "z+"
    q = InputQubit.from_spec(input_spec)
    initial = q.vector
    for _ in range(n_ions - 1):
        initial = np.kron(initial, np.array([1.0, 0.0], dtype=complex))
    result = execute_script(script, n_ions, initial, phases)

    branches = []
    for b in result.branches:
        branches.append(
            {
                "outcomes": [f"ions {i},{j}: {label}" for (i, j), label in b.outcomes],
                "probability": b.probability,
                "amplitudes": None if b.amplitudes is None else [repr(a) for a in b.amplitudes],
            }
        )
    payload: dict = {"meta": {"command": "run-script", "n_ions": n_ions,
                              "input_state": opts["input_state"]},
                     "branches": branches}

    teleport_shaped = (
        n_ions == 3 and len(measures) == 1 and measures[0].ions == (1, 2)
        and measures[0] is script.statements[-1]
    )
    if teleport_shaped:
        probs = {}
        fids = {}
        aggregate = 0.0
        ideal = linalg.projector(q.vector)
        for b in result.branches:
            label = b.outcomes[-1][1]
            probs[label] = b.probability
            if b.amplitudes is None:
                fids[label] = 0.0
                continue
            v = b.amplitudes.reshape(4, 2)[{"dd": 0, "du": 1, "ud": 2, "uu": 3}[label]]
            rho = linalg.projector(v)
            rho = protocol.correct_ion3(label, rho, nbar_b=0.0, eta_b=0.0, epsilon=opts["eps"])
            f = linalg.fidelity(ideal, rho)
            fids[label] = f
            aggregate += b.probability * f
        payload["teleport"] = {
            "outcome_probs": probs,
            "outcome_fidelities": fids,
            "aggregate": aggregate,
        }
        sys.stdout.write("pulse script report (teleport-shaped)\n")
        for o in OUTCOMES:
            sys.stdout.write(
                f"  outcome {o}: p={probs.get(o, 0.0):.8f} corrected fidelity {fids.get(o, 0.0):.8f}\n"
            )
        sys.stdout.write(f"  aggregate fidelity: {aggregate:.8f}\n")
    else:
        sys.stdout.write(f"pulse script report: {len(result.branches)} branch(es)\n")
        for b in result.branches:
            labels = "; ".join(f"ions {i},{j}: {lab}" for (i, j), lab in b.outcomes) or "(no measurement)"
            sys.stdout.write(f"  p={b.probability:.8f}  {labels}\n")

    if opts["out"] or opts["format"] == "json":
        text_out = json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"
        if opts["out"]:
            Path(opts["out"]).write_text(text_out)
        else:
            sys.stdout.write(text_out)
    return 0


# --------------------------------------------------------------------------
# parser


def _add_common(sub: argparse.ArgumentParser, names: list[str]) -> None:
    flags = {
        "eta": dict(type=float, help="CM Lamb-Dicke parameter"),
        "eta_r": dict(type=float, dest="eta_r", help="relative-mode Lamb-Dicke parameter"),
        "nbar": dict(type=str, help="CM mean occupation (comma list for channel-fidelity)"),
        "eps": dict(type=float, help="pulse-area imprecision factor"),
        "k": dict(type=int, help="sideband order"),
        "phi": dict(type=float, help="Raman phase (both traps)"),
        "phi0": dict(type=float, help="equilibrium-separation phase"),
        "grid": dict(type=str, help="grid spec, e.g. nbar=0:0.2:20,eta=0.05:0.25:20"),
        "cutoff": dict(type=int, help="Fock cutoff override (both modes)"),
        "tail_tol": dict(type=float, dest="tail_tol", help="thermal tail tolerance"),
        "input_state": dict(type=str, dest="input_state",
                            help="input state: average, z+/z-/x+/x-/y+/y-, or alpha,beta"),
        "format": dict(type=str, choices=["csv", "json"], help="output format"),
        "out": dict(type=str, help="output path (default stdout)"),
        "seed": dict(type=int, help="seed for the demo outcome sampler"),
    }
    for name in names:
        sub.add_argument(f"--{name.replace('_', '-')}", default=None, **flags[name])
    sub.add_argument("--config", default=None, help="flat key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionsim",
        description="Simulator of reliable trapped-ion teleportation over dispersive sideband pulses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rabi-surface", help="scaled sideband Rabi factor over the Fock grid")
    _add_common(p, ["eta", "eta_r", "k", "grid", "format", "out"])
    p.set_defaults(func=cmd_rabi_surface)

    p = sub.add_parser("channel-fidelity", help="Bell-channel fidelity vs thermal occupation")
    _add_common(p, ["eta", "eta_r", "nbar", "eps", "phi", "phi0", "cutoff", "tail_tol", "format", "out"])
    p.set_defaults(func=cmd_channel_fidelity)

    p = sub.add_parser("teleport", help="single full teleportation run")
    _add_common(p, ["eta", "eta_r", "nbar", "eps", "k", "phi", "phi0", "cutoff", "tail_tol",
                    "input_state", "format", "out", "seed"])
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("fidelity-surface", help="teleportation fidelity over an (nbar, eta) grid")
    _add_common(p, ["eta_r", "eps", "phi", "phi0", "tail_tol", "cutoff", "grid",
                    "input_state", "format", "out"])
    p.set_defaults(func=cmd_fidelity_surface)

    p = sub.add_parser("swap", help="entanglement swapping between two Bell pairs")
    _add_common(p, ["eta", "eta_r", "nbar", "eps", "phi", "phi0", "tail_tol", "cutoff", "format", "out"])
    p.set_defaults(func=cmd_swap)

    p = sub.add_parser("run-script", help="execute a pulse script")
    p.add_argument("script", help="path to the pulse script")
    _add_common(p, ["eps", "phi", "phi0", "input_state", "format", "out"])
    p.set_defaults(func=cmd_run_script)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScriptError as exc:
        print(f"error: script {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
