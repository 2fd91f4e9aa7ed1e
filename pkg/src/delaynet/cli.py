"""Command-line front end.

Exit codes: 0 success, 1 input/validation error, 2 no stability
certificate (or a failed numeric check).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .certify import certify, center_for
from .classifier import classify
from .conjugacy import (
    ConjugacyInfeasible,
    check_dynamic_equivalence,
    check_linear_conjugacy,
    find_conjugacy,
)
from .ddesim import HistorySegment, SimulationError, simulate, trajectory_csv
from .invariants import (
    EquilibriumError,
    conservation_check,
    cu_b,
    delta_coefficients,
    invariant_set,
    level_surface_csv,
)
from .lyapunov import trace_csv
from .network import (
    ConjugacyWitness,
    ParseError,
    parse_network,
    parse_witness,
    serialize_witness,
    strip_delays,
    validate_network,
)
from .structure import analyze_structure, is_wr_deficiency_zero

SCHEMA = "delaynet/1"
EXIT_OK, EXIT_INPUT, EXIT_UNCERTIFIED = 0, 1, 2


class CliError(Exception):
    pass


def threads() -> int:
    raw = os.environ.get("DELAYNET_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(f"DELAYNET_THREADS must be an integer, got {raw!r}") from None


# --------------------------------------------------------------------------
# input helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def load_network(path: str):
    net = parse_network(_read(path), exact=True)
    diags = validate_network(net)
    if diags:
        raise CliError("; ".join(str(d) for d in diags))
    return net


def load_witness(path: str | None, net):
    if path is None:
        return None, False
    text = _read(path)
    has_L = any(line.split("#")[0].strip().startswith("L ") for line in text.splitlines())
    return parse_witness(text, species=net.species, exact=True), has_L


def parse_history(spec: str | None, net, step: float):
    """Inline "a,b,c" vector, a file holding one vector, or a CSV file with
    header t,x_... sampled on [-tau_max, 0]."""
    if spec is None:
        raise CliError("--history is required")
    text = spec
    if os.path.exists(spec):
        text = _read(spec)
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if lines and lines[0].strip().startswith("t"):
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        ts, xs = rows[:, 0], rows[:, 1:]
        if xs.shape[1] != net.n:
            raise CliError(f"history has {xs.shape[1]} species columns, expected {net.n}")
        if len(ts) > 2:
            ds = np.gradient(xs, ts, axis=0)
        else:
            ds = np.repeat((xs[1:] - xs[:-1]) / np.diff(ts)[:, None], 2, axis=0)
        return HistorySegment(ts, xs, ds[:-1], ds[1:])
    try:
        vec = [float(Fraction(v)) for v in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"cannot parse history {spec!r}") from None
    if len(vec) != net.n:
        raise CliError(f"history has {len(vec)} entries, expected {net.n}")
    return vec


def _witness_or_default(net, witness):
    if witness is not None:
        return witness
    base = strip_delays(net)
    if is_wr_deficiency_zero(base):
        return ConjugacyWitness.identity(base)
    return None


def _emit(args, payload: dict) -> None:
    doc = {"schema": SCHEMA}
    if not args.no_meta:
        doc["meta"] = {
            "version": __version__,
            "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    _write(args.out, text)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# subcommands


def cmd_structure(args) -> int:
    net = load_network(args.network)
    _emit(args, {"structure": analyze_structure(net).to_json()})
    return EXIT_OK


def _conjugacy_report(net, witness, has_L, tol, find=False):
    if witness is None:
        base = strip_delays(net)
        return check_dynamic_equivalence(net, base, tol), None
    if find:
        w = find_conjugacy(net, witness.target, L_fixed=witness.L if has_L else None, tol=tol)
        return check_linear_conjugacy(net, w, tol), w
    if witness.is_identity:
        return check_dynamic_equivalence(net, witness.target, tol), witness
    return check_linear_conjugacy(net, witness, tol), witness


def cmd_conjugacy(args) -> int:
    net = load_network(args.network)
    witness, has_L = load_witness(args.witness, net)
    try:
        rep, w = _conjugacy_report(net, witness, has_L, args.tol, find=args.find)
    except ConjugacyInfeasible as exc:
        _emit(args, {"conjugacy": {"kind": "neither", "error": str(exc)}})
        return EXIT_UNCERTIFIED
    payload = {"conjugacy": rep.to_json()}
    if args.find and w is not None:
        payload["witness"] = serialize_witness(w)
    _emit(args, payload)
    return EXIT_OK if rep.ok else EXIT_UNCERTIFIED


def cmd_classify(args) -> int:
    net = load_network(args.network)
    witness, _ = load_witness(args.witness, net)
    cert = classify(net, witness, args.tol)
    _emit(args, {"certificate": cert.to_json()})
    return EXIT_OK if cert.accepted else EXIT_UNCERTIFIED


def cmd_simulate(args) -> int:
    net = load_network(args.network)
    psi = parse_history(args.history, net, args.step)
    traj = simulate(net, psi, args.t_end, args.step)
    _write(args.out, trajectory_csv(traj, args.stride))
    return EXIT_OK


def _run_certification(net, witness, psi, args, out_dir: Path | None, tag: str):
    run = certify(net, witness, psi, args.t_end, args.step)
    doc = run.to_json()
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        vfile = out_dir / f"{tag}_V.csv"
        vfile.write_text(trace_csv(run.trace))
        doc["v_trace"] = str(vfile)
    return run, doc


def cmd_certify(args) -> int:
    net = load_network(args.network)
    witness, _ = load_witness(args.witness, net)
    psi = parse_history(args.history, net, args.step)
    cert = classify(net, witness, args.tol)
    if not cert.accepted:
        _emit(args, {"certificate": cert.to_json()})
        return EXIT_UNCERTIFIED
    run, doc = _run_certification(net, witness, psi, args, _out_dir(args), "run")
    _emit(args, {"certificate": cert.to_json(), "run": doc})
    return EXIT_OK if run.descent_ok() else EXIT_UNCERTIFIED


def cmd_equilibrium(args) -> int:
    net = load_network(args.network)
    witness, _ = load_witness(args.witness, net)
    psi = parse_history(args.history, net, args.step)
    cert = classify(net, witness, args.tol)
    if not cert.accepted:
        _emit(args, {"certificate": cert.to_json()})
        return EXIT_UNCERTIFIED
    spec, x = center_for(net, cert, psi)
    _emit(args, {"invariant_set": spec.to_json(), "equilibrium": [float(v) for v in x]})
    return EXIT_OK


def _out_dir(args) -> Path | None:
    if args.out_dir:
        return Path(args.out_dir)
    if args.out and args.out != "-":
        return Path(args.out).parent
    return None


def cmd_analyze(args) -> int:
    net = load_network(args.network)
    witness, has_L = load_witness(args.witness, net)
    payload: dict = {"structure": analyze_structure(net).to_json()}
    rep, _ = _conjugacy_report(net, _witness_or_default(net, witness), has_L, args.tol)
    payload["conjugacy"] = rep.to_json()
    cert = classify(net, witness, args.tol)
    payload["certificate"] = cert.to_json()
    payload["runs"] = []
    ok = cert.accepted
    if cert.accepted and args.history is not None:
        psi = parse_history(args.history, net, args.step)
        run, doc = _run_certification(net, witness, psi, args, _out_dir(args), "run0")
        doc["history"] = args.history
        payload["runs"].append(doc)
        ok = ok and run.descent_ok()
    _emit(args, payload)
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def cmd_repro_fig6(args) -> int:
    out = Path(args.out_dir or "fig6")
    out.mkdir(parents=True, exist_ok=True)
    net = fixtures.scpak()
    witness = fixtures.scpak_witness()
    table = delta_coefficients(net, witness)

    def one(idx):
        theta = fixtures.SCPAK_THETAS[idx]
        spec = invariant_set(net, witness, theta, "new_scc_de3")
        traj = simulate(net, theta, args.t_end, args.step)
        drift = conservation_check(traj, spec, samples=100)
        return idx, theta, spec, traj, drift

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = sorted(pool.map(one, range(4)), key=lambda r: r[0])

    runs = []
    for idx, theta, spec, traj, drift in results:
        path = out / f"trajectory_theta{idx + 1}.csv"
        path.write_text(trajectory_csv(traj, args.stride))
        runs.append(
            {
                "theta": list(theta),
                "level": cu_b(net, table, theta, (1, 1, 1)),
                "endpoint": [float(v) for v in traj.curve(traj.T)],
                "expected": list(fixtures.SCPAK_EQUILIBRIA[idx]),
                "conservation_drift": drift,
                "trajectory": str(path),
            }
        )
    grids = []
    axis = np.linspace(0.05, 3.0, 30)
    for level_idx, idx in enumerate((0, 2)):
        spec = results[idx][2]
        path = out / f"level_surface_{level_idx + 1}.csv"
        path.write_text(level_surface_csv(net, spec, [axis, axis]))
        grids.append({"level": spec.levels[0], "grid": str(path)})
    pairs = [(0, 1), (2, 3)]
    gaps = [float(np.max(np.abs(np.subtract(runs[a]["endpoint"], runs[b]["endpoint"])))) for a, b in pairs]
    _emit(args, {"runs": runs, "surfaces": grids, "endpoint_gaps": gaps})
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delaynet", description="Stability analysis of delayed mass-action networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, network=True):
        if network:
            sp.add_argument("--network", "-n", required=True, help="network file")
            sp.add_argument("--witness", "-w", help="witness file (target network and L)")
        sp.add_argument("--tol", type=float, default=1e-9, help="relative tolerance")
        sp.add_argument("--out", "-o", help="output file (default stdout)")
        sp.add_argument("--out-dir", help="directory for auxiliary files")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.add_argument("--no-meta", action="store_true", help="omit timestamps for reproducible output")

    def sim(sp, required=False):
        sp.add_argument("--history", required=required, help="initial state a,b,... or a history file")
        sp.add_argument("--t-end", type=float, default=50.0)
        sp.add_argument("--step", type=float, default=0.01)
        sp.add_argument("--stride", type=int, default=1, help="CSV sample stride in steps")

    sp = sub.add_parser("structure", help="complexes, linkage classes, deficiency, subspaces")
    common(sp)
    sp.set_defaults(func=cmd_structure)

    sp = sub.add_parser("conjugacy", help="check or search for a conjugacy witness")
    common(sp)
    sp.add_argument("--find", action="store_true", help="search target rates (and L if the file has none)")
    sp.set_defaults(func=cmd_conjugacy)

    sp = sub.add_parser("classify", help="stability certificate and RHS decomposition")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("simulate", help="integrate the delayed system and write CSV")
    common(sp)
    sim(sp, required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("certify", help="simulate and track the Lyapunov functional")
    common(sp)
    sim(sp, required=True)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("equilibrium", help="equilibrium in the invariant set of a history")
    common(sp)
    sim(sp, required=True)
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("analyze", help="full pipeline report")
    common(sp)
    sim(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("repro-fig6", help="four-run experiment on the modified kinase chain")
    common(sp, network=False)
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--step", type=float, default=0.005)
    sp.add_argument("--stride", type=int, default=20)
    sp.set_defaults(func=cmd_repro_fig6)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format == "csv" and args.command not in ("simulate",):
        print("error: --format csv is only supported by simulate", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CliError, ValueError, EquilibriumError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
