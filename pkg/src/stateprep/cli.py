"""Command-line entry point: synth, synth-diag, verify, bench, bounds."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
import time

import numpy as np

from . import __version__
from .angles import alphas_from_thetas, canonical_phases, num_bits
from .circuit import Circuit, DepthReport, depth, emit, parse
from .diag import synth_diag_ancilla, synth_diag_no_ancilla
from .errors import RegimeError, StatePrepError, ValidationError
from .qsp import prepare_state
from .sim import (
    SparseState,
    basis_bits,
    bits_to_ints,
    dict_fidelity,
    phase_error,
    run_sparse,
    track_batch,
)
from .sparse import SparseTarget, prepare_sparse

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_REGIME = 3
EXIT_VERIFY = 4

FIDELITY_TOL = 1e-9
PHASE_TOL = 1e-9
CSV_HEADER = ["n", "m", "regime", "depth", "size", "cnot_count", "synth_ms", "verify_status"]


# ---------------------------------------------------------------------------
# input files


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def load_state(path: str):
    """Dense ``[[re, im], ...]`` or sparse ``[["0101", re, im], ...]``."""
    doc = _read_json(path)
    if not isinstance(doc, list) or not doc:
        raise ValidationError("state file must hold a non-empty JSON array")
    if all(isinstance(row, list) and len(row) == 3 and isinstance(row[0], str) for row in doc):
        return SparseTarget.from_strings([(r[0], complex(r[1], r[2])) for r in doc])
    try:
        v = np.array([complex(re, im) for re, im in doc], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"state entries must be [re, im] pairs: {exc}") from exc
    num_bits(len(v), "state")
    return v


def load_thetas(path: str) -> np.ndarray:
    doc = _read_json(path)
    try:
        th = np.array(doc, dtype=np.float64).ravel()
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"theta file must be a JSON array of reals: {exc}") from exc
    num_bits(len(th), "theta vector")
    if abs(th[0]) > 1e-12:
        raise ValidationError("the first theta must be 0")
    return th


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def render(circuit: Circuit, fmt: str) -> str:
    if fmt == "json":
        return emit(circuit, "json") + "\n"
    header = f'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[{circuit.num_qubits}];\n'
    return header + emit(circuit, "qasm")


def format_report(rep: DepthReport) -> str:
    lines = [f"depth={rep.depth} size={rep.size} cnot_count={rep.cnot_count}"]
    if rep.per_stage:
        lines.append(f"{'stage':<16}{'depth':>8}{'size':>8}")
        for label, d, s in rep.per_stage:
            lines.append(f"{label:<16}{d:>8}{s:>8}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# verification


def verify_state(circuit: Circuit, target) -> tuple[bool, str]:
    if isinstance(target, SparseTarget):
        n, want = target.n, target.as_dict()
    else:
        n = num_bits(len(target), "state")
        want = {k: complex(a) for k, a in enumerate(target) if a != 0}
    if circuit.num_qubits < n:
        raise ValidationError("circuit is narrower than the state")
    out = run_sparse(circuit, SparseState.basis(circuit.num_qubits, 0))
    clean, leaked = out.split(n)
    fid = dict_fidelity(want, clean)
    ok = fid >= 1 - FIDELITY_TOL and leaked <= FIDELITY_TOL
    return ok, f"fidelity={fid:.15f} ancilla_mass={leaked:.3e}"


def verify_diag(
    circuit: Circuit, theta: np.ndarray, samples: int | None, seed: int = 0
) -> tuple[bool, str]:
    n = num_bits(len(theta), "theta vector")
    if samples is None or samples >= (1 << n):
        xs = list(range(1 << n))
    else:
        rng = random.Random(seed)
        xs = sorted(rng.sample(range(1 << n), samples))
    width = circuit.num_qubits
    out, phase = track_batch(circuit, basis_bits(xs, n, width))
    got = bits_to_ints(out)
    bits_ok = all(g == (x << (width - n)) for g, x in zip(got, xs))
    err = float(phase_error(phase, theta[xs]).max()) if xs else 0.0
    ok = bits_ok and err <= PHASE_TOL
    return ok, f"inputs={len(xs)} bits_ok={bits_ok} max_phase_error={err:.3e}"


# ---------------------------------------------------------------------------
# bounds


def bounds(n: int, m: int) -> dict:
    if n < 1 or m < 0:
        raise ValidationError("need n >= 1 and m >= 0")
    size = 2.0**n
    qsp_lower = max(float(n), size / (m + n))
    nlogn = n * math.log2(n) if n > 1 else 1.0
    if m <= size / nlogn:
        row = "Theta(2^n/(m+n))"
    elif m < size:
        row = "[Omega(n), O(n log n)]"
    else:
        row = "Theta(n)"
    return {
        "n": n,
        "m": m,
        "qsp_lower": qsp_lower,
        "qsp_upper_regime": row,
        "unitary_lower": max(float(n), 4.0**n / (m + n)),
        "unitary_upper": n * size + 4.0**n / (m + n),
    }


# ---------------------------------------------------------------------------
# bench


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def bench_rows(n: int, m_list, trials: int, seed: int, timing: bool = True) -> list[list]:
    rows = []
    for m in m_list:
        for trial in range(trials):
            rng = np.random.default_rng([seed, n, m, trial])
            v = random_state(n, rng)
            t0 = time.perf_counter()
            try:
                circ, dec, rep = prepare_state(v, m)
            except RegimeError:
                rows.append([n, m, "unsupported", "", "", "", "", "skipped"])
                continue
            ms = (time.perf_counter() - t0) * 1000 if timing else 0.0
            ok, _ = verify_state(circ, v)
            rows.append(
                [n, m, dec.chosen, rep.depth, rep.size, rep.cnot_count, f"{ms:.1f}",
                 "pass" if ok else "fail"]
            )
    rows.sort(key=lambda r: (r[1],))
    return rows


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    target = load_state(args.state)
    if isinstance(target, SparseTarget):
        circ = prepare_sparse(target, args.ancilla)
        rep = depth(circ)
        note = f"sparse s={target.s}"
    else:
        circ, dec, rep = prepare_state(target, args.ancilla, args.strategy)
        note = f"regime={dec.chosen} t={dec.t} ({dec.rationale})"
    _write(render(circ, args.format), args.out)
    info = sys.stderr if args.out in (None, "-") else sys.stdout
    info.write(note + "\n")
    if args.trace_stages:
        info.write(format_report(rep))
    return EXIT_OK


def cmd_synth_diag(args) -> int:
    th = load_thetas(args.thetas)
    n = num_bits(len(th))
    alpha = alphas_from_thetas(canonical_phases(th)[0])
    if args.ancilla >= 2 and n >= 2:
        circ = synth_diag_ancilla(alpha, n, args.ancilla, args.force_emit)
    elif args.ancilla == 0 or n == 1:
        circ = synth_diag_no_ancilla(alpha, n, args.force_emit)
    else:
        raise RegimeError(f"ancilla budget {args.ancilla} is neither 0 nor >= 2")
    _write(render(circ, args.format), args.out)
    if args.trace_stages:
        info = sys.stderr if args.out in (None, "-") else sys.stdout
        info.write(format_report(depth(circ)))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        with open(args.circuit) as fh:
            circ = parse(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read {args.circuit}: {exc}") from exc
    if args.state:
        ok, msg = verify_state(circ, load_state(args.state))
    else:
        samples = None if args.exhaustive else args.samples
        ok, msg = verify_diag(circ, load_thetas(args.thetas), samples, args.seed)
    print(("PASS " if ok else "FAIL ") + msg)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    try:
        m_list = [int(x) for x in args.m_list.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --m-list: {exc}") from exc
    rows = bench_rows(args.n, m_list, args.trials, args.seed, not args.no_timing)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    rec = bounds(args.n, args.m)
    for k, v in rec.items():
        print(f"{k}={v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stateprep", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="compile a state into a circuit")
    s.add_argument("--state", required=True)
    s.add_argument("--ancilla", type=int, default=0)
    s.add_argument(
        "--strategy", default="auto", choices=["auto", "ucg", "hybrid", "no-ancilla", "no_ancilla"]
    )
    s.add_argument("--out")
    s.add_argument("--format", default="qasm", choices=["qasm", "json"])
    s.add_argument("--trace-stages", action="store_true")
    s.set_defaults(func=cmd_synth)

    d = sub.add_parser("synth-diag", help="compile a diagonal unitary")
    d.add_argument("--thetas", required=True)
    d.add_argument("--ancilla", type=int, default=0)
    d.add_argument("--force-emit", action="store_true")
    d.add_argument("--out")
    d.add_argument("--format", default="qasm", choices=["qasm", "json"])
    d.add_argument("--trace-stages", action="store_true")
    d.set_defaults(func=cmd_synth_diag)

    v = sub.add_parser("verify", help="simulate a circuit against a target")
    v.add_argument("--circuit", required=True)
    tgt = v.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--state")
    tgt.add_argument("--thetas")
    mode = v.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="depth/size CSV over ancilla budgets")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m-list", required=True, help="comma-separated ancilla counts")
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--no-timing", action="store_true", help="write 0.0 in synth_ms")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("bounds", help="evaluate the depth/size bound formulas")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ValidationError, StatePrepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
