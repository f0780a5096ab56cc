"""Command-line entry point: `conecert SUBCOMMAND ...`.

Exit status: 0 for a positive result (Certified, GES, Valid, or a plain
computation), 2 for Inconclusive, 3 for a definite negative verdict (NotGES,
Invalid), 1 for errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import formats
from .cls import require_valid, simulate, switch_counts
from .errors import ConeCertError
from .numerics import zoh_discretize
from .qclp import FoodImpulse, design_plant, rollout_cost
from .stability import GES, NOT_GES, VALID, certify_ges, verify_pwq
from .switch_cert import CERTIFIED, certify, certify_auto

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_NEGATIVE = 0, 1, 2, 3
DIGITS = 6


def _g(x) -> str:
    if isinstance(x, (int, np.integer)) or x is None or isinstance(x, str):
        return "" if x is None else str(x)
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.{DIGITS}g}"


def _full(x) -> str:
    if isinstance(x, (int, np.integer)) or x is None or isinstance(x, str):
        return "" if x is None else str(x)
    return repr(float(x))


def sidecar(path: Path) -> Path:
    """foo.csv -> foo.full.csv; foo -> foo.full"""
    return path.with_name(path.stem + ".full" + path.suffix) if path.suffix else path.with_name(path.name + ".full")


def write_table(path, header, rows):
    """CSV with 6 significant digits, plus the full-precision sidecar."""
    path = Path(path)
    for target, conv in ((path, _g), (sidecar(path), _full)):
        with open(target, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([conv(v) for v in r])


def write_doc(path, build):
    """`build(digits)` returns text; the rounded copy goes to path."""
    path = Path(path)
    path.write_text(build(DIGITS))
    sidecar(path).write_text(build(None))


def _vec(text: str, n: int, what: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError:
        raise ValueError(f"{what}: expected {n} numbers") from None
    if v.size != n:
        raise ValueError(f"{what}: expected {n} numbers, got {v.size}")
    return v


def _usage(msg):
    print(f"conecert: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _caps(text: str, n: int):
    """'t2=24,t3=6' -> (24, 6)."""
    want = [f"t{k}" for k in range(2, n)]
    if not want:
        if text:
            raise ValueError("this system has no free dwell times; omit --caps")
        return ()
    got = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, _, val = part.partition("=")
        got[key.strip()] = int(val)
    missing = [k for k in want if k not in got]
    extra = [k for k in got if k not in want]
    if missing or extra:
        raise ValueError(f"--caps needs exactly {','.join(k + '=N' for k in want)}")
    if any(got[k] < 1 for k in want):
        raise ValueError("caps must be positive")
    return tuple(got[k] for k in want)


# ---------------------------------------------------------------------------
# subcommands


def cmd_discretize(args):
    plant = formats.plant_from(formats.read(args.plant))
    model = args.input_model or plant.input_model
    disc = zoh_discretize(plant.Ac, plant.Bc, plant.Qc, plant.Rc, plant.T, model)

    def build(digits):
        w = formats.Writer("cls-discrete", digits)
        w.scalar("T", float(plant.T))
        w.scalar("input_model", model)
        w.matrix("A", disc.A)
        w.vector("B", disc.B)
        w.matrix("Q", disc.Q)
        w.vector("S", disc.S)
        w.scalar("R", float(disc.R))
        return w.text()

    text = build(DIGITS)
    if args.out:
        write_doc(args.out, build)
    print(text, end="")
    return EXIT_OK


def cmd_design(args):
    plant = formats.plant_from(formats.read(args.plant))
    if args.input_model:
        plant = dataclasses.replace(plant, input_model=args.input_model)
    d = design_plant(plant)
    Path(args.out).write_text(formats.design_text(d))
    print(f"K {' '.join(_g(v) for v in d.K)}")
    print(f"R {_g(d.R)}")
    print(f"riccati_residual {_g(d.riccati_residual)}")
    print(f"design written to {args.out}")
    return EXIT_OK


def _initial_states(args, n):
    if args.x0 is not None:
        return _vec(args.x0, n, "--x0").reshape(1, -1)
    if args.sphere is not None:
        if n != 2:
            raise ValueError("--sphere needs n = 2; use --random for larger systems")
        th = 2.0 * np.pi * np.arange(args.sphere) / args.sphere
        return np.column_stack([np.cos(th), np.sin(th)])
    if args.random is not None:
        rng = np.random.default_rng(args.seed)
        x = rng.standard_normal((args.random, n))
        return x / np.linalg.norm(x, axis=1, keepdims=True)
    raise ValueError("give one of --x0, --sphere, --random")


def cmd_simulate(args):
    sysm = formats.load_system(args.system)
    require_valid(sysm)
    X0 = _initial_states(args, sysm.n)
    n = sysm.n
    if X0.shape[0] == 1:
        tr = simulate(sysm, X0[0], args.steps, args.tol_boundary)
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["mode", "boundary_flag"]
        rows = []
        for t in range(args.steps + 1):
            rows.append([t] + list(tr.states[t]) + [tr.assigned[t], int(tr.boundary[t])])
        if args.out:
            write_table(args.out, header, rows)
        print(f"switches {tr.switch_count}")
        if tr.switch_times:
            print(f"switch_times {' '.join(str(t) for t in tr.switch_times)}")
        return EXIT_OK
    counts = switch_counts(sysm, X0, args.steps, args.tol_boundary)
    header = ["index"] + [f"x0_{i + 1}" for i in range(n)] + ["switches"]
    rows = [[k] + list(X0[k]) + [int(c)] for k, c in enumerate(counts)]
    if args.out:
        write_table(args.out, header, rows)
    hist = np.bincount(counts)
    print(f"trajectories {len(counts)}")
    print(f"max_switches {int(counts.max())}")
    print("histogram " + " ".join(f"{k}:{int(v)}" for k, v in enumerate(hist) if v))
    return EXIT_OK


def cmd_rollout(args):
    d = formats.design_from(formats.read(args.design))
    n = d.A.shape[0]
    x0 = np.zeros(n) if args.x0 is None else _vec(args.x0, n, "--x0")
    dist = FoodImpulse(args.food) if args.food is not None else None
    ro = rollout_cost(d, x0, args.horizon, dist)
    if args.out:
        write_table(args.out, ro.header, ro.rows)
    print(f"cost {_g(ro.cost)}")
    if ro.peak_output is not None:
        print(f"peak_output {_g(ro.peak_output)}")
    return EXIT_OK


def _tuple_rows(cert):
    for times, tr in cert.per_tuple.items():
        aux = tr.aux
        sel = "" if aux is None else " ".join(str(i + 1) for i in aux.selection)
        b0 = None if aux is None else float(np.min(aux.beta0))
        yield list(times) + [tr.status, sel, b0, tr.reason]


def cmd_certify_switches(args):
    sysm = formats.load_system(args.system)
    require_valid(sysm)
    caps = _caps(args.caps or "", sysm.n)
    if args.i1 == "auto":
        cert = certify_auto(sysm, caps, args.workers, args.margin)
    else:
        cert = certify(sysm, int(args.i1), caps, args.workers, args.margin)
    header = [f"t{k}" for k in range(2, sysm.n)] + ["status", "rows_selected", "beta0_min", "reason"]
    rows = list(_tuple_rows(cert))

    def build(digits):
        w = formats.Writer("cls-switch-report", digits)
        w.scalar("verdict", cert.verdict)
        w.scalar("bound", cert.bound)
        w.scalar("i1", cert.i1)
        w.scalar("caps", " ".join(str(c) for c in caps))
        w.scalar("tuples", len(cert.per_tuple))
        w.scalar("nontrivial", len(cert.nontrivial))
        w.scalar("failed", len(cert.failed))
        w.scalar("frontier", cert.frontier_detail)
        for k, v in sorted(cert.alternatives.items()):
            w.scalar(f"i1_{k}", v)
        w.comment(cert.statement)
        if cert.caps:
            w.comment("nontrivial tuples: " + " ".join("(" + ",".join(map(str, t)) + ")" for t in cert.nontrivial))
        return w.text()

    if args.report:
        write_doc(args.report, build)
        write_table(Path(args.report).with_suffix(".csv"), header, rows)
    print(build(DIGITS), end="")
    return EXIT_OK if cert.verdict == CERTIFIED else EXIT_INCONCLUSIVE


def cmd_certify_ges(args):
    sysm = formats.load_system(args.system)
    require_valid(sysm)
    if args.report:
        cert = formats.summary_from(formats.read(args.report))
    else:
        caps = _caps(args.caps or "", sysm.n)
        cert = certify_auto(sysm, caps, args.workers)
    rep = certify_ges(sysm, cert)
    print(f"verdict {rep.verdict}")
    print(f"switch_bound {rep.switch_bound if rep.switch_bound is not None else 'none'}")
    for m in rep.modes:
        print(f"mode {m.mode} spectral_radius {_g(m.radius)} schur {'yes' if m.schur else 'no'}")
    print(f"f_restriction {'GES' if rep.f_restriction_ges else 'not established'} ({rep.tag})")
    if rep.witness is not None:
        print(f"witness mode {rep.witness.mode} eigenvalue {_g(rep.witness.eigenvalue)} "
              f"ray {' '.join(_g(v) for v in rep.witness.ray)}")
    for note in rep.notes:
        print(f"# {note}")
    if rep.verdict == GES:
        return EXIT_OK
    return EXIT_NEGATIVE if rep.verdict == NOT_GES else EXIT_INCONCLUSIVE


def cmd_verify_pwq(args):
    sysm = formats.load_system(args.system)
    cand = formats.candidate_from(formats.read(args.candidate))
    res = verify_pwq(sysm, cand)
    print(f"verdict {res.verdict}")
    for c in res.checks:
        what = "min eig" if c.sense == ">0" else "max eig"
        print(f"lmi {c.index} {c.sense} {what} {_g(c.extreme)} {'ok' if c.ok else 'FAIL'}")
    print(f"# {res.reason}")
    return EXIT_OK if res.verdict == VALID else EXIT_NEGATIVE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conecert", description="Conewise linear systems: design, simulation, certificates.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("discretize", help="sample a continuous plant and its cost")
    s.add_argument("--plant", required=True)
    s.add_argument("--input-model", choices=("impulse", "zoh"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_discretize)

    s = sub.add_parser("design", help="LQR gain and closed-loop system file")
    s.add_argument("--plant", required=True)
    s.add_argument("--input-model", choices=("impulse", "zoh"))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="trajectories and switch counts")
    s.add_argument("--system", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--x0")
    g.add_argument("--sphere", type=int, help="N equally spaced unit initial states (n = 2)")
    g.add_argument("--random", type=int, help="N random unit initial states")
    s.add_argument("--steps", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol-boundary", type=float, default=1e-9)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("rollout", help="closed-loop cost and trajectory of a design")
    s.add_argument("--design", required=True)
    s.add_argument("--x0")
    s.add_argument("--horizon", type=int, default=200)
    s.add_argument("--food", type=float, help="food impulse in grams at t = 0")
    s.add_argument("--out")
    s.set_defaults(func=cmd_rollout)

    s = sub.add_parser("certify-switches", help="bound the number of switches")
    s.add_argument("--system", required=True)
    s.add_argument("--i1", default="auto", choices=("1", "2", "auto"))
    s.add_argument("--caps", default="", help="e.g. t2=24,t3=6")
    s.add_argument("--margin", type=int, default=1, help="frontier layers checked beyond the caps")
    s.add_argument("--workers", type=int, help="threads (default CLS_THREADS or min(8, cpus))")
    s.add_argument("--report")
    s.set_defaults(func=cmd_certify_switches)

    s = sub.add_parser("certify-ges", help="global exponential stability verdict")
    s.add_argument("--system", required=True)
    s.add_argument("--report", help="summary written by certify-switches")
    s.add_argument("--caps", default="")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_certify_ges)

    s = sub.add_parser("verify-pwq", help="check a piecewise quadratic Lyapunov candidate")
    s.add_argument("--system", required=True)
    s.add_argument("--candidate", required=True)
    s.set_defaults(func=cmd_verify_pwq)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 means Inconclusive here
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConeCertError, ValueError, OSError) as exc:
        return _usage(str(exc))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
