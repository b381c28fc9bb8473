"""Command-line front end.

Exit codes: 0 ok, 2 parse error, 3 invariant violation, 4 transform
precondition failed, 5 not a symmetry. With ``--json`` every command prints
one report object ``{schema_version, command, inputs, flags, defects,
outputs, provenance, error}`` on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from timesym import __version__
from timesym import io as tio
from timesym import reversal, symmetry, tsqt
from timesym.config import ENV_VAR, get_tolerances, tolerances_from_env, use_tolerances
from timesym.errors import (
    InvariantViolation,
    MixedKinds,
    NotASymmetry,
    ParseError,
    TimesymError,
)
from timesym.operations import apply, classify, outcome_probabilities, sample_outcomes, validate_instrument
from timesym.states import condition

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_PRECONDITION, EXIT_NOT_SYMMETRY = 0, 2, 3, 4, 5


def fixtures_dir() -> Path:
    return Path(str(resources.files("timesym") / "fixtures"))


def nogo_floor(d: int, target: str) -> tuple[float | None, dict]:
    """Residual floor recorded in the fixtures for ``d`` and ``target`` (or None), and the search settings it holds for."""
    data = json.loads((fixtures_dir() / "nogo_floor.json").read_text())
    return data.get("floors", {}).get(str(d), {}).get(target), data.get("settings", {})


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.flags: dict = {}
        self.defects: dict = {}
        self.outputs: dict = {}
        self.error: dict | None = None
        self.tolerances = get_tolerances()

    def fail(self, exc: TimesymError):
        self.error = {"name": exc.name, "message": str(exc), "details": exc.details}

    def as_dict(self) -> dict:
        return tio.jsonable({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "flags": self.flags,
            "defects": self.defects,
            "outputs": self.outputs,
            "provenance": {
                "package": "timesym",
                "version": __version__,
                "tolerances": self.tolerances.__dict__,
            },
            "error": self.error,
        })


def _render(value, indent: str = "  ") -> str:
    if isinstance(value, np.ndarray):
        body = np.array2string(value, precision=6, suppress_small=True, max_line_width=100)
        return "\n" + "\n".join(indent + line for line in body.splitlines())
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_human(report: Report, out):
    print(f"{report.command}: {', '.join(f'{k}={Path(str(v)).name}' for k, v in report.inputs.items())}", file=out)
    for section in ("flags", "defects", "outputs"):
        items = getattr(report, section)
        if not items:
            continue
        print(f"{section}:", file=out)
        for k, v in items.items():
            if isinstance(v, list) and v and isinstance(v[0], np.ndarray):
                print(f"  {k}:", file=out)
                for i, m in enumerate(v):
                    print(f"    [{i}]{_render(m, '      ')}", file=out)
            else:
                print(f"  {k}: {_render(v, '    ')}", file=out)
    if report.error:
        print(f"error: {report.error['name']}: {report.error['message']}", file=out)


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args, report: Report) -> int:
    q = tio.load_channel(args.input)
    c = classify(q)
    ts = tsqt.ts_classify(q)
    report.flags = {**c.flags(), "ts_operation": ts.is_ts_operation, "ts_channel": ts.is_ts_channel}
    report.defects = {**c.defects, "ts_equality_in": ts.equality_in, "ts_equality_out": ts.equality_out}
    report.outputs = {"name": q.provenance.get("name", ""), "d_in": q.d_in, "d_out": q.d_out}
    return EXIT_OK


def _reverse(args, q):
    t = args.transform
    if t in reversal.TRANSFORMS:
        return reversal.TRANSFORMS[t](q)
    if t in ("petz", "petz-transpose"):
        if not (args.omega_a and args.omega_b):
            raise ParseError(f"--transform {t} needs --omega-a and --omega-b", path="--omega-a")
        fn = reversal.petz_reversal if t == "petz" else reversal.petz_reversal_transpose
        return fn(q, tio.load_state(args.omega_a), tio.load_state(args.omega_b))
    if not args.rho0:
        raise ParseError(f"--transform {t} needs --rho0", path="--rho0")
    rho0 = tio.load_state(args.rho0)
    if t == "crooks":
        return reversal.crooks_reversal(q, rho0)
    if not args.complement:
        raise ParseError("--transform crooks-operation needs --complement", path="--complement")
    return reversal.crooks_reversal_operation(q, tio.load_channel(args.complement), rho0)


def cmd_reverse(args, report: Report) -> int:
    q = tio.load_channel(args.input)
    r = _reverse(args, q)
    c = classify(r)
    report.flags = c.flags()
    report.defects = {"trace_nonincreasing": c.defects["trace_nonincreasing"],
                      "trace_preserving": c.defects["trace_preserving"]}
    report.outputs = {"transform": args.transform, "d_in": r.d_in, "d_out": r.d_out, "choi": r.choi,
                      "distance_to_input": float(np.linalg.norm(r.choi - q.choi)) if r.choi.shape == q.choi.shape else None}
    if args.out:
        name = f"{q.provenance.get('name', '')}:{args.transform}"
        tio.write_document(tio.channel_document(r, name, {"provenance": r.provenance, "source": str(args.input)}), args.out)
        report.outputs["written"] = str(args.out)
    return EXIT_OK


def cmd_decompose(args, report: Report) -> int:
    s = tio.load_supermap(args.input)
    try:
        dec = symmetry.decompose_operation_symmetry(s, n_channel_samples=args.channel_samples, seed=args.seed)
    except (NotASymmetry, MixedKinds) as exc:
        report.fail(exc)
        report.flags = {"symmetry": False}
        report.outputs = {"stage": getattr(exc, "stage", "")}
        return EXIT_NOT_SYMMETRY
    report.flags = {"symmetry": True}
    report.defects = {"residual": dec.residual}
    report.outputs = {"kind": dec.kind.value, "s1": dec.s1.u, "s2": dec.s2.u}
    return EXIT_OK


def cmd_nogo(args, report: Report) -> int:
    res = symmetry.nogo_search(args.dim, args.target, args.samples, args.restarts, args.seed)
    floor, settings = nogo_floor(args.dim, args.target)
    comparable = floor is not None and args.samples >= settings["samples"] and args.restarts >= settings["restarts"]
    report.flags = {"above_floor": bool(res.residual >= floor) if comparable else None}
    report.defects = {"residual": res.residual}
    report.outputs = {
        "residual": res.residual,
        "floor": floor,
        "branch": res.kind.value,
        "restart": res.restart,
        "best_so_far": list(res.best_so_far),
        "samples": res.unitary_sample_size,
        "w": res.w,
        "v": res.v,
    }
    return EXIT_OK


def cmd_simulate(args, report: Report) -> int:
    inst = tio.load_instrument(args.instrument)
    rho = tio.load_state(args.state)
    inst_report = validate_instrument(inst)
    ts_report = tsqt.validate_ts_instrument(inst)
    report.flags = {"instrument_valid": inst_report.valid, "ts_valid": ts_report.valid}
    report.defects = {"cp": inst_report.cp_defect, "tp": inst_report.tp_defect}
    if not inst_report.valid:
        raise InvariantViolation(
            f"branches do not sum to a channel (tp defect {inst_report.tp_defect:.3e})", invariant="instrument"
        )
    if args.require_ts and not ts_report.valid:
        bad = ts_report.defective_branches
        where = f"branch {bad[0]}" if bad else "the branch sum"
        raise InvariantViolation(f"instrument is not time-symmetric: {where} fails", invariant="time_symmetric",
                                 branches=bad)
    outcomes = sample_outcomes(inst, rho, args.shots, args.seed)
    counts = np.bincount(outcomes, minlength=len(inst))
    born = outcome_probabilities(inst, rho)
    freqs = counts / max(args.shots, 1)
    sigma = np.sqrt(np.clip(born * (1 - born), 0, None) / max(args.shots, 1))
    within = np.abs(freqs - born) <= 3 * sigma + 1e-12
    report.flags["within_3_sigma"] = bool(np.all(within))
    report.outputs = {
        "shots": args.shots,
        "counts": counts.tolist(),
        "frequencies": freqs.tolist(),
        "born": born.tolist(),
        "sigma": sigma.tolist(),
        "post_states": [condition(apply(b, rho)).mat if c else None for b, c in zip(inst.branches, counts)],
    }
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "reverse": cmd_reverse,
    "decompose": cmd_decompose,
    "nogo": cmd_nogo,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="timesym",
        description=f"Quantum operations under time reversal. Tolerances can be overridden with {ENV_VAR}.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="predicates and defects of a channel file")
    c.add_argument("input")

    r = sub.add_parser("reverse", help="apply a time-reversal transform")
    r.add_argument("input")
    r.add_argument("--transform", required=True,
                   choices=sorted(list(reversal.TRANSFORMS) + ["petz", "petz-transpose", "crooks", "crooks-operation"]))
    r.add_argument("--omega-a", help="state file (petz)")
    r.add_argument("--omega-b", help="state file (petz)")
    r.add_argument("--rho0", help="state file (crooks)")
    r.add_argument("--complement", help="channel file c0 containing the input operation (crooks-operation)")
    r.add_argument("--out", help="write the reversed map here")

    d = sub.add_parser("decompose", help="split a supermap into input and output state symmetries")
    d.add_argument("input")
    d.add_argument("--channel-samples", type=int, default=3)
    d.add_argument("--seed", type=int, default=0)

    n = sub.add_parser("nogo", help="search for a symmetry implementing a reversal of unitary channels")
    n.add_argument("--dim", type=int, default=2)
    n.add_argument("--target", choices=[t.value for t in symmetry.Target], default="dagger")
    n.add_argument("--samples", type=int, default=200)
    n.add_argument("--restarts", type=int, default=20)
    n.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("simulate", help="sample an instrument on a state")
    s.add_argument("instrument")
    s.add_argument("state")
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--require-ts", action="store_true", help="fail unless the instrument is time-symmetric")

    for sp in (c, r, d, n, s):
        sp.add_argument("--json", action="store_true", help="print a machine-readable report")
    return p


def _inputs(args) -> dict:
    keys = ("input", "instrument", "state", "omega_a", "omega_b", "rho0", "complement")
    inputs = {k: Path(getattr(args, k)).name for k in keys if getattr(args, k, None)}
    for k in ("transform", "dim", "target", "samples", "restarts", "seed", "shots"):
        if getattr(args, k, None) is not None:
            inputs[k] = getattr(args, k)
    return inputs


def main(argv=None, stdout=None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report = Report(args.command, _inputs(args))
    try:
        try:
            tol = tolerances_from_env()
        except ValueError as exc:
            raise ParseError(str(exc), path=ENV_VAR) from exc
        report.tolerances = tol
        with use_tolerances(tol):
            code = COMMANDS[args.command](args, report)
    except ParseError as exc:
        report.fail(exc)
        code = EXIT_PARSE
    except InvariantViolation as exc:
        report.fail(exc)
        code = EXIT_INVARIANT
    except TimesymError as exc:
        report.fail(exc)
        code = EXIT_PRECONDITION
    if args.json:
        print(json.dumps(report.as_dict(), indent=1), file=out)
    else:
        _print_human(report, out)
    if report.error and args.json and out is sys.stdout:
        print(f"error: {report.error['name']}: {report.error['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
