"""Regenerate the golden CLI reports in tests/golden from the bundled fixtures.

Each golden file stores the argument list (fixture file names are resolved
against the fixtures directory at test time), the exit code and the JSON report.

    python scripts/make_golden.py
"""

import io
import json
from pathlib import Path

from timesym.cli import fixtures_dir, main

OUT = Path(__file__).resolve().parents[1] / "tests" / "golden"

CASES = {
    "classify_identity": ["classify", "identity.json"],
    "classify_c0": ["classify", "c0.json"],
    "classify_discard_prepare": ["classify", "discard_prepare_0.json"],
    "reverse_c0_theta": ["reverse", "c0.json", "--transform", "theta"],
    "reverse_c0_theta_prime": ["reverse", "c0.json", "--transform", "theta-prime"],
    "reverse_discard_prepare_theta": ["reverse", "discard_prepare_0.json", "--transform", "theta"],
    "reverse_discard_prepare_weak_adjoint": ["reverse", "discard_prepare_0.json", "--transform", "weak-adjoint"],
    "reverse_discard_prepare_double_transpose": ["reverse", "discard_prepare_0.json", "--transform",
                                                 "double-transpose"],
    "reverse_discard_prepare_petz": ["reverse", "discard_prepare_0.json", "--transform", "petz",
                                     "--omega-a", "state_mixed.json", "--omega-b", "state_0.json"],
    "reverse_c0_crooks": ["reverse", "c0.json", "--transform", "crooks", "--rho0", "state_0.json"],
    "decompose_identity": ["decompose", "supermap_identity.json"],
    "decompose_double_transpose": ["decompose", "supermap_double_transpose.json"],
    "decompose_weak_adjoint": ["decompose", "supermap_weak_adjoint.json"],
    "simulate_z_zero": ["simulate", "instrument_z.json", "state_0.json", "--shots", "1000", "--seed", "0"],
    "simulate_z_plus": ["simulate", "instrument_z.json", "state_plus.json", "--shots", "10000", "--seed", "1"],
    "simulate_luders_d3": ["simulate", "instrument_luders_d3.json", "state_d3.json", "--shots", "2000",
                           "--seed", "2"],
    "simulate_prepare_require_ts": ["simulate", "instrument_prepare_0.json", "state_plus.json", "--require-ts"],
    "nogo_small": ["nogo", "--dim", "2", "--target", "dagger", "--samples", "20", "--restarts", "2",
                   "--seed", "3"],
}


def resolve(args):
    fx = fixtures_dir()
    return [str(fx / a) if a.endswith(".json") else a for a in args]


def run(args):
    buf = io.StringIO()
    code = main(resolve(args) + ["--json"], stdout=buf)
    return code, json.loads(buf.getvalue())


def main_():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, args in CASES.items():
        code, report = run(args)
        (OUT / f"{name}.json").write_text(json.dumps({"args": args, "exit_code": code, "report": report},
                                                     indent=1) + "\n")
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    main_()
