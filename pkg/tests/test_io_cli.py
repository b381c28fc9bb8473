import hashlib
import io
import json
from pathlib import Path

import numpy as np
import pytest

from timesym import io as tio
from timesym import operations as op
from timesym.cli import fixtures_dir, main
from timesym.errors import InvariantViolation, ParseError

GOLDEN = Path(__file__).parent / "golden"
FX = fixtures_dir()


def run(args, json_out=True):
    buf = io.StringIO()
    code = main([str(a) for a in args] + (["--json"] if json_out else []), stdout=buf)
    return code, (json.loads(buf.getvalue()) if json_out else buf.getvalue())


def resolve(args):
    return [str(FX / a) if a.endswith(".json") else a for a in args]


def close(a, b, path="", tol=1e-9):
    """Recursive comparison: numbers (and numeric strings) within ``tol``, everything else exactly."""
    if isinstance(a, dict) and isinstance(b, dict):
        assert a.keys() == b.keys(), path
        for k in a:
            close(a[k], b[k], f"{path}.{k}", tol)
        return
    if isinstance(a, list) and isinstance(b, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            close(x, y, f"{path}[{i}]", tol)
        return
    if isinstance(a, bool) or isinstance(b, bool) or a is None or b is None:
        assert a == b, path
        return
    try:
        fa, fb = float(a), float(b)
    except (TypeError, ValueError):
        assert a == b, path
        return
    assert abs(fa - fb) <= tol, f"{path}: {a} != {b}"


# ---------------------------------------------------------------------------
# serialization


def test_channel_round_trip_is_bit_exact(tmp_path):
    q = op.random_operation(2, 3, 2, 0)
    path = tmp_path / "q.json"
    tio.write_document(tio.channel_document(q, "random"), path)
    back = tio.load_channel(path)
    assert np.array_equal(back.choi, q.choi)
    assert tio.encode_matrix(back.choi) == tio.encode_matrix(q.choi)


def test_fmt_uses_17_significant_digits():
    assert tio.fmt(0.1) == "0.10000000000000001"
    assert float(tio.fmt(np.pi)) == np.pi


def test_kraus_and_numeric_inputs(tmp_path):
    doc = {"format_version": "1.0", "kind": "channel", "name": "x", "d_in": 2, "d_out": 2,
           "representation": "kraus", "data": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
    p = tmp_path / "k.json"
    p.write_text(json.dumps(doc))
    assert tio.load_channel(p).allclose(op.identity_channel(2))


def test_supermap_and_instrument_round_trip(tmp_path):
    s = tio.load_supermap(FX / "supermap_double_transpose.json")
    assert s.in_dims == (2, 2) and np.allclose(s.matrix @ s.matrix, np.eye(16))
    inst = tio.load_instrument(FX / "instrument_luders_d3.json")
    assert len(inst) == 2 and inst.d_in == 3
    rho = tio.load_state(FX / "state_plus.json")
    assert np.allclose(rho.mat, 0.5)


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d.update(d_in=0), "d_in"),
    (lambda d: d.update(d_in=3), "data"),
    (lambda d: d.pop("representation"), "representation"),
    (lambda d: d["data"][1].__setitem__(2, ["x", "0"]), "data[1][2][0]"),
    (lambda d: d["data"][0].__setitem__(0, [1]), "data[0][0]"),
    (lambda d: d.update(format_version="9.0"), "format_version"),
    (lambda d: d.update(kind="supermap"), "kind"),
])
def test_parse_errors_name_the_field(tmp_path, mutate, where):
    doc = tio.channel_document(op.identity_channel(2), "identity")
    mutate(doc)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ParseError) as exc:
        tio.load_channel(p)
    assert where in str(exc.value)


def test_json_syntax_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "kind": "channel",\n oops\n}')
    with pytest.raises(ParseError) as exc:
        tio.load_channel(p)
    assert exc.value.details["line"] == 3


def test_invariant_violation_names_invariant(tmp_path):
    p = tmp_path / "twice.json"
    tio.write_document(tio.channel_document(op.CPMap(2, 2, 2 * op.identity_channel(2).choi)), p)
    with pytest.raises(InvariantViolation) as exc:
        tio.load_channel(p)
    assert exc.value.details["invariant"] == "NotTraceNonIncreasing"


# ---------------------------------------------------------------------------
# command line


def test_classify_exit_codes(tmp_path):
    code, rep = run(["classify", FX / "identity.json"])
    assert code == 0 and all(rep["flags"].values())
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**json.loads((FX / "identity.json").read_text()), "d_out": "two"}))
    code, rep = run(["classify", bad])
    assert code == 2 and rep["error"]["name"] == "ParseError" and "d_out" in rep["error"]["message"]
    twice = tmp_path / "twice.json"
    tio.write_document(tio.channel_document(op.CPMap(2, 2, 2 * op.identity_channel(2).choi)), twice)
    code, rep = run(["classify", twice])
    assert code == 3 and rep["error"]["details"]["invariant"] == "NotTraceNonIncreasing"


def test_argparse_errors_exit_2():
    assert main(["reverse", str(FX / "c0.json"), "--transform", "nope"], stdout=io.StringIO()) == 2
    assert main([], stdout=io.StringIO()) == 2


def test_reverse_writes_channel_file(tmp_path):
    out = tmp_path / "back.json"
    code, rep = run(["reverse", FX / "c0.json", "--transform", "theta", "--out", out])
    assert code == 0
    assert tio.load_channel(out).allclose(op.uniform_pauli_channel())
    meta = json.loads(out.read_text())["metadata"]
    assert meta["provenance"]["transform"] == "theta"


def test_double_transpose_twice_round_trips(tmp_path):
    src = tmp_path / "q.json"
    q = op.random_cptp(2, 2, 2, 3)
    tio.write_document(tio.channel_document(q, "q"), src)
    once, twice = tmp_path / "once.json", tmp_path / "twice.json"
    assert run(["reverse", src, "--transform", "double-transpose", "--out", once])[0] == 0
    assert run(["reverse", once, "--transform", "double-transpose", "--out", twice])[0] == 0
    assert tio.load_channel(twice).allclose(q, atol=1e-12)


def test_reverse_precondition_exit_4():
    code, rep = run(["reverse", FX / "discard_prepare_0.json", "--transform", "theta"])
    assert code == 4 and rep["error"]["name"] == "NotTimeSymmetric"
    code, rep = run(["reverse", FX / "c0.json", "--transform", "petz"])
    assert code == 2


def test_decompose_exit_5_names_stage():
    code, rep = run(["decompose", FX / "supermap_weak_adjoint.json"])
    assert code == 5 and rep["outputs"]["stage"] == "channel_preservation"


def test_simulate_require_ts_names_branch():
    code, rep = run(["simulate", FX / "instrument_prepare_0.json", FX / "state_plus.json", "--require-ts"])
    assert code == 3 and "branch 0" in rep["error"]["message"]


def test_simulate_eigenstate_is_deterministic():
    code, rep = run(["simulate", FX / "instrument_z.json", FX / "state_0.json", "--shots", "500"])
    assert code == 0 and rep["outputs"]["counts"] == [500, 0]


def test_nogo_seed_replay_identical():
    args = ["nogo", "--samples", "10", "--restarts", "1", "--seed", "4"]
    assert run(args) == run(args)


def test_nogo_control_via_cli():
    code, rep = run(["nogo", "--target", "identity", "--samples", "20", "--restarts", "1"])
    assert code == 0 and rep["outputs"]["residual"] <= 1e-6


def test_human_output():
    code, text = run(["classify", FX / "c0.json"], json_out=False)
    assert code == 0 and "bistochastic: True" in text


def test_env_tolerance_override(monkeypatch):
    monkeypatch.setenv("TIMESYM_TOL", "1e-3")
    code, rep = run(["classify", FX / "identity.json"])
    assert code == 0 and rep["provenance"]["tolerances"]["psd_tol"] == 1e-3
    monkeypatch.setenv("TIMESYM_TOL", "-1")
    code, rep = run(["classify", FX / "identity.json"])
    assert code == 2


def test_commands_do_not_mutate_inputs(tmp_path):
    digest = {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in FX.glob("*.json")}
    for f in sorted(GOLDEN.glob("*.json")):
        case = json.loads(f.read_text())
        if case["args"][0] != "nogo":
            run(resolve(case["args"]))
    assert digest == {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in FX.glob("*.json")}


@pytest.mark.parametrize("golden", sorted(GOLDEN.glob("*.json")), ids=lambda p: p.stem)
def test_golden_reports(golden):
    case = json.loads(golden.read_text())
    code, rep = run(resolve(case["args"]))
    assert code == case["exit_code"]
    close(rep, case["report"])
