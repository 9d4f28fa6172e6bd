import json
import subprocess
import sys

from sfpas.cli import main

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

PROVENANCE_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "command", "tolerances"],
    "properties": {
        "tool": {"const": "sfpas"},
        "version": {"type": "string"},
        "command": {"type": "array", "items": {"type": "string"}},
        "seed": {"type": ["integer", "null"]},
        "tolerances": {"type": "object"},
    },
}

RESULT_SCHEMAS = {
    ("invariants", "quot-count"): {
        "type": "object",
        "required": ["count", "provenance"],
        "properties": {"count": {"type": "integer"}, "provenance": PROVENANCE_SCHEMA},
    },
    ("toric", "validate"): {
        "type": "object",
        "required": ["P1", "P2", "fan", "provenance"],
        "properties": {
            "P1": {"type": "object", "required": ["ok"]},
            "P2": {"type": "object", "required": ["ok"]},
            "fan": {
                "type": "object",
                "required": ["simplicial", "is_fan", "complete"],
            },
            "provenance": PROVENANCE_SCHEMA,
        },
    },
    ("flag", "check"): {
        "type": "object",
        "required": ["verdict", "witness", "provenance"],
        "properties": {"verdict": {"type": "string"}, "provenance": PROVENANCE_SCHEMA},
    },
}


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_quot_count_stdout(capsys):
    code, out, _ = run_cli(["invariants", "quot-count", "--g", "2", "--r0", "2"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 4
    if jsonschema:
        jsonschema.validate(payload, RESULT_SCHEMAS[("invariants", "quot-count")])


def test_expected_dim_and_degrees(capsys):
    code, out, _ = run_cli(
        ["invariants", "expected-dim", "--r", "2", "--r0", "3", "--d", "1", "--d0", "2", "--g", "2"],
        capsys,
    )
    assert code == 0 and json.loads(out)["value"] == -1
    code, out, _ = run_cli(
        ["invariants", "degrees", "--r", "2", "--kind", "u", "--index", "2"], capsys
    )
    assert code == 0 and json.loads(out)["degree"] == 4


def test_ggw_top_and_below(capsys):
    code, out, _ = run_cli(
        ["invariants", "ggw", "--g", "1", "--r0", "2", "--d", "1", "--d0", "2", "--side", "above"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == 2
    assert payload["terms"] == [{"contribution": 2, "power": 1}]
    code, out, _ = run_cli(
        ["invariants", "ggw", "--g", "1", "--r0", "2", "--d", "1", "--d0", "2", "--side", "below"],
        capsys,
    )
    assert json.loads(out)["value"] == 0


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run_cli(["flag", "check", str(tmp_path / "missing.json")], capsys)
    assert code == 2
    assert "error" in err


def test_malformed_json_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run_cli(["flag", "check", str(bad)], capsys)
    assert code == 2


def test_flag_check_files(capsys, data_dir):
    code, out, _ = run_cli(["flag", "check", str(data_dir / "flag_stable.json")], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] == "Stable" and payload["witness"] is None
    if jsonschema:
        jsonschema.validate(payload, RESULT_SCHEMAS[("flag", "check")])

    code, out, _ = run_cli(["flag", "check", str(data_dir / "flag_unstable.json")], capsys)
    payload = json.loads(out)
    assert payload["verdict"] == "Unstable"
    assert payload["witness"]["pairing"] == "-1"


def test_stromme_cli(capsys, data_dir):
    path = str(data_dir / "stromme_triple.json")
    code, out, _ = run_cli(["stromme", "check", path], capsys)
    assert code == 0
    assert json.loads(out)["is_triple"] is True
    code, out, _ = run_cli(["stromme", "quot", path], capsys)
    payload = json.loads(out)
    assert payload["rank"] == 1 and payload["degree"] == 1
    code, out, _ = run_cli(
        ["stromme", "refute", path, "--s", "2", "--t", "1", "--trials", "20"], capsys
    )
    assert json.loads(out)["refutation"] is None


def test_toric_cli(capsys, data_dir):
    path = str(data_dir / "p1.json")
    code, out, _ = run_cli(["toric", "validate", path], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["P1"]["ok"] and payload["P2"]["ok"]
    assert payload["fan"] == {"simplicial": True, "is_fan": True, "complete": True}
    if jsonschema:
        jsonschema.validate(payload, RESULT_SCHEMAS[("toric", "validate")])

    code, out, _ = run_cli(["toric", "stability", path, "--support", "1,2"], capsys)
    payload = json.loads(out)
    assert payload["semistable"] and payload["stable"] and payload["in_U"]

    code, out, _ = run_cli(["toric", "membership", path], capsys)
    assert json.loads(out)["in_K0"] is True

    code, out, _ = run_cli(["toric", "nonempty", path, "--level-rep=-1,0"], capsys)
    assert json.loads(out)["nonempty"] is False

    code, out, _ = run_cli(["toric", "chamber", path], capsys)
    assert code == 0
    assert json.loads(out)["fan"] == {"max_cones": [[1], [2]]}
    code, _, _ = run_cli(["toric", "chamber", path, "--level-rep=-1,-1"], capsys)
    assert code == 3


def test_quiver_cli(capsys, data_dir):
    path = str(data_dir / "quiver_grassmann.json")
    code, out, _ = run_cli(["quiver", "flow", path, "--tol", "1e-6"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] == "Stable" and payload["converged"]
    code, out, _ = run_cli(["quiver", "verdict", path, "--tol", "1e-6"], capsys)
    assert json.loads(out)["verdict"] == "Stable"
    code, out, _ = run_cli(["quiver", "hamiltonian-check", path, "--seed", "3"], capsys)
    assert json.loads(out)["relative_error"] < 1e-5
    code, out, _ = run_cli(["quiver", "properness", path, "--trials", "3"], capsys)
    assert json.loads(out)["witness"] is None


def test_vortex_cli_solve_and_infeasible(capsys, tmp_path):
    out_path = tmp_path / "field.json"
    code, _, _ = run_cli(
        [
            "vortex", "solve", "--N", "64", "--L", "6.283185307179586",
            "--d", "-1", "--centers", "3.14,3.14", "--t", "0.7",
            "--tol", "1e-8", "--out", str(out_path),
        ],
        capsys,
    )
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["converged"] and payload["residual_sup"] < 1e-8
    assert len(payload["u"]) == 64

    code, _, err = run_cli(
        ["vortex", "solve", "--N", "64", "--L", "6.283185307179586", "--d", "-1",
         "--centers", "3.14,3.14", "--t", "0.0"],
        capsys,
    )
    assert code == 3
    assert "tau0" in err


def test_vortex_scan_csv(capsys):
    code, out, _ = run_cli(
        ["vortex", "scan", "--N", "64", "--L", "6.283185307179586", "--d", "-1",
         "--centers", "3.14,3.14", "--t-from", "0.05", "--t-to", "0.45", "--steps", "3"],
        capsys,
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,converged,residual,iterations"
    assert len(lines) == 4
    assert lines[1].split(",")[1] == "0"  # below threshold
    assert lines[3].split(",")[1] == "1"


def test_unknown_flag_rejected(capsys):
    code, _, _ = run_cli(["invariants", "quot-count", "--g", "2", "--r0", "2", "--bogus"], capsys)
    assert code == 2


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "sfpas.cli", "invariants", "quot-count", "--g", "1", "--r0", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 3


def test_repeat_invocations_byte_identical(capsys, data_dir):
    args = ["quiver", "flow", str(data_dir / "quiver_grassmann.json"), "--seed", "7"]
    _, out1, _ = run_cli(args, capsys)
    _, out2, _ = run_cli(args, capsys)
    assert out1 == out2


def test_golden_outputs(capsys, data_dir, golden_dir):
    cases = {
        "toric_validate_p1.json": ["toric", "validate", str(data_dir / "p1.json")],
        "toric_validate_p2.json": ["toric", "validate", str(data_dir / "p2.json")],
        "invariants_table_g3.json": [
            "invariants", "ggw", "--g", "3", "--r0", "2", "--d", "0", "--d0", "2",
            "--side", "above", "--l", "one",
        ],
        "quot_counts.json": ["invariants", "quot-count", "--g", "3", "--r0", "2"],
    }
    for name, args in cases.items():
        code, out, _ = run_cli(args, capsys)
        assert code == 0
        expected = (golden_dir / name).read_text()
        assert out == expected, f"golden mismatch for {name}"
