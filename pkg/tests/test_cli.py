import subprocess
import sys

import pytest

from conftest import DATA
from ssdiag.cli import main, write_atomic


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_inverter_and(capsys):
    code, out, _ = run(capsys, "check", DATA / "inverter_and.ssd", DATA / "inverter_and_CD.obs")
    assert code == 0
    assert out.count("PASS") == 4 and "FAIL" not in out


def test_check_with_kappa_and_jointree(capsys):
    code, out, _ = run(
        capsys, "check", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs",
        "--jointree", DATA / "three_gate.jt", "--pivot", "C2",
        "--cost", f"kappa:{DATA / 'mode_ranks.txt'}",
    )
    assert code == 0, out


def test_validate_exit_codes(capsys):
    assert run(capsys, "validate", DATA / "three_gate.ssd")[:2] == (0, "valid (full)\n")
    code, out, _ = run(capsys, "validate", DATA / "shared_power.ssd")
    assert code == 1 and out.startswith("sharing:")


def test_adder_phi2_has_eight_diagnoses(tmp_path, capsys):
    prefix = tmp_path / "adder"
    assert run(capsys, "gen", "adder", prefix, "--n", 3, "--observation", "phi2")[0] == 0
    code, out, _ = run(capsys, "diagnose", f"{prefix}.ssd", f"{prefix}.obs")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "cost 3" and len(lines) == 9
    code, out2, _ = run(capsys, "oracle", f"{prefix}.ssd", f"{prefix}.obs", "--cost", "card")
    assert out2 == out


def test_chain_stats_width_one(tmp_path, capsys):
    prefix = tmp_path / "chain"
    run(capsys, "gen", "chain-inverters", prefix, "--n", 8)
    code, out, _ = run(capsys, "stats", f"{prefix}.ssd")
    assert code == 0 and "width 1" in out.splitlines()


def test_stats_with_cut_arcs(capsys):
    code, out, _ = run(capsys, "stats", DATA / "three_gate.ssd", DATA / "three_gate_notA_notE.obs", "--cut-arcs")
    fields = dict(line.split() for line in out.splitlines())
    assert code == 0 and fields["pieces"] == "2" and int(fields["cut_width"]) <= int(fields["width"])


def test_compile_writes_graph_and_report(tmp_path, capsys):
    out_path, stats_path = tmp_path / "c.nnf", tmp_path / "c.stats"
    code, out, _ = run(
        capsys, "compile", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs",
        "--jointree", DATA / "three_gate.jt", "--pivot", "C1", "-o", out_path, "--stats", stats_path,
    )
    assert code == 0 and out == ""
    assert out_path.read_text().startswith("nnf ")
    report = stats_path.read_text()
    assert "pivot C1" in report and "noncached" in report


def test_oracle_lists_diagnoses(capsys):
    code, out, _ = run(capsys, "oracle", DATA / "inverter_and.ssd", DATA / "inverter_and_CD.obs")
    assert code == 0 and out.splitlines() == ["diagnoses 3", "!okX !okY", "!okX okY", "okX !okY"]


def test_outputs_are_byte_identical(tmp_path, capsys):
    texts = []
    for k in range(2):
        prefix = tmp_path / f"r{k}"
        run(capsys, "gen", "random", prefix, "--seed", 17)
        _, out, _ = run(capsys, "compile", f"{prefix}.ssd", f"{prefix}.obs")
        texts.append((prefix.with_suffix(".ssd").read_text(), prefix.with_suffix(".obs").read_text(), out))
    assert texts[0] == texts[1]


@pytest.mark.parametrize(
    "argv, code",
    [
        (["diagnose", "missing.ssd", "missing.obs"], 2),
        (["diagnose", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs", "--cost", "bogus"], 2),
        (["compile", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs", "--pivot", "C1"], 2),
        (["compile", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs",
          "--jointree", DATA / "three_gate.jt", "--pivot", "C9"], 2),
        (["compile", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs",
          "--jointree", DATA / "three_gate.jt", "--cut-arcs"], 2),
        (["diagnose", DATA / "three_gate.ssd", DATA / "mode_ranks.txt"], 1),
        (["validate", DATA / "mode_ranks.txt"], 1),
        (["--cap", 2, "oracle", DATA / "three_gate.ssd", DATA / "three_gate_AE.obs"], 3),
    ],
)
def test_error_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code and err.startswith("error:")


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "adder", "x", "--n", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_failed_compile_leaves_no_output(tmp_path, capsys):
    obs = tmp_path / "in" / "d.obs"
    obs.parent.mkdir()
    obs.write_text("D\n")
    out_dir = tmp_path / "out"
    out_dir.mkdir()
    code, _, _ = run(capsys, "--cap", 4, "compile", DATA / "or_gate.ssd", obs, "-o", out_dir / "never.nnf")
    assert code == 3
    assert list(out_dir.iterdir()) == []


def test_write_atomic_cleans_up(tmp_path):
    write_atomic(tmp_path / "ok.txt", "fine\n")
    assert (tmp_path / "ok.txt").read_text() == "fine\n"
    with pytest.raises(TypeError):
        write_atomic(tmp_path / "bad.txt", 42)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["ok.txt"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ssdiag", "oracle", DATA / "inverter_and.ssd", DATA / "inverter_and_CD.obs"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("diagnoses 3")
