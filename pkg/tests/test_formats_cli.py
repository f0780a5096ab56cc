import csv
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conecert import formats
from conecert.cli import main, sidecar
from conecert.cls import ConewiseSystem
from conecert.errors import FormatError
from conecert.stability import PwqCandidate

from conftest import DATA
from _gen import random_two_cone
from _reference import INSULIN_K


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -- file grammar -------------------------------------------------------------

def test_parse_blocks_and_comments():
    doc = formats.parse("format cls-system 1\n# note\nn 2  # trailing\nmatrix M 2 2\n1 2\n3\n4\nvector v 2\n5 6\n")
    assert doc.kind == "cls-system" and doc.scalars["n"] == "2"
    assert np.array_equal(doc.array("M"), [[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(doc.array("v"), [5.0, 6.0])


@pytest.mark.parametrize("text", [
    "",
    "n 2\n",
    "format cls-system 2\n",
    "format cls-system 1\nmatrix M 2 2\n1 2 3\n",
    "format cls-system 1\nvector v 2\n1 x\n",
    "format cls-system 1\nvector v 1\nnan\n",
    "format cls-system 1\nn 2\nn 3\n",
    "format cls-system 1\nmatrix M 2\n1 2\n",
])
def test_malformed_files_rejected(text):
    with pytest.raises(FormatError):
        formats.parse(text)


def test_extra_numbers_rejected():
    with pytest.raises(FormatError):
        formats.parse("format cls-system 1\nvector v 2\n1 2 3\n")


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([2, 3, 4]))
def test_system_round_trip(seed, n):
    sys = random_two_cone(np.random.default_rng(seed), n)
    back = formats.system_from(formats.parse(formats.system_text(sys)))
    assert np.array_equal(back.A(1), sys.A(1)) and np.array_equal(back.A(2), sys.A(2))
    assert np.array_equal(back.K, sys.K)


def test_design_round_trip(insulin_design):
    back = formats.design_from(formats.parse(formats.design_text(insulin_design)))
    for name in ("A", "B", "Q", "S", "P", "K"):
        assert np.array_equal(getattr(back, name), getattr(insulin_design, name))
    assert back.R == insulin_design.R


def test_candidate_round_trip():
    cand = formats.candidate_from(formats.read(DATA / "pwq.txt"))
    back = formats.candidate_from(formats.parse(formats.candidate_text(cand)))
    assert all(np.array_equal(a, b) for a, b in zip(back.Y, cand.Y))
    assert np.array_equal(back.P1, cand.P1)
    assert isinstance(back, PwqCandidate)


def test_wrong_kind_rejected():
    with pytest.raises(FormatError):
        formats.candidate_from(formats.read(DATA / "second_order.sys"))


def test_sidecar_names(tmp_path):
    assert sidecar(tmp_path / "a.csv").name == "a.full.csv"
    assert sidecar(tmp_path / "report").name == "report.full"


# -- subcommands --------------------------------------------------------------

def test_discretize(capsys, tmp_path):
    out = tmp_path / "disc.txt"
    code, text, _ = run(capsys, "discretize", "--plant", DATA / "insulin.plant", "--out", out)
    assert code == 0 and text == out.read_text()
    full = formats.read(sidecar(out))
    assert full.number("R") == pytest.approx(17.8719, abs=5e-4)
    assert full.array("A").shape == (4, 4)


def test_design_matches_checked_in_file(capsys, tmp_path):
    out = tmp_path / "ins.design"
    code, text, _ = run(capsys, "design", "--plant", DATA / "insulin.plant", "--out", out)
    assert code == 0
    assert out.read_text() == (DATA / "insulin.design").read_text()
    d = formats.design_from(formats.read(out))
    assert np.all(np.abs(d.K - INSULIN_K) <= 5e-4 * np.maximum(1.0, np.abs(INSULIN_K)))


def test_design_file_accepted_everywhere(capsys, tmp_path):
    design = tmp_path / "ins.design"
    run(capsys, "design", "--plant", DATA / "insulin.plant", "--out", design)
    assert run(capsys, "simulate", "--system", design, "--random", 5, "--steps", 20)[0] == 0
    assert run(capsys, "rollout", "--design", design, "--horizon", 10)[0] == 0
    assert run(capsys, "certify-switches", "--system", design, "--i1", 1, "--caps", "t2=2,t3=1")[0] in (0, 2)
    assert run(capsys, "certify-ges", "--system", design, "--caps", "t2=2,t3=1")[0] in (0, 2)


def test_simulate_sphere(capsys, tmp_path):
    out = tmp_path / "sphere.csv"
    code, text, _ = run(capsys, "simulate", "--system", DATA / "second_order.sys", "--sphere", 360,
                        "--steps", 200, "--out", out)
    assert code == 0 and "trajectories 360" in text
    rows = read_csv(out)
    assert rows[0] == ["index", "x0_1", "x0_2", "switches"]
    counts = [int(r[-1]) for r in rows[1:]]
    assert len(counts) == 360 and max(counts) <= 2
    assert f"max_switches {max(counts)}" in text


def test_simulate_single_state(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, text, _ = run(capsys, "simulate", "--system", DATA / "second_order.sys", "--x0", "0,-1",
                        "--steps", 10, "--out", out)
    assert code == 0 and "switches 1" in text and "switch_times 1" in text
    rows = read_csv(out)
    assert rows[0] == ["t", "x1", "x2", "mode", "boundary_flag"]
    assert len(rows) == 12
    assert float(read_csv(sidecar(out))[1][2]) == -1.0


def test_rollout_food(capsys, tmp_path):
    out = tmp_path / "ro.csv"
    code, text, _ = run(capsys, "rollout", "--design", DATA / "insulin.design", "--food", 60, "--horizon", 300,
                        "--out", out)
    assert code == 0
    peak = float(text.split("peak_output")[1].split()[0])
    assert abs(peak - 2.0) <= 0.3
    rows = read_csv(out)
    assert rows[0][-2:] == ["y_output", "stage_cost"] and len(rows) == 302


def test_certify_switches_second_order(capsys, tmp_path):
    rep = tmp_path / "so.rep"
    code, text, _ = run(capsys, "certify-switches", "--system", DATA / "second_order.sys", "--report", rep)
    assert code == 0
    s = formats.summary_from(formats.read(rep))
    assert s.verdict == "Certified" and s.bound == 2 and s.i1 == 1
    assert read_csv(rep.with_suffix(".csv"))[0] == ["status", "rows_selected", "beta0_min", "reason"]


def test_certify_switches_insulin(capsys, tmp_path):
    rep = tmp_path / "ins.rep"
    code, text, _ = run(capsys, "certify-switches", "--system", DATA / "insulin.sys", "--i1", "auto",
                        "--caps", "t2=24,t3=6", "--report", rep)
    # the tabulated tuples are all certified but the frontier is not clean
    assert code == 2
    s = formats.summary_from(formats.read(rep))
    assert s.verdict == "Inconclusive" and s.caps == (24, 6)
    rows = read_csv(rep.with_suffix(".csv"))
    assert rows[0][:3] == ["t2", "t3", "status"]
    nontrivial = [r for r in rows[1:] if r[2] != "SigmaTrivial"]
    assert len(nontrivial) == 69 and all(r[2] == "Certified" for r in nontrivial)


def test_certify_ges_from_report(capsys, tmp_path):
    rep = tmp_path / "so.rep"
    run(capsys, "certify-switches", "--system", DATA / "second_order.sys", "--report", rep)
    code, text, _ = run(capsys, "certify-ges", "--system", DATA / "second_order.sys", "--report", rep)
    assert code == 0 and text.startswith("verdict GES")
    assert "switch_bound 2" in text


def test_certify_ges_not_ges_exit(capsys, tmp_path):
    sysfile = tmp_path / "ray.sys"
    a2 = np.diag([1.1, 0.3])
    sysfile.write_text(formats.system_text(ConewiseSystem.two_cone(a2 + np.outer([-1.0, 0.0], [1.0, 0.0]), a2,
                                                                   [1.0, 0.0])))
    code, text, _ = run(capsys, "certify-ges", "--system", sysfile)
    assert code == 3 and "verdict NotGES" in text and "witness mode 2" in text


def test_verify_pwq_exit_codes(capsys, tmp_path):
    code, text, _ = run(capsys, "verify-pwq", "--system", DATA / "second_order.sys", "--candidate", DATA / "pwq.txt")
    assert code == 3 and "lmi 6 <0" in text and "FAIL" in text
    bad = tmp_path / "neg.txt"
    bad.write_text((DATA / "pwq.txt").read_text().replace("Y1 0.0091", "Y1 -0.0091"))
    code, text, _ = run(capsys, "verify-pwq", "--system", DATA / "second_order.sys", "--candidate", bad)
    assert code == 3 and "Y1" in text


def test_errors_exit_one(capsys, tmp_path):
    assert run(capsys, "simulate", "--system", tmp_path / "missing.sys", "--x0", "1,0")[0] == 1
    code, _, err = run(capsys, "simulate", "--system", DATA / "second_order.sys", "--x0", "1,2,3")
    assert code == 1 and "expected 2 numbers" in err
    assert run(capsys, "certify-switches", "--system", DATA / "insulin.sys", "--caps", "t2=3")[0] == 1
    assert run(capsys, "simulate", "--system", DATA / "second_order.sys")[0] == 1
    assert run(capsys, "no-such-command")[0] == 1


def test_reports_are_deterministic(capsys, tmp_path):
    texts = []
    for k, workers in enumerate((1, 4)):
        rep = tmp_path / f"r{k}.rep"
        run(capsys, "certify-switches", "--system", DATA / "insulin.sys", "--i1", 1, "--caps", "t2=6,t3=3",
            "--workers", workers, "--report", rep)
        texts.append((rep.read_text(), rep.with_suffix(".csv").read_text()))
    assert texts[0] == texts[1]
    outs = []
    for k in range(2):
        out = tmp_path / f"s{k}.csv"
        run(capsys, "simulate", "--system", DATA / "insulin.sys", "--random", 50, "--seed", 7, "--out", out)
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def test_console_script_and_thread_env(tmp_path):
    env = dict(os.environ, CLS_THREADS="2")
    r = subprocess.run([sys.executable, "-m", "conecert.cli", "certify-switches", "--system",
                        str(DATA / "second_order.sys")], capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "verdict Certified" in r.stdout
