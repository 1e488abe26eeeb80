import shutil
import subprocess

import pytest

from bwrefine.cli import (EXIT_EXCEEDS, EXIT_GUARD, EXIT_INVALID, EXIT_OK, RunConfig, main,
                          parse_graph_text)
from bwrefine.errors import InvalidGraph, ParseError

K4 = "1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n"
C5 = "# five-cycle\n1 2\n2 3\n3 4\n4 5\n5 1\n"


def _file(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_graph_text():
    g = parse_graph_text(C5)
    assert g.n == 5 and len(g.edges) == 5
    assert g.labels[0] == "1"


def test_parse_errors_report_line():
    with pytest.raises(ParseError) as ei:
        parse_graph_text("1 2\n2 x\n")
    assert ei.value.line_no == 2
    with pytest.raises(ParseError):
        parse_graph_text("1 2 3\n")
    with pytest.raises(ParseError):
        parse_graph_text("0 1\n")
    with pytest.raises(InvalidGraph):
        parse_graph_text("1 1\n")


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("treewidth", "x")
    with pytest.raises(ValueError):
        RunConfig("rankwidth", "x", target_k=-1)


def test_compute_and_verify_branchwidth(tmp_path, capsys):
    g = _file(tmp_path, "k4.txt", K4)
    out = str(tmp_path / "k4.dec")
    assert main(["compute", "--mode", "branchwidth", "--input", g, "--output", out]) == EXIT_OK
    line = capsys.readouterr().out.strip().splitlines()[-1]
    w = int(line.split()[0].split("=")[1])
    assert 3 <= w <= 6 and line.endswith("two_approx=true")
    assert main(["verify", "--mode", "branchwidth", "--input", g, out]) == EXIT_OK
    assert capsys.readouterr().out.strip() == f"valid width={w}"


def test_compute_rankwidth_with_trace_and_reps(tmp_path, capsys):
    g = _file(tmp_path, "c5.txt", C5)
    out, tr, reps = (str(tmp_path / n) for n in ("c5.dec", "c5.trace", "c5.reps"))
    code = main(["compute", "--mode", "rankwidth", "--input", g, "--output", out,
                 "--target-k", "2", "--assert", "--trace", tr, "--dump-reps", reps])
    assert code == EXIT_OK
    assert "width=2" in capsys.readouterr().out
    for line in open(reps):
        assert line.startswith("rep ")
    assert main(["verify", "--mode", "rankwidth", "--input", g, out]) == EXIT_OK


def test_c5_target_one_and_zero(tmp_path, capsys):
    g = _file(tmp_path, "c5.txt", C5)
    assert main(["compute", "--mode", "rankwidth", "--input", g, "--target-k", "1",
                 "--output", str(tmp_path / "o")]) == EXIT_OK
    capsys.readouterr()
    assert main(["compute", "--mode", "rankwidth", "--input", g, "--target-k", "0"]) == EXIT_EXCEEDS
    assert capsys.readouterr().out.startswith("exceeds_k k=0 width=")


def test_negative_target(tmp_path):
    g = _file(tmp_path, "c5.txt", C5)
    assert main(["compute", "--mode", "rankwidth", "--input", g, "--target-k", "-1"]) == EXIT_INVALID


def test_cap_guard(tmp_path):
    # any graph with an edge needs width 1 > cap 0
    g = _file(tmp_path, "k33.txt", "1 4\n1 5\n1 6\n2 4\n2 5\n2 6\n3 4\n3 5\n3 6\n4 7\n7 8\n8 9\n9 1\n")
    assert main(["compute", "--mode", "rankwidth", "--input", g, "--cap", "0"]) == EXIT_GUARD


def test_verify_rejects_bad_files(tmp_path, capsys):
    g = _file(tmp_path, "k4.txt", K4)
    out = str(tmp_path / "k4.dec")
    main(["compute", "--mode", "branchwidth", "--input", g, "--output", out])
    text = open(out).read()
    bad = _file(tmp_path, "bad.dec", text.replace(" 1-2\n", " 9-9\n", 1))
    capsys.readouterr()
    assert main(["verify", "--mode", "branchwidth", "--input", g, bad]) == EXIT_INVALID
    assert capsys.readouterr().out.startswith("invalid")
    wrong_mode = _file(tmp_path, "m.dec", text.replace("decomp branchwidth", "decomp rankwidth"))
    assert main(["verify", "--mode", "branchwidth", "--input", g, wrong_mode]) == EXIT_INVALID


def test_oracle_guard_and_result(tmp_path, capsys):
    g = _file(tmp_path, "c5.txt", C5)
    assert main(["oracle", "--mode", "rankwidth", "--input", g, "--output", str(tmp_path / "w")]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "width=2"
    big = _file(tmp_path, "p10.txt", "".join(f"{i} {i + 1}\n" for i in range(1, 10)))
    assert main(["oracle", "--mode", "rankwidth", "--input", big]) == EXIT_GUARD
    assert main(["oracle", "--mode", "rankwidth", "--input", g, "--max-elements", "4"]) == EXIT_GUARD


def test_invalid_input_exit_code(tmp_path):
    g = _file(tmp_path, "loop.txt", "1 1\n")
    assert main(["compute", "--mode", "branchwidth", "--input", g]) == EXIT_INVALID
    assert main(["compute", "--mode", "branchwidth", "--input", str(tmp_path / "missing")]) == EXIT_INVALID


@pytest.mark.skipif(shutil.which("bwrefine") is None, reason="console script not installed")
def test_console_script(tmp_path):
    g = _file(tmp_path, "k4.txt", K4)
    res = subprocess.run(["bwrefine", "oracle", "--mode", "branchwidth", "--input", g,
                          "--output", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "width=3"
