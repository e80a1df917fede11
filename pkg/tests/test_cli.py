import csv
import io
import subprocess
import sys

import pytest

from synclab import cli


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, out=buf)
    return code, buf.getvalue()


def test_spectrum_ok():
    code, text = run(["spectrum", "--n", "3"])
    assert code == 0
    assert "spectrum: PASS" in text
    assert "energy block dims: 1 2 3 2 1" in text


@pytest.mark.parametrize(
    "argv,msg",
    [
        (["spectrum", "--n", "1"], "n must be >= 2"),
        (["bounds", "--n", "3", "--povm-points", "4"], "povm-points"),
        (["discord", "--restarts", "0"], "restarts"),
        (["sweep", "--n-min", "4", "--n-max", "3"], "n-min"),
        (["protocol", "--threads", "0"], "threads"),
        (["protocol", "--seed", "-1"], "seed"),
    ],
)
def test_invalid_config_exit_2(argv, msg, capsys):
    code, _ = run(argv)
    assert code == 2
    assert msg in capsys.readouterr().err


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("SYNCLAB_THREADS", "many")
    assert run(["protocol"])[0] == 2
    assert "SYNCLAB_THREADS" in capsys.readouterr().err


def test_thread_env_is_read(monkeypatch):
    monkeypatch.setenv("SYNCLAB_THREADS", "2")
    args = cli.build_parser().parse_args(["protocol"])
    assert cli.config_from_args(args).threads == 2
    args = cli.build_parser().parse_args(["protocol", "--threads", "3"])
    assert cli.config_from_args(args).threads == 3


def test_protocol_output():
    code, text = run(["protocol", "--n", "2"])
    assert code == 0
    assert "dS: 1.039721" in text
    assert "FAIL" not in text


def test_bounds_output():
    code, text = run(["bounds", "--n", "2"])
    assert code == 0
    assert "theorem1: HOLDS" in text
    assert "lemma1: N/A (dt > T/12)" in text


def test_bounds_product_control():
    code, text = run(["bounds", "--n", "3", "--control-product"])
    assert code == 0
    assert "lemma1: N/A (dt > T/12)" in text
    assert "derivative_norm: 0" in text


def test_discord_output_deterministic():
    argv = ["discord", "--n", "2", "--restarts", "3", "--seed", "11"]
    first, second = run(argv), run(argv + ["--threads", "2"])
    assert first[0] == 0
    assert first[1] == second[1]
    assert "theorem2: HOLDS" in first[1]


def test_sweep_stdout_schema():
    code, text = run(["sweep", "--n-min", "2", "--n-max", "3", "--restarts", "2"])
    assert code == 0
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == cli.CSV_FIELDS
    assert [r["n"] for r in rows] == ["2", "3"]
    assert rows[0]["povm_points"] == "24"
    for r in rows:
        assert r["t1_holds"] == "true" and r["t2_holds"] == "true"
        assert float(r["t1_margin"]) >= 0


def test_sweep_file_and_thread_invariance(tmp_path):
    paths = []
    for threads in ("1", "3"):
        path = tmp_path / f"sweep{threads}.csv"
        code, text = run(["sweep", "--n-min", "2", "--n-max", "4", "--restarts", "2", "--seed", "5",
                          "--threads", threads, "--out", str(path)])
        assert code == 0
        assert "wrote 3 rows" in text
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_unwritable_exit_3(capsys):
    code, _ = run(["sweep", "--n-min", "2", "--n-max", "2", "--restarts", "1",
                   "--out", "/nonexistent/dir/x.csv"])
    assert code == 3
    assert "cannot write" in capsys.readouterr().err


def test_selftest():
    code, text = run(["selftest"])
    assert code == 0
    assert "qmat: 5/5 suites PASS" in text
    assert "FAIL" not in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "synclab", "spectrum", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "spectrum: PASS" in proc.stdout


def test_missing_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
