import json
import subprocess
import sys

import pytest

from codebooknet.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_table1(capsys):
    code, out = run(capsys, "table1")
    assert code == 0
    assert "32,505,856" in out.out and "54,525,952" in out.out and "3,072" in out.out
    code, out = run(capsys, "table1", "--json")
    rows = {r["code"]: r for r in json.loads(out.out)}
    assert rows["hamming74"]["slnn_edges"] == 56
    assert rows["polar168"]["mlnn_edges"] == 3072


def test_codebook_stats(capsys):
    _, out = run(capsys, "codebook", "stats", "--code", "hamming74")
    assert json.loads(out.out)["weight_sum"] == 56
    _, out = run(capsys, "codebook", "stats", "--code", "polar168")
    assert json.loads(out.out)["frozen_set"] == [0, 1, 2, 3, 4, 5, 6, 8]
    _, out = run(capsys, "codebook", "stats", "--code", "bch3121")
    assert json.loads(out.out)["dmin"] == 5


def test_codebook_dump(capsys):
    _, out = run(capsys, "codebook", "dump", "--code", "hamming74")
    lines = out.out.splitlines()
    assert len(lines) == 16
    assert lines[1] == "2 0001 0001111"


def test_net_describe(capsys):
    code, out = run(capsys, "net", "describe", "--code", "polar168", "--arch", "mlnn", "--alpha", "fixed@4")
    d = json.loads(out.out)
    assert code == 0 and d["total_edges"] == 3072 and d["alpha_mode"].startswith("fixed")


def test_usage_errors(capsys):
    code, out = run(capsys, "codebook", "stats", "--code", "golay")
    assert code == 2 and "--code" in out.err
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--frobnicate"])
    assert exc.value.code == 2
    assert "--frobnicate" in capsys.readouterr().err
    code, out = run(capsys, "simulate", "--code", "hamming74", "--decoders", "ml", "--ebn0", "1:x:3")
    assert code == 2 and "--ebn0" in out.err
    code, out = run(capsys, "net", "describe", "--code", "hamming74", "--arch", "mlnn", "--alpha", "loose")
    assert code == 2 and "--alpha" in out.err


def test_decode(capsys, tmp_path):
    f = tmp_path / "r.txt"
    f.write_text("0.9 -1.1 0.2 1.0 -0.8 -1 1\n-1 -1 -1 -1 -1 -1 0.1\n")
    code, out = run(capsys, "decode", "--code", "hamming74", "--decoder", "map", "--sigma", "0.8", str(f))
    recs = [json.loads(line) for line in out.out.splitlines()]
    assert code == 0
    assert recs[0] == {"decoder": "map", "message_bits": "1001", "codeword_bits": "1001001", "flags": {"bdd_failure": False}}
    assert recs[1]["message_bits"] == "0000"
    code, out = run(capsys, "decode", "--code", "hamming74", "--decoder", "map", str(f))
    assert code == 2


def test_decode_bdd_failure_flag(capsys, tmp_path):
    f = tmp_path / "r.txt"
    # three sign errors against the all-zero BCH codeword
    f.write_text(" ".join(["1"] * 3 + ["-1"] * 28) + "\n")
    code, out = run(capsys, "decode", "--code", "bch3121", "--decoder", "bdd", str(f))
    rec = json.loads(out.out)
    assert code == 0
    assert rec["flags"]["bdd_failure"] or rec["codeword_bits"] != "0" * 31


def test_simulate_rerun_from_manifest(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    code, _ = run(capsys, "simulate", "--code", "hamming74", "--decoders", "ml,bdd", "--ebn0", "0:2:4",
                  "--max-frames", "20000", "--seed", "5", "--workers", "1", "--out", str(a))
    assert code == 0
    code, _ = run(capsys, "simulate", "--config", str(a / "manifest.json"), "--out", str(b))
    assert code == 0
    for name in ("hamming74_ml.dat", "hamming74_bdd.dat"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_config_file_and_override(capsys, tmp_path):
    conf = tmp_path / "sim.txt"
    conf.write_text("code=hamming74\ndecoders=ml\nebn0=2:1:2\nmax_frames=5000\nmin_errors=1\nseed=3\n")
    code, out = run(capsys, "simulate", "--config", str(conf), "--seed", "4", "--workers", "1", "--out", str(tmp_path / "o"))
    assert code == 0
    lines = out.out.splitlines()
    assert len(lines) == 2 and lines[1].startswith("ml 2 ")
    text = (tmp_path / "o" / "config.txt").read_text()
    assert "seed=4" in text
    conf.write_text("colour=blue\n")
    code, out = run(capsys, "simulate", "--config", str(conf))
    assert code == 2 and "colour" in out.err


def test_verify(capsys, tmp_path):
    code, out = run(capsys, "verify", "--code", "hamming74", "--trials", "500")
    assert code == 0 and "FAIL" not in out.out
    g = tmp_path / "g.txt"
    g.write_text("1000110\n0100101\n0010011\n0001111\n")
    code, _ = run(capsys, "verify", "--code", "hamming74", "--generator", str(g), "--trials", "200")
    assert code == 0
    g.write_text("1000110\n0100101\n0010011\n0001011\n")
    code, out = run(capsys, "verify", "--code", "hamming74", "--generator", str(g), "--trials", "200")
    assert code == 1 and "FAIL" in out.out
    g.write_text("1000110\n0100101\n1100011\n")
    code, _ = run(capsys, "verify", "--generator", str(g))
    assert code == 1


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "codebooknet.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "0.1.0"
