import csv
import json
import math

import pytest

from rnw.cli import main


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "-o", str(out)])
    return code, out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_build_massless_centre_value(tmp_path):
    code, out = run(tmp_path, "build", "--family", "massless-even", "--nu", "0.5", "--N", "1024")
    assert code == 0
    table = rows(out)
    assert table[0] == ["x", "eig", "V"] and len(table) == 1025
    centre = table[1 + 512]
    assert float(centre[0]) == 0 and float(centre[2]) == pytest.approx(-2 / math.pi, rel=1e-15)
    meta = json.loads((tmp_path / "out.json").read_text())
    assert meta["family"] == "massless-even"


def test_build_massive_small_grid_is_deterministic(tmp_path):
    argv = ("build", "--family", "massive-nw", "--mass", "146", "--pi-periods", "32", "--N", "16384")
    code, first = run(tmp_path, *argv, name="a.csv")
    assert code == 0
    _, second = run(tmp_path, *argv, name="b.csv")
    assert first.read_bytes() == second.read_bytes()
    table = rows(first)
    assert table[0] == ["x", "g", "h", "f", "u", "V", "imV"] and len(table) == 16385
    assert all(v == format(float(v), ".17g") for v in table[100])


def test_build_uncertified(tmp_path):
    code, _ = run(tmp_path, "build", "--family", "massive-nw", "--mass", "100", "--pi-periods", "32",
                  "--N", "4096")
    assert code == 3
    code, out = run(tmp_path, "build", "--family", "massive-nw", "--mass", "100", "--pi-periods", "32",
                    "--N", "4096", "--allow-uncertified")
    assert code == 0
    assert json.loads((tmp_path / "out.json").read_text())["certified"] is False


def test_usage_errors(tmp_path):
    assert run(tmp_path, "verify", "--family", "massless-odd", "--nu", "2.5")[0] == 2
    assert run(tmp_path, "decay-fit", "--family", "massless-odd", "--nu", "1", "--window", "400:50")[0] == 2
    assert run(tmp_path, "build", "--family", "massive-nw", "--nu", "1")[0] == 2
    assert run(tmp_path, "build", "--family", "massless-even", "--nu", "0.5", "--N", "1000")[0] == 2
    assert main(["no-such-command"]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "massless-even", "nu": 0.75}))
    code, out = run(tmp_path, "decay-fit", "--config", str(cfg))
    assert code == 0 and float(rows(out)[1][3]) == pytest.approx(-0.5, abs=0.1)
    code, out = run(tmp_path, "decay-fit", "--config", str(cfg), "--nu", "0.3")
    assert code == 0 and float(rows(out)[1][3]) == pytest.approx(-1, abs=0.1)
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert run(tmp_path, "decay-fit", "--config", str(cfg))[0] == 2


def test_decay_fit_on_build_output(tmp_path):
    code, built = run(tmp_path, "build", "--family", "massive-nw", "--mass", "146", name="m.csv")
    assert code == 0
    code, out = run(tmp_path, "decay-fit", "--input", str(built))
    assert code == 0
    assert rows(out)[0] == ["window_min", "window_max", "model", "exponent", "log_coeff", "residual"]
    assert float(rows(out)[1][3]) == pytest.approx(-1, abs=0.1)


def test_verify_massive(tmp_path):
    code, out = run(tmp_path, "verify", "--family", "massive-nw", "--mass", "146", name="r.json")
    assert code == 0
    assert json.loads(out.read_text())["verdict"]["status"] == "pass"


def test_verify_moses_tuan_reports_the_failing_constant(tmp_path):
    code, out = run(tmp_path, "verify", "--family", "moses-tuan", "--mass", "40", name="r.json")
    assert code == 1
    assert json.loads(out.read_text())["verdict"]["failing"] == ["Lemma-lubound-d3"]


def test_verify_classical(tmp_path):
    assert run(tmp_path, "verify", "--family", "classical-nw3d", name="r.json")[0] == 0


def test_bounds(tmp_path):
    code, out = run(tmp_path, "bounds", "--family", "massive-nw", "--mass", "146")
    assert code == 0
    table = rows(out)
    assert table[0] == ["id", "margin", "passed"] and len(table) == 18
    assert all(r[2] == "true" for r in table[1:])


def test_limit_scan(tmp_path):
    code, out = run(tmp_path, "limit-scan", "--mass", "1")
    assert code == 0
    table = rows(out)
    assert table[0] == ["c", "e0", "e1", "e2", "lambda_err", "V_err"] and len(table) == 6
    e0 = [float(r[1]) for r in table[1:]]
    assert all(a > b for a, b in zip(e0, e0[1:]))
    summary = json.loads((tmp_path / "out.json").read_text())
    assert -2.4 <= summary["rate"] <= -1.6
    assert run(tmp_path, "limit-scan", "--mass", "1", "--c", "100,200")[0] == 3


def test_coupling_scan(tmp_path):
    code, out = run(tmp_path, "coupling-scan", "--nu", "0.75", "--couplings", "0,0.5,1,1.5,2")
    assert code == 0
    table = rows(out)
    assert table[0] == ["lambda", "e0_estimate"]
    e0 = [float(r[1]) for r in table[1:]]
    assert all(a >= b for a, b in zip(e0, e0[1:]))
