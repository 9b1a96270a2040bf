import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from spatialkir import __version__
from spatialkir.cli import main, round_sig
from spatialkir.lattice import read_field_csv

SCHEMA = json.loads(resources.files("spatialkir").joinpath("data/report_schema.json").read_text())


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--kind", "moving-average", "--dims", "24x24", "--seed", "3",
                 "--out", str(d / "field.csv")]) == 0
    (d / "targets.csv").write_text("i1,i2\n5,5\n12,13\n20,7\n")
    rng = np.random.default_rng(0)
    x = rng.normal(size=(400, 3))
    y = x[:, 0] + 0.3 * rng.normal(size=400)
    np.savetxt(d / "data.csv", np.c_[x, y], delimiter=",", header="x1,x2,x3,y", comments="")
    (d / "fast.cfg").write_text("bench.oracle = closed\nmodel.dims = 20x20\n")
    return d


def commands(d):
    cfg = str(d / "fast.cfg")
    return {
        "simulate": ["simulate", "--kind", "gaussian-decay", "--dims", "10x12", "--seed", "7"],
        "simulate-json": ["simulate", "--dims", "5x5", "--format", "json"],
        "sir-fit": ["sir-fit", "--data", str(d / "data.csv")],
        "sir-fit-csv": ["sir-fit", "--data", str(d / "data.csv"), "--format", "csv", "--D", "2"],
        "rate-bench": ["rate-bench", "--config", cfg, "--sizes", "100,196,400", "--replicates", "5"],
        "rate-bench-csv": ["rate-bench", "--config", cfg, "--sizes", "100,196,400",
                           "--replicates", "5", "--format", "csv"],
        "clt-check": ["clt-check", "--config", cfg, "--size", "100", "--replicates", "100"],
        "edr-sweep": ["edr-sweep", "--sizes", "400", "--seeds", "3", "--seed", "11"],
        "predict": ["predict", "--field", str(d / "field.csv"), "--targets",
                    str(d / "targets.csv"), "--d", "4"],
        "predict-json": ["predict", "--field", str(d / "field.csv"), "--targets",
                         str(d / "targets.csv"), "--d", "4", "--format", "json"],
        "neighbor-scan": ["neighbor-scan", "--field", str(d / "field.csv")],
    }


NAMES = ["simulate", "simulate-json", "sir-fit", "sir-fit-csv", "rate-bench", "rate-bench-csv",
         "clt-check", "edr-sweep", "predict", "predict-json", "neighbor-scan"]


@pytest.mark.parametrize("name", NAMES)
def test_bit_identical_reruns(workdir, name):
    cmds = commands(workdir)
    assert sorted(cmds) == sorted(NAMES)
    argv = cmds[name]
    outs = []
    for run in range(2):
        out = workdir / f"{name}.{run}"
        assert main(argv + ["--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] and outs[0]
    if not name.endswith("csv") and name not in ("simulate", "predict"):
        report = json.loads(outs[0])
        jsonschema.validate(report, SCHEMA)
        assert report["version"] == __version__ and report["command"] == argv[0]


def test_seed_changes_output(workdir):
    a, b = workdir / "s1.csv", workdir / "s2.csv"
    main(["simulate", "--dims", "6x6", "--seed", "1", "--out", str(a)])
    main(["simulate", "--dims", "6x6", "--seed", "2", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_simulate_csv_format(workdir):
    fld = read_field_csv(workdir / "field.csv")
    assert fld.region.dims == (24, 24)
    assert (workdir / "field.csv").read_text().splitlines()[0] == "i1,i2,value"


def test_predict_csv_layout(workdir):
    out = workdir / "pred.csv"
    main(commands(workdir)["predict"] + ["--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "i1,i2,prediction"
    assert [ln.split(",")[:2] for ln in lines[1:]] == [["5", "5"], ["12", "13"], ["20", "7"]]


def test_sir_fit_report(workdir):
    out = workdir / "fit.json"
    main(["sir-fit", "--data", str(workdir / "data.csv"), "--out", str(out)])
    rep = json.loads(out.read_text())
    assert rep["D"] == 1 and rep["ridge"] == 0
    assert abs(rep["directions"][0][0]) > 0.9 * np.linalg.norm(rep["directions"][0])
    assert rep["eigenvalues"] == sorted(rep["eigenvalues"], reverse=True)
    assert rep["config"]["kernel.id"] == "epanechnikov"


def test_exit_codes(workdir, capsys):
    bad_cfg = workdir / "bad.cfg"
    bad_cfg.write_text("nonsense.key = 1\n")
    assert main(["simulate", "--dims", "4x4", "--config", str(bad_cfg)]) == 2
    assert main(["simulate", "--dims", "0x4"]) == 2
    assert main(["neighbor-scan", "--field", str(workdir / "missing.csv")]) == 2
    assert main(["rate-bench", "--sizes", "400", "--replicates", "5"]) == 2
    flat = workdir / "flat.csv"
    flat.write_text("i1,i2,value\n" + "".join(f"{i},{j},1.0\n" for i in range(1, 9)
                                            for j in range(1, 9)))
    (workdir / "t1.csv").write_text("i1,i2\n4,4\n")
    assert main(["predict", "--field", str(flat), "--targets", str(workdir / "t1.csv"),
                 "--d", "4"]) == 3
    assert "error" in capsys.readouterr().err


def test_round_sig():
    assert round_sig(1 / 3) == 0.333333333333
    assert round_sig({"a": [np.float64(2 / 3), 1, "x"]}) == {"a": [0.666666666667, 1, "x"]}


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "spatialkir.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == __version__
