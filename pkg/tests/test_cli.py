import csv
import json

import pytest

from rspir.cli import main
from rspir.galois import GF
from rspir.storage import FileMatrix, save_files


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


def test_retrieve_small_preset(tmp_path):
    code, out = run(["retrieve", "--preset", "small", "--seed", "3"], tmp_path)
    assert code == 0
    rec = json.loads((out / "retrieve.json").read_text())
    assert rec["success"] is True and rec["rate"] == "1/4"
    assert rec["derived"] == {"rho": 2, "L": 1, "S": 2, "rate": "1/4"}


def test_retrieve_from_config_and_files(tmp_path):
    F = GF(65537)
    files = [FileMatrix(F, ((1, 2, 3, 4),)), FileMatrix(F, ((5, 6, 7, 8),))]
    save_files(tmp_path / "files.txt", files)
    cfg = {
        "params": {"n": 9, "k": 4, "t": 1, "b": 1, "r": 1},
        "files": str(tmp_path / "files.txt"),
        "file_index": 2,
        "symmetric": True,
        "keep_transcript": True,
        "adversary": {"strategy": "fixed-value", "placement": "fixed-sets",
                      "byzantine_sets": [[3]], "unresponsive_sets": [[7]], "fixed_value": 1},
    }
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, out = run(["retrieve", "--config", str(tmp_path / "cfg.json")], tmp_path)
    assert code == 0
    rec = json.loads((out / "retrieve.json").read_text())
    assert rec["retrieved"] == [[5, 6, 7, 8]]
    assert rec["transcript"][0]["responses"][6] is None


def test_retrieve_over_budget_reports_failure(tmp_path):
    cfg = {"adversary": {"b": 3, "r": 1, "strategy": "add-uniform-nonzero"}}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, out = run(["retrieve", "--config", str(tmp_path / "cfg.json")], tmp_path)
    assert code == 1
    assert json.loads((out / "retrieve.json").read_text())["success"] is False


def test_infeasible_and_malformed(tmp_path, capsys):
    code, _ = run(["retrieve", "--n", "8"], tmp_path)
    assert code == 0  # n = 8 > 7 is feasible
    code, _ = run(["retrieve", "--n", "7"], tmp_path)
    assert code == 3
    assert "n > k + t + 2b + r - 1" in capsys.readouterr().err
    (tmp_path / "bad.json").write_text('{"nonsense": 1}')
    with pytest.raises(SystemExit) as exc:
        main(["retrieve", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path)])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_rates_figure(tmp_path):
    code, out = run(["rates", "--figure", "--m-max", "100"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader((out / "rates.csv").open()))
    assert len(rows) == 400
    assert {r["scheme"] for r in rows} == {"rs-pir", "zg-byzantine", "zg-unresponsive"}


def test_rates_single_point(tmp_path):
    code, out = run(["rates", "--n", "12", "--k", "2", "--t", "3", "--b", "0", "--r", "2"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader((out / "rates.csv").open()))
    assert [(r["scheme"], r["rate"]) for r in rows] == [("rs-pir", "3/5"), ("zg-unresponsive", "3/11")]


def test_sweep_grid_config(tmp_path):
    cfg = {"grid": [[9, 4, 1, 1, 1, 2], [7, 4, 1, 1, 1, 2]], "trials": 1}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, out = run(["sweep", "--config", str(tmp_path / "cfg.json"), "--exhaustive"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert rows[0]["runs"] == rows[0]["successes"] == "72"
    assert rows[1]["feasible"] == "False"


def test_audits(tmp_path):
    tiny = ["--n", "3", "--k", "1", "--t", "1", "--b", "0", "--r", "0", "--M", "2"]
    code, out = run(["audit-privacy", *tiny], tmp_path)
    assert code == 0
    verdicts = json.loads((out / "audit_privacy.json").read_text())
    assert len(verdicts) == 3 and all(v["passed"] for v in verdicts)
    assert run(["audit-privacy", *tiny, "--mutate"], tmp_path)[0] == 1
    assert run(["audit-symmetry", *tiny], tmp_path)[0] == 0
    assert run(["audit-symmetry", *tiny, "--no-mask"], tmp_path)[0] == 1


def test_selftest(tmp_path):
    code, out = run(["selftest"], tmp_path)
    assert code == 0
    checks = json.loads((out / "selftest.json").read_text())
    assert checks["small_preset_exhaustive"]["runs"] == 2 * 72 * 2


@pytest.mark.parametrize("args", [
    ["retrieve", "--preset", "medium", "--symmetric", "--transcript"],
    ["sweep", "--trials", "3"],
    ["audit-privacy", "--n", "3", "--k", "1", "--t", "1", "--b", "0", "--r", "0"],
    ["rates", "--figure", "--m-max", "20"],
])
def test_byte_identical_artifacts(tmp_path, args):
    _, a = run(args + ["--seed", "7"], tmp_path, "a")
    _, b = run(args + ["--seed", "7"], tmp_path, "b")
    files_a = sorted(p.name for p in a.iterdir())
    assert files_a == sorted(p.name for p in b.iterdir()) and files_a
    for name in files_a:
        assert (a / name).read_bytes() == (b / name).read_bytes()
