import csv

import pytest

from thresholdbits.cli import main, read_config
from thresholdbits.errors import ConfigError
from thresholdbits.pipeline import TrainedModel


@pytest.fixture(scope="module")
def syn(tmp_path_factory):
    d = tmp_path_factory.mktemp("syn")
    assert main(["gen-synthetic", "--m", "600", "--n", "60", "--defect-rate", "0.1",
                 "--out", str(d / "syn.csv"), "--truth-out", str(d / "truth.csv")]) == 0
    return d / "syn.csv"


def data_args(path):
    return ["--input", str(path), "--id-col", "id", "--label-col", "label"]


def test_ingest_check(syn, capsys):
    assert main(["ingest-check", *data_args(syn)]) == 0
    out = capsys.readouterr().out
    assert "objects    600" in out and "positives  60" in out


def test_train_evaluate_predict(syn, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", *data_args(syn), "--p", "10", "--model-out", str(model),
                 "--curve-out", str(tmp_path / "curve.csv"), "--report-out", str(tmp_path / "r.csv")]) == 0
    trained = capsys.readouterr().out
    assert TrainedModel.load(model).train_ids.size == 6
    assert (tmp_path / "curve.csv").read_text().startswith("C,Q\n")
    assert main(["evaluate", *data_args(syn), "--model", str(model)]) == 0
    evaluated = capsys.readouterr().out
    assert trained.splitlines()[1:] == evaluated.splitlines()
    # predict reads no label column, so a labelled file has one column too many
    assert main(["predict", "--input", str(syn), "--id-col", "id", "--model", str(model),
                 "--out", str(tmp_path / "p.csv")]) == 1


def test_predict_on_unlabelled_file(syn, tmp_path):
    rows = list(csv.reader(open(syn)))
    unl = tmp_path / "unl.csv"
    with open(unl, "w", newline="") as fh:
        csv.writer(fh).writerows([r[:1] + r[2:] for r in rows])
    model = tmp_path / "m.json"
    assert main(["train", *data_args(syn), "--p", "10", "--model-out", str(model)]) == 0
    assert main(["predict", "--input", str(unl), "--id-col", "id", "--model", str(model),
                 "--out", str(tmp_path / "p.csv")]) == 0
    pred = list(csv.DictReader(open(tmp_path / "p.csv")))
    assert len(pred) == 600 - 6
    assert set(pred[0]) == {"id", "score", "prediction", "winner"}


def test_cutoff_choices(syn, tmp_path):
    for cut in ("naive", "grid", "refined"):
        assert main(["train", *data_args(syn), "--p", "10", "--cutoff", cut,
                     "--model-out", str(tmp_path / f"{cut}.json")]) == 0
    assert main(["train", *data_args(syn), "--cutoff", "naive", "--model-out", str(tmp_path / "x.json"),
                 "--curve-out", str(tmp_path / "c.csv")]) == 2


def test_identify_and_prolog(syn, tmp_path, capsys):
    assert main(["identify", *data_args(syn), "--out", str(tmp_path / "i.csv")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "i.csv")))
    assert len(rows) == 540 and set(rows[0]) == {"id", "positive", "witness"}
    assert main(["prolog-gen", *data_args(syn), "--query-id", "3", "--out", str(tmp_path / "q.pl")]) == 0
    text = (tmp_path / "q.pl").read_text()
    assert text.startswith("% implication system:") and "defect(X) :- is_high(" in text
    assert main(["prolog-gen", *data_args(syn), "--query-id", "99999", "--out", str(tmp_path / "q.pl")]) == 1


def test_histogram(syn, capsys):
    assert main(["histogram", *data_args(syn), "--p", "10"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["y", "H(y)%", "n(y)"]
    assert sum(int(line.split()[2]) for line in out[1:-1]) == 54


def test_scale_and_reduce(syn, tmp_path, capsys):
    assert main(["scale", *data_args(syn), "--out", str(tmp_path / "s.csv"),
                 "--params-out", str(tmp_path / "p.csv")]) == 0
    assert main(["reduce", *data_args(syn), "--reduce-sharpness", "2", "--out", str(tmp_path / "r.csv"),
                 "--plan-out", str(tmp_path / "plan.csv")]) == 0
    assert "omitted" in capsys.readouterr().out
    assert len((tmp_path / "plan.csv").read_text().splitlines()) == 61


def test_sweep_and_plot(syn, tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", *data_args(syn), "--p", "10", "--t-values", "0.3:0.9:0.3", "--seeds", "1..2",
                 "--out-dir", str(out)]) == 0
    assert len((out / "summary.csv").read_text().splitlines()) == 7
    assert main(["plot", "--curve", str(out / "curves" / "kappa_qavg_vs_t_p10.csv")]) == 0
    assert (out / "curves" / "kappa_qavg_vs_t_p10.svg").read_text().count("<polyline") == 2


def test_iris_csv(tmp_path):
    assert main(["iris-csv", "--species", "setosa", "--out", str(tmp_path / "iris.csv")]) == 0
    assert len((tmp_path / "iris.csv").read_text().splitlines()) == 151


def test_outputs_repeat_byte_for_byte(syn, tmp_path):
    for name in ("a", "b"):
        assert main(["train", *data_args(syn), "--p", "10", "--cutoff", "refined",
                     "--model-out", str(tmp_path / f"{name}.json"),
                     "--report-out", str(tmp_path / f"{name}.csv")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_exit_codes(syn, tmp_path):
    assert main(["ingest-check", "--input", str(tmp_path / "missing.csv")]) == 1
    assert main(["ingest-check", "--input", str(syn)]) == 1  # label column 0 is the id
    assert main(["train", *data_args(syn), "--p", "0", "--model-out", str(tmp_path / "m.json")]) == 2
    with pytest.raises(SystemExit) as err:
        main(["train", "--bogus"])
    assert err.value.code == 2


def test_config_precedence(syn, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\n[run]\np = 20\nseed = 3\npredicate = 't'\nt = 0.4\n")
    assert main(["train", *data_args(syn), "--config", str(cfg), "--model-out", str(tmp_path / "a.json")]) == 0
    a = TrainedModel.load(tmp_path / "a.json")
    assert a.train_ids.size == 12 and a.predicate.kind == "t_excess" and a.predicate.t == 0.4
    assert main(["train", *data_args(syn), "--config", str(cfg), "--p", "10",
                 "--model-out", str(tmp_path / "b.json")]) == 0
    assert TrainedModel.load(tmp_path / "b.json").train_ids.size == 6


def test_config_errors(syn, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    cfg.write_text("p = lots\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    cfg.write_text("predicate = squiggle\n")
    assert main(["identify", *data_args(syn), "--config", str(cfg)]) == 2
