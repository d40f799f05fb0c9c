import json

import numpy as np
import pytest

import netinfer as ni
from netinfer.cli import main


def _chain_config(tmp_path, n=600, seed=11, eps=0.4, name="config.json"):
    doc = {
        "names": ["V1", "V2", "V3"],
        "edges": [["V1", "V2"], ["V2", "V3"]],
        "model": {"type": "coupled-logistic", "r": 4.0, "epsilon": eps},
        "process_noise_std": 1e-3,
        "obs_noise_std": 1e-3,
        "n": n,
        "burn_in": 200,
        "seed": seed,
    }
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _schema(name):
    import importlib.resources as resources
    return json.loads(
        resources.files("netinfer").joinpath(f"schemas/{name}").read_text())


# ---------------------------------------------------------------------------
# simulate

def test_simulate_shape_contract(tmp_path):
    cfg = _chain_config(tmp_path)
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out)]) == 0
    ts = ni.load_csv(out / "data.csv")
    assert ts.m == 3 and ts.n == 600
    dag, names = ni.dag_from_dot((out / "truth.dot").read_text())
    assert names == ["V1", "V2", "V3"]
    assert dag.n_edges == 2
    assert (out / "run_manifest.json").exists()


def test_simulate_invalid_epsilon_names_field(tmp_path, capsys):
    cfg = _chain_config(tmp_path, eps=1.5)
    code = main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "x")])
    assert code == 1
    assert "epsilon" in capsys.readouterr().err


def test_simulate_same_seed_byte_identical(tmp_path):
    cfg = _chain_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(b)]) == 0
    assert (a / "data.csv").read_bytes() == (b / "data.csv").read_bytes()
    assert (a / "truth.dot").read_bytes() == (b / "truth.dot").read_bytes()


def test_simulate_outputs_validate_against_schemas(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    cfg = _chain_config(tmp_path)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg), "--out-dir", str(out)])
    jsonschema.validate(json.loads((out / "config.json").read_text()),
                        _schema("sim_config.schema.json"))
    jsonschema.validate(json.loads((out / "run_manifest.json").read_text()),
                        _schema("run_manifest.schema.json"))


# ---------------------------------------------------------------------------
# score

@pytest.fixture()
def simulated(tmp_path):
    cfg = _chain_config(tmp_path, n=2000)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out)]) == 0
    return out


def _write_dot(path, m, edges, names=("V1", "V2", "V3")):
    path.write_text(ni.write_dot(ni.Dag.from_edges(m, edges), names[:m]))
    return path


def test_score_empty_graph_tee_zero(tmp_path, simulated, capsys):
    empty = _write_dot(tmp_path / "empty.dot", 3, [])
    report_path = tmp_path / "report.json"
    code = main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(empty), "--score", "tee", "--bins", "4",
                 "--surrogates", "19", "--out", str(report_path)])
    assert code == 0
    doc = json.loads(report_path.read_text())
    assert doc["total"] == 0.0
    assert "total = 0.000000" in capsys.readouterr().out


def test_score_chain_beats_empty(tmp_path, simulated):
    empty = _write_dot(tmp_path / "empty.dot", 3, [])
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    outs = {}
    for name, dot in (("empty", empty), ("chain", chain)):
        path = tmp_path / f"{name}.json"
        assert main(["score", "--data", str(simulated / "data.csv"),
                     "--graph", str(dot), "--score", "tee", "--bins", "4",
                     "--surrogates", "19", "--seed", "3",
                     "--out", str(path)]) == 0
        outs[name] = json.loads(path.read_text())
    assert outs["chain"]["total"] > outs["empty"]["total"]


def test_score_deterministic_json(tmp_path, simulated):
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    args = ["score", "--data", str(simulated / "data.csv"), "--graph",
            str(chain), "--score", "tee", "--bins", "4", "--surrogates", "19",
            "--seed", "5"]
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    a = json.loads(p1.read_text())
    b = json.loads(p2.read_text())
    a.pop("manifest"); b.pop("manifest")
    assert a == b


def test_score_vertex_name_mismatch(tmp_path, simulated, capsys):
    bad = tmp_path / "bad.dot"
    bad.write_text(ni.write_dot(ni.Dag.from_edges(2, [(0, 1)]), ["A", "B"]))
    code = main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(bad), "--score", "te", "--bins", "4"])
    assert code == 1
    assert "names do not match" in capsys.readouterr().err


def test_score_tea_box_kernel_rejected(tmp_path, simulated, capsys):
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    code = main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(chain), "--score", "tea",
                 "--estimator", "box-kernel"])
    assert code == 1
    assert "tee" in capsys.readouterr().err


def test_score_tea_linear_gaussian_allowed(tmp_path, simulated):
    # the analytic test is defined for linearly-coupled Gaussians too
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    path = tmp_path / "r.json"
    assert main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(chain), "--score", "tea",
                 "--estimator", "linear-gaussian", "--alpha", "0.9",
                 "--out", str(path)]) == 0
    doc = json.loads(path.read_text())
    assert doc["estimator"] == "linear-gaussian"


def test_score_ic_requires_discrete_estimator(tmp_path, simulated, capsys):
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    code = main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(chain), "--score", "bic",
                 "--estimator", "linear-gaussian"])
    assert code == 1
    assert "discrete" in capsys.readouterr().err


def test_score_discrete_needs_bins(tmp_path, simulated, capsys):
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    code = main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(chain), "--score", "te"])
    assert code == 1
    assert "--bins" in capsys.readouterr().err


def test_score_report_schema(tmp_path, simulated):
    jsonschema = pytest.importorskip("jsonschema")
    chain = _write_dot(tmp_path / "chain.dot", 3, [(0, 1), (1, 2)])
    path = tmp_path / "r.json"
    assert main(["score", "--data", str(simulated / "data.csv"),
                 "--graph", str(chain), "--score", "tea", "--bins", "4",
                 "--out", str(path)]) == 0
    jsonschema.validate(json.loads(path.read_text()),
                        _schema("score_report.schema.json"))


# ---------------------------------------------------------------------------
# infer

def test_infer_single_vertex_returns_empty_graph(tmp_path):
    rng = np.random.default_rng(0)
    data = tmp_path / "one.csv"
    ni.write_csv(ni.TimeSeriesSet.from_columns([rng.random(200)], ["only"]), data)
    out = tmp_path / "run"
    assert main(["infer", "--data", str(data), "--out-dir", str(out),
                 "--search", "exhaustive", "--score", "tee", "--bins", "4",
                 "--surrogates", "19"]) == 0
    dag, names = ni.dag_from_dot((out / "inferred.dot").read_text())
    assert names == ["only"]
    assert dag.n_edges == 0


def test_infer_exhaustive_recovers_chain(tmp_path, simulated):
    out = tmp_path / "run"
    assert main(["infer", "--data", str(simulated / "data.csv"),
                 "--out-dir", str(out), "--search", "exhaustive",
                 "--score", "tea", "--bins", "4"]) == 0
    inferred, _ = ni.dag_from_dot((out / "inferred.dot").read_text())
    truth, _ = ni.dag_from_dot((simulated / "truth.dot").read_text())
    assert inferred.edges() == truth.edges()


def test_infer_te_without_cap_warns_and_completes(tmp_path, simulated, capsys):
    out = tmp_path / "run"
    assert main(["infer", "--data", str(simulated / "data.csv"),
                 "--out-dir", str(out), "--search", "greedy",
                 "--score", "te", "--bins", "4"]) == 0
    err = capsys.readouterr().err
    assert "complete graph" in err
    inferred, _ = ni.dag_from_dot((out / "inferred.dot").read_text())
    assert inferred.n_edges == 3  # complete DAG on three vertices


def test_infer_outputs_validate_against_schemas(tmp_path, simulated):
    jsonschema = pytest.importorskip("jsonschema")
    out = tmp_path / "run"
    assert main(["infer", "--data", str(simulated / "data.csv"),
                 "--out-dir", str(out), "--search", "greedy",
                 "--score", "tea", "--bins", "4"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert "visited" in report
    jsonschema.validate(report, _schema("score_report.schema.json"))
    jsonschema.validate(json.loads((out / "run_manifest.json").read_text()),
                        _schema("run_manifest.schema.json"))


def test_infer_exhaustive_too_many_vertices(tmp_path, capsys):
    rng = np.random.default_rng(1)
    data = tmp_path / "wide.csv"
    ni.write_csv(ni.TimeSeriesSet.from_columns(rng.random((7, 50))), data)
    code = main(["infer", "--data", str(data), "--out-dir", str(tmp_path / "x"),
                 "--search", "exhaustive", "--score", "te", "--bins", "2"])
    assert code == 1
    assert "greedy" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# eval

def test_eval_identical(tmp_path, capsys):
    dot = _write_dot(tmp_path / "g.dot", 3, [(0, 1), (1, 2)])
    out = tmp_path / "metrics.json"
    assert main(["eval", "--inferred", str(dot), "--truth", str(dot),
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["f1"] == 1.0
    assert doc["shd"] == 0


def test_eval_reversed_edge(tmp_path):
    truth = _write_dot(tmp_path / "t.dot", 2, [(0, 1)], names=("V1", "V2"))
    inferred = _write_dot(tmp_path / "i.dot", 2, [(1, 0)], names=("V1", "V2"))
    out = tmp_path / "m.json"
    assert main(["eval", "--inferred", str(inferred), "--truth", str(truth),
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["shd"] == 1


def test_eval_empty_inference_recall_zero(tmp_path):
    truth = _write_dot(tmp_path / "t.dot", 3, [(0, 1), (1, 2)])
    empty = _write_dot(tmp_path / "e.dot", 3, [])
    out = tmp_path / "m.json"
    assert main(["eval", "--inferred", str(empty), "--truth", str(truth),
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["recall"] == 0.0
    assert doc["shd"] == 2


def test_eval_vertex_mismatch(tmp_path, capsys):
    truth = _write_dot(tmp_path / "t.dot", 2, [(0, 1)], names=("V1", "V2"))
    other = tmp_path / "o.dot"
    other.write_text(ni.write_dot(ni.Dag.from_edges(2, [(0, 1)]), ["A", "B"]))
    assert main(["eval", "--inferred", str(other), "--truth", str(truth)]) == 1


def test_eval_metrics_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    dot = _write_dot(tmp_path / "g.dot", 3, [(0, 1)])
    out = tmp_path / "m.json"
    main(["eval", "--inferred", str(dot), "--truth", str(dot), "--out", str(out)])
    jsonschema.validate(json.loads(out.read_text()),
                        _schema("metrics.schema.json"))


def test_usage_error_is_validation_exit(capsys):
    assert main(["score", "--data", "x.csv"]) == 1  # missing --graph
