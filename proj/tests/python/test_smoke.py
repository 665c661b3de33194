import os
import pathlib

import pytest

import gcomb

DATA = pathlib.Path(os.environ.get("GCOMB_TEST_DATA", pathlib.Path(__file__).parents[1] / "data"))


def test_generators_and_exact():
    g = gcomb.erdos_renyi(12, 0.3, 5)
    assert g.node_count == 12
    assert g.kind == "general"
    opt = gcomb.mvc_exact(g)
    assert opt["proven_optimal"]
    value, seconds = gcomb.run_method("mvc_approx", g, "mvc")
    assert value >= opt["value"]
    assert value <= 2 * opt["value"]
    assert seconds > 0
    assert gcomb.approx_ratio(value, opt["value"]) == pytest.approx(value / opt["value"])


def test_tsplib_instance():
    g = gcomb.load_instance(str(DATA / "berlin52.tsp"))
    assert g.node_count == 52
    value, _ = gcomb.run_method("tsp_2opt", g, "tsp")
    assert value >= 7542


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        gcomb.methods("knapsack")
    with pytest.raises(OSError):
        gcomb.load_graph("/nonexistent/graph.txt")
    with pytest.raises(ValueError):
        gcomb.config_dump("mvc", overrides={"train.episodez": "3"})


def test_train_and_rollout(tmp_path):
    overrides = {
        "train.episodes": "10",
        "train.p": "4",
        "train.batch_size": "4",
        "sizes.train": "8-10",
        "sizes.test": "8-10",
        "sizes.validation_count": "2",
        "sizes.test_count": "3",
    }
    rc, log = gcomb.run("train", str(tmp_path), "mvc", overrides=overrides)
    assert rc == 0
    assert "model_hash=" in log
    model = str(tmp_path / "model.bin")
    assert len(gcomb.model_hash(model)) > 0
    g = gcomb.erdos_renyi(10, 0.3, 2)
    out = gcomb.greedy_rollout(g, "mvc", model)
    cover = set(out["solution"])
    assert out["value"] == len(cover)
    assert all(u in cover or v in cover for u, v, _ in g.edges())
    rc, log = gcomb.run("eval", str(tmp_path), "mvc", overrides=overrides, model=model)
    assert rc == 0
    assert (tmp_path / "eval_8-10.csv").exists()
