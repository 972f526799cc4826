import json

import pytest
from fastapi.testclient import TestClient

from bilinear_rdf import cli, service
from bilinear_rdf.experiments import content_hash


@pytest.fixture(scope="module")
def client():
    return TestClient(service.create_app())


def test_health(client):
    assert client.get("/health").status_code == 200


def test_gen_collection_route(client):
    r = client.post("/gen-collection", json={"grid": {"log_size": 7}, "collection": {"mode": "stacked"}, "seed": 2})
    assert r.status_code == 200
    body = r.json()
    assert body["disjoint"] and body["size"] == 128 and body["count"] == len(body["rects"])


def test_apply_route_with_given_signals(client):
    f = [[1.0, 0.0]] * 64
    r = client.post("/apply", json={"grid": {"log_size": 6}, "operator": "carleson", "f": f})
    assert r.status_code == 200
    assert r.json()["values"] == pytest.approx([1.0] * 64)
    bad = client.post("/apply", json={"grid": {"log_size": 6}, "f": [[1.0, 0.0]] * 3})
    assert bad.status_code == 422


def test_trilinear_route_returns_form(client):
    r = client.post("/apply", json={"grid": {"log_size": 6}, "operator": "trilinear", "seed": 1})
    assert r.status_code == 200 and len(r.json()["form"]) == 2


def test_sweep_route_matches_library(client):
    req = {"trials": 2, "log_sizes": [6, 7], "seed": 3}
    a = client.post("/sweep", json=req).json()
    b = client.post("/sweep", json=req).json()
    assert a["rows"] == b["rows"] and len(a["rows"]) == 4


def test_decompose_route(client):
    r = client.post("/decompose", json={"grid": {"log_size": 7}, "seed": 1})
    assert r.status_code == 200
    body = r.json()
    assert body["checks"]["partition"] and body["table"]


def test_rwt_route(client):
    r = client.post("/rwt", json={"grid": {"log_size": 7}, "trials": 2, "tile_analysis": False})
    assert r.status_code == 200
    assert r.json()["all_major"]


def test_verify_and_solver_routes(client):
    r = client.post("/verify", json={"checks": ["identities", "exponents"]})
    assert r.status_code == 200 and r.json()["passed"]
    assert client.post("/verify", json={"checks": ["nope"]}).status_code == 422
    r = client.post("/solve-exponents", json={"r": 4, "p": 3, "q": 3})
    assert r.status_code == 200
    assert r.json()["limit"]["p0"] == pytest.approx(6.0)
    assert client.post("/solve-exponents", json={"r": 4, "p": 1.1, "q": 3}).status_code == 422


def test_unknown_fields_are_rejected(client):
    assert client.post("/gen-collection", json={"grid": {"log_size": 7}, "bogus": 1}).status_code == 422
    assert client.post("/gen-collection", json={"collection": {"mode": "nope"}}).status_code == 422


def test_cli_json_and_csv_outputs(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert cli.main(["--grid-log-size", "7", "--seed", "4", "--out", str(out), "gen-collection"]) == 0
    data = json.loads(out.read_text())
    assert data["size"] == 128
    req = data["meta"]["inputs"]
    assert data["meta"]["input_hash"] == content_hash(req)

    csv_out = tmp_path / "c.csv"
    assert cli.main(["gen-collection", "--grid-log-size", "7", "--seed", "4", "--format", "csv", "--out", str(csv_out)]) == 0
    lines = csv_out.read_text().splitlines()
    assert len(lines) == data["count"] + 1
    side = json.loads((tmp_path / "c.csv.json").read_text())
    assert side["input_hash"] == data["meta"]["input_hash"]


def test_cli_stdout_and_apply(capsys):
    assert cli.main(["apply", "--grid-log-size", "6", "--operator", "square", "--no-values"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["operator"] == "square" and body["values"] is None


def test_cli_sweep_csv_columns(capsys):
    assert cli.main(["sweep", "--trials", "2", "--log-sizes", "6", "--format", "csv"]) == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert header.startswith("seed,N,collection")


def test_cli_decompose_prints_table(tmp_path, capsys):
    assert cli.main(["decompose", "--grid-log-size", "7", "--out", str(tmp_path / "d.json")]) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("step")


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": {"log_size": 6}, "collection": {"mode": "unit-grid"}}))
    assert cli.main(["gen-collection", "--config", str(cfg)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["size"] == 64 and body["label"].startswith("unit-grid")
    assert cli.main(["gen-collection", "--config", str(cfg), "--grid-log-size", "7"]) == 0
    assert json.loads(capsys.readouterr().out)["size"] == 128


def test_cli_verify_and_solver(capsys):
    assert cli.main(["verify", "--checks", "identities"]) == 0
    capsys.readouterr()
    assert cli.main(["solve-exponents", "--r", "4", "--p", "3", "--q", "3"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["solution"]["strict"]
    assert cli.main(["solve-exponents", "--r", "4", "--p", "1.1", "--q", "3"]) == 2


def test_cli_bad_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nope": 1}))
    with pytest.raises(SystemExit):
        cli.main(["gen-collection", "--config", str(cfg)])
