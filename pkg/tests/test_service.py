import pytest
from starlette.testclient import TestClient

from hypar.service import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_healthz(client):
    res = client.get("/v1/healthz")
    assert res.status_code == 200
    assert res.json() == {"status": "ok"}


def test_zoo_list(client):
    res = client.get("/v1/zoo")
    assert res.status_code == 200
    names = [n["name"] for n in res.json()["networks"]]
    assert len(names) == 10
    assert "vgg-e" in names


def test_zoo_show_round_trips(client):
    res = client.get("/v1/zoo/sfc")
    assert res.status_code == 200
    body = res.json()
    assert body["weighted_layers"] == 4
    assert "fc 8192" in body["text"]


def test_zoo_unknown_name(client):
    res = client.get("/v1/zoo/resnet")
    assert res.status_code == 422
    assert "available" in res.json()["detail"]


def test_shapes_endpoint(client):
    res = client.post("/v1/shapes", json={
        "model": {"text": "name t\nbatch 32\ninput 1 1 70\nfc 100\n"}})
    assert res.status_code == 200
    layer = res.json()["layers"][0]
    assert layer["elems_weight"] == 7000
    assert layer["elems_output"] == 3200


def test_shapes_requires_exactly_one_source(client):
    res = client.post("/v1/shapes", json={"model": {}})
    assert res.status_code == 422
    res = client.post("/v1/shapes", json={
        "model": {"zoo": "sfc", "text": "name t\nbatch 1\ninput 1 1 1\nfc 1\n"}})
    assert res.status_code == 422


def test_parse_error_carries_position(client):
    res = client.post("/v1/shapes", json={
        "model": {"text": "name t\nbatch 1\ninput 1 1 1\nconv x k1\n"}})
    assert res.status_code == 422
    body = res.json()
    assert body["kind"] == "parse"
    assert body["line"] == 4 and body["column"] == 6


def test_partition_endpoint(client):
    res = client.post("/v1/partition", json={"model": {"zoo": "sconv"},
                                             "levels": 4})
    assert res.status_code == 200
    body = res.json()
    assert body["rows"] == [["dp", "dp", "dp", "dp"]] * 4
    assert body["total_bytes"] == body["total_elements"] * 8


def test_partition_zero_levels(client):
    res = client.post("/v1/partition", json={"model": {"zoo": "lenet-c"},
                                             "levels": 0})
    body = res.json()
    assert body["rows"] == [] and body["total_elements"] == 0


def test_brute_force_endpoint(client):
    res = client.post("/v1/brute-force", json={"model": {"zoo": "lenet-c"}})
    assert res.status_code == 200
    body = res.json()
    assert body["plan"] == ["dp", "dp", "mp", "mp"]
    assert body["matches_linear_search"] is True


def test_simulate_endpoint(client):
    res = client.post("/v1/simulate", json={
        "model": {"zoo": "lenet-c"}, "levels": 4, "plan": "hypar", "steps": 2})
    assert res.status_code == 200
    body = res.json()
    assert body["steps"] == 2
    assert body["plan"]["rows"][0] == ["dp", "dp", "mp", "mp"]
    assert body["comm_bytes"] == 2 * body["plan"]["total_bytes"]


def test_simulate_explicit_rows(client):
    res = client.post("/v1/simulate", json={
        "model": {"zoo": "lenet-c"},
        "rows": [["dp", "dp", "dp", "dp"]],
        "topology": "torus"})
    assert res.status_code == 200
    assert res.json()["node_count"] == 2


def test_simulate_hardware_override(client):
    req = {"model": {"zoo": "lenet-c"}, "levels": 2}
    base = client.post("/v1/simulate", json=req).json()
    slow = client.post("/v1/simulate", json={
        **req, "hardware": {"link_bandwidth": 160e6}}).json()
    assert slow["step_time"] > base["step_time"]
    bad = client.post("/v1/simulate", json={
        **req, "hardware": {"nonsense": 1.0}})
    assert bad.status_code == 422


def test_compare_requires_two_baselines(client):
    res = client.post("/v1/compare", json={"model": {"zoo": "sconv"},
                                           "baselines": ["dp"]})
    assert res.status_code == 422


def test_compare_normalizes_to_dp(client):
    res = client.post("/v1/compare", json={
        "model": {"zoo": "vgg-a"}, "baselines": ["dp", "hypar"]})
    rows = {r["baseline"]: r for r in res.json()["rows"]}
    assert rows["dp"]["speedup_vs_dp"] == pytest.approx(1.0)
    assert rows["hypar"]["speedup_vs_dp"] > 1.0


def test_sweep_nodes_requires_powers_of_two(client):
    res = client.post("/v1/sweep", json={
        "model": {"zoo": "lenet-c"}, "axis": "nodes", "values": ["3"]})
    assert res.status_code == 422


def test_sweep_batch_axis(client):
    res = client.post("/v1/sweep", json={
        "model": {"zoo": "lenet-c"}, "axis": "batch",
        "values": ["32", "64"], "baselines": ["hypar"], "levels": 2})
    rows = res.json()["rows"]
    assert [r["value"] for r in rows] == ["32", "64"]


def test_sweep_topology_axis(client):
    res = client.post("/v1/sweep", json={
        "model": {"zoo": "lenet-c"}, "axis": "topology",
        "values": ["htree", "torus"], "baselines": ["hypar"], "levels": 3})
    rows = res.json()["rows"]
    assert rows[0]["step_time"] <= rows[1]["step_time"]


def test_unknown_axis(client):
    res = client.post("/v1/sweep", json={
        "model": {"zoo": "lenet-c"}, "axis": "voltage", "values": ["1"]})
    assert res.status_code == 422


def test_responses_are_deterministic(client):
    req = {"model": {"zoo": "alexnet"}, "levels": 4, "plan": "hypar"}
    assert (client.post("/v1/simulate", json=req).content
            == client.post("/v1/simulate", json=req).content)
