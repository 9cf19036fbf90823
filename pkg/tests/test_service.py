import http.client
import json
import threading

import numpy as np
import pytest

from gpscreen.data import Dataset, save_dataset
from gpscreen.service import AdvisorApp, make_server


def candidates_csv(n=6, seed=0, tmp_path=None):
    rng = np.random.default_rng(seed)
    feats = rng.standard_normal((n, 2))
    ds = Dataset("cand", tuple(f"m{i}" for i in range(n)), feats, feats[:, 0])
    path = tmp_path / "cand.csv"
    save_dataset(ds, path)
    return path.read_text()


def campaign_config(seed=3):
    return {"policy": {"name": "gp-thompson"}, "goal": "aregret", "seed": seed,
            "horizon": 6, "gp": {"noise_variance": 0.1}}


@pytest.fixture()
def app(tmp_path):
    return AdvisorApp(tmp_path / "store")


def create_campaign(app, tmp_path, name="trial-1", seed=3):
    status, payload = app.handle_api(
        "POST", "/campaigns", {},
        {"name": name, "candidates_csv": candidates_csv(tmp_path=tmp_path),
         "config": campaign_config(seed)},
    )
    assert status == 201, payload
    return payload["id"]


class TestCampaignRoutes:
    def test_create_and_status(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        status, payload = app.handle_api("GET", f"/campaigns/{cid}", {}, {})
        assert status == 200
        assert payload["n_candidates"] == 6
        assert payload["status"] == "active"

    def test_unknown_campaign_404(self, app):
        status, payload = app.handle_api("GET", "/campaigns/nope", {}, {})
        assert status == 404
        assert payload["code"] == "not_found"

    def test_suggest_observe_loop(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        _, suggestion = app.handle_api("POST", f"/campaigns/{cid}/suggest", {}, {})
        arm = suggestion["arm_ids"][0]
        status, payload = app.handle_api(
            "POST", f"/campaigns/{cid}/observe", {}, {"arm_id": arm, "y": 1.5}
        )
        assert status == 200
        assert payload["n_observed"] == 1

    def test_observe_moves_posterior(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        _, before = app.handle_api("GET", f"/campaigns/{cid}/posterior",
                                   {"arms": ["m2"]}, {})
        app.handle_api("POST", f"/campaigns/{cid}/observe", {}, {"arm_id": "m2", "y": 2.5})
        _, after = app.handle_api("GET", f"/campaigns/{cid}/posterior",
                                  {"arms": ["m2"]}, {})
        b, a = before["arms"][0], after["arms"][0]
        assert abs(a["mean"] - 2.5) < abs(b["mean"] - 2.5)
        assert a["std"] < b["std"]

    def test_duplicate_observation_409(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        app.handle_api("POST", f"/campaigns/{cid}/observe", {}, {"arm_id": "m1", "y": 0.5})
        status, payload = app.handle_api(
            "POST", f"/campaigns/{cid}/observe", {}, {"arm_id": "m1", "y": 0.5}
        )
        assert status == 409
        assert payload["code"] == "duplicate_observation"

    def test_unknown_arm_404(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        status, payload = app.handle_api(
            "POST", f"/campaigns/{cid}/observe", {}, {"arm_id": "zz", "y": 0.5}
        )
        assert status == 404

    def test_schema_violations_422(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        for body in ({"arm_id": "m1"}, {"arm_id": "m1", "y": "abc"},
                     {"arm_id": "m1", "y": float("nan")}):
            status, payload = app.handle_api(
                "POST", f"/campaigns/{cid}/observe", {}, body
            )
            assert status == 422, body
            assert payload["code"] == "schema_violation"
        status, _ = app.handle_api("POST", "/campaigns", {}, {"config": {}})
        assert status == 422

    def test_whatif_never_mutates(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        _, before = app.handle_api("POST", f"/campaigns/{cid}/suggest", {}, {})
        status, hypo = app.handle_api(
            "POST", f"/campaigns/{cid}/whatif", {}, {"arm_id": "m3", "y": 9.9}
        )
        assert status == 200 and hypo["hypothetical"]
        _, again = app.handle_api("POST", f"/campaigns/{cid}/suggest", {}, {})
        assert again == before
        _, st = app.handle_api("GET", f"/campaigns/{cid}", {}, {})
        assert st["n_observed"] == 0

    def test_identical_campaigns_identical_suggestions(self, app, tmp_path):
        c1 = create_campaign(app, tmp_path, name="twin-a", seed=5)
        c2 = create_campaign(app, tmp_path, name="twin-b", seed=5)
        for _ in range(3):
            _, s1 = app.handle_api("POST", f"/campaigns/{c1}/suggest", {}, {})
            _, s2 = app.handle_api("POST", f"/campaigns/{c2}/suggest", {}, {})
            assert s1 == s2
            arm = s1["arm_ids"][0]
            for cid in (c1, c2):
                app.handle_api("POST", f"/campaigns/{cid}/observe", {},
                               {"arm_id": arm, "y": 0.25})

    def test_complete_campaign_suggests_complete(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        for i in range(6):
            app.handle_api("POST", f"/campaigns/{cid}/observe", {},
                           {"arm_id": f"m{i}", "y": float(i)})
        _, payload = app.handle_api("POST", f"/campaigns/{cid}/suggest", {}, {})
        assert payload["status"] == "complete"

    def test_restart_reconstructs_state(self, app, tmp_path):
        cid = create_campaign(app, tmp_path)
        app.handle_api("POST", f"/campaigns/{cid}/observe", {}, {"arm_id": "m0", "y": 1.0})
        _, before = app.handle_api("GET", f"/campaigns/{cid}/posterior",
                                   {"arms": ["m0,m1,m2"]}, {})
        reloaded = AdvisorApp(app.store.root)
        _, after = reloaded.handle_api("GET", f"/campaigns/{cid}/posterior",
                                       {"arms": ["m0,m1,m2"]}, {})
        for x, y in zip(before["arms"], after["arms"]):
            assert x["mean"] == pytest.approx(y["mean"], abs=1e-10)
            assert x["std"] == pytest.approx(y["std"], abs=1e-10)


class TestHTTPTransport:
    def test_end_to_end_over_http(self, tmp_path):
        static = tmp_path / "static"
        static.mkdir()
        (static / "index.html").write_text("<html>advisor</html>")
        server = make_server(tmp_path / "store", port=0, static_dir=static)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = server.server_address
            conn = http.client.HTTPConnection(host, port, timeout=10)

            body = json.dumps({
                "name": "http-trial",
                "candidates_csv": candidates_csv(tmp_path=tmp_path),
                "config": campaign_config(),
            })
            conn.request("POST", "/campaigns", body,
                         {"Content-Type": "application/json"})
            resp = conn.getresponse()
            created = json.loads(resp.read())
            assert resp.status == 201
            cid = created["id"]

            conn.request("POST", f"/campaigns/{cid}/suggest", "{}",
                         {"Content-Type": "application/json"})
            resp = conn.getresponse()
            suggestion = json.loads(resp.read())
            assert resp.status == 200
            assert suggestion["arm_ids"]

            conn.request("GET", "/")
            resp = conn.getresponse()
            page = resp.read()
            assert resp.status == 200
            assert b"advisor" in page

            conn.request("GET", "/campaigns/nope")
            resp = conn.getresponse()
            assert resp.status == 404
            resp.read()
        finally:
            server.shutdown()
            server.server_close()
