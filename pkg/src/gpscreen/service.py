"""Local HTTP facade over live campaigns for the browser UI and scripts.

Endpoints (all JSON bodies and responses):

* ``POST /campaigns``                 create from candidate CSV text + config
* ``GET  /campaigns/{id}``            status and progress
* ``POST /campaigns/{id}/suggest``    next decision (or a complete signal)
* ``POST /campaigns/{id}/observe``    record an assay outcome {arm_id, y}
* ``GET  /campaigns/{id}/posterior?arms=a,b``  posterior mean/std per arm
* ``POST /campaigns/{id}/whatif``     hypothetical observe on a cloned belief

Errors are JSON ``{"code", "message"}`` with 404 (unknown campaign/arm),
409 (duplicate observation) or 422 (schema violation).  The service is a
pure adapter over :mod:`gpscreen.advisor`: campaigns live as directories
under the store root, observes are serialized per campaign, and reads work
on immutable snapshots, so every response is reproducible from the logs.

Anything outside ``/campaigns`` is served from the static directory when
one is configured (the built UI bundle).
"""

from __future__ import annotations

import json
import re
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .advisor import Campaign, CampaignConfig
from .data import load_dataset
from .errors import ConfigError, DataError, GPScreenError, InputError

_NAME_RE = re.compile(r"^[a-z0-9][a-z0-9-]{0,63}$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".map": "application/json",
    ".ico": "image/x-icon",
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status, self.code, self.message = status, code, message


class CampaignStore:
    """Campaign directories under one root, with per-campaign write locks."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._campaigns: dict[str, Campaign] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        for child in sorted(self.root.iterdir()):
            if (child / "campaign.json").exists():
                self._campaigns[child.name] = Campaign.load(child)
                self._locks[child.name] = threading.Lock()

    def ids(self) -> list[str]:
        return sorted(self._campaigns)

    def create(self, name: str | None, candidates_csv: str, config_raw: dict) -> str:
        try:
            config = CampaignConfig.from_dict(config_raw)
        except (ConfigError, InputError) as exc:
            raise ApiError(422, "schema_violation", str(exc)) from None
        with self._registry_lock:
            if name is None:
                name = f"campaign-{len(self._campaigns) + 1:04d}"
                while name in self._campaigns:
                    name = f"campaign-{int(name.split('-')[1]) + 1:04d}"
            if not _NAME_RE.match(name):
                raise ApiError(422, "schema_violation",
                               "campaign name must match [a-z0-9][a-z0-9-]*")
            if name in self._campaigns:
                raise ApiError(409, "duplicate_campaign", f"campaign {name!r} exists")
            campaign_dir = self.root / name
            tmp = campaign_dir / "upload.csv"
            campaign_dir.mkdir(parents=True, exist_ok=True)
            tmp.write_text(candidates_csv, encoding="utf-8")
            try:
                dataset = load_dataset(tmp, require_targets=False)
                campaign = Campaign.create(campaign_dir, dataset, config)
            except (DataError, ConfigError, InputError) as exc:
                tmp.unlink(missing_ok=True)
                if not any(campaign_dir.iterdir()):
                    campaign_dir.rmdir()
                raise ApiError(422, "schema_violation", str(exc)) from None
            else:
                tmp.unlink(missing_ok=True)
            self._campaigns[name] = campaign
            self._locks[name] = threading.Lock()
            return name

    def get(self, campaign_id: str) -> Campaign:
        try:
            return self._campaigns[campaign_id]
        except KeyError:
            raise ApiError(404, "not_found", f"unknown campaign {campaign_id!r}") from None

    def lock(self, campaign_id: str) -> threading.Lock:
        return self._locks[campaign_id]


def _decision_payload(campaign: Campaign, decision) -> dict:
    if decision is None:
        return {"status": "complete", "arm_ids": [], "candidates": []}
    return {
        "status": "active",
        "arm_ids": [campaign.dataset.ids[i] for i in decision.arm_indices],
        "candidates": [
            {"arm_ids": [campaign.dataset.ids[i] for i in cand], "value": value}
            for cand, value in decision.scores.items()
        ],
    }


class AdvisorApp:
    """Transport-independent request handling (easy to test directly)."""

    def __init__(self, store_dir, static_dir=None):
        self.store = CampaignStore(store_dir)
        self.static_dir = Path(static_dir) if static_dir else None

    # each handler returns (status, payload_dict)

    def handle_api(self, method: str, path: str, query: dict, body: dict) -> tuple[int, dict]:
        parts = [p for p in path.split("/") if p]
        try:
            if parts == ["campaigns"]:
                if method == "POST":
                    return self._create(body)
                if method == "GET":
                    return 200, {"campaigns": self.store.ids()}
            elif len(parts) >= 2 and parts[0] == "campaigns":
                campaign_id, rest = parts[1], parts[2:]
                campaign = self.store.get(campaign_id)
                if not rest and method == "GET":
                    return 200, dict(campaign.status(), id=campaign_id)
                if rest == ["suggest"] and method == "POST":
                    return 200, _decision_payload(campaign, campaign.suggest())
                if rest == ["observe"] and method == "POST":
                    return self._observe(campaign_id, campaign, body)
                if rest == ["posterior"] and method == "GET":
                    return self._posterior(campaign, query)
                if rest == ["whatif"] and method == "POST":
                    return self._whatif(campaign, body)
            raise ApiError(404, "not_found", f"no route {method} /{'/'.join(parts)}")
        except ApiError as exc:
            return exc.status, {"code": exc.code, "message": exc.message}
        except GPScreenError as exc:
            return 422, {"code": "schema_violation", "message": str(exc)}

    def _create(self, body: dict) -> tuple[int, dict]:
        for key in ("candidates_csv", "config"):
            if key not in body:
                raise ApiError(422, "schema_violation", f"missing field {key!r}")
        if not isinstance(body["config"], dict) or not isinstance(body["candidates_csv"], str):
            raise ApiError(422, "schema_violation",
                           "candidates_csv must be a string and config an object")
        name = body.get("name")
        campaign_id = self.store.create(name, body["candidates_csv"], body["config"])
        campaign = self.store.get(campaign_id)
        return 201, dict(campaign.status(), id=campaign_id)

    def _observe_args(self, campaign: Campaign, body: dict) -> tuple[str, float]:
        if "arm_id" not in body or "y" not in body:
            raise ApiError(422, "schema_violation", "body must carry arm_id and y")
        arm_id = str(body["arm_id"])
        if arm_id not in campaign.dataset.ids:
            raise ApiError(404, "not_found", f"unknown arm {arm_id!r}")
        try:
            y = float(body["y"])
        except (TypeError, ValueError):
            raise ApiError(422, "schema_violation", f"y must be a number, got {body['y']!r}") from None
        return arm_id, y

    def _observe(self, campaign_id: str, campaign: Campaign, body: dict) -> tuple[int, dict]:
        arm_id, y = self._observe_args(campaign, body)
        with self.store.lock(campaign_id):
            try:
                campaign.observe(arm_id, y)
            except DataError as exc:
                raise ApiError(409, "duplicate_observation", str(exc)) from None
            except InputError as exc:
                raise ApiError(422, "schema_violation", str(exc)) from None
        return 200, dict(campaign.status(), id=campaign_id)

    def _whatif(self, campaign: Campaign, body: dict) -> tuple[int, dict]:
        arm_id, y = self._observe_args(campaign, body)
        try:
            decision = campaign.whatif(arm_id, y)
        except DataError as exc:
            raise ApiError(409, "duplicate_observation", str(exc)) from None
        except InputError as exc:
            raise ApiError(422, "schema_violation", str(exc)) from None
        return 200, dict(_decision_payload(campaign, decision), hypothetical=True)

    def _posterior(self, campaign: Campaign, query: dict) -> tuple[int, dict]:
        raw = query.get("arms", [""])[0]
        arm_ids = [a for a in raw.split(",") if a]
        if not arm_ids:
            raise ApiError(422, "schema_violation", "query parameter arms=… is required")
        unknown = [a for a in arm_ids if a not in campaign.dataset.ids]
        if unknown:
            raise ApiError(404, "not_found", f"unknown arms {unknown}")
        return 200, {"arms": campaign.posterior(arm_ids)}

    # static files ------------------------------------------------------

    def static_file(self, path: str) -> tuple[int, bytes, str] | None:
        if self.static_dir is None:
            return None
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        try:
            target.relative_to(self.static_dir.resolve())
        except ValueError:
            return 404, b"not found", "text/plain"
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            return 404, b"not found", "text/plain"
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        return 200, target.read_bytes(), ctype


class _Handler(BaseHTTPRequestHandler):
    app: AdvisorApp  # assigned by make_server

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _dispatch(self, method: str) -> None:
        parsed = urllib.parse.urlparse(self.path)
        query = urllib.parse.parse_qs(parsed.query)
        if parsed.path == "/campaigns" or parsed.path.startswith("/campaigns/"):
            body = {}
            length = int(self.headers.get("Content-Length") or 0)
            if length:
                try:
                    body = json.loads(self.rfile.read(length))
                except json.JSONDecodeError:
                    self._send_json(422, {"code": "schema_violation",
                                          "message": "body is not valid JSON"})
                    return
            status, payload = self.app.handle_api(method, parsed.path, query, body)
            self._send_json(status, payload)
            return
        if method == "GET":
            served = self.app.static_file(parsed.path)
            if served is not None:
                status, content, ctype = served
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(content)))
                self.end_headers()
                self.wfile.write(content)
                return
        self._send_json(404, {"code": "not_found", "message": f"no route {parsed.path}"})

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass


def make_server(store_dir, host: str = "127.0.0.1", port: int = 0,
                static_dir=None) -> ThreadingHTTPServer:
    """A ready-to-run threading HTTP server bound to host:port."""
    app = AdvisorApp(store_dir, static_dir)
    handler = type("BoundHandler", (_Handler,), {"app": app})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(store_dir, host: str, port: int, static_dir=None) -> None:
    server = make_server(store_dir, host, port, static_dir)
    addr = server.server_address
    print(f"advisor service listening on http://{addr[0]}:{addr[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
