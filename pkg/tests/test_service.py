import json
import socket
import threading
import time

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from outcry.engine import ExchangeConfig, PerformanceConfig, PerformanceEngine
from outcry.market import load_market_config
from outcry.server import create_app


def make_engine(tokens=None, duration_ticks=30):
    config = PerformanceConfig(
        market=load_market_config(),
        exchange=ExchangeConfig(),
        duration_ticks=duration_ticks,
        seed=8,
        tokens=tokens or {},
    )
    return PerformanceEngine(config)


@pytest.fixture
def engine():
    return make_engine()


@pytest.fixture
def client(engine):
    # Giant tick interval: tests drive engine.tick() directly.
    with TestClient(create_app(engine, tick_interval=10_000)) as client:
        yield client


def read_sse_event(stream_iter, buffer=""):
    """Accumulate one `event:`/`data:` block from an SSE byte stream."""
    while "\n\n" not in buffer:
        buffer += next(stream_iter)
    block, rest = buffer.split("\n\n", 1)
    fields = dict(line.split(": ", 1) for line in block.splitlines() if ": " in line)
    return fields["event"], json.loads(fields["data"]), rest


class TestLifecycleEndpoints:
    def test_start_then_state(self, client):
        assert client.post("/performance/start").json() == {"ok": True}
        snap = client.get("/state").json()
        assert snap["running"] is True
        assert snap["tick"] == 0

    def test_double_start_is_400(self, client):
        client.post("/performance/start")
        response = client.post("/performance/start")
        assert response.status_code == 400

    def test_end_reports_payout(self, client, engine):
        client.post("/performance/start")
        engine.tick()
        client.post("/performance/end")
        snap = client.get("/state").json()
        assert snap["ended"] is True
        assert snap["payout"] is not None


class TestConductorEndpoints:
    def test_regime_wire_format(self, client, engine):
        client.post("/performance/start")
        response = client.post("/conductor/regime", json={"mode": "bust"})
        assert response.json() == {"ok": True, "mode": "bust"}
        assert engine.market.forced is not None
        client.post("/conductor/regime", json={"mode": "auto"})
        assert engine.market.forced is None

    def test_unknown_mode_rejected(self, client):
        client.post("/performance/start")
        assert client.post("/conductor/regime", json={"mode": "sideways"}).status_code == 400

    def test_shout_and_tempo(self, client):
        client.post("/performance/start")
        client.post("/conductor/shout", json={"on": True})
        client.post("/conductor/tempo", json={"bpm": 66})
        snap = client.get("/state").json()
        assert snap["shout"] is True
        assert snap["tempo_bpm"] == 66.0

    def test_command_before_start_rejected(self, client):
        assert client.post("/conductor/shout", json={"on": True}).status_code == 400


class TestAdminEndpoints:
    def submit(self, client, **overrides):
        body = {
            "trader": 1,
            "counterparty": 2,
            "side": "buy",
            "stock": "wealth",
            "quantity": 10,
            "price": 100.0,
        }
        body.update(overrides)
        return client.post("/admin/slip", json=body)

    def test_slip_round_trip(self, client):
        client.post("/performance/start")
        first = self.submit(client).json()
        assert first["status"] == "pending"
        second = self.submit(
            client, trader=2, counterparty=1, side="sell"
        ).json()
        assert second["status"] == "matched"
        assert second["trade"]["buyer"] == 1
        trades = client.get("/state").json()["recent_trades"]
        assert len(trades) == 1

    def test_rejection_reason_surfaces(self, client):
        client.post("/performance/start")
        response = self.submit(client, counterparty=1).json()
        assert response["status"] == "rejected"
        assert response["reason"] == "self_trade"

    def test_injection(self, client):
        client.post("/performance/start")
        assert client.post("/admin/injection", json={"amount": 50}).json()["ok"] is True
        values = client.get("/state").json()["portfolios"]
        assert values["1"]["cash"] == 1050.0


class TestTokens:
    def test_conductor_token_guards_conductor_class(self):
        engine = make_engine(tokens={"conductor": "c-secret", "admin": "a-secret"})
        with TestClient(create_app(engine, tick_interval=10_000)) as client:
            assert client.post("/performance/start").status_code == 401
            ok = client.post("/performance/start", headers={"x-auth-token": "c-secret"})
            assert ok.status_code == 200
            # admin token does not open conductor endpoints
            bad = client.post("/conductor/shout", json={"on": True}, headers={"x-auth-token": "a-secret"})
            assert bad.status_code == 401

    def test_admin_token_guards_slip_entry(self):
        engine = make_engine(tokens={"admin": "a-secret"})
        with TestClient(create_app(engine, tick_interval=10_000)) as client:
            client.post("/performance/start")  # conductor endpoints unguarded here
            body = {
                "trader": 1,
                "counterparty": 2,
                "side": "buy",
                "stock": "wealth",
                "quantity": 1,
                "price": 10.0,
            }
            assert client.post("/admin/slip", json=body).status_code == 401
            ok = client.post("/admin/slip", json=body, headers={"x-auth-token": "a-secret"})
            assert ok.status_code == 200

    def test_reads_stay_open(self):
        engine = make_engine(tokens={"conductor": "x", "admin": "y"})
        with TestClient(create_app(engine, tick_interval=10_000)) as client:
            assert client.get("/state").status_code == 200


@pytest.fixture
def live_server(engine):
    """A real uvicorn server on a random port; TestClient cannot lazily read
    an endless SSE body, so the stream is exercised over actual HTTP."""
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    config = uvicorn.Config(
        create_app(engine, tick_interval=10_000),
        host="127.0.0.1",
        port=port,
        log_level="warning",
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    deadline = time.time() + 10
    while time.time() < deadline:
        try:
            httpx.get(f"{base}/state", timeout=0.5)
            break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        raise RuntimeError("server did not come up")
    yield base
    server.should_exit = True
    thread.join(timeout=5)


class TestEventStream:
    def test_stream_opens_with_snapshot_then_records(self, live_server):
        httpx.post(f"{live_server}/performance/start")
        with httpx.stream("GET", f"{live_server}/events", timeout=10) as response:
            assert response.headers["content-type"].startswith("text/event-stream")
            stream = response.iter_text()
            event, snapshot, rest = read_sse_event(stream)
            assert event == "snapshot"
            assert snapshot["running"] is True

            httpx.post(f"{live_server}/conductor/tempo", json={"bpm": 63})
            event, record, rest = read_sse_event(stream, rest)
            assert event == "record"
            assert record["kind"] == "conductor_command"
            assert record["payload"]["bpm"] == 63.0
            event, snapshot, _ = read_sse_event(stream, rest)
            assert event == "snapshot"
            assert snapshot["tempo_bpm"] == 63.0

    def test_tick_records_flow_to_subscribers(self, live_server, engine):
        httpx.post(f"{live_server}/performance/start")
        with httpx.stream("GET", f"{live_server}/events", timeout=10) as response:
            stream = response.iter_text()
            event, _, rest = read_sse_event(stream)  # greeting snapshot
            httpx.post(f"{live_server}/admin/injection", json={"amount": 50})
            event, record, rest = read_sse_event(stream, rest)
            assert record["kind"] == "injection"
            event, snapshot, _ = read_sse_event(stream, rest)
            assert snapshot["portfolios"]["1"]["cash"] == 1050.0
