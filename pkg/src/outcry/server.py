"""HTTP + SSE service wrapping one performance engine.

Exposes the conductor and administrator command surface, the display-wall
snapshot, and a server-sent-event stream carrying every event record plus
a fresh snapshot after each change.  Endpoint classes can each be guarded
by a shared token (`tokens: {conductor: ..., admin: ...}` in the config);
reads are open, since the wall is public in the venue anyway.

The tick loop runs inside the app's lifespan: once the performance starts,
the engine ticks every `tick_seconds` of the market config (overridable
for rehearsal and tests).
"""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from pathlib import Path
from typing import AsyncIterator

from fastapi import Depends, FastAPI, HTTPException, Header
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .core import Regime
from .engine import CommandRejected, EventRecord, PerformanceConfig, PerformanceEngine


class RegimeBody(BaseModel):
    mode: str


class ShoutBody(BaseModel):
    on: bool


class TempoBody(BaseModel):
    bpm: float


class SlipBody(BaseModel):
    trader: int
    counterparty: int
    side: str
    stock: str
    quantity: int
    price: float


class InjectionBody(BaseModel):
    amount: float


class _Broadcaster:
    def __init__(self) -> None:
        self.queues: set[asyncio.Queue] = set()

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue()
        self.queues.add(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        self.queues.discard(queue)

    def publish(self, event_name: str, data: str) -> None:
        for queue in list(self.queues):
            queue.put_nowait((event_name, data))


def create_app(
    engine: PerformanceEngine,
    tick_interval: float | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    interval = engine.config.market.tick_seconds if tick_interval is None else tick_interval
    hub = _Broadcaster()

    def push(records: list[EventRecord]) -> None:
        for record in records:
            hub.publish("record", record.to_json())
        hub.publish("snapshot", engine.snapshot_json())

    async def tick_loop() -> None:
        while True:
            await asyncio.sleep(interval)
            if engine.running:
                push(engine.tick())

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        task = asyncio.create_task(tick_loop())
        try:
            yield
        finally:
            task.cancel()
            engine.close()

    app = FastAPI(title="outcry performance engine", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def require_token(role: str):
        async def check(x_auth_token: str | None = Header(default=None)) -> None:
            required = engine.config.tokens.get(role)
            if required and x_auth_token != required:
                raise HTTPException(status_code=401, detail=f"missing or bad {role} token")

        return check

    conductor_auth = Depends(require_token("conductor"))
    admin_auth = Depends(require_token("admin"))

    def guard(action):
        try:
            return action()
        except CommandRejected as rejection:
            raise HTTPException(status_code=400, detail=str(rejection))

    @app.post("/performance/start", dependencies=[conductor_auth])
    async def start_performance() -> dict:
        records = guard(engine.start)
        push(records)
        return {"ok": True}

    @app.post("/performance/end", dependencies=[conductor_auth])
    async def end_performance() -> dict:
        records = guard(engine.end)
        push(records)
        return {"ok": True}

    @app.post("/conductor/regime", dependencies=[conductor_auth])
    async def conductor_regime(body: RegimeBody) -> dict:
        mode = body.mode.lower()
        if mode == "auto":
            records = guard(lambda: engine.force_regime(None))
        else:
            try:
                regime = Regime(mode)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown regime mode {body.mode!r}")
            records = guard(lambda: engine.force_regime(regime))
        push(records)
        return {"ok": True, "mode": mode}

    @app.post("/conductor/shout", dependencies=[conductor_auth])
    async def conductor_shout(body: ShoutBody) -> dict:
        push(guard(lambda: engine.set_shout(body.on)))
        return {"ok": True, "shout": body.on}

    @app.post("/conductor/tempo", dependencies=[conductor_auth])
    async def conductor_tempo(body: TempoBody) -> dict:
        push(guard(lambda: engine.set_tempo(body.bpm)))
        return {"ok": True, "bpm": body.bpm}

    @app.post("/admin/slip", dependencies=[admin_auth])
    async def admin_slip(body: SlipBody) -> dict:
        outcome = guard(
            lambda: engine.submit_slip(
                trader=body.trader,
                counterparty=body.counterparty,
                side=body.side,
                stock=body.stock,
                quantity=body.quantity,
                price=body.price,
            )
        )
        push(outcome.records)
        return {
            "status": outcome.status,
            "slip_id": outcome.slip_id,
            "trade": outcome.trade,
            "reason": outcome.reason,
        }

    @app.post("/admin/injection", dependencies=[admin_auth])
    async def admin_injection(body: InjectionBody) -> dict:
        push(guard(lambda: engine.inject_cash(body.amount)))
        return {"ok": True, "amount": body.amount}

    @app.get("/state")
    async def state() -> dict:
        return engine.snapshot()

    @app.get("/events")
    async def events() -> StreamingResponse:
        queue = hub.subscribe()

        async def stream() -> AsyncIterator[str]:
            try:
                yield f"event: snapshot\ndata: {engine.snapshot_json()}\n\n"
                while True:
                    event_name, data = await queue.get()
                    yield f"event: {event_name}\ndata: {data}\n\n"
            finally:
                hub.unsubscribe(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).is_dir():
        ui_path = Path(ui_dir)

        # Role-separated console views, one route per human role.
        for route, page in (("/wall", "wall.html"), ("/conductor", "conductor.html"), ("/admin", "admin.html")):
            page_file = ui_path / page
            if page_file.is_file():
                app.get(route, include_in_schema=False)(
                    lambda page_file=page_file: FileResponse(page_file)
                )
        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app


def serve(
    config: PerformanceConfig,
    port: int = 8600,
    host: str = "127.0.0.1",
    log_path: str | Path | None = None,
    tick_interval: float | None = None,
    ui_dir: str | Path | None = None,
) -> None:
    import uvicorn

    engine = PerformanceEngine(config, log_path=log_path)
    app = create_app(engine, tick_interval=tick_interval, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
