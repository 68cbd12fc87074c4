"""WebSocket service exposing the engine, plus static UI hosting.

One JSON object per WebSocket text message on ``/ws``; ``/`` serves the
built browser UI (unless --headless). The engine ticks on a fixed
cadence on the event loop; atlas jobs run in a worker thread and feed
back through the engine inbox, so the tick stream never stalls on them.
"""
from __future__ import annotations

import argparse
import asyncio
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional, Set

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from . import protocol
from .engine import Engine, compute_atlas
from .errors import BadMessage

SNAPSHOT_DIVISOR = 3  # 100 Hz ticks -> ~33 Hz snapshots toward clients

_PLACEHOLDER = """<!doctype html>
<html><body><h1>mechhap engine</h1>
<p>The UI bundle is not built. Run <code>npm run build</code> in
<code>frontend/</code>, or connect straight to <code>/ws</code>.</p>
</body></html>"""


def default_ui_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


class Service:
    def __init__(self, tick_hz: int = 100, grid_n: int = 400):
        self.engine = Engine(tick_hz=tick_hz, grid_n=grid_n, sync_atlas=False)
        self.clients: Set[WebSocket] = set()
        self._tick_task: Optional[asyncio.Task] = None

    async def start(self) -> None:
        self._tick_task = asyncio.create_task(self._run())

    async def stop(self) -> None:
        if self._tick_task is not None:
            self._tick_task.cancel()
            try:
                await self._tick_task
            except asyncio.CancelledError:
                pass

    async def _run(self) -> None:
        loop = asyncio.get_running_loop()
        period = self.engine.dt
        next_due = loop.time()
        while True:
            for job in self.engine.take_atlas_jobs():
                asyncio.create_task(self._run_atlas_job(job))
            snap = self.engine.tick()
            payloads = [protocol.encode_message(m) for m in self.engine.take_outbox()]
            for mech in self.engine.take_atlas_updates():
                payloads.extend(
                    protocol.encode_message(m)
                    for m in self.engine.outbox_atlas_messages(mech)
                )
            if self.engine.tick_count % SNAPSHOT_DIVISOR == 0:
                payloads.append(protocol.encode_message(snap))
            if payloads and self.clients:
                await self._broadcast(payloads)
            next_due += period
            delay = next_due - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_due = loop.time()  # fell behind; don't burst-tick

    async def _run_atlas_job(self, job) -> None:
        result = await asyncio.get_running_loop().run_in_executor(
            None, compute_atlas, job
        )
        self.engine.post(result)

    async def _broadcast(self, payloads) -> None:
        dead = []
        for ws in list(self.clients):  # sockets may join/leave mid-send
            try:
                for text in payloads:
                    await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.clients.discard(ws)

    async def handle_socket(self, ws: WebSocket) -> None:
        await ws.accept()
        # Greet with the current atlas and an immediate snapshot.
        from .session import Mech

        for mech in (Mech.SERIAL, Mech.FIVEBAR):
            for msg in self.engine.outbox_atlas_messages(mech):
                await ws.send_text(protocol.encode_message(msg))
        await ws.send_text(protocol.encode_message(self.engine.snapshot()))
        self.clients.add(ws)
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = protocol.decode_client_message(text)
                except BadMessage as exc:
                    await ws.send_text(
                        protocol.encode_message(
                            {"type": "error", "code": "bad_message", "detail": str(exc)}
                        )
                    )
                    continue
                self.engine.post(msg)
        except WebSocketDisconnect:
            pass
        finally:
            self.clients.discard(ws)


def build_app(
    tick_hz: int = 100,
    grid_n: int = 400,
    headless: bool = False,
    ui_dir: Optional[Path] = None,
) -> FastAPI:
    service = Service(tick_hz=tick_hz, grid_n=grid_n)

    @asynccontextmanager
    async def lifespan(_app):
        await service.start()
        try:
            yield
        finally:
            await service.stop()

    app = FastAPI(title="mechhap", lifespan=lifespan)
    app.state.service = service

    @app.websocket("/ws")
    async def _ws(ws: WebSocket):
        await service.handle_socket(ws)

    if not headless:
        ui = ui_dir or default_ui_dir()
        if ui.is_dir() and (ui / "index.html").exists():
            app.mount("/", StaticFiles(directory=str(ui), html=True), name="ui")
        else:

            @app.get("/")
            async def _placeholder():
                return HTMLResponse(_PLACEHOLDER)

    return app


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="mechhap-service", description="Run the mechanism simulation service."
    )
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--tick-hz", type=int, default=100)
    parser.add_argument(
        "--grid", default="400x400", help="atlas resolution, e.g. 400x400"
    )
    parser.add_argument(
        "--headless", action="store_true", help="serve the protocol only, no UI"
    )
    parser.add_argument("--ui-dir", default=None, help="override the UI bundle path")
    args = parser.parse_args(argv)
    try:
        nx, _, ny = args.grid.lower().partition("x")
        grid_n = int(nx)
        if ny and int(ny) != grid_n:
            raise ValueError
    except ValueError:
        parser.error("--grid must look like 400x400 (square)")

    import uvicorn

    app = build_app(
        tick_hz=args.tick_hz,
        grid_n=grid_n,
        headless=args.headless,
        ui_dir=Path(args.ui_dir) if args.ui_dir else None,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")


if __name__ == "__main__":
    main()
