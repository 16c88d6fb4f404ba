"""FastAPI session service: WebSocket protocol plus static UI hosting.

One session per connection; messages within a session are handled serially.
A process-wide semaphore caps concurrent precomputes (the expensive path),
while relayer-style updates run freely.
"""

import json
import threading

import anyio
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, ValidationError

from . import models
from .session import Session, SessionError

_PRECOMPUTE_SLOTS = 1
_precompute_gate = threading.Semaphore(_PRECOMPUTE_SLOTS)


def _gated_load(session, payload):
    with _precompute_gate:
        return session.load(payload)


async def _send_frames(ws, frames):
    for frame in frames:
        if isinstance(frame, BaseModel):
            await ws.send_text(frame.model_dump_json())
        else:
            await ws.send_bytes(frame)


class HealthResponse(BaseModel):
    status: str
    version: str


def create_app(max_pixels=4_000_000, preview_max_edge=1024, ui_dir=None):
    from .. import __version__

    app = FastAPI(title="palettekit session service", version=__version__)

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=__version__)

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(max_pixels=max_pixels, preview_max_edge=preview_max_edge)
        try:
            while True:
                raw = await ws.receive()
                if raw.get("type") == "websocket.disconnect":
                    break
                text = raw.get("text")
                if text is None:
                    await _send_frames(
                        ws,
                        [models.ErrorFrame(code="protocol", message="expected a JSON text frame")],
                    )
                    continue
                try:
                    msg = models.client_message_adapter.validate_python(json.loads(text))
                except (json.JSONDecodeError, ValidationError) as exc:
                    await _send_frames(
                        ws, [models.ErrorFrame(code="bad_message", message=str(exc))]
                    )
                    continue
                try:
                    if isinstance(msg, models.LoadMsg):
                        payload = await ws.receive_bytes()
                        frames = await anyio.to_thread.run_sync(_gated_load, session, payload)
                    else:
                        frames = await anyio.to_thread.run_sync(session.handle, msg)
                    await _send_frames(ws, frames)
                except SessionError as exc:
                    await _send_frames(
                        ws, [models.ErrorFrame(code=exc.code, message=str(exc))]
                    )
                except Exception as exc:  # keep the session alive on bad input
                    await _send_frames(
                        ws, [models.ErrorFrame(code="processing", message=str(exc))]
                    )
        except WebSocketDisconnect:
            pass

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
