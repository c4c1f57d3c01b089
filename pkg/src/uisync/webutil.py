"""ASGI plumbing: background uvicorn servers and websocket fan-out."""

from __future__ import annotations

import asyncio
import threading
import time

import uvicorn


class HttpServerThread:
    """Owns one uvicorn server; start() returns once it is accepting."""

    def __init__(self, app, host: str = "127.0.0.1", port: int = 0):
        self._config = uvicorn.Config(app, host=host, port=port, log_level="warning")
        self._server = uvicorn.Server(self._config)
        self._thread: threading.Thread | None = None

    def start(self, timeout: float = 10.0) -> None:
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + timeout
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("http server failed to start in time")
            if not self._thread.is_alive():
                raise RuntimeError("http server thread died during startup")
            time.sleep(0.01)

    @property
    def port(self) -> int:
        for server in self._server.servers:
            for sock in server.sockets:
                return sock.getsockname()[1]
        raise RuntimeError("server has no bound sockets")

    def stop(self, timeout: float = 5.0) -> None:
        self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout)


async def stream_queue_to_ws(ws, queue: asyncio.Queue) -> None:
    """Forward queue items as JSON until the client disconnects.

    Waits on the socket and the queue simultaneously, so a handler parked on
    an empty queue still notices the disconnect (otherwise it would pin the
    server at shutdown).
    """
    recv_task = asyncio.create_task(ws.receive())
    try:
        while True:
            get_task = asyncio.create_task(queue.get())
            done, _ = await asyncio.wait(
                {recv_task, get_task}, return_when=asyncio.FIRST_COMPLETED
            )
            if recv_task in done:
                if recv_task.result()["type"] == "websocket.disconnect":
                    get_task.cancel()
                    return
                recv_task = asyncio.create_task(ws.receive())  # inbound data: ignore
            if get_task.done():
                await ws.send_json(get_task.result())
            else:
                get_task.cancel()
    finally:
        recv_task.cancel()
