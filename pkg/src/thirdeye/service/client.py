"""In-process HTTP access to the service app.

Lets the CLI (and tests) speak real HTTP to the FastAPI app without running
a server: each request drives the ASGI app on a private event loop.
"""

import asyncio

import httpx


class InProcessTransport(httpx.BaseTransport):
    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call():
            response = await self._transport.handle_async_request(request)
            await response.aread()
            return response

        response = asyncio.run(call())
        return httpx.Response(
            response.status_code,
            headers=response.headers,
            content=response.content,
            request=request,
        )


def in_process_client(app=None) -> httpx.Client:
    if app is None:
        from .app import create_app

        app = create_app()
    return httpx.Client(
        transport=InProcessTransport(app), base_url="http://thirdeye.internal"
    )
