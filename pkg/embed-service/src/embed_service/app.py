"""HTTP surface: POST /embed and GET /health.

Contract: /embed takes {"texts": [str, ...]} (1..1024 items) and returns
{"vectors": [[float, ...], ...], "dim": int, "model": str} with unit-norm
rows, deterministically for identical input. Errors: 400 malformed body,
413 batch too large, 503 model not loaded. Model and port come from the
environment (EMBED_SERVICE_MODEL, EMBED_SERVICE_PORT).
"""

from __future__ import annotations

import logging
import os
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .encoders import load_encoder

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"
MAX_BATCH = 1024


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


def create_app(model_spec: str | None = None) -> FastAPI:
    spec = model_spec or os.environ.get("EMBED_SERVICE_MODEL", DEFAULT_MODEL)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            app.state.encoder = load_encoder(spec)
            logger.info("loaded encoder %s (dim %d)", spec, app.state.encoder.dim)
        except Exception as exc:
            app.state.encoder = None
            app.state.error = f"failed to load model {spec!r}: {exc}"
            logger.error("%s", app.state.error)
        yield

    app = FastAPI(title="embed-service", lifespan=lifespan)
    app.state.encoder = None
    app.state.error = None

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    async def health():
        encoder = app.state.encoder
        if encoder is None:
            status = "error" if app.state.error else "loading"
            return JSONResponse(
                status_code=503,
                content={"status": status, "model": spec, "detail": app.state.error},
            )
        return {"status": "ok", "model": encoder.model_name, "dim": encoder.dim}

    @app.post("/embed")
    async def embed(request: EmbedRequest):
        encoder = app.state.encoder
        if encoder is None:
            return JSONResponse(
                status_code=503,
                content={"detail": app.state.error or "model not loaded"},
            )
        if len(request.texts) > MAX_BATCH:
            return JSONResponse(
                status_code=413,
                content={"detail": f"batch of {len(request.texts)} exceeds {MAX_BATCH}"},
            )
        vectors = np.asarray(encoder.encode(request.texts), dtype=np.float64)
        # normalize defensively; the contract promises unit rows
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        vectors = np.divide(vectors, norms, out=vectors, where=norms > 1e-12)
        return {
            "vectors": vectors.tolist(),
            "dim": int(vectors.shape[1]),
            "model": encoder.model_name,
        }

    return app


def main() -> None:
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    uvicorn.run(
        create_app(),
        host=os.environ.get("EMBED_SERVICE_HOST", "127.0.0.1"),
        port=int(os.environ.get("EMBED_SERVICE_PORT", "8230")),
    )


if __name__ == "__main__":
    main()
