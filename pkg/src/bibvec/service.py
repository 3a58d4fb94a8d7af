"""Read-only HTTP API over a loaded model, plus static hosting for the
browser explorer.

Endpoints (all GET, all JSON):

    /healthz                        liveness probe
    /api/categories                 category names/kinds/sizes + UI defaults
    /api/element?category&token     existence check with frequency
    /api/related?category&token&target&measure&k
                                    top-k ranking from the search module

The service adds no ranking logic of its own: /api/related is a direct
serialization of ``search.top_k``.  Scores are rounded to six significant
digits on the wire.  Unknown tokens yield 404 bodies carrying spelling
suggestions; invalid parameters yield 400.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .corpus import Vocabulary
from .model import EmbeddingModel
from .search import MEASURES, UnknownTokenError, resolve_query, top_k

DEFAULT_K = 30
DEFAULT_MEASURE = "linear"


def sig6(x: float) -> float:
    """Round to six significant digits for wire serialization."""
    return float(f"{x:.6g}")


def create_app(model: EmbeddingModel, vocab: Vocabulary,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="bibvec", docs_url=None, redoc_url=None)

    def bad_request(message: str) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": message})

    def not_found(exc: UnknownTokenError) -> JSONResponse:
        return JSONResponse(status_code=404, content={
            "error": str(exc), "suggestions": exc.suggestions})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/categories")
    def categories():
        return {
            "categories": [
                {"name": s.name, "kind": s.kind, "size": vocab.size(s.name)}
                for s in vocab.specs
            ],
            "defaults": {"measure": DEFAULT_MEASURE, "k": DEFAULT_K},
        }

    @app.get("/api/element")
    def element(category: str, token: str):
        if category not in vocab:
            return bad_request(f"unknown category {category!r}")
        try:
            ref = resolve_query(vocab, category, token)
        except UnknownTokenError as exc:
            return not_found(exc)
        cv = vocab.cat(category)
        return {"category": category, "token": cv.tokens[ref.index],
                "index": ref.index, "frequency": int(cv.freqs[ref.index])}

    @app.get("/api/related")
    def related(category: str, token: str, target: str,
                measure: str = DEFAULT_MEASURE, k: int = DEFAULT_K):
        if category not in vocab:
            return bad_request(f"unknown category {category!r}")
        if target not in vocab:
            return bad_request(f"unknown target category {target!r}")
        if measure not in MEASURES:
            return bad_request(f"invalid measure {measure!r}; choose from "
                               f"{list(MEASURES)}")
        if k < 1:
            return bad_request("k must be >= 1")
        try:
            query = resolve_query(vocab, category, token)
        except UnknownTokenError as exc:
            return not_found(exc)
        try:
            items = top_k(model, vocab, query, target, measure, k=k)
        except ValueError as exc:
            return bad_request(str(exc))
        return {
            "query": {"category": category,
                      "token": vocab.token(category, query.index),
                      "target": target, "measure": measure, "k": k},
            "results": [{"token": it.token, "category": target,
                         "score": sig6(it.score)} for it in items],
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="static")
    return app


def serve(model: EmbeddingModel, vocab: Vocabulary, bind: str = "127.0.0.1:8080",
          static_dir: str | Path | None = None) -> None:
    """Run the API under uvicorn until interrupted."""
    import uvicorn

    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind address must be HOST:PORT, got {bind!r}")
    app = create_app(model, vocab, static_dir=static_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="info")
