"""HTTP JSON service exposing the pipeline to the query workbench.

Endpoints: GET /events, GET /events/{id}/messages, POST /queries,
POST /rank, POST /summarize. Every response carries the seed and backend
identities so any result can be reproduced bit-for-bit from the CLI.
Schema violations map to 400, unknown ids to 404, backend failures and
timeouts to 503.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .corpus import CategoryId, Message
from .errors import BackendError, ValidationError
from .models import RankedCandidate
from .queries import Query
from .session import Session
from .summarize import Summary


class QueryBody(BaseModel):
    id: str | None = None
    category: str
    keywords: list[str] = Field(default_factory=list)
    templates: list[str] = Field(default_factory=list)
    prototypes: list[str] = Field(default_factory=list)


class RankBody(BaseModel):
    query_id: str
    event_id: str
    k: int | None = None


class SummarizeBody(BaseModel):
    query_id: str
    event_id: str
    mode: str = "regular"
    budget: int | None = None


def _message_record(message: Message) -> dict:
    return {
        "id": message.id,
        "text": message.text,
        "lang": message.lang,
        "informative": message.informative,
        "categories": sorted(c.value for c in message.categories),
    }


def _candidate_record(candidate: RankedCandidate) -> dict:
    f = candidate.features
    return {
        "message_id": candidate.message_id,
        "text": candidate.text,
        "lang": candidate.lang,
        "score": candidate.score,
        "position": candidate.position,
        "features": {
            "kw_avg": f.kw_avg,
            "kw_max": f.kw_max,
            "tpl_avg": f.tpl_avg,
            "tpl_max": f.tpl_max,
            "proto_avg": f.proto_avg,
            "proto_max": f.proto_max,
        },
    }


def _summary_record(summary: Summary) -> dict:
    return {
        "mode": summary.mode,
        "full_text": summary.full_text,
        "segments": [
            {
                "text": s.text,
                "cluster_size": s.cluster_size,
                "source_ids": list(s.source_ids),
            }
            for s in summary.segments
        ],
        "truncated": summary.truncated,
    }


def create_app(session: Session, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="crisis-scope", version="0.1.0")
    executor = ThreadPoolExecutor(max_workers=4)
    timeout = session.config.request_timeout_s

    def _run_with_timeout(fn, *args, **kwargs):
        future = executor.submit(fn, *args, **kwargs)
        try:
            return future.result(timeout=timeout)
        except FutureTimeoutError:
            raise HTTPException(
                status_code=503,
                detail="request timed out; retry later",
                headers={"Retry-After": "5"},
            ) from None

    @app.exception_handler(RequestValidationError)
    async def _schema_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(BackendError)
    async def _backend_error(_request: Request, exc: BackendError):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    @app.get("/events")
    def list_events():
        events = [
            {
                "event_id": coll.event_id,
                "name": coll.name,
                "messages": len(coll),
                "informative": coll.informative_count,
                "languages": sorted(coll.languages),
            }
            for coll in session.collections.values()
        ]
        return {"events": events, "meta": session.meta()}

    @app.get("/events/{event_id}/messages")
    def list_messages(
        event_id: str,
        informative: bool | None = None,
        lang: str | None = None,
        offset: int = 0,
        limit: int = 50,
    ):
        if offset < 0 or not 1 <= limit <= 500:
            raise HTTPException(status_code=400, detail="bad offset/limit")
        try:
            collection = session.get_collection(event_id)
        except ValidationError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        selected = [
            m
            for m in collection.messages
            if (informative is None or m.informative == informative)
            and (lang is None or m.lang == lang)
        ]
        page = selected[offset : offset + limit]
        return {
            "total": len(selected),
            "offset": offset,
            "limit": limit,
            "messages": [_message_record(m) for m in page],
            "meta": session.meta(),
        }

    @app.post("/queries")
    def upsert_query(body: QueryBody):
        try:
            query = Query(
                category=CategoryId.from_name(body.category),
                keywords=tuple(s.strip() for s in body.keywords if s.strip()),
                templates=tuple(s.strip() for s in body.templates if s.strip()),
                prototypes=tuple(s.strip() for s in body.prototypes if s.strip()),
            )
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        query_id = session.upsert_query(query, query_id=body.id)
        return {"id": query_id, "meta": session.meta()}

    @app.get("/queries")
    def list_queries():
        from .queries import query_to_record

        return {
            "queries": {qid: query_to_record(q) for qid, q in session.queries.items()},
            "meta": session.meta(),
        }

    def _resolve(query_id: str, event_id: str) -> None:
        if query_id not in session.queries:
            raise HTTPException(status_code=404, detail=f"unknown query {query_id!r}")
        if event_id not in session.collections:
            raise HTTPException(status_code=404, detail=f"unknown event {event_id!r}")

    @app.post("/rank")
    def rank_endpoint(body: RankBody):
        _resolve(body.query_id, body.event_id)
        if body.k is not None and body.k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        try:
            results = _run_with_timeout(
                session.rank, body.query_id, body.event_id, body.k
            )
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {
            "candidates": [_candidate_record(c) for c in results],
            "meta": session.meta(),
        }

    @app.post("/summarize")
    def summarize_endpoint(body: SummarizeBody):
        _resolve(body.query_id, body.event_id)
        if body.mode not in ("regular", "diversified"):
            raise HTTPException(status_code=400, detail=f"unknown mode {body.mode!r}")
        try:
            summary = _run_with_timeout(
                session.summarize, body.query_id, body.event_id, body.mode, body.budget
            )
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"summary": _summary_record(summary), "meta": session.meta()}

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
