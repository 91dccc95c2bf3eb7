"""Authenticated read-only HTTP API over a loaded dataset snapshot.

Routes (all JSON unless noted; every error body is `{"code", "message"}`):

    POST /api/login                      {username, password} -> {token, ...}
    GET  /api/top?from&to&kind&limit     ranking page for a period and kind
    GET  /api/content/{cluster_id}?from&to   spread details for one cluster
    GET  /api/media/{checksum}           blob bytes, immutable-cache headers
    GET  /api/stats/members_cdf?kind     member-count CDF over the registry
    GET  /api/stats/weekly_volume        messages per ISO week

Everything except /api/login requires `Authorization: Bearer <token>`.
Sender identities are never exposed, not even pseudonymized; only the
aggregate distinct-sender counts leave the service.
"""

from __future__ import annotations

import json
import logging
from datetime import date

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .auth import AuthError, TokenStore, load_accounts, verify_password
from .config import MonitorConfig
from .models import ContentCluster, Period, ValidationError
from .rank_stats import UnknownClusterError, content_details, members_cdf, top_content, weekly_volume
from .store import BlobNotFoundError, Dataset

logger = logging.getLogger(__name__)

RANK_KINDS = ("image", "video", "audio", "text")
MAX_LIMIT = 200
DEFAULT_LIMIT = 50

# burns the same time as a real check when the username is unknown
_DUMMY_DIGEST = (
    "pbkdf2_sha256$200000$00000000000000000000000000000000"
    "$0000000000000000000000000000000000000000000000000000000000000000"
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _bad_request(message: str) -> ApiError:
    return ApiError(400, "bad_request", message)


def _parse_date(value: str, name: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise _bad_request(f"{name} must be a YYYY-MM-DD date, got {value!r}") from None


def _parse_period(from_: str | None, to: str | None) -> Period:
    if from_ is None or to is None:
        raise _bad_request("'from' and 'to' query parameters are required")
    start, end = _parse_date(from_, "from"), _parse_date(to, "to")
    try:
        return Period(start, end)
    except ValidationError as exc:
        raise _bad_request(str(exc)) from None


def _representative(cluster: ContentCluster) -> dict:
    if cluster.kind == "text":
        return {"kind": "text", "text": cluster.representative_text}
    blob = cluster.representative_blob
    return {
        "kind": cluster.kind,
        "checksum": blob.checksum,
        "media_url": f"/api/media/{blob.checksum}",
    }


def _sniff_content_type(payload: bytes) -> str:
    if payload.startswith(b"\x89PNG\r\n\x1a\n"):
        return "image/png"
    if payload.startswith(b"\xff\xd8\xff"):
        return "image/jpeg"
    return "application/octet-stream"


def create_app(dataset: Dataset, config: MonitorConfig, token_store: TokenStore | None = None) -> FastAPI:
    if config.accounts_file is None:
        raise ValidationError("serving requires accounts_file in the config")
    accounts = load_accounts(config.accounts_file)
    tokens = token_store or TokenStore(ttl_seconds=config.token_ttl_seconds)

    app = FastAPI(title="chat monitor", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.dataset = dataset
    app.state.tokens = tokens
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin],
        allow_methods=["GET", "POST"],
        allow_headers=["Authorization", "Content-Type"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    def require_auth(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "unauthorized", "missing bearer token")
        try:
            return tokens.check(header[7:].strip())
        except AuthError as exc:
            raise ApiError(401, exc.code, str(exc)) from None

    @app.post("/api/login")
    async def login(request: Request) -> JSONResponse:
        try:
            body = json.loads(await request.body())
            username, password = body["username"], body["password"]
            if not isinstance(username, str) or not isinstance(password, str):
                raise TypeError
        except (json.JSONDecodeError, KeyError, TypeError):
            raise _bad_request("body must be JSON with string 'username' and 'password'") from None
        account = accounts.get(username)
        digest = account.password_digest if account else _DUMMY_DIGEST
        if not verify_password(password, digest) or account is None:
            raise ApiError(401, "bad_credentials", "unknown username or wrong password")
        token = tokens.issue(username)
        return JSONResponse({"token": token, "expires_in_seconds": tokens.ttl_seconds})

    @app.get("/api/top")
    async def top(request: Request) -> JSONResponse:
        require_auth(request)
        ds: Dataset = app.state.dataset
        params = request.query_params
        period = _parse_period(params.get("from"), params.get("to"))
        kind = params.get("kind")
        if kind not in RANK_KINDS:
            raise _bad_request(f"kind must be one of {', '.join(RANK_KINDS)}")
        raw_limit = params.get("limit", str(DEFAULT_LIMIT))
        try:
            limit = int(raw_limit)
        except ValueError:
            raise _bad_request(f"limit must be an integer, got {raw_limit!r}") from None
        if not 1 <= limit <= MAX_LIMIT:
            raise _bad_request(f"limit must be in [1, {MAX_LIMIT}]")

        by_id = ds.clusters_by_id()
        entries = top_content(ds.clusters, ds.messages, period, kind, limit)
        payload = [
            {
                "rank": e.rank,
                "cluster_id": e.cluster_id,
                "period_share_count": e.period_share_count,
                "period_distinct_groups": e.period_distinct_groups,
                "period_distinct_senders": e.period_distinct_senders,
                "representative": _representative(by_id[e.cluster_id]),
            }
            for e in entries
        ]
        return JSONResponse(payload)

    @app.get("/api/content/{cluster_id}")
    async def content(cluster_id: str, request: Request) -> JSONResponse:
        require_auth(request)
        ds: Dataset = app.state.dataset
        params = request.query_params
        period = None
        if params.get("from") is not None or params.get("to") is not None:
            period = _parse_period(params.get("from"), params.get("to"))
        try:
            details = content_details(
                cluster_id,
                ds.clusters_by_id(),
                ds.messages,
                ds.registry,
                period=period,
                media_url_base=config.public_base_url,
            )
        except UnknownClusterError:
            raise ApiError(404, "not_found", f"no cluster {cluster_id!r}") from None
        payload = {
            "cluster_id": details.cluster_id,
            "kind": details.kind,
            "period_share_count": details.period_share_count,
            "period_distinct_groups": details.period_distinct_groups,
            "period_distinct_senders": details.period_distinct_senders,
            "group_titles": list(details.group_titles),
            "representative": _representative(ds.clusters_by_id()[cluster_id]),
        }
        if details.reverse_search_url is not None:
            payload["reverse_search_url"] = details.reverse_search_url
        return JSONResponse(payload)

    @app.get("/api/media/{checksum}")
    async def media(checksum: str, request: Request) -> Response:
        require_auth(request)
        ds: Dataset = app.state.dataset
        try:
            payload = ds.blobs.get(checksum)
        except (BlobNotFoundError, ValueError):
            raise ApiError(404, "not_found", f"no media {checksum!r}") from None
        return Response(
            content=payload,
            media_type=_sniff_content_type(payload),
            headers={"Cache-Control": "public, max-age=31536000, immutable"},
        )

    @app.get("/api/stats/members_cdf")
    async def stats_members_cdf(request: Request) -> JSONResponse:
        require_auth(request)
        ds: Dataset = app.state.dataset
        kind = request.query_params.get("kind")
        if kind is not None and kind not in ("group", "channel"):
            raise _bad_request("kind must be 'group' or 'channel'")
        try:
            points = members_cdf(ds.registry, kind=kind)
        except ValidationError as exc:
            raise _bad_request(str(exc)) from None
        return JSONResponse(
            [{"member_count": m, "cumulative_fraction": f} for m, f in points]
        )

    @app.get("/api/stats/weekly_volume")
    async def stats_weekly_volume(request: Request) -> JSONResponse:
        require_auth(request)
        ds: Dataset = app.state.dataset
        series = weekly_volume(ds.messages.values())
        return JSONResponse([{"week": w, "count": n} for w, n in series])

    return app
