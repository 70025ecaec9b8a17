"""HTTP/JSON transport over the service core.

All routes live under /api/v1 and answer canonical JSON (sorted keys,
compact separators) so that identical state yields identical bytes.
Status mapping: 400 malformed payload or date, 401 bad token, 404 unknown
entity, 422 privacy violation.

Authentication is a static bearer token per role (device, teacher,
parent) loaded from a token file; which roles may hit which route is
fixed: devices ingest and self-report, teachers annotate, teachers and
parents read and message.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, Request, Response

from .errors import (
    BadDate,
    BadRole,
    CueNotFound,
    EmptyText,
    PrivacyViolation,
    SchemaError,
    SelfSighting,
    SensemeError,
    UnknownChild,
    UnknownDevice,
    UnknownEmotion,
)
from .service import AwarenessService, canonical_json, parse_date_param

_STATUS_BY_ERROR = [
    (PrivacyViolation, 422),
    (UnknownDevice, 404),
    (UnknownChild, 404),
    (UnknownEmotion, 404),
    (CueNotFound, 404),
    (SchemaError, 400),
    (SelfSighting, 400),
    (EmptyText, 400),
    (BadRole, 400),
    (BadDate, 400),
]

ROLE_DEVICE = "device"
ROLE_TEACHER = "teacher"
ROLE_PARENT = "parent"


def _error_response(exc: SensemeError) -> Response:
    status = 500
    for cls, code in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            status = code
            break
    body = {"error": type(exc).__name__, "detail": str(exc)}
    return Response(content=canonical_json(body), status_code=status,
                    media_type="application/json")


def _json_response(obj: object, status: int = 200) -> Response:
    return Response(content=canonical_json(obj), status_code=status,
                    media_type="application/json")


def _unauthorized() -> Response:
    return Response(
        content=canonical_json({"error": "Unauthorized", "detail": "bad or missing token"}),
        status_code=401, media_type="application/json",
    )


def load_tokens(path: str | Path) -> dict[str, str]:
    """Token file: {"device": ..., "teacher": ..., "parent": ...}."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise SchemaError("token file must be a JSON object of role -> token")
    tokens = {}
    for role in (ROLE_DEVICE, ROLE_TEACHER, ROLE_PARENT):
        token = doc.get(role)
        if not isinstance(token, str) or not token:
            raise SchemaError(f"token file missing a token for role {role!r}")
        tokens[role] = token
    if len(set(tokens.values())) != len(tokens):
        raise SchemaError("role tokens must be distinct")
    return tokens


def create_app(
    service: AwarenessService,
    tokens: Mapping[str, str],
    console_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="senseme awareness service", docs_url=None, redoc_url=None)
    role_by_token = {token: role for role, token in tokens.items()}

    def role_of(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return None
        return role_by_token.get(header[7:].strip())

    async def read_body(request: Request) -> dict:
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise SchemaError("request body must be valid JSON")
        if not isinstance(body, dict):
            raise SchemaError("request body must be a JSON object")
        return body

    @app.exception_handler(SensemeError)
    async def handle_domain_error(request: Request, exc: SensemeError) -> Response:
        return _error_response(exc)

    # -- ingestion (device role) --------------------------------------

    @app.post("/api/v1/ingest/features")
    async def ingest_features(request: Request) -> Response:
        if role_of(request) != ROLE_DEVICE:
            return _unauthorized()
        seq = service.ingest_features(await read_body(request))
        return _json_response({"seq": seq}, status=200)

    @app.post("/api/v1/ingest/proximity")
    async def ingest_proximity(request: Request) -> Response:
        if role_of(request) != ROLE_DEVICE:
            return _unauthorized()
        seq = service.ingest_proximity(await read_body(request))
        return _json_response({"seq": seq}, status=200)

    @app.post("/api/v1/selfreport")
    async def selfreport(request: Request) -> Response:
        if role_of(request) != ROLE_DEVICE:
            return _unauthorized()
        seq = service.submit_selfreport(await read_body(request))
        return _json_response({"seq": seq}, status=200)

    # -- review and messaging (teacher / parent roles) ------------------

    def reader_role(request: Request) -> str | None:
        role = role_of(request)
        return role if role in (ROLE_TEACHER, ROLE_PARENT) else None

    @app.get("/api/v1/children/{child_id}/cues")
    async def cues(child_id: str, request: Request) -> Response:
        if reader_role(request) is None:
            return _unauthorized()
        day = parse_date_param(_require_param(request, "date"))
        return _json_response(service.get_cues(child_id, day))

    @app.post("/api/v1/cues/{cue_key}/annotations")
    async def annotate(cue_key: str, request: Request) -> Response:
        if role_of(request) != ROLE_TEACHER:
            return _unauthorized()
        body = await read_body(request)
        teacher = body.get("teacher", "teacher")
        if not isinstance(teacher, str) or not teacher:
            raise SchemaError("'teacher' must be a non-empty string")
        annotation_id = service.annotate_cue(
            cue_key, teacher, body.get("text", ""), t=_optional_int(body, "t"),
        )
        return _json_response({"id": annotation_id}, status=201)

    @app.post("/api/v1/messages")
    async def post_message(request: Request) -> Response:
        role = reader_role(request)
        if role is None:
            return _unauthorized()
        body = await read_body(request)
        sender_role = body.get("sender_role", role)
        if sender_role != role:
            raise BadRole(f"token role {role!r} cannot send as {sender_role!r}")
        message_id = service.post_message(
            child=body.get("child", ""),
            sender_role=sender_role,
            text=body.get("text", ""),
            t=_optional_int(body, "t"),
        )
        return _json_response({"id": message_id}, status=201)

    @app.get("/api/v1/messages")
    async def get_messages(request: Request) -> Response:
        if reader_role(request) is None:
            return _unauthorized()
        child = _require_param(request, "child")
        since_text = request.query_params.get("since")
        since = None
        if since_text is not None and since_text != "":
            try:
                since = int(since_text)
            except ValueError:
                raise SchemaError(f"bad since cursor {since_text!r}") from None
        return _json_response(service.get_messages(child, since))

    @app.get("/api/v1/children/{child_id}/location")
    async def location(child_id: str, request: Request) -> Response:
        if reader_role(request) is None:
            return _unauthorized()
        at_text = _require_param(request, "at")
        try:
            at = int(at_text)
        except ValueError:
            raise BadDate(f"bad timestamp {at_text!r}") from None
        return _json_response({"child": child_id, "at": at,
                               "label": service.get_location(child_id, at)})

    @app.get("/api/v1/children/{child_id}/selfreports")
    async def selfreports(child_id: str, request: Request) -> Response:
        if reader_role(request) is None:
            return _unauthorized()
        day = parse_date_param(_require_param(request, "date"))
        return _json_response(service.get_selfreports(child_id, day))

    @app.get("/api/v1/graph")
    async def graph(request: Request) -> Response:
        if reader_role(request) is None:
            return _unauthorized()
        day = parse_date_param(_require_param(request, "date"))
        return _json_response(service.get_graph(day))

    @app.get("/api/v1/meta")
    async def meta() -> Response:
        return _json_response(service.meta())

    if console_dir is not None and Path(console_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=str(console_dir), html=True),
                  name="console")

    return app


def _require_param(request: Request, name: str) -> str:
    value = request.query_params.get(name)
    if value is None or value == "":
        raise SchemaError(f"missing required query parameter {name!r}")
    return value


def _optional_int(body: Mapping, field: str) -> int | None:
    value = body.get(field)
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{field!r} must be an integer")
    return value


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="senseme-service",
        description="Run the awareness service over HTTP.",
    )
    parser.add_argument("--log-path", required=True, help="event log file (created if absent)")
    parser.add_argument("--timetable", required=True, help="timetable JSON file")
    parser.add_argument("--overrides", default=None, help="schedule overrides JSON file")
    parser.add_argument("--roster", required=True, help="roster JSON file")
    parser.add_argument("--token-file", required=True, help="role token JSON file")
    parser.add_argument("--listen", default="127.0.0.1:8000", help="host:port to bind")
    parser.add_argument("--console-dir", default=None, help="static console bundle to serve at /console")
    args = parser.parse_args(argv)

    timetable = Path(args.timetable).read_text(encoding="utf-8")
    overrides = Path(args.overrides).read_text(encoding="utf-8") if args.overrides else None
    roster = Path(args.roster).read_text(encoding="utf-8")
    service = AwarenessService(args.log_path, timetable, overrides, roster)
    tokens = load_tokens(args.token_file)
    app = create_app(service, tokens, console_dir=args.console_dir)

    host, _, port_text = args.listen.rpartition(":")
    host = host or "127.0.0.1"

    import uvicorn

    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
