"""HTTP service consumed by the browser editor.

Endpoints:
  GET  /health         -> {"version": ...}
  POST /api/validate   {source}               -> {valid, diagnostics}
  POST /api/generate   {source, config, name?} -> application/zip attachment
  GET  /api/examples   -> [{name, source}], flagship first

The service is stateless: every request works on its own parsed model and an
in-memory bundle; the only shared artifacts are the immutable example corpus
and parser tables.  Limits: source payloads over 1 MiB are rejected with 413;
generation is expected to finish well inside 30 s (documented bound).
Validation-time dataset checks run only for datasets that resolve inside the
server-side examples directory; generation likewise embeds only server-side
datasets.  Static files for the web editor are served from `/` when a static
directory is supplied.
"""

from __future__ import annotations

import importlib.resources
import json
import os
import re
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from mlq import __version__, codegen
from mlq.engine import UnknownConfiguration
from mlq.parser import parse
from mlq.validator import validate

MAX_SOURCE_BYTES = 1024 * 1024

FLAGSHIP = "smart-grid-imputation"

_SAFE_NAME = re.compile(r"[^A-Za-z0-9._-]+")


def default_examples_dir() -> Path:
    return Path(str(importlib.resources.files("mlq") / "corpus"))


def _safe_join(base: Path, relative: str) -> Path | None:
    """Resolve `relative` under `base`, refusing escapes."""
    if os.path.isabs(relative):
        return None
    candidate = (base / relative).resolve()
    try:
        candidate.relative_to(base.resolve())
    except ValueError:
        return None
    return candidate


def _examples_dataset_reader(examples_dir: Path | None):
    """Header reader that only sees server-side example datasets; anything
    else returns None, which skips the dataset-aware checks."""
    if examples_dir is None:
        return None

    def reader(path: str):
        full = _safe_join(examples_dir, path)
        if full is None or not full.is_file():
            return None
        with open(full, newline="", encoding="utf-8") as fh:
            first = fh.readline().strip()
        return [c.strip() for c in first.split(",")] if first else []

    return reader


def _examples_dataset_resolver(examples_dir: Path | None):
    if examples_dir is None:
        return None

    def resolver(path: str):
        full = _safe_join(examples_dir, path)
        if full is None or not full.is_file():
            return None
        return full.read_bytes()

    return resolver


def _diagnostics_json(diagnostics) -> list[dict]:
    return [{"severity": d.severity.value, "code": d.code,
             "message": d.message, "line": d.line, "col": d.col}
            for d in diagnostics]


async def _json_body(request: Request) -> dict | None:
    try:
        body = json.loads(await request.body())
    except (ValueError, UnicodeDecodeError):
        return None
    return body if isinstance(body, dict) else None


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse({"detail": detail}, status_code=400)


def create_app(examples_dir: Path | str | None = None,
               static_dir: Path | str | None = None) -> FastAPI:
    if examples_dir is None:
        examples_dir = default_examples_dir()
    examples_dir = Path(examples_dir) if examples_dir else None
    app = FastAPI(title="mlq service", version=__version__)
    reader = _examples_dataset_reader(examples_dir)
    resolver = _examples_dataset_resolver(examples_dir)

    @app.get("/health")
    def health():
        return {"version": __version__}

    @app.post("/api/validate")
    async def api_validate(request: Request):
        body = await _json_body(request)
        if body is None or not isinstance(body.get("source"), str):
            return _bad_request("body must be a JSON object with a "
                                "'source' string")
        source = body["source"]
        if len(source.encode("utf-8")) > MAX_SOURCE_BYTES:
            return JSONResponse({"detail": "source exceeds 1 MiB"},
                                status_code=413)
        model, diags = parse(source)
        if model is None:
            return {"valid": False, "diagnostics": _diagnostics_json(diags)}
        report = validate(model, reader)
        return {"valid": report.valid,
                "diagnostics": _diagnostics_json(report.diagnostics)}

    @app.post("/api/generate")
    async def api_generate(request: Request):
        body = await _json_body(request)
        if body is None or not isinstance(body.get("source"), str) \
                or not isinstance(body.get("config"), str):
            return _bad_request("body must be a JSON object with 'source' "
                                "and 'config' strings")
        source = body["source"]
        if len(source.encode("utf-8")) > MAX_SOURCE_BYTES:
            return JSONResponse({"detail": "source exceeds 1 MiB"},
                                status_code=413)
        name = body.get("name") or "model"
        name = _SAFE_NAME.sub("-", str(name)).strip("-.") or "model"
        model, diags = parse(source, name)
        if model is None:
            return JSONResponse(
                {"valid": False, "diagnostics": _diagnostics_json(diags)},
                status_code=422)
        try:
            bundle = codegen.generate(model, body["config"], "self", resolver)
        except codegen.GenerationPreconditionFailed as exc:
            return JSONResponse(
                {"valid": False,
                 "diagnostics": _diagnostics_json(exc.diagnostics)},
                status_code=422)
        except UnknownConfiguration as exc:
            return JSONResponse({"detail": str(exc)}, status_code=404)
        archive = codegen.zip_bundle(bundle)
        filename = f"{name}-generated.zip"
        return Response(
            content=archive,
            media_type="application/zip",
            headers={"Content-Disposition":
                     f'attachment; filename="{filename}"'})

    @app.get("/api/examples")
    def api_examples():
        if examples_dir is None or not examples_dir.is_dir():
            return []
        entries = []
        for path in examples_dir.glob("*.mlq"):
            entries.append({"name": path.stem,
                            "source": path.read_text(encoding="utf-8")})
        entries.sort(key=lambda e: (e["name"] != FLAGSHIP, e["name"]))
        return entries

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="editor")

    return app


def serve(port: int = 8000, examples_dir: str | None = None,
          static_dir: str | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn

    app = create_app(examples_dir, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
