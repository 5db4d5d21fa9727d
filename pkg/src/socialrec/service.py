"""REST facade: ingestion, recommendations, profile admin and evaluation runs.

Routes
------
POST /data/interactions | /data/resources | /data/tags
GET  /rec/popular?k=
GET  /rec/cf?user=&k=&signal=
GET  /rec/cbf?user=&k=
GET  /rec/similar?resource=&k=
GET  /rec/contextual?user=&resource=&k=
GET  /rec/goal?user=&goal=&lambda=&k=
GET  /admin/profiles, GET/PUT /admin/profiles/{id}
POST /eval/run, GET /eval/runs/{id}
GET  /stats, GET /health

Environment: SOCIALREC_HOST, SOCIALREC_PORT, SOCIALREC_REFRESH_MS,
SOCIALREC_PROFILES (profiles.json path), SOCIALREC_DATA (snapshot dir to load).
"""

from __future__ import annotations

import contextlib
import json
import logging
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from socialrec import dataio
from socialrec.engine import Engine, GoalSpec, RankedList
from socialrec.errors import NotFoundError, ValidationError
from socialrec.evaluator.harness import evaluate_dataset
from socialrec.evaluator.synth import SyntheticConfig, generate_from_config
from socialrec.profiles import ProfileRegistry, RecommendationProfile, Signal
from socialrec.store import DEFAULT_REFRESH_MS, Interaction, Store, TagAssignment

logger = logging.getLogger(__name__)


class RankedItem(BaseModel):
    resource_id: str
    score: float = Field(ge=0)
    rank: int = Field(ge=1)


class RecommendationResponse(BaseModel):
    items: list[RankedItem]
    algorithm_id: str
    profile_version: int
    cold_start: bool
    elapsed_ms: float = Field(ge=0)
    neighborhood_size: Optional[int] = None


class IngestResponse(BaseModel):
    accepted: int
    rejected: int
    errors: list[dict[str, Any]]
    store_version: int


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    refresh_ms: int = DEFAULT_REFRESH_MS
    profiles_path: str | None = None
    data_dir: str | None = None

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None) -> "ServiceConfig":
        env = os.environ if environ is None else environ
        return cls(
            host=env.get("SOCIALREC_HOST", "127.0.0.1"),
            port=int(env.get("SOCIALREC_PORT", "8000")),
            refresh_ms=int(env.get("SOCIALREC_REFRESH_MS", str(DEFAULT_REFRESH_MS))),
            profiles_path=env.get("SOCIALREC_PROFILES") or None,
            data_dir=env.get("SOCIALREC_DATA") or None,
        )


@dataclass
class EvalRun:
    run_id: str
    status: str = "pending"
    report: dict | None = None
    error: str | None = None
    request: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"run_id": self.run_id, "status": self.status, "report": self.report,
                "error": self.error, "request": self.request}


class _Envelope(Exception):
    """Request-level ingestion failure (bad body shape)."""


_RECORD_PARSERS: dict[str, Callable[[Any], Any]] = {
    "interactions": lambda o: Interaction(
        o.get("user_id"), o.get("resource_id"), o.get("timestamp_ms", o.get("timestamp")),
        o.get("kind") or "click"),
    "resources": dataio.resource_from_obj,
    "tags": lambda o: TagAssignment(
        o.get("user_id"), o.get("resource_id"), o.get("tag"), o.get("timestamp_ms", o.get("timestamp"))),
}

_TEXT_PARSERS = {
    "interactions": dataio.parse_interactions,
    "resources": dataio.parse_resources,
    "tags": dataio.parse_tags,
}


def _parse_records(kind: str, content_type: str, body: bytes) -> dataio.ParseResult:
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError:
        raise _Envelope("body is not valid UTF-8") from None
    if "json" in content_type and "ndjson" not in content_type:
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise _Envelope(f"invalid JSON body: {exc.msg}") from None
        records = payload.get("records") if isinstance(payload, dict) else payload
        if not isinstance(records, list):
            raise _Envelope('expected a JSON list or {"records": [...]}')
        result = dataio.ParseResult()
        for line, obj in enumerate(records, start=1):
            try:
                if not isinstance(obj, dict):
                    raise ValidationError("record must be a JSON object")
                result.records.append(_RECORD_PARSERS[kind](obj))
            except ValidationError as exc:
                result.rejected.append((line, str(exc)))
        return result
    try:
        return _TEXT_PARSERS[kind](text)
    except ValidationError as exc:
        raise _Envelope(str(exc)) from None



class _QueryArgs:
    """Validated access to a recommendation request's query string."""

    def __init__(self, request: Request):
        self.params = request.query_params

    def optional(self, name: str) -> Optional[str]:
        return self.params.get(name)

    def required(self, name: str) -> str:
        value = self.params.get(name)
        if not value:
            raise ValidationError(f"query parameter {name!r} is required")
        return value

    def k(self) -> Optional[int]:
        raw = self.params.get("k")
        if raw is None:
            return None
        try:
            k = int(raw)
        except ValueError:
            raise ValidationError("k must be an integer") from None
        if not 1 <= k <= 1000:
            raise ValidationError("k must be between 1 and 1000")
        return k

    def unit_float(self, name: str) -> Optional[float]:
        raw = self.params.get(name)
        if raw is None:
            return None
        try:
            x = float(raw)
        except ValueError:
            raise ValidationError(f"{name} must be a number") from None
        if not 0.0 <= x <= 1.0:
            raise ValidationError(f"{name} must be in [0, 1]")
        return x

    def signal(self) -> Signal:
        raw = self.params.get("signal", Signal.INTERACTIONS.value)
        try:
            return Signal(raw)
        except ValueError:
            raise ValidationError(f"unknown signal {raw!r}") from None

def _drop_none(request_args: dict) -> dict:
    return {k: v for k, v in request_args.items() if v is not None}


def create_app(
    store: Store | None = None,
    profiles: ProfileRegistry | None = None,
    config: ServiceConfig | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    if store is None:
        store = Store(config.refresh_ms)
        if config.data_dir:
            dataset = dataio.load_snapshot(config.data_dir)
            store.add_resources(dataset.resources)
            store.add_interactions(dataset.interactions)
            store.add_tag_assignments(dataset.tags)
    if profiles is None:
        profiles = ProfileRegistry.from_file(config.profiles_path) if config.profiles_path else ProfileRegistry()
    engine = Engine(store, profiles)
    runs: dict[str, EvalRun] = {}
    runs_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=1, thread_name_prefix="eval")

    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="socialrec", version="0.1.0", lifespan=lifespan)
    app.state.store = store
    app.state.profiles = profiles
    app.state.engine = engine
    app.state.config = config
    app.state.runs = runs
    app.state.executor = executor

    @app.exception_handler(ValidationError)
    async def _validation(_: Request, exc: ValidationError) -> JSONResponse:
        return JSONResponse({"detail": str(exc)}, status_code=422)

    @app.exception_handler(NotFoundError)
    async def _not_found(_: Request, exc: NotFoundError) -> JSONResponse:
        return JSONResponse({"detail": str(exc)}, status_code=404)

    # -- ingestion ----------------------------------------------------------

    @app.post("/data/{kind}", response_model=IngestResponse)
    async def ingest(kind: Literal["interactions", "resources", "tags"], request: Request):
        body = await request.body()
        try:
            result = _parse_records(kind, request.headers.get("content-type", ""), body)
        except _Envelope as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)
        if kind == "interactions":
            ack = store.add_interactions(result.records)
        elif kind == "resources":
            ack = store.add_resources(result.records)
        else:
            ack = store.add_tag_assignments(result.records)
        return JSONResponse({
            "accepted": len(result.records),
            "rejected": len(result.rejected),
            "errors": [{"line": line, "error": msg} for line, msg in result.rejected],
            "store_version": ack.version,
        })

    # -- recommendations ------------------------------------------------------

    def respond(fn: Callable[[], RankedList]) -> JSONResponse:
        start = time.perf_counter()
        ranked = fn()
        body = ranked.to_json()
        body["elapsed_ms"] = (time.perf_counter() - start) * 1000.0
        return JSONResponse(body)

    # Query strings are parsed by hand: on the hot path FastAPI's per-parameter
    # dependency resolution costs more than a CF recommendation does.
    rec = dict(response_model=RecommendationResponse, responses={422: {"description": "invalid parameter"}})

    @app.get("/rec/popular", **rec)
    async def rec_popular(request: Request):
        q = _QueryArgs(request)
        return respond(lambda: engine.recommend_popular(q.k(), q.optional("profile")))

    @app.get("/rec/cf", **rec)
    async def rec_cf(request: Request):
        q = _QueryArgs(request)
        return respond(lambda: engine.recommend_cf(q.required("user"), q.k(), q.signal(), q.optional("profile")))

    @app.get("/rec/cbf", **rec)
    async def rec_cbf(request: Request):
        q = _QueryArgs(request)
        return respond(lambda: engine.recommend_cbf(q.required("user"), q.k(), q.optional("profile")))

    @app.get("/rec/similar", **rec)
    async def rec_similar(request: Request):
        q = _QueryArgs(request)
        return respond(lambda: engine.similar_resources(q.required("resource"), q.k(), q.optional("profile")))

    @app.get("/rec/contextual", **rec)
    async def rec_contextual(request: Request):
        q = _QueryArgs(request)
        return respond(lambda: engine.recommend_contextual(
            q.required("user"), q.required("resource"), q.k(), q.optional("profile")))

    @app.get("/rec/goal", **rec)
    async def rec_goal(request: Request):
        q = _QueryArgs(request)
        user, spec = q.required("user"), GoalSpec.parse(q.required("goal"))
        k, lambda_, profile = q.k(), q.unit_float("lambda"), q.optional("profile")
        return respond(lambda: engine.recommend_goal(user, spec, k, lambda_, profile))

    # -- profiles -------------------------------------------------------------

    @app.get("/admin/profiles")
    def list_profiles():
        return JSONResponse({"profiles": profiles.to_json()})

    @app.get("/admin/profiles/{profile_id}")
    def get_profile(profile_id: str):
        return JSONResponse(profiles.get(profile_id).to_json())

    @app.put("/admin/profiles/{profile_id}")
    async def put_profile(profile_id: str, request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return JSONResponse({"detail": f"invalid JSON body: {exc.msg}"}, status_code=400)
        if not isinstance(body, dict):
            raise ValidationError("profile must be a JSON object")
        body.pop("version", None)
        try:
            current = profiles.get(profile_id).to_json()
            current.pop("version")
        except NotFoundError:
            current = {}
        profile = RecommendationProfile.from_json({**current, **body}, profile_id=profile_id)
        profiles.set(profile)
        return JSONResponse(profiles.get(profile_id).to_json())

    # -- evaluation -------------------------------------------------------------

    def load_eval_dataset(spec: Any) -> dataio.Dataset:
        if spec in (None, "store") or spec == {"source": "store"}:
            return dataio.Dataset.from_store(store)
        if not isinstance(spec, dict):
            raise ValidationError("dataset must be an object")
        if "synthetic" in spec:
            params = spec["synthetic"] or {}
            if not isinstance(params, dict):
                raise ValidationError("synthetic must be an object of generator parameters")
            try:
                cfg = SyntheticConfig(**params)
            except TypeError as exc:
                raise ValidationError(str(exc)) from None
            return generate_from_config(cfg)
        if "snapshot" in spec:
            return dataio.load_snapshot(spec["snapshot"])
        return dataio.load_files(spec.get("interactions"), spec.get("resources"), spec.get("tags"))

    def run_eval(run: EvalRun, body: dict, frozen_profiles: ProfileRegistry) -> None:
        run.status = "running"
        try:
            dataset = load_eval_dataset(body.get("dataset"))
            report = evaluate_dataset(
                dataset,
                body.get("algorithms") or ["uc1", "uc2", "uc3"],
                test_fraction=body.get("test_fraction", 0.2),
                k_settings=body.get("k_settings"),
                profiles=frozen_profiles,
            )
            run.report = report.to_json()
            run.status = "done"
        except (ValidationError, NotFoundError, OSError, ValueError) as exc:
            run.error = str(exc)
            run.status = "failed"
        except Exception as exc:  # keep the run record useful instead of losing the error
            logger.exception("evaluation run %s crashed", run.run_id)
            run.error = f"{type(exc).__name__}: {exc}"
            run.status = "failed"

    @app.post("/eval/run", status_code=202)
    async def eval_run(request: Request):
        try:
            body = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            return JSONResponse({"detail": f"invalid JSON body: {exc.msg}"}, status_code=400)
        if not isinstance(body, dict):
            raise ValidationError("request body must be a JSON object")
        algorithms = body.get("algorithms")
        if algorithms is not None and (not isinstance(algorithms, list)
                                       or not all(isinstance(a, str) for a in algorithms)):
            raise ValidationError("algorithms must be a list of strings")
        run = EvalRun(uuid.uuid4().hex, request=_drop_none(body))
        with runs_lock:
            runs[run.run_id] = run
        frozen = ProfileRegistry(profiles.all())
        executor.submit(run_eval, run, body, frozen)
        return JSONResponse({"run_id": run.run_id, "status": run.status}, status_code=202)

    @app.get("/eval/runs/{run_id}")
    def eval_status(run_id: str):
        run = runs.get(run_id)
        if run is None:
            raise NotFoundError(f"unknown evaluation run {run_id!r}")
        return JSONResponse(run.to_json())

    # -- misc ---------------------------------------------------------------------

    @app.get("/stats")
    def stats():
        body = store.compute_stats().as_dict()
        body["store_version"] = store.version
        return JSONResponse(body)

    @app.get("/health")
    def health():
        return JSONResponse({"status": "ok", "store_version": store.version,
                             "refresh_ms": store.refresh_ms})

    return app


def serve(config: ServiceConfig | None = None, store: Store | None = None,
          profiles: ProfileRegistry | None = None) -> None:
    import uvicorn

    config = config or ServiceConfig.from_env()
    app = create_app(store, profiles, config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning", access_log=False)
