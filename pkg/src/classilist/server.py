"""HTTP/JSON API over one loaded dataset, plus static serving of the UI.

The server holds an immutable snapshot (dataset + content fingerprint);
a reload builds the replacement completely and swaps it in one assignment,
so concurrent readers always see a coherent dataset. Responses are pure
functions of (fingerprint, request) and the fingerprint doubles as ETag.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import analytics, docs
from .analytics import HistogramSpec, SpecError
from .bundle import fingerprint as dataset_fingerprint
from .model import Dataset, Outcome

GROUP_NAMES = {g.value: g for g in Outcome}

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>classilist</title></head>
<body><h1>classilist API</h1>
<p>No UI assets are installed. The JSON API is available under <code>/api/</code>:
meta, histograms, confusion, selection, samples, feature-stats, whatif, image/{id}.</p>
</body></html>
"""


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


@dataclass(frozen=True)
class Snapshot:
    dataset: Dataset
    fingerprint: str


class ServerState:
    """Holds the currently served dataset. Swaps are atomic: requests read
    the snapshot reference once and work on that version throughout."""

    def __init__(self, dataset: Dataset | None = None):
        self._snapshot: Snapshot | None = None
        if dataset is not None:
            self.load(dataset)

    def load(self, dataset: Dataset) -> None:
        self._snapshot = Snapshot(dataset=dataset, fingerprint=dataset_fingerprint(dataset))

    @property
    def snapshot(self) -> Snapshot | None:
        return self._snapshot


def _parse_bool(raw: str | None, name: str) -> bool:
    if raw is None:
        return False
    low = raw.lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise ApiError(400, f"parameter {name!r} must be a boolean, got {raw!r}")


def _parse_groups(raw) -> frozenset[Outcome]:
    if isinstance(raw, str):
        raw = [part for part in raw.split(",") if part]
    names = [str(g).lower() for g in raw]
    unknown = [g for g in names if g not in GROUP_NAMES]
    if unknown:
        raise ApiError(400, f"unknown outcome group(s) {unknown!r}; expected tp, fp, fn, tn")
    return frozenset(GROUP_NAMES[g] for g in names)


def _build_spec(values: dict) -> HistogramSpec:
    """Assemble a HistogramSpec from loosely typed request values; any
    constraint violation becomes a 400."""
    kwargs = {}
    try:
        if values.get("bins") is not None:
            kwargs["bin_count"] = int(values["bins"])
        if values.get("lo") is not None:
            kwargs["axis_lo"] = float(values["lo"])
        if values.get("hi") is not None:
            kwargs["axis_hi"] = float(values["hi"])
        if values.get("tn_min") is not None:
            kwargs["tn_min"] = float(values["tn_min"])
        if values.get("tp_max") is not None:
            kwargs["tp_max"] = float(values["tp_max"])
    except (TypeError, ValueError) as e:
        raise ApiError(400, f"malformed spec parameter: {e}") from None
    if values.get("groups") is not None:
        kwargs["groups"] = _parse_groups(values["groups"])
    try:
        return HistogramSpec(**kwargs)
    except SpecError as e:
        raise ApiError(400, str(e)) from None


def _spec_values_from_query(params) -> dict:
    return {key: params.get(key) for key in ("bins", "lo", "hi", "groups", "tn_min", "tp_max")}


def _class_index(dataset: Dataset, name: str) -> int:
    for label in dataset.classes:
        if label.name == name:
            return label.index
    raise ApiError(400, f"unknown class {name!r}")


def _histograms_with_overrides(
    dataset: Dataset, spec: HistogramSpec, overrides: dict | None
) -> list[analytics.ClassHistogram]:
    """Per-class histograms under `spec`, with optional per-class group
    overrides (the UI's per-class visibility selector)."""
    by_class: dict[int, frozenset[Outcome]] = {}
    for name, groups in (overrides or {}).items():
        by_class[_class_index(dataset, str(name))] = _parse_groups(groups)
    out = []
    for c in range(dataset.k):
        class_spec = spec
        if c in by_class:
            try:
                class_spec = HistogramSpec(
                    bin_count=spec.bin_count,
                    axis_lo=spec.axis_lo,
                    axis_hi=spec.axis_hi,
                    groups=by_class[c],
                    tn_min=spec.tn_min,
                    tp_max=spec.tp_max,
                )
            except SpecError as e:
                raise ApiError(400, str(e)) from None
        out.append(analytics.build_histogram(dataset, c, class_spec))
    return out


def create_app(state: ServerState, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="classilist", docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse({"error": exc.message}, status_code=exc.status)

    def snap() -> Snapshot:
        s = state.snapshot
        if s is None:
            raise ApiError(503, "no dataset loaded")
        return s

    def respond(s: Snapshot, content: dict) -> JSONResponse:
        return JSONResponse(content, headers={"ETag": s.fingerprint})

    @app.get("/api/meta")
    def get_meta():
        s = snap()
        counts = analytics.per_class_counts(s.dataset)
        return respond(s, docs.meta_doc(s.dataset, s.fingerprint, counts))

    @app.get("/api/histograms")
    def get_histograms(request: Request):
        s = snap()
        dataset = s.dataset
        params = request.query_params
        spec = _build_spec(_spec_values_from_query(params))
        members = _parse_bool(params.get("members"), "members")
        requested = params.getlist("class")
        if requested:
            indices = [_class_index(dataset, name) for name in requested]
        else:
            indices = list(range(dataset.k))
        documents = [
            docs.histogram_doc(dataset, analytics.build_histogram(dataset, c, spec), members)
            for c in indices
        ]
        return respond(s, {"spec": docs.spec_doc(spec), "histograms": documents})

    @app.get("/api/confusion")
    def get_confusion(request: Request):
        s = snap()
        members = _parse_bool(request.query_params.get("members"), "members")
        cm = analytics.confusion_matrix(s.dataset)
        return respond(s, docs.confusion_doc(s.dataset, cm, members))

    @app.post("/api/selection")
    async def post_selection(request: Request):
        s = snap()
        dataset = s.dataset
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "request body must be JSON") from None
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be a JSON object")
        spec = _build_spec(body.get("spec") or {})
        overrides = body.get("overrides")
        if overrides is not None and not isinstance(overrides, dict):
            raise ApiError(400, "'overrides' must map class names to group lists")
        histograms = _histograms_with_overrides(dataset, spec, overrides)

        kind = body.get("type")
        try:
            if kind == "bar":
                c = _class_index(dataset, str(body.get("class")))
                bin_index = int(body.get("bin"))
                group = None
                if body.get("group") is not None:
                    (group,) = _parse_groups([body["group"]])
                sel = analytics.select_bar(dataset, histograms, c, bin_index, group)
            elif kind == "cell":
                actual = _class_index(dataset, str(body.get("actual")))
                predicted = _class_index(dataset, str(body.get("predicted")))
                sel = analytics.select_cell(dataset, histograms, actual, predicted)
            else:
                raise ApiError(400, "selection 'type' must be 'bar' or 'cell'")
        except (TypeError, ValueError) as e:
            raise ApiError(400, f"malformed selection: {e}") from None
        except IndexError as e:
            raise ApiError(400, str(e)) from None
        echo = docs.spec_doc(spec)
        if overrides:
            echo = {**echo, "overrides": overrides}
        return respond(s, docs.selection_doc(dataset, sel, echo))

    def _ids_from_query(request: Request) -> list[str]:
        ids: list[str] = []
        for chunk in request.query_params.getlist("ids"):
            ids.extend(part for part in chunk.split(",") if part)
        return ids

    @app.get("/api/samples")
    def get_samples(request: Request):
        s = snap()
        dataset = s.dataset
        ids = _ids_from_query(request)
        with_outcomes = _parse_bool(request.query_params.get("outcomes"), "outcomes")
        unknown = [sid for sid in ids if sid not in dataset.id_index]
        if unknown:
            raise ApiError(404, f"unknown sample id(s): {', '.join(unknown)}")
        return respond(s, {"samples": [docs.sample_doc(dataset, sid, with_outcomes) for sid in ids]})

    @app.get("/api/feature-stats")
    def get_feature_stats(request: Request):
        s = snap()
        ids = _ids_from_query(request)
        try:
            stats = analytics.feature_summary(s.dataset, ids)
        except KeyError as e:
            raise ApiError(404, e.args[0]) from None
        return respond(s, docs.feature_stats_doc(stats, len(ids)))

    @app.post("/api/whatif")
    async def post_whatif(request: Request):
        s = snap()
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "request body must be JSON") from None
        weights = body.get("weights") if isinstance(body, dict) else None
        if not isinstance(weights, list):
            raise ApiError(400, "'weights' must be a list of positive numbers, one per class")
        try:
            report = analytics.reweight_whatif(s.dataset, [float(w) for w in weights])
        except (TypeError, ValueError) as e:
            raise ApiError(400, str(e)) from None
        return respond(s, docs.whatif_doc(s.dataset, report))

    @app.get("/api/image/{sample_id}")
    def get_image(sample_id: str):
        s = snap()
        dataset = s.dataset
        if sample_id not in dataset.id_index:
            raise ApiError(404, f"unknown sample id {sample_id!r}")
        ref = dataset.record(sample_id).image_ref
        if not ref or not Path(ref).is_file():
            raise ApiError(404, f"no image for sample {sample_id!r}")
        media = "image/png" if ref.endswith(".png") else "image/jpeg"
        return FileResponse(ref, media_type=media)

    static_path = Path(static_dir) if static_dir else None
    if static_path and (static_path / "index.html").is_file():
        app.mount("/", StaticFiles(directory=static_path, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return _PLACEHOLDER_PAGE

    return app


def default_static_dir() -> Path | None:
    """The UI assets bundled with the package, when present."""
    candidate = Path(__file__).parent / "static"
    return candidate if (candidate / "index.html").is_file() else None
