"""HTTP service backing the browser UI.

Sessions are selected with the X-Session-Id header (default "default") and
hold in-memory state only: the open source, the draft metadata, progress
and results of the last processing run. One mutating operation per session
at a time; concurrent mutation attempts get 409.
"""

from __future__ import annotations

import base64
import io
import threading
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, Header, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image

from . import colorseg, pipeline
from .analysis import DEFAULT_STATIONS, Calibration
from .colorseg import PixelClass, SegmentationConfig
from .edges import Roi, extract_leading_edge
from .errors import AblatrackError, InputError
from .frames import FlowDirection, open_frame_source
from .pipeline import ProcessingMeta, auto_configure, estimate_diameter_px
from .timeseg import compute_brightness_trace
from .version import __version__

MASK_COLORS = {
    int(PixelClass.BACKGROUND): (0, 0, 0, 0),
    int(PixelClass.SAMPLE): (255, 165, 0, 110),
    int(PixelClass.SAMPLE_EDGE): (255, 32, 32, 220),
    int(PixelClass.SHOCK): (138, 43, 226, 110),
}


class Session:
    def __init__(self):
        self.source = None
        self.meta: ProcessingMeta | None = None
        self.results: dict | None = None
        self.progress = {"state": "idle", "done": 0, "total": 0, "error": None}
        self.mutate_lock = threading.Lock()
        self._brightness = None

    def require_source(self):
        if self.source is None:
            raise HTTPException(404, detail="no source opened; PUT /api/meta or POST /api/autoconfig first")
        return self.source

    def open_source(self, manifest_path: str):
        self.source = open_frame_source(manifest_path)
        self._brightness = None
        return self.source

    def brightness(self):
        if self._brightness is None:
            src = self.require_source()
            stride = pipeline._auto_trace_stride(src.frame_count)
            self._brightness = compute_brightness_trace(src, stride)
        return self._brightness


def _mask_overlay_png(mask) -> str:
    rgba = np.zeros((mask.height, mask.width, 4), dtype=np.uint8)
    for code, color in MASK_COLORS.items():
        rgba[mask.labels == code] = color
    buf = io.BytesIO()
    Image.fromarray(rgba, "RGBA").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def create_app(static_dir=None) -> FastAPI:
    app = FastAPI(title="ablatrack", version=__version__)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with registry_lock:
            return sessions.setdefault(session_id, Session())

    def input_error(exc: Exception) -> HTTPException:
        return HTTPException(400, detail={"error": type(exc).__name__, "message": str(exc)})

    @app.exception_handler(AblatrackError)
    async def _ablatrack_error(request, exc):
        from fastapi.responses import JSONResponse

        status = 400 if isinstance(exc, InputError) else 422
        return JSONResponse(status_code=status, content={"error": type(exc).__name__, "message": str(exc)})

    @app.get("/api/info")
    def info(x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        out = {"version": __version__, "session": x_session_id, "source": None, "busy": ses.progress["state"] == "running"}
        if ses.source is not None:
            out["source"] = {
                "manifest": str(ses.source.manifest_path),
                "fps": ses.source.fps,
                "frame_count": ses.source.frame_count,
                "width": ses.source.width,
                "height": ses.source.height,
            }
        out["meta_set"] = ses.meta is not None
        return out

    @app.get("/api/frame/{index}")
    def frame(index: int, x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        src = ses.require_source()
        if not 0 <= index < src.frame_count:
            raise HTTPException(404, detail=f"frame {index} outside 0..{src.frame_count - 1}")
        data = Path(src.frame_files[index]).read_bytes()
        return Response(content=data, media_type="image/png")

    @app.get("/api/brightness")
    def brightness(x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        trace = ses.brightness()
        return {"frame_indices": trace.frame_indices.tolist(), "values": trace.values.tolist()}

    @app.post("/api/autoconfig")
    def autoconfig(payload: dict = Body(...), x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        if not ses.mutate_lock.acquire(blocking=False):
            raise HTTPException(409, detail="session busy")
        try:
            manifest = payload.get("source")
            if manifest:
                ses.open_source(manifest)
            src = ses.require_source()
            ses.meta = auto_configure(src, model_path=payload.get("model"))
            return ses.meta.to_json()
        finally:
            ses.mutate_lock.release()

    @app.get("/api/meta")
    def get_meta(x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        if ses.meta is None:
            raise HTTPException(404, detail="no metadata set")
        return ses.meta.to_json()

    @app.put("/api/meta")
    def put_meta(payload: dict = Body(...), x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        if not ses.mutate_lock.acquire(blocking=False):
            raise HTTPException(409, detail="session busy")
        try:
            meta = ProcessingMeta.from_json(payload)
            ses.open_source(meta.source)
            meta.validate(ses.source)
            ses.meta = meta
            return ses.meta.to_json()
        finally:
            ses.mutate_lock.release()

    @app.post("/api/preview")
    def preview(payload: dict = Body(...), x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        src = ses.require_source()
        index = int(payload.get("frame_index", 0))
        if not 0 <= index < src.frame_count:
            raise HTTPException(404, detail=f"frame {index} out of range")
        seg = (
            SegmentationConfig.from_json(payload["segmentation"])
            if payload.get("segmentation")
            else (ses.meta.segmentation if ses.meta else SegmentationConfig())
        )
        roi = Roi.from_json(payload["roi"]) if payload.get("roi") else (ses.meta.roi if ses.meta else None)
        flow = FlowDirection(payload.get("flow", ses.meta.flow.value if ses.meta else "left"))
        frame = src.get_frame(index)
        mask = colorseg.classify(frame, roi, seg)
        mask = colorseg.largest_component(mask, PixelClass.SAMPLE)
        mask = colorseg.largest_component(mask, PixelClass.SHOCK)
        sample = extract_leading_edge(mask, PixelClass.SAMPLE, flow, frame)
        shock = extract_leading_edge(mask, PixelClass.SHOCK, flow, frame)
        from .edges import mark_sample_edge

        mask = mark_sample_edge(mask, sample)
        return {
            "frame_index": index,
            "roi": roi.to_json() if roi else None,
            "mask_png_base64": _mask_overlay_png(mask),
            "sample_edge": sample.to_json(),
            "shock_edge": shock.to_json() if len(shock) else None,
        }

    @app.post("/api/process")
    def start_process(payload: dict = Body(default={}), x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        if ses.meta is None:
            raise HTTPException(400, detail="no metadata set")
        if not ses.mutate_lock.acquire(blocking=False):
            raise HTTPException(409, detail="session busy")
        ses.progress = {"state": "running", "done": 0, "total": 0, "error": None}

        def on_progress(done, total):
            ses.progress["done"] = done
            ses.progress["total"] = total

        def run():
            try:
                ses.results = pipeline.process(ses.meta, progress=on_progress)
                ses.progress["state"] = "done"
            except Exception as exc:  # surfaced via /api/progress
                ses.progress["state"] = "error"
                ses.progress["error"] = f"{type(exc).__name__}: {exc}"
            finally:
                ses.mutate_lock.release()

        threading.Thread(target=run, daemon=True).start()
        return {"started": True}

    @app.get("/api/progress")
    def progress(x_session_id: str = Header("default")):
        return get_session(x_session_id).progress

    @app.get("/api/results")
    def results(x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        if ses.results is None:
            raise HTTPException(404, detail="no processing results yet")
        return ses.results

    @app.post("/api/analyze")
    def analyze_endpoint(payload: dict = Body(...), x_session_id: str = Header("default")):
        ses = get_session(x_session_id)
        if ses.results is None:
            raise HTTPException(404, detail="no processing results yet")
        diameter_mm = payload.get("diameter_mm")
        if not diameter_mm or diameter_mm <= 0:
            raise HTTPException(400, detail="diameter_mm (> 0) is required")
        diameter_px = payload.get("diameter_px") or estimate_diameter_px(ses.results)
        calibration = Calibration(float(diameter_mm), float(diameter_px))
        stations = tuple(payload.get("stations") or DEFAULT_STATIONS)
        summary = pipeline.analyze([ses.results], calibration, stations, out_prefix=None)
        return {
            "calibration": calibration.to_json(),
            "series": summary["bundle"].to_json(),
            "fits": {name: fit.to_json() for name, fit in summary["fits"].items()},
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")
    return app


def serve(port: int = 8080, static_dir=None, host: str = "127.0.0.1"):
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(static_dir), host=host, port=port, log_level="info")
