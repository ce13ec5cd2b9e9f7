"""HTTP review service: the backend of the human-rating loop.

Serves the needs-human queue with per-rater blinding (a rater never sees
the partner's judgment before submitting their own), streams the rendered
audio the oracle analyzed, accepts append-only rating records, and
recomputes the report on demand.  Duplicate (rater, sample) submissions
are conflicts, not updates: ratings are evidence, never edited in place.
"""

from __future__ import annotations

import datetime
import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .benchmarks import BENCHMARKS
from .harness import (
    GenerationSample,
    RatingRecord,
    RunConfig,
    append_rating,
    build_report,
    iter_samples,
    load_config,
    load_ratings,
    resolve_ratings,
    sample_dir,
)

VALID_JUDGMENTS = ("pass", "fail", "unsure")


class ReviewStore:
    """Run-directory state shared by the endpoints; writes are serialized."""

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)
        self.config: RunConfig = load_config(self.run_dir / "config.json")
        self._lock = threading.Lock()
        self._samples: dict[str, GenerationSample] = {
            s.sample_id: s for s in iter_samples(self.run_dir, self.config)
        }

    def samples(self) -> dict[str, GenerationSample]:
        return self._samples

    def ratings(self) -> list[RatingRecord]:
        return load_ratings(self.run_dir)

    def add_rating(self, record: RatingRecord) -> None:
        with self._lock:
            append_rating(self.run_dir, record)

    def sample_payload(self, sample: GenerationSample, rater_id: str | None,
                       ratings: list[RatingRecord]) -> dict:
        mine = [r for r in ratings if r.sample_id == sample.sample_id
                and r.rater_id == rater_id]
        others = [r for r in ratings if r.sample_id == sample.sample_id
                  and r.rater_id != rater_id]
        decision = resolve_ratings(
            [r for r in ratings if r.sample_id == sample.sample_id]
        ).get(sample.sample_id)
        payload = {
            "id": sample.sample_id,
            "category": sample.category_id,
            "benchmark": sample.benchmark_id,
            "benchmark_name": BENCHMARKS[sample.benchmark_id].name,
            "paired_with": BENCHMARKS[sample.benchmark_id].paired_with,
            "index": sample.index,
            "wellformed": sample.wellformed,
            "node_count": sample.node_count,
            "status": (sample.verdict or {}).get("status"),
            "my_judgment": mine[0].judgment if mine else None,
            "decision": decision,
        }
        # blind first pass: partner judgments stay hidden until the
        # requesting rater has submitted their own
        if mine:
            payload["partner_judgments"] = [
                {"rater_id": r.rater_id, "judgment": r.judgment,
                 "adjudicated": r.adjudicated}
                for r in others
            ]
        else:
            payload["partner_judgments"] = None
        return payload


def create_app(run_dir: Path | str) -> FastAPI:
    store = ReviewStore(Path(run_dir))
    app = FastAPI(title="patchbench review")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/samples")
    def list_samples(status: str | None = None, rater: str | None = None):
        ratings = store.ratings()
        items = []
        for sample in store.samples().values():
            sample_status = (sample.verdict or {}).get("status")
            if status and sample_status != status:
                continue
            items.append(store.sample_payload(sample, rater, ratings))
        items.sort(key=lambda item: item["id"])
        return {"run_id": store.config.run_id, "samples": items}

    @app.get("/samples/{sample_id}")
    def get_sample(sample_id: str, rater: str | None = None):
        sample = store.samples().get(sample_id)
        if sample is None:
            return JSONResponse({"detail": "unknown sample"}, status_code=404)
        payload = store.sample_payload(sample, rater, store.ratings())
        payload["code"] = sample.extracted_code
        patch_path = sample_dir(store.run_dir, sample) / "patch.json"
        payload["patch"] = (
            json.loads(patch_path.read_text(encoding="utf-8"))
            if patch_path.exists() else None
        )
        return payload

    @app.get("/samples/{sample_id}/audio")
    def get_audio(sample_id: str):
        sample = store.samples().get(sample_id)
        if sample is None:
            return JSONResponse({"detail": "unknown sample"}, status_code=404)
        wav_path = sample_dir(store.run_dir, sample) / "render.wav"
        if sample.wellformed != "yes" or not wav_path.exists():
            return JSONResponse({"detail": "not renderable"}, status_code=404)
        return Response(content=wav_path.read_bytes(), media_type="audio/wav")

    @app.post("/samples/{sample_id}/ratings")
    async def post_rating(sample_id: str, request: Request):
        sample = store.samples().get(sample_id)
        if sample is None:
            return JSONResponse({"detail": "unknown sample"}, status_code=404)
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"detail": "body is not JSON"}, status_code=400)
        if not isinstance(body, dict):
            return JSONResponse({"detail": "body must be an object"}, status_code=400)
        rater_id = body.get("rater_id")
        judgment = body.get("judgment")
        adjudicated = body.get("adjudicated")
        if not isinstance(rater_id, str) or not rater_id.strip():
            return JSONResponse({"detail": "rater_id required"}, status_code=400)
        if judgment not in VALID_JUDGMENTS:
            return JSONResponse(
                {"detail": f"judgment must be one of {VALID_JUDGMENTS}"}, status_code=400
            )
        if adjudicated is not None and adjudicated not in ("pass", "fail"):
            return JSONResponse(
                {"detail": "adjudicated must be pass or fail"}, status_code=400
            )
        existing = [
            r for r in store.ratings()
            if r.sample_id == sample_id and r.rater_id == rater_id
        ]
        if existing:
            return JSONResponse(
                {"detail": "this rater already judged this sample"}, status_code=409
            )
        record = RatingRecord(
            sample_id=sample_id,
            rater_id=rater_id,
            judgment=judgment,
            adjudicated=adjudicated,
            timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )
        store.add_rating(record)
        return JSONResponse(record.to_json(), status_code=201)

    @app.get("/report")
    def get_report():
        report = build_report(store.run_dir, store.config)
        return report.to_json()

    return app


def serve_review(run_dir: Path | str, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run the review service until interrupted."""
    import uvicorn

    if not (Path(run_dir) / "config.json").exists():
        raise FileNotFoundError(f"{run_dir} is not a run directory")
    uvicorn.run(create_app(run_dir), host=host, port=port)
