"""HTTP API for feature computation, plot data, the problem catalog and
batch jobs.

Endpoints are synchronous functions, so the framework runs them on its
worker pool and the event loop stays responsive while a long feature
computation runs. State is one LRU object cache plus one job store;
identical in-flight feature requests share a single computation.
"""
from __future__ import annotations

import csv
import io
import os
import pickle
import threading
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from lkit import runner
from lkit.core import FeatureObject, summary_dict
from lkit.expressions import ExpressionError, parse_expression
from lkit.problems import expression_problem, make_problem, problem_catalog
from lkit.registry import (
    MissingBlocksError,
    MissingFunctionError,
    UnknownControlKeyError,
    UnknownSetError,
    calculate_features,
    list_feature_sets,
)
from lkit.vizdata import (
    barrier_tree_plot_data,
    cell_mapping_plot_data,
    function_grid,
    info_content_plot_data,
)

OBJECT_CAPACITY = 64
JOB_CAPACITY = 16


class LruStore:
    """Thread-safe LRU mapping with optional on-disk spill for evictees."""

    def __init__(self, capacity: int, spill_dir: Optional[str] = None):
        self.capacity = capacity
        self.spill_dir = spill_dir
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def put(self, key: str, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.capacity:
                old_key, old_value = self._data.popitem(last=False)
                self._spill(old_key, old_value)

    def get(self, key: str):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return self._unspill(key)

    def _spill(self, key: str, value) -> None:
        if not self.spill_dir:
            return
        os.makedirs(self.spill_dir, exist_ok=True)
        try:
            with open(os.path.join(self.spill_dir, f"{key}.pkl"), "wb") as fh:
                pickle.dump(value, fh)
        except Exception:
            pass  # spill is best effort

    def _unspill(self, key: str):
        if not self.spill_dir:
            return None
        path = os.path.join(self.spill_dir, f"{key}.pkl")
        if not os.path.exists(path):
            return None
        try:
            with open(path, "rb") as fh:
                value = pickle.load(fh)
        except Exception:
            return None
        self.put(key, value)
        return value


class FeatureObjectRequest(BaseModel):
    problem: Optional[str] = None
    expression: Optional[str] = None
    design_csv: Optional[str] = None
    dim: int = Field(default=2, ge=1)
    n: int = Field(default=800, ge=1)
    sample: str = Field(default="uniform", pattern="^(uniform|lhs)$")
    seed: int = 0
    blocks: Optional[list[int]] = None
    lower: Optional[list[float]] = None
    upper: Optional[list[float]] = None


class BatchSampling(BaseModel):
    n: int = Field(default=800, ge=1)
    method: str = Field(default="uniform", pattern="^(uniform|lhs)$")
    blocks: Optional[list[int]] = None
    lower: Optional[list[float]] = None
    upper: Optional[list[float]] = None


class BatchInstance(BaseModel):
    problem: str
    seed: int = 0
    dim: int = Field(ge=1)


class BatchRequest(BaseModel):
    instances: list[BatchInstance]
    reps: int = Field(default=1, ge=1)
    sets: str = "all"
    sampling: BatchSampling = Field(default_factory=BatchSampling)
    seed: int = 0


class StoredObject:
    def __init__(self, fo: FeatureObject, seed: int, meta: dict):
        self.fo = fo
        self.seed = seed
        self.meta = meta
        self.feature_cache: dict[tuple, dict] = {}
        self.locks: dict[tuple, threading.Lock] = {}
        self.cache_lock = threading.Lock()


class BatchJob:
    def __init__(self, job_id: str, total: int):
        self.job_id = job_id
        self.total = total
        self.done = 0
        self.status = "queued"
        self.result_csv: Optional[str] = None
        self.error: Optional[str] = None
        self.lock = threading.Lock()

    def as_dict(self) -> dict:
        with self.lock:
            progress = (self.done / self.total) if self.total else 1.0
            out = {"job_id": self.job_id, "status": self.status,
                   "progress": progress}
            if self.status == "done":
                out["result_csv"] = self.result_csv
            if self.error:
                out["error"] = self.error
            return out


def create_app() -> FastAPI:
    app = FastAPI(title="lkit service", docs_url="/api/docs", openapi_url="/api/openapi.json")
    spill = os.environ.get("LKIT_SPILL_DIR") or None
    objects = LruStore(OBJECT_CAPACITY, spill)
    jobs = LruStore(JOB_CAPACITY)
    executor = ThreadPoolExecutor(max_workers=runner.max_workers())

    @app.get("/api/spec")
    def api_spec() -> dict:
        return app.openapi()

    @app.get("/api/problems")
    def problems() -> list[dict]:
        return problem_catalog()

    @app.get("/api/sets")
    def sets() -> list[dict]:
        return list_feature_sets()

    @app.post("/api/feature-object")
    def create_object(req: FeatureObjectRequest) -> dict:
        sources = [s for s in (req.problem, req.expression, req.design_csv) if s]
        if len(sources) != 1:
            raise HTTPException(
                status_code=422,
                detail="exactly one of problem, expression or design_csv is required")
        try:
            design = None
            problem = None
            dim = req.dim
            if req.design_csv is not None:
                X, y = runner.read_design_csv(req.design_csv)
                design = (X, y)
                dim = X.shape[1]
                name = "design"
            elif req.expression is not None:
                problem = expression_problem(parse_expression(req.expression, req.dim))
                name = f"expression:{req.expression}"
            else:
                problem = make_problem(req.problem, req.dim, seed=req.seed)
                name = req.problem
            fo = runner.build_feature_object(
                problem=problem, design=design, n=req.n, sample_method=req.sample,
                sample_seed=req.seed, blocks=req.blocks,
                lower=np.array(req.lower) if req.lower else None,
                upper=np.array(req.upper) if req.upper else None)
        except ExpressionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

        obj_id = uuid.uuid4().hex[:12]
        meta = {"name": name, "dim": dim, "seed": req.seed, "n": req.n}
        objects.put(obj_id, StoredObject(fo, req.seed, meta))
        summary = summary_dict(fo)
        summary["name"] = name
        unavailable = [info["id"] for info in list_feature_sets()
                       if (info["requires_function"] and fo.function is None)
                       or (info["requires_blocks"] and fo.grid is None)]
        return {"id": obj_id, "summary": summary, "unavailable_sets": unavailable}

    def _get_object(obj_id: str) -> StoredObject:
        stored = objects.get(obj_id)
        if stored is None:
            raise HTTPException(status_code=404, detail=f"unknown feature object '{obj_id}'")
        return stored

    def _compute_features(stored: StoredObject, sets_param: str, control_param: str,
                          seed: int) -> dict:
        control = _parse_control_param(control_param)
        key = (sets_param, control_param, seed)
        with stored.cache_lock:
            if key in stored.feature_cache:
                return stored.feature_cache[key]
            lock = stored.locks.setdefault(key, threading.Lock())
        with lock:  # identical in-flight requests share this computation
            with stored.cache_lock:
                if key in stored.feature_cache:
                    return stored.feature_cache[key]
            try:
                features, errors = calculate_features(
                    stored.fo, sets=sets_param, control=control, seed=seed,
                    collect_errors=False)
            except (MissingFunctionError, MissingBlocksError) as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except (UnknownSetError, UnknownControlKeyError) as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            result = {"features": features, "errors": errors}
            with stored.cache_lock:
                stored.feature_cache[key] = result
            return result

    @app.get("/api/feature-object/{obj_id}/features")
    def get_features(obj_id: str, sets: str = "all", control: str = "",
                     seed: Optional[int] = None) -> dict:
        stored = _get_object(obj_id)
        use_seed = stored.seed if seed is None else seed
        result = _compute_features(stored, sets, control, use_seed)
        return {"id": obj_id, "sets": sets, "seed": use_seed,
                "features": result["features"]}

    @app.get("/api/feature-object/{obj_id}/features.csv")
    def get_features_csv(obj_id: str, sets: str = "all", control: str = "",
                         seed: Optional[int] = None) -> Response:
        stored = _get_object(obj_id)
        use_seed = stored.seed if seed is None else seed
        result = _compute_features(stored, sets, control, use_seed)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["feature", "value"])
        for name, value in result["features"].items():
            writer.writerow([name, runner.format_value(value)])
        return Response(content=buf.getvalue(), media_type="text/csv")

    @app.get("/api/feature-object/{obj_id}/plot/{kind}")
    def get_plot(obj_id: str, kind: str, approach: str = "min",
                 resolution: int = 50, seed: Optional[int] = None) -> dict:
        stored = _get_object(obj_id)
        fo = stored.fo
        try:
            if kind == "cellmapping":
                return cell_mapping_plot_data(fo, approach)
            if kind in ("barriertree2d", "barriertree3d"):
                return barrier_tree_plot_data(fo, approach, kind[-2:])
            if kind == "infocontent":
                return info_content_plot_data(
                    fo, seed=stored.seed if seed is None else seed)
            if kind == "function":
                if fo.function is None:
                    raise HTTPException(status_code=409,
                                        detail="feature object has no attached function")
                problem = fo.function
                if not hasattr(problem, "batch"):
                    raise HTTPException(status_code=409, detail="function is not plottable")
                return function_grid(problem, resolution)
            raise HTTPException(status_code=404, detail=f"unknown plot kind '{kind}'")
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/api/batch")
    def submit_batch(req: BatchRequest) -> dict:
        if not req.instances:
            raise HTTPException(status_code=422, detail="instances must be non-empty")
        bad = [i for i, inst in enumerate(req.instances) if inst.dim < 1]
        if bad:
            raise HTTPException(status_code=422,
                                detail=f"invalid instance rows: {bad}")
        job = BatchJob(uuid.uuid4().hex[:12], total=len(req.instances) * req.reps)
        jobs.put(job.job_id, job)
        executor.submit(_run_batch, job, req)
        return {"job_id": job.job_id}

    def _run_batch(job: BatchJob, req: BatchRequest) -> None:
        with job.lock:
            job.status = "running"
        rows = []
        try:
            tasks = [(idx, inst, rep)
                     for idx, inst in enumerate(req.instances)
                     for rep in range(req.reps)]
            for idx, inst, rep in tasks:
                seed = runner.row_seed(req.seed, idx * req.reps + rep)
                rows.append(runner.compute_instance_row(
                    problem_name=inst.problem, dim=inst.dim,
                    instance_seed=inst.seed, replication=rep, sample_seed=seed,
                    sets=req.sets, control=None, n=req.sampling.n,
                    sample_method=req.sampling.method,
                    blocks=req.sampling.blocks,
                    lower=np.array(req.sampling.lower) if req.sampling.lower else None,
                    upper=np.array(req.sampling.upper) if req.sampling.upper else None,
                    feature_seed=seed))
                with job.lock:
                    job.done += 1
            csv_text = runner.rows_to_csv(rows)
            with job.lock:
                job.result_csv = csv_text
                job.status = "done"
        except Exception as exc:
            with job.lock:
                job.status = "failed"
                job.error = str(exc)

    @app.get("/api/batch/{job_id}")
    def batch_status(job_id: str) -> dict:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job '{job_id}'")
        return job.as_dict()

    @app.get("/api/batch/{job_id}/result.csv")
    def batch_result(job_id: str) -> Response:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job '{job_id}'")
        state = job.as_dict()
        if state["status"] != "done":
            raise HTTPException(status_code=409, detail=f"job is {state['status']}")
        return Response(content=state["result_csv"], media_type="text/csv")

    _mount_frontend(app)
    return app


def _parse_control_param(param: str) -> Optional[dict]:
    """Control overrides as semicolon-separated key=value pairs."""
    if not param:
        return None
    pairs = [p for p in param.split(";") if p.strip()]
    return runner.parse_control_args(pairs)


def _mount_frontend(app: FastAPI) -> None:
    """Serve the built web UI when its dist directory exists."""
    root = os.environ.get("LKIT_FRONTEND_DIR")
    if root is None:
        here = os.path.dirname(os.path.abspath(__file__))
        candidate = os.path.abspath(os.path.join(here, "..", "..", "frontend", "dist"))
        root = candidate if os.path.isdir(candidate) else None
    if root and os.path.isdir(root):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=root, html=True), name="ui")


app = create_app()


def main() -> None:
    import uvicorn

    port = int(os.environ.get("LKIT_PORT", "8080"))
    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
