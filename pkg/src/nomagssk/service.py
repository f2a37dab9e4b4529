"""FastAPI front end: run scenarios, query the bound and the complexity table.

The service wraps the core package; the command-line tool is a thin client
that either calls these handlers in-process or POSTs to a running instance.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .errors import SimulationError
from .scenarios import Scenario, parse_scenario, run_scenario, evaluate_bound
from .analysis import table1_report
from .montecarlo import resolve_threads


class ScenarioRequest(BaseModel):
    """A scenario document, plus optional overrides mirroring the CLI flags."""

    scenario: Dict[str, Any]
    seed: Optional[int] = None
    trials: Optional[int] = None
    format: Optional[str] = None
    threads: Optional[int] = None


class ScenarioResponse(BaseModel):
    name: str
    kind: str
    format: str
    text: str = Field(description="serialized result (CSV or JSON)")
    data: Union[List[Any], Dict[str, Any]]


class BoundRequest(BaseModel):
    m_t: int
    m_a: int = 1
    m_r: int = 4
    snr_db: float = 10.0
    gain: float = 0.4
    seed: int = 0


class BoundResponse(BaseModel):
    m_t: int
    m_a: int
    m_r: int
    snr_db: float
    gain: float
    seed: int
    n_h: int
    b_h: int
    bound_mrc: float
    bound_per_branch: float


def apply_overrides(doc: dict, seed=None, trials=None, fmt=None,
                    output=None) -> dict:
    doc = dict(doc)
    if seed is not None:
        doc["seed"] = seed
    if trials is not None:
        doc["trials"] = trials
    if fmt is not None:
        doc["format"] = fmt
    if output is not None:
        doc["output"] = output
    return doc


def create_app() -> FastAPI:
    app = FastAPI(title="noma-gssk link simulator", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=ScenarioResponse)
    def run(req: ScenarioRequest) -> ScenarioResponse:
        doc = apply_overrides(req.scenario, seed=req.seed, trials=req.trials,
                              fmt=req.format)
        try:
            scenario: Scenario = parse_scenario(json.dumps(doc))
            result = run_scenario(scenario,
                                  threads=resolve_threads(req.threads))
        except SimulationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return ScenarioResponse(name=scenario.name, kind=scenario.kind,
                                format=scenario.fmt, text=result["text"],
                                data=result["data"])

    @app.post("/bound", response_model=BoundResponse)
    def bound(req: BoundRequest) -> BoundResponse:
        try:
            data = evaluate_bound(req.model_dump())
        except SimulationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return BoundResponse(**data)

    @app.get("/table1")
    def table1():
        return table1_report()

    return app


app = create_app()
