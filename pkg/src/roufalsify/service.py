"""HTTP surface over the toolkit.

Endpoints mirror the CLI commands: ``/monitor`` evaluates a formula on a
trace, ``/analyze-ml`` runs the scene-space analysis, ``/falsify`` runs the
whole pipeline and returns every artifact as a name -> content map so thin
clients can materialize an output directory.
"""

from __future__ import annotations


from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .classifier import TransportError
from .pipeline import StageError, analyze_ml, comp_falsify
from .scenario import Scenario
from .stl import HorizonError, ParseError, UnknownSignalError, eval_qualitative, eval_robustness, parse
from .trace import DomainError, TraceError, trace_from_csv

app = FastAPI(title="rou-falsify", version="0.1.0")


class MonitorRequest(BaseModel):
    trace_csv: str
    formula: str
    at: float = 0.0


class MonitorResponse(BaseModel):
    robustness: float
    satisfied: bool


class ScenarioRequest(BaseModel):
    scenario: dict
    jobs: int | None = None


class AnalyzeResponse(BaseModel):
    report: dict
    samples_csv: str


class FalsifyResponse(BaseModel):
    report: dict
    files: dict[str, str] = Field(default_factory=dict)


def _bad_request(kind: str, exc: Exception, **extra):
    detail = {"error": kind, "message": str(exc)}
    detail.update(extra)
    return HTTPException(status_code=422, detail=detail)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/monitor", response_model=MonitorResponse)
def monitor(req: MonitorRequest) -> MonitorResponse:
    try:
        formula = parse(req.formula)
    except ParseError as exc:
        raise _bad_request("syntax", exc, line=exc.line, column=exc.column)
    try:
        trace = trace_from_csv(req.trace_csv)
        rho = eval_robustness(formula, trace, req.at)
        sat = eval_qualitative(formula, trace, req.at)
    except (TraceError, DomainError, HorizonError, UnknownSignalError) as exc:
        raise _bad_request(type(exc).__name__, exc)
    return MonitorResponse(robustness=rho, satisfied=sat)


def _load_scenario(payload: dict) -> Scenario:
    try:
        return Scenario.model_validate(payload)
    except Exception as exc:
        raise _bad_request("scenario", exc)


@app.post("/analyze-ml", response_model=AnalyzeResponse)
def analyze(req: ScenarioRequest) -> AnalyzeResponse:
    scenario = _load_scenario(req.scenario)
    try:
        report, samples_csv = analyze_ml(scenario)
    except TransportError as exc:
        raise _bad_request("transport", exc)
    return AnalyzeResponse(report=report, samples_csv=samples_csv)


@app.post("/falsify", response_model=FalsifyResponse)
def falsify_endpoint(req: ScenarioRequest) -> FalsifyResponse:
    scenario = _load_scenario(req.scenario)
    try:
        report = comp_falsify(scenario, jobs=req.jobs)
    except StageError as exc:
        raise HTTPException(status_code=500, detail={
            "error": "stage", "stage": exc.stage, "message": str(exc.cause),
            "files": exc.partial_files,
        })
    return FalsifyResponse(report=report.to_dict(), files=report.artifact_files())
