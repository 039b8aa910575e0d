"""HTTP service exposing analysis, classification, and corpus generation.

The endpoints wrap the same in-process pipeline the CLI uses; requests
carry a spec document plus an optional config block, responses carry the
same schema-versioned JSON documents the CLI emits.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import __version__
from .classify import RunConfig, classify
from .cli import analysis_document
from .corpus import build_default_corpus, make_duality_pairs
from .errors import GaussKitError
from .report import to_jsonable
from .ruled import parse_spec_obj


class ConfigModel(BaseModel):
    tol_rank: float = Field(default=RunConfig.tol_rank, gt=0)
    tol_gap: float = Field(default=RunConfig.tol_gap, gt=0)
    tol_coincide: float = Field(default=RunConfig.tol_coincide, gt=0)
    tol_residual: float = Field(default=RunConfig.tol_residual, gt=0)
    samples: int = Field(default=RunConfig.samples, ge=1)
    seed: int = RunConfig.seed

    def to_run_config(self) -> RunConfig:
        return RunConfig(
            tol_rank=self.tol_rank, tol_gap=self.tol_gap,
            tol_coincide=self.tol_coincide, tol_residual=self.tol_residual,
            samples=self.samples, seed=self.seed)


class SpecRequest(BaseModel):
    spec: dict
    config: ConfigModel = Field(default_factory=ConfigModel)

    @field_validator("spec")
    @classmethod
    def spec_not_empty(cls, v: dict) -> dict:
        if not v:
            raise ValueError("spec document is empty")
        return v


class CorpusGenRequest(BaseModel):
    seed: int = 0
    include_pairs: bool = False


class HealthResponse(BaseModel):
    status: str
    version: str


class AnalysisResponse(BaseModel):
    document: dict


class VerdictResponse(BaseModel):
    verdict: str
    exit_code: int
    document: dict


class CorpusResponse(BaseModel):
    manifest: dict
    entries: list[dict]
    pairs: list[dict] | None = None


def create_app() -> FastAPI:
    app = FastAPI(
        title="gausskit",
        version=__version__,
        description="Rank, ruled-frame, and focal analysis of parametrized "
                    "submanifolds with degenerate tangent spread.")

    @app.exception_handler(GaussKitError)
    async def on_domain_error(request: Request, exc: GaussKitError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "error_type": type(exc).__name__})

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/analyze", response_model=AnalysisResponse)
    async def analyze(req: SpecRequest) -> AnalysisResponse:
        spec = parse_spec_obj(req.spec)
        doc = analysis_document(spec, req.config.to_run_config())
        return AnalysisResponse(document=to_jsonable(doc))

    @app.post("/classify", response_model=VerdictResponse)
    async def classify_endpoint(req: SpecRequest) -> VerdictResponse:
        spec = parse_spec_obj(req.spec)
        cls = classify(spec, cfg=req.config.to_run_config())
        return VerdictResponse(verdict=cls.verdict, exit_code=cls.exit_code,
                               document=to_jsonable(cls.to_obj()))

    @app.post("/corpus/generate", response_model=CorpusResponse)
    async def corpus_generate(req: CorpusGenRequest) -> CorpusResponse:
        entries = build_default_corpus(req.seed)
        manifest = {
            "schema": "gausskit/corpus-manifest/v1",
            "count": len(entries),
            "entries": [{"name": e.name, "seed": e.seed,
                         "expected": to_jsonable(e.expected)}
                        for e in entries],
        }
        pairs = None
        if req.include_pairs:
            pairs = [p.to_obj() for p in make_duality_pairs(req.seed)]
        return CorpusResponse(
            manifest=manifest,
            entries=[e.to_obj() for e in entries],
            pairs=pairs)

    return app


app = create_app()
