"""
lnakit API - LNA analysis and design service
============================================

Exposes the lnakit analysis, design and cascade-noise operations over HTTP.
Requests without a Touchstone body use the bundled N420 3 GHz device.
"""
# Load environment variables FIRST (before other imports read them)
from dotenv import load_dotenv
load_dotenv()

import hashlib
import logging
import os
import sys
from contextlib import asynccontextmanager
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from cachetools import TTLCache
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, field_validator
from slowapi import Limiter, _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded
from starlette.requests import Request

from lnakit import __version__
from lnakit.core import parse_frequency, undb10
from lnakit.design import DesignSpec, Objective, design_amplifier
from lnakit.errors import (
    ConfigError,
    InvalidNoiseParameters,
    LnaError,
    OutOfRange,
    TouchstoneError,
)
from lnakit.matching import StubKind
from lnakit.noise import CascadeStage, parse_noise_parameters
from lnakit.reports import analysis_report, cascade_report, design_report
from lnakit.touchstone import SweepTable, parse_touchstone, parse_touchstone_file, sample_at
from lnakit import settings

# Configure structured logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
    format='{"timestamp": "%(asctime)s", "level": "%(levelname)s", "message": "%(message)s"}',
    handlers=[logging.StreamHandler(sys.stdout)]
)
logger = logging.getLogger(__name__)

DEFAULT_DEVICE = Path(os.environ.get("LNAKIT_DEFAULT_DEVICE", Path(__file__).parent / "devices" / "n420_3ghz.s2p"))
RATE_LIMIT_ANALYZE = os.environ.get("RATE_LIMIT_ANALYZE", "60/minute")
RATE_LIMIT_DESIGN = os.environ.get("RATE_LIMIT_DESIGN", "20/minute")

# Parsed uploads keyed by content hash
CACHE_TTL = 3600
CACHE_MAX_SIZE = 128
_sweep_cache = TTLCache(maxsize=CACHE_MAX_SIZE, ttl=CACHE_TTL)

_default_sweep: Optional[SweepTable] = None


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Load the bundled device at startup."""
    global _default_sweep
    try:
        _default_sweep = parse_touchstone_file(DEFAULT_DEVICE)
        logger.info(f"Default device loaded: {DEFAULT_DEVICE} ({len(_default_sweep)} points)")
    except (OSError, TouchstoneError) as e:
        logger.error(f"Default device unavailable ({DEFAULT_DEVICE}): {e}")
    yield
    logger.info("Shutting down...")
    _sweep_cache.clear()


app = FastAPI(title="lnakit API", description="LNA analysis and design", lifespan=lifespan)

limiter = Limiter(key_func=lambda request: request.client.host if request.client else "unknown")
app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)


# ---------------------------------------------------------------------------
# Request models
# ---------------------------------------------------------------------------

class AnalyzeRequest(BaseModel):
    touchstone: Optional[str] = None
    frequency: Optional[str] = None


class DesignSpecBody(BaseModel):
    freq: str
    objective: str = Objective.MAX_GAIN.value
    nf_max_db: Optional[float] = None
    gain_min_db: Optional[float] = None
    z0: float = settings.DEFAULT_Z0
    stub_kind: str = settings.DEFAULT_STUB_KIND
    eps_r: float = settings.SUBSTRATE_EPS_R
    h_mm: float = settings.SUBSTRATE_H_MM

    @field_validator('objective')
    @classmethod
    def validate_objective(cls, v):
        allowed = [o.value for o in Objective]
        if v not in allowed:
            raise ValueError(f"objective must be one of {allowed}")
        return v


class DesignRequest(BaseModel):
    touchstone: Optional[str] = None
    spec: DesignSpecBody
    noise: Optional[str] = None


class StageBody(BaseModel):
    nf_db: float
    gain_db: float


class CascadeRequest(BaseModel):
    stages: List[StageBody]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _is_input_error(exc: Exception) -> bool:
    if isinstance(exc, OutOfRange):
        return False
    return isinstance(exc, (TouchstoneError, ConfigError, InvalidNoiseParameters)) or not isinstance(exc, LnaError)


def _http_error(exc: Exception) -> HTTPException:
    status = 400 if _is_input_error(exc) else 422
    logger.info(f"request rejected ({status}): {type(exc).__name__}: {exc}")
    return HTTPException(status_code=status, detail=str(exc))


def _sweep(touchstone: Optional[str]) -> SweepTable:
    if touchstone is None:
        if _default_sweep is None:
            raise HTTPException(status_code=503, detail="Default device is not loaded")
        return _default_sweep
    key = hashlib.sha256(touchstone.encode()).hexdigest()
    if key in _sweep_cache:
        return _sweep_cache[key]
    sweep = parse_touchstone(touchstone)
    _sweep_cache[key] = sweep
    return sweep


# ---------------------------------------------------------------------------
# Endpoints
# ---------------------------------------------------------------------------

@app.get("/health")
async def health_check():
    """Liveness check; reports whether the bundled device is available."""
    return {
        "status": "ok" if _default_sweep is not None else "degraded",
        "version": __version__,
        "default_device": _default_sweep is not None,
        "timestamp": datetime.now().isoformat(),
    }


@app.post("/api/analyze")
@limiter.limit(RATE_LIMIT_ANALYZE)
async def analyze(request: Request, body: AnalyzeRequest):
    try:
        sweep = _sweep(body.touchstone)
        if body.frequency is not None:
            frequency = parse_frequency(body.frequency)
        elif len(sweep) == 1:
            frequency = sweep.f_min
        else:
            raise ConfigError(f"frequency is required for a {len(sweep)}-point sweep")
        return analysis_report(sample_at(sweep, frequency), frequency)
    except (LnaError, ValueError) as e:
        raise _http_error(e)


@app.post("/api/design")
@limiter.limit(RATE_LIMIT_DESIGN)
async def design(request: Request, body: DesignRequest):
    try:
        sweep = _sweep(body.touchstone)
        spec = DesignSpec(
            frequency_hz=parse_frequency(body.spec.freq),
            objective=Objective(body.spec.objective),
            nf_max=undb10(body.spec.nf_max_db) if body.spec.nf_max_db is not None else None,
            gain_min=undb10(body.spec.gain_min_db) if body.spec.gain_min_db is not None else None,
            z0=body.spec.z0,
            stub_kind=StubKind(body.spec.stub_kind),
            eps_r=body.spec.eps_r,
            h_mm=body.spec.h_mm,
        )
        noise = parse_noise_parameters(body.noise, spec.z0) if body.noise else None
        return design_report(design_amplifier(sweep, noise, spec))
    except (LnaError, ValueError) as e:
        raise _http_error(e)


@app.post("/api/cascade")
@limiter.limit(RATE_LIMIT_ANALYZE)
async def cascade(request: Request, body: CascadeRequest):
    try:
        stages = [CascadeStage.from_db(stage.nf_db, stage.gain_db) for stage in body.stages]
        return cascade_report(stages)
    except (LnaError, ValueError) as e:
        raise _http_error(e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=int(os.environ.get("PORT", "8000")))
