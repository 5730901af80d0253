"""FastAPI application exposing the laboratory over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..params import AdmissibilityError
from ..quadrature import QuadratureError
from ..spectral import ConvergenceError
from . import handlers
from . import models as m


def create_app() -> FastAPI:
    app = FastAPI(
        title="halfiso",
        version=__version__,
        description="Numerical laboratory for weighted isoperimetric problems "
                    "on the half-space with density |x|^k x_N^alpha.",
    )

    def guarded(fn, req):
        try:
            return fn(req)
        except (AdmissibilityError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (QuadratureError, ConvergenceError, RuntimeError) as exc:
            raise HTTPException(status_code=500, detail=f"numerical failure: {exc}")

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/classify", response_model=m.ClassifyResponse)
    def classify(req: m.ClassifyRequest):
        return guarded(handlers.classify, req)

    @app.post("/classify/grid", response_model=m.ClassifyGridResponse)
    def classify_grid(req: m.ClassifyGridRequest):
        return guarded(handlers.classify_grid, req)

    @app.post("/eigen", response_model=m.EigenResponse)
    def eigen(req: m.EigenRequest):
        return guarded(handlers.eigen, req)

    @app.post("/ratio", response_model=m.RatioResponse)
    def ratio(req: m.RatioRequest):
        return guarded(handlers.ratio, req)

    @app.post("/sweep", response_model=m.SweepResponse)
    def sweep(req: m.SweepRequest):
        return guarded(handlers.sweep, req)

    @app.post("/counterexample", response_model=m.CounterexampleResponse)
    def counterexample(req: m.CounterexampleRequest):
        return guarded(handlers.counterexample, req)

    @app.post("/vanish", response_model=m.VanishResponse)
    def vanish(req: m.VanishRequest):
        return guarded(handlers.vanish, req)

    @app.post("/verify", response_model=m.VerifyResponse)
    def verify(req: m.VerifyRequest):
        return guarded(handlers.verify, req)

    return app


app = create_app()
