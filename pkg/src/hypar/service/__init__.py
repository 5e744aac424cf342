"""FastAPI service exposing the planner and simulator."""
from fastapi import FastAPI

from .routes import register_error_handlers, router


def create_app() -> FastAPI:
    app = FastAPI(title="hypar", version="0.1.0",
                  description="Layer-wise parallelism planning and "
                              "accelerator-array simulation")
    app.include_router(router, prefix="/v1")
    register_error_handlers(app)
    return app


app = create_app()
