# main.py
import os

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.status import HTTP_500_INTERNAL_SERVER_ERROR

# ========================================
# 🗄 ORM TABLES BEFORE ROUTERS
# ========================================
import models  # noqa: F401
from init_db import init_db
from utils.logs import get_logger

log = get_logger("api")

# ========================================
# 🚀 FIBRATO API
# ========================================
app = FastAPI(
    title="Fibrato API",
    version="1.0.0",
    description="Invariants, bundle data and strata of genus-2 and genus-3 fibrations.",
)

# ========================================
# 🌍 CORS (FIBRATO_CORS_ORIGINS, comma separated)
# ========================================
ALLOWED_ORIGINS = [
    origin.strip()
    for origin in (os.getenv("FIBRATO_CORS_ORIGINS") or "http://localhost:5173,http://127.0.0.1:5173").split(",")
    if origin.strip()
]

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def create_tables():
    try:
        init_db()
    except Exception as e:
        log.error("❌ init_db failed at startup: %r", e)


@app.exception_handler(Exception)
async def unhandled_error(request: Request, exc: Exception):
    log.error("❌ %s %s crashed: %r", request.method, request.url.path, exc)
    return JSONResponse(
        status_code=HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "detail": "Internal Server Error",
            "error": repr(exc),
            "path": str(request.url.path),
        },
    )


# ========================================
# 🔌 ROUTERS
# ========================================
from routers.invariants import router as invariants_router  # noqa: E402
from routers.strata import router as strata_router  # noqa: E402
from routers.stratify import router as stratify_router  # noqa: E402
from routers.pg3_examples import router as pg3_examples_router  # noqa: E402
from routers.genus2_tools import router as genus2_tools_router  # noqa: E402
from routers.reports import router as reports_router  # noqa: E402

for r in (
    invariants_router,
    strata_router,
    stratify_router,
    pg3_examples_router,
    genus2_tools_router,
    reports_router,
):
    app.include_router(r)


@app.get("/health")
def health():
    return {"ok": True, "status": "API running"}
