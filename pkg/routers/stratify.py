# routers/stratify.py

from fastapi import APIRouter, Depends, HTTPException
from pydantic import BaseModel, Field
from sqlalchemy.orm import Session

from database import get_db
from models import StratifyRun, StratifySample
from reporting import stratify_run
from routers.common import run_engine
from utils.config import DEFAULT_PRIME, DEFAULT_SEED
from utils.logs import get_logger

router = APIRouter(prefix="/stratify", tags=["Stratification"])
log = get_logger("routers.stratify")


# ✅ Pydantic Schemas
class StratifyBody(BaseModel):
    samples: int = Field(default=200, ge=1, le=100000)
    seed: int = DEFAULT_SEED
    prime: int = DEFAULT_PRIME
    lines: int = Field(default=10, ge=0, le=1000)
    exact_gcd: bool = False


def _run_out(run: StratifyRun, with_samples: bool = False) -> dict:
    out = {
        "id": run.id,
        "seed": run.seed,
        "prime": run.prime,
        "samples": run.samples,
        "lines": run.lines,
        "mode": run.mode,
        "summary": run.summary,
        "created_at": run.created_at.isoformat() if run.created_at else None,
    }
    if with_samples:
        out["rows"] = [
            {
                "trial": s.trial,
                "a": s.a,
                "b": s.b,
                "c": s.c,
                "d": s.d,
                "rank": s.rank,
                "corank": s.corank,
                "h0": s.h0,
            }
            for s in run.sample_rows
        ]
    return out


@router.post("")
def create_run(payload: StratifyBody, db: Session = Depends(get_db)):
    rep = run_engine(
        stratify_run,
        payload.samples,
        payload.seed,
        payload.prime,
        payload.lines,
        payload.exact_gcd,
    )
    run = StratifyRun(
        seed=payload.seed,
        prime=rep.prime,
        samples=payload.samples,
        lines=payload.lines,
        mode="exact" if payload.exact_gcd else "lines",
        exact_gcd=payload.exact_gcd,
        summary=rep.summary(),
    )
    for r in rep.rows:
        a, b, c, d = (str(x) for x in r.point)
        run.sample_rows.append(
            StratifySample(trial=r.trial, a=a, b=b, c=c, d=d, rank=r.rank, corank=r.corank, h0=r.h0)
        )
    try:
        db.add(run)
        db.commit()
        db.refresh(run)
    except Exception as e:
        db.rollback()
        log.error("❌ stratify run not stored: %r", e)
        raise HTTPException(status_code=500, detail="Could not store stratification run")
    log.info("✅ stored stratify run %s", run.id)
    return _run_out(run)


@router.get("/runs")
def list_runs(db: Session = Depends(get_db)):
    runs = db.query(StratifyRun).order_by(StratifyRun.id.desc()).all()
    return [_run_out(r) for r in runs]


@router.get("/runs/{run_id}")
def get_run(run_id: int, db: Session = Depends(get_db)):
    run = db.query(StratifyRun).filter(StratifyRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Stratification run not found")
    return _run_out(run, with_samples=True)
