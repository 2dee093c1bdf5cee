# routers/pg3_examples.py

from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from database import get_db
from reporting import pg3_report
from routers.common import report_out, run_engine, save_report
from utils.config import DEFAULT_SEED

router = APIRouter(prefix="/pg3-examples", tags=["Genus 3, p_g = 3"])


@router.get("/{d}")
def pg3_example(d: int, seed: int = DEFAULT_SEED, db: Session = Depends(get_db)):
    rep = run_engine(pg3_report, d, seed)
    return report_out(save_report(db, "genus3", rep))
