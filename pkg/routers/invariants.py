# routers/invariants.py

from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from database import get_db
from reporting import invariants_report
from routers.common import report_out, run_engine, save_report
from schemas import TupleFile

router = APIRouter(prefix="/invariants", tags=["Invariants"])


@router.post("")
def compute_invariants(payload: TupleFile, db: Session = Depends(get_db)):
    """Invariants, derived bundles and the admissibility checklist of a 5-tuple."""
    rep = run_engine(invariants_report, payload)
    row = save_report(db, payload.kind, rep)
    return report_out(row)
