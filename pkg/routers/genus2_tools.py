# routers/genus2_tools.py

from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query
from pydantic import BaseModel
from sqlalchemy.orm import Session

from database import get_db
from genus2core import conic_singularity
from reporting import a6_report, horikawa_report, torsion_report
from routers.common import report_body, report_out, run_engine, save_report
from schemas import TupleFile

router = APIRouter(prefix="/genus2", tags=["Genus 2 tools"])


# ✅ Pydantic Schemas
class A6Body(BaseModel):
    tuple_file: Optional[TupleFile] = None
    pattern: Optional[str] = None
    tau: Optional[str] = None


@router.get("/torsion")
def torsion(
    n: int = Query(..., ge=2),
    deg_tau: int = Query(..., ge=0),
    s: List[int] = Query(default=[]),
    lam: int = 0,
):
    rep = run_engine(torsion_report, n, deg_tau, s or None, lam)
    return report_body(rep)


@router.get("/horikawa")
def horikawa(s: int = Query(..., ge=1), lambda_zero: bool = False):
    return report_body(run_engine(horikawa_report, s, lambda_zero))


@router.get("/singularity")
def singularity(
    s: int = Query(..., ge=1),
    lambda_zero: bool = False,
    in_support: bool = True,
    double_case: str = "i",
):
    return run_engine(
        conic_singularity, s, lambda_zero, None, in_support, double_case
    ).to_dict()


@router.post("/a6")
def a6(payload: A6Body, db: Session = Depends(get_db)):
    if payload.tuple_file is None and payload.pattern is None:
        raise HTTPException(status_code=400, detail="send tuple_file or pattern")
    if payload.tuple_file is not None and payload.tuple_file.kind != "genus2":
        raise HTTPException(status_code=400, detail="A6~ is defined for genus-2 tuples")
    rep = run_engine(a6_report, payload.tuple_file, payload.pattern, payload.tau)
    return report_out(save_report(db, "genus2", rep))
