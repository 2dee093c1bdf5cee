# routers/strata.py

from typing import Optional

from fastapi import APIRouter, Depends, Query
from sqlalchemy.orm import Session

from database import get_db
from exactalg import dump_matrix
from modulipgq1 import (
    base_setup,
    matriciona_M,
    minimalize_resolution,
    parameter_counts,
    resolution_complex,
    support_profile,
)
from reporting import classify_report
from routers.common import report_out, run_engine, save_report

router = APIRouter(prefix="/strata", tags=["p_g = q = 1 strata"])


@router.get("/classify")
def classify(
    pattern: str = Query("none-zero", description="none-zero, f1=0, f2=f3=0, ..."),
    tau: Optional[str] = Query("general", description="[0], general, L1..L3 or M1..M8"),
    db: Session = Depends(get_db),
):
    rep = run_engine(classify_report, pattern, tau)
    return report_out(save_report(db, "pgq1", rep))


@router.get("/setup")
def setup():
    return run_engine(base_setup).to_dict()


@router.get("/parameter-counts")
def counts():
    return parameter_counts()


@router.get("/matrices")
def matrices():
    """M, the mapping-cone resolution and its minimalisation, in the matrix text format."""
    M = run_engine(matriciona_M)
    res = run_engine(resolution_complex)
    residual = run_engine(minimalize_resolution, res)
    return {
        "M": dump_matrix(M),
        "alpha_tilde": dump_matrix(res.alpha),
        "beta_tilde": dump_matrix(res.beta),
        "residual": dump_matrix(residual),
        "residual_shape": list(residual.shape),
        "residual_nonzero": residual.nonzero_count(),
        "M_nonzero": M.nonzero_count(),
        "residual_column_profile": list(support_profile(residual, axis=1)),
        "M_row_profile": list(support_profile(M, axis=0)),
    }
