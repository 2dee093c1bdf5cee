# routers/reports.py

from typing import Optional

from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.orm import Session

from database import get_db
from models import ReportRecord
from routers.common import report_out

router = APIRouter(prefix="/reports", tags=["Reports"])


@router.get("")
def list_reports(kind: Optional[str] = None, limit: int = 50, db: Session = Depends(get_db)):
    q = db.query(ReportRecord)
    if kind:
        q = q.filter(ReportRecord.kind == kind.strip().lower())
    rows = q.order_by(ReportRecord.id.desc()).limit(max(1, min(limit, 500))).all()
    return [report_out(r) for r in rows]


@router.get("/{report_id}")
def get_report(report_id: int, db: Session = Depends(get_db)):
    row = db.query(ReportRecord).filter(ReportRecord.id == report_id).first()
    if not row:
        raise HTTPException(status_code=404, detail="Report not found")
    return report_out(row)
