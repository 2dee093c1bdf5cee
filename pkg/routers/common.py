# routers/common.py
import json

from fastapi import HTTPException
from sqlalchemy.orm import Session

from models import ReportRecord
from schemas import Report
from utils.errors import FibratoError
from utils.logs import get_logger

log = get_logger("routers")


def run_engine(fn, *args, **kwargs):
    """Call into the engine; engine errors become HTTP errors with their own status."""
    try:
        return fn(*args, **kwargs)
    except FibratoError as e:
        log.warning("⚠️ %s rejected: %r", getattr(fn, "__name__", "engine call"), e)
        raise HTTPException(status_code=e.http_status, detail=str(e))


def report_body(report: Report) -> dict:
    return json.loads(report.to_json())


def save_report(db: Session, kind: str, report: Report) -> ReportRecord:
    body = report_body(report)
    row = ReportRecord(kind=kind, command=report.command, input=body.get("input"), report=body)
    try:
        db.add(row)
        db.commit()
        db.refresh(row)
    except Exception as e:
        db.rollback()
        log.error("❌ report not stored: %r", e)
        raise HTTPException(status_code=500, detail="Could not store report")
    return row


def report_out(row: ReportRecord) -> dict:
    return {
        "id": row.id,
        "kind": row.kind,
        "command": row.command,
        "created_at": row.created_at.isoformat() if row.created_at else None,
        "report": row.report,
    }
