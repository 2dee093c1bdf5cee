# models.py
from sqlalchemy import (
    Column,
    Integer,
    String,
    DateTime,
    ForeignKey,
    Boolean,
    Index,
    JSON,
)
from sqlalchemy.sql import func
from sqlalchemy.orm import relationship

# ✅ Import the SAME Base object from database.py
from database import Base


# ===============================
# 🎲 STRATIFICATION RUNS
# ===============================
class StratifyRun(Base):
    __tablename__ = "stratify_runs"

    id = Column(Integer, primary_key=True, index=True)
    seed = Column(Integer, nullable=False)
    prime = Column(Integer, nullable=False)
    samples = Column(Integer, nullable=False)
    lines = Column(Integer, nullable=False, default=0)

    # "lines" (random-line minor gcd) or "exact" (4-variable gcd as well)
    mode = Column(String(16), nullable=False, default="lines")
    exact_gcd = Column(Boolean, nullable=False, default=False)

    summary = Column(JSON, nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    sample_rows = relationship(
        "StratifySample",
        back_populates="run",
        cascade="all, delete-orphan",
        passive_deletes=True,
        order_by="StratifySample.trial",
    )


class StratifySample(Base):
    __tablename__ = "stratify_samples"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(
        Integer,
        ForeignKey("stratify_runs.id", ondelete="CASCADE"),
        nullable=False,
        index=True,
    )
    trial = Column(Integer, nullable=False)

    # residues mod p, kept as decimal strings
    a = Column(String(24), nullable=False)
    b = Column(String(24), nullable=False)
    c = Column(String(24), nullable=False)
    d = Column(String(24), nullable=False)

    rank = Column(Integer, nullable=False)
    corank = Column(Integer, nullable=False)
    h0 = Column(Integer, nullable=False)

    run = relationship("StratifyRun", back_populates="sample_rows")

    __table_args__ = (Index("ix_stratify_samples_run_trial", "run_id", "trial"),)


# ===============================
# 🧾 REPORTS
# ===============================
class ReportRecord(Base):
    __tablename__ = "reports"

    id = Column(Integer, primary_key=True, index=True)
    kind = Column(String(32), nullable=False, index=True)  # genus2, genus3, pgq1, tool
    command = Column(String(32), nullable=False)
    input = Column(JSON, nullable=True)
    report = Column(JSON, nullable=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now())
