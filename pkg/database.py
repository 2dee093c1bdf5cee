from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool
import os

# Stratification runs and reports; a local sqlite file unless DATABASE_URL says otherwise
DATABASE_URL = os.getenv("DATABASE_URL") or "sqlite:///./fibrato.db"

engine_kwargs = {"pool_pre_ping": True}
if DATABASE_URL.startswith("sqlite"):
    engine_kwargs["connect_args"] = {"check_same_thread": False}
    # one shared connection, or every session sees its own empty in-memory db
    if DATABASE_URL in {"sqlite://", "sqlite:///:memory:"}:
        engine_kwargs["poolclass"] = StaticPool

engine = create_engine(DATABASE_URL, **engine_kwargs)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

# ORM base shared by models.py
Base = declarative_base()


# FastAPI dependency: one session per request
def get_db():
    session = SessionLocal()
    try:
        yield session
    finally:
        session.close()
