# init_db.py
from database import Base, engine
import models  # noqa: F401
from utils.logs import get_logger

log = get_logger("init_db")


def init_db() -> None:
    Base.metadata.create_all(bind=engine)
    log.info("✅ tables ensured: %s", ", ".join(sorted(Base.metadata.tables)))


if __name__ == "__main__":
    init_db()
