from pathlib import Path
from typing import Optional, Tuple

from sqlalchemy import text
from sqlalchemy.ext.asyncio import AsyncEngine, AsyncSession, async_sessionmaker, create_async_engine

from config import settings
from database.models import Base


def build_engine(url: str) -> Tuple[AsyncEngine, async_sessionmaker]:
    engine = create_async_engine(url, echo=False, future=True)
    factory = async_sessionmaker(
        bind=engine,
        class_=AsyncSession,
        expire_on_commit=False,
        autoflush=False
    )
    return engine, factory


engine, AsyncSessionLocal = build_engine(settings.cache_database_url)


async def init_db(target: Optional[AsyncEngine] = None) -> None:
    target = engine if target is None else target
    database = target.url.database
    if target.url.get_backend_name() == "sqlite" and database and database != ":memory:":
        Path(database).parent.mkdir(parents=True, exist_ok=True)
    async with target.begin() as conn:
        if target.url.get_backend_name() == "sqlite":
            await conn.execute(text("PRAGMA journal_mode=WAL;"))
            await conn.execute(text("PRAGMA synchronous=NORMAL;"))
        await conn.run_sync(Base.metadata.create_all)
