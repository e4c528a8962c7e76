import asyncio
import logging
import sys
from typing import Optional, Sequence

from config import settings
from errors import UsageError
from cli.config import parse_config
from cli.dispatcher import Dispatcher, exit_code_for
from cli.middlewares import DbSessionMiddleware

logging.basicConfig(level=settings.log_level, stream=sys.stderr)
logger = logging.getLogger(__name__)


async def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return exit_code_for(e)

    dp = Dispatcher()

    from cli.handlers import algebra, numeric, verify

    dp.include_router(algebra.router)
    dp.include_router(numeric.router)
    dp.include_router(verify.router)

    engine = None
    if cfg.use_cache and cfg.command in ("metric", "hamiltonian", "observables"):
        from database.session import AsyncSessionLocal, engine, init_db

        logger.info("Initializing metric cache...")
        try:
            await init_db()
            dp.middleware(DbSessionMiddleware(session_pool=AsyncSessionLocal))
        except Exception as e:
            logger.warning(f"Metric cache unavailable, solving without it: {e}")

    logger.info(f"Running {cfg.command}")
    try:
        return await dp.feed(cfg)
    finally:
        if engine is not None:
            await engine.dispose()


if __name__ == "__main__":
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        logger.info("Interrupted")
        sys.exit(130)
