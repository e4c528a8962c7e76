import asyncio
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from database.session import AsyncSessionLocal, engine, init_db
from services.metric_cache import load_or_solve
from services.metric_solver import verify_metric
from services.verifier import run_verification

# Configure logging
logging.basicConfig(level=logging.INFO, stream=sys.stdout)
logger = logging.getLogger(__name__)


async def verify_system() -> int:
    logger.info("--- Starting System Verification ---")

    logger.info("1. Initializing metric cache...")
    await init_db()

    logger.info("2. Loading or solving the metric through eps^5...")
    async with AsyncSessionLocal() as session:
        sol = await load_or_solve(session, 5, 1)
    report = verify_metric(sol)
    for check in report.checks:
        logger.info(f"   order {check.order} {check.name}: {'ok' if check.passed else check.detail}")

    logger.info("3. Running the verification suite...")
    summary = await asyncio.to_thread(run_verification)
    await engine.dispose()

    if summary.ok and report.ok:
        logger.info(f"SUCCESS: {len(summary.results)} checks passed")
        return 0
    for failure in summary.failures:
        logger.error(f"FAILURE: {failure.name}: {failure.detail}")
    return 8


if __name__ == "__main__":
    sys.exit(asyncio.run(verify_system()))
