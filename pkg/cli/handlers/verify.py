import asyncio
import logging

from cli.config import RunConfig
from cli.dispatcher import CommandRouter
from services.verifier import run_verification

router = CommandRouter("verify")
logger = logging.getLogger(__name__)


@router.command("verify")
async def cmd_verify(cfg: RunConfig):
    summary = await asyncio.to_thread(run_verification)
    for line in summary.lines():
        print(line)
    summary.raise_for_failures()
    logger.info(f"All {len(summary.results)} checks passed")
