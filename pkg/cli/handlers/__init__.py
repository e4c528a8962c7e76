"""
Subcommand routers and the output plumbing they share.
"""
import asyncio
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional

from sqlalchemy.ext.asyncio import AsyncSession

from cli.config import RunConfig
from cli.utils import GoldenStore, OutputTracker
from config import settings
from errors import VerificationError
from services.metric_cache import load_or_solve
from services.metric_solver import MetricSolution, solve_metric

logger = logging.getLogger(__name__)

GOLDEN_EXCLUDE = {"out", "csv", "json_output", "jobs", "use_cache", "golden"}


def golden_params(cfg: RunConfig) -> Dict[str, Any]:
    return cfg.model_dump(mode="json", exclude=GOLDEN_EXCLUDE)


async def obtain_metric(session: Optional[AsyncSession], max_order: int, mass: Fraction) -> MetricSolution:
    if session is not None:
        return await load_or_solve(session, max_order, mass)
    return await asyncio.to_thread(solve_metric, max_order, mass)


def publish(cfg: RunConfig, outputs: OutputTracker, text: str, suffix: str, path: Optional[Path], tag: str = "") -> None:
    """Write ``text`` to ``path`` (stdout when None) and apply the --golden mode."""
    if path is not None:
        outputs.write(path, text)
    else:
        print(text, end="")

    if cfg.golden is None:
        return
    store = GoldenStore(settings.golden_dir)
    params = golden_params(cfg)
    if tag:
        params["tag"] = tag
    if cfg.golden == "record":
        store.record(cfg.command, params, text, suffix)
        return
    if suffix == "json":
        matched = store.matches_json(cfg.command, params, text)
    else:
        matched = store.matches_csv(cfg.command, params, text)
    if matched is None:
        raise VerificationError(f"no golden recorded for {cfg.command} with these parameters")
    if not matched:
        raise VerificationError(f"{cfg.command} output differs from the recorded golden")
    logger.info(f"{cfg.command} output matches golden")
