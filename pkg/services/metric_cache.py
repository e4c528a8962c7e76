"""
Persisted metric solutions.

Rows carry the md5 digest of their metric.json payload; on load the digest is
re-checked and the solution re-verified before reuse, otherwise the row is
discarded and the order re-solved.
"""
import asyncio
import hashlib
import json
import logging
from fractions import Fraction
from typing import Optional, Union

from sqlalchemy import select
from sqlalchemy.ext.asyncio import AsyncSession

from algebra import format_fraction
from database.models import MetricRecord
from errors import PTCubicError
from services.metric_solver import MetricSolution, solve_metric, verify_metric

logger = logging.getLogger(__name__)


def payload_digest(payload: str) -> str:
    return hashlib.md5(payload.encode("utf-8")).hexdigest()


def serialize(sol: MetricSolution) -> str:
    return json.dumps(sol.to_json(), sort_keys=True)


def _restore(record: MetricRecord) -> Optional[MetricSolution]:
    if payload_digest(record.payload) != record.digest:
        logger.warning(f"Digest mismatch for {record}")
        return None
    try:
        sol = MetricSolution.from_json(json.loads(record.payload))
    except (ValueError, KeyError, TypeError, PTCubicError) as e:
        logger.warning(f"Unreadable payload for {record}: {e}")
        return None
    if sol.max_order != record.max_order or format_fraction(sol.mass) != record.mass:
        logger.warning(f"Payload of {record} does not match its key")
        return None
    report = verify_metric(sol)
    if not report.ok:
        logger.warning(f"Cached solution {record} failed re-verification: {report.failures[0]}")
        return None
    return sol


async def _fetch(session: AsyncSession, mass: Fraction, max_order: int) -> Optional[MetricRecord]:
    stmt = select(MetricRecord).where(
        MetricRecord.mass == format_fraction(mass),
        MetricRecord.max_order == max_order,
    )
    result = await session.execute(stmt)
    return result.scalar_one_or_none()


async def store(session: AsyncSession, sol: MetricSolution) -> MetricRecord:
    payload = serialize(sol)
    record = await _fetch(session, sol.mass, sol.max_order)
    if record is None:
        record = MetricRecord(mass=format_fraction(sol.mass), max_order=sol.max_order)
        session.add(record)
    record.payload = payload
    record.digest = payload_digest(payload)
    await session.commit()
    logger.info(f"Stored metric solution M = {sol.mass}, order {sol.max_order}")
    return record


async def load_or_solve(session: AsyncSession, max_order: int, mass: Union[Fraction, int, str] = 1) -> MetricSolution:
    mass = Fraction(mass)
    record = await _fetch(session, mass, max_order)
    if record is not None:
        sol = _restore(record)
        if sol is not None:
            logger.info(f"Cache hit for M = {mass}, order {max_order}")
            return sol
        logger.warning(f"Discarding stale cache row {record}")
        await session.delete(record)
        await session.commit()
    else:
        logger.info(f"Cache miss for M = {mass}, order {max_order}")

    sol = await asyncio.to_thread(solve_metric, max_order, mass)
    await store(session, sol)
    return sol
