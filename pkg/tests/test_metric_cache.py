import asyncio
from fractions import Fraction

import pytest
from sqlalchemy import select

from algebra import OperatorPoly
from database.models import MetricRecord
from database.session import build_engine, init_db
from services import metric_cache
from services.metric_cache import load_or_solve, payload_digest, serialize


@pytest.fixture
def cache_db(tmp_path):
    return build_engine(f"sqlite+aiosqlite:///{tmp_path / 'cache' / 'metric.db'}")


def run(cache_db, scenario):
    engine, factory = cache_db

    async def main():
        await init_db(engine)
        try:
            return await scenario(factory)
        finally:
            await engine.dispose()

    return asyncio.run(main())


async def _rows(factory):
    async with factory() as session:
        return (await session.execute(select(MetricRecord))).scalars().all()


def test_miss_then_hit(cache_db, metric3, monkeypatch):
    async def scenario(session_factory):
        async with session_factory() as session:
            first = await load_or_solve(session, 3, 1)
        assert first.q_terms == metric3.q_terms

        def fail(*args, **kwargs):
            raise AssertionError("solver called on a cache hit")

        monkeypatch.setattr(metric_cache, "solve_metric", fail)
        async with session_factory() as session:
            second = await load_or_solve(session, 3, 1)
        assert second.q_terms == metric3.q_terms
        return await _rows(session_factory)

    rows = run(cache_db, scenario)
    assert len(rows) == 1
    assert rows[0].mass == "1/1"
    assert rows[0].digest == payload_digest(rows[0].payload)


def test_tampered_payload_is_resolved(cache_db, metric3):
    async def scenario(session_factory):
        async with session_factory() as session:
            broken = metric3.with_term(3, OperatorPoly.p())
            payload = serialize(broken)
            session.add(MetricRecord(mass="1/1", max_order=3, payload=payload, digest=payload_digest(payload)))
            await session.commit()
        async with session_factory() as session:
            sol = await load_or_solve(session, 3, Fraction(1))
        return sol, await _rows(session_factory)

    sol, rows = run(cache_db, scenario)
    assert sol.q(3) == metric3.q(3)
    assert len(rows) == 1
    assert rows[0].payload == serialize(sol)


def test_digest_mismatch_discards_row(cache_db, metric3):
    async def scenario(session_factory):
        async with session_factory() as session:
            session.add(MetricRecord(mass="1/1", max_order=3, payload=serialize(metric3), digest="0" * 32))
            await session.commit()
        async with session_factory() as session:
            await load_or_solve(session, 3, 1)
        return await _rows(session_factory)

    rows = run(cache_db, scenario)
    assert len(rows) == 1
    assert rows[0].digest == payload_digest(rows[0].payload)
