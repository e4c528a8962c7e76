from typing import Any, Awaitable, Callable, Dict

from sqlalchemy.ext.asyncio import async_sessionmaker

from cli.config import RunConfig


class DbSessionMiddleware:
    def __init__(self, session_pool: async_sessionmaker):
        self.session_pool = session_pool

    async def __call__(
        self,
        handler: Callable[[RunConfig, Dict[str, Any]], Awaitable[Any]],
        cfg: RunConfig,
        data: Dict[str, Any],
    ) -> Any:
        if not cfg.use_cache:
            data["session"] = None
            return await handler(cfg, data)
        async with self.session_pool() as session:
            data["session"] = session
            return await handler(cfg, data)
