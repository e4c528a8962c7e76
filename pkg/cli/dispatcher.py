"""
Command routing modelled on a bot dispatcher: routers register handlers per
subcommand, middlewares wrap every call and inject extra handler arguments.
"""
import inspect
import logging
from typing import Any, Awaitable, Callable, Dict, List, Optional, Type

from cli.config import RunConfig
from cli.utils import OutputTracker
from errors import (
    ClassicalError,
    DensityError,
    HermitianMapError,
    MetricSolverError,
    PTCubicError,
    SpectralError,
    UsageError,
    VerificationError,
)

logger = logging.getLogger(__name__)

Handler = Callable[..., Awaitable[Optional[int]]]
Middleware = Callable[[Callable[[RunConfig, Dict[str, Any]], Awaitable[Any]], RunConfig, Dict[str, Any]], Awaitable[Any]]

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CODES: Dict[Type[BaseException], int] = {
    UsageError: 2,
    MetricSolverError: 3,
    HermitianMapError: 4,
    SpectralError: 5,
    ClassicalError: 6,
    DensityError: 7,
    VerificationError: 8,
}


def exit_code_for(error: BaseException) -> int:
    for cls in type(error).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return EXIT_UNEXPECTED


class CommandRouter:
    def __init__(self, name: Optional[str] = None):
        self.name = name
        self.handlers: Dict[str, Handler] = {}

    def command(self, name: str):
        def decorator(handler: Handler) -> Handler:
            if name in self.handlers:
                raise ValueError(f"command {name!r} registered twice in router {self.name!r}")
            self.handlers[name] = handler
            return handler
        return decorator


class Dispatcher:
    def __init__(self):
        self.routers: List[CommandRouter] = []
        self.middlewares: List[Middleware] = []

    def include_router(self, router: CommandRouter) -> None:
        self.routers.append(router)

    def middleware(self, middleware: Middleware) -> None:
        self.middlewares.append(middleware)

    def resolve(self, command: str) -> Handler:
        for router in self.routers:
            if command in router.handlers:
                return router.handlers[command]
        raise UsageError(f"no handler registered for {command!r}")

    async def feed(self, cfg: RunConfig) -> int:
        """Run the handler for ``cfg.command`` and map failures to exit codes."""
        outputs = OutputTracker()
        data: Dict[str, Any] = {"cfg": cfg, "outputs": outputs}
        try:
            handler = self.resolve(cfg.command)

            async def call(cfg: RunConfig, data: Dict[str, Any]):
                wanted = inspect.signature(handler).parameters
                return await handler(**{k: v for k, v in data.items() if k in wanted})

            chain = call
            for middleware in reversed(self.middlewares):
                chain = _bind(middleware, chain)
            result = await chain(cfg, data)
            return EXIT_OK if result is None else int(result)
        except PTCubicError as e:
            code = exit_code_for(e)
            logger.error(f"{cfg.command} failed ({type(e).__name__}, exit {code}): {e}")
            outputs.rollback()
            return code
        except Exception as e:
            logger.exception(f"{cfg.command} crashed: {e}")
            outputs.rollback()
            return EXIT_UNEXPECTED


def _bind(middleware: Middleware, inner):
    async def wrapped(cfg: RunConfig, data: Dict[str, Any]):
        return await middleware(inner, cfg, data)
    return wrapped
