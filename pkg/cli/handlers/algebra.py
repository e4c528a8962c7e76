import logging
from typing import Optional

from sqlalchemy.ext.asyncio import AsyncSession

from cli.config import RunConfig
from cli.dispatcher import CommandRouter
from cli.handlers import obtain_metric, publish
from cli.utils import OutputTracker, json_text
from errors import UsageError
from services.hermitian_map import QuantityKind, hermitian_equivalent, observable_pair, unscale
from services.metric_solver import MAX_SUPPORTED_ORDER, verify_metric

router = CommandRouter("algebra")
logger = logging.getLogger(__name__)


def _metric_order_for(order: int) -> int:
    """Smallest odd metric order that an eps^order expansion needs."""
    needed = max(order - 1, 1)
    needed += 1 - needed % 2
    if needed > MAX_SUPPORTED_ORDER:
        raise UsageError(f"order {order} needs the metric through eps^{needed}; at most {MAX_SUPPORTED_ORDER} is supported")
    return needed


@router.command("metric")
async def cmd_metric(cfg: RunConfig, outputs: OutputTracker, session: Optional[AsyncSession] = None):
    order = 3 if cfg.order is None else cfg.order
    if order % 2 == 0 or order > MAX_SUPPORTED_ORDER:
        raise UsageError(f"metric order must be odd and at most {MAX_SUPPORTED_ORDER}, got {order}")
    sol = await obtain_metric(session, order, cfg.params.mass_fraction())
    verify_metric(sol).raise_for_failures()
    publish(cfg, outputs, json_text(sol.to_json()), "json", cfg.out)


@router.command("hamiltonian")
async def cmd_hamiltonian(cfg: RunConfig, outputs: OutputTracker, session: Optional[AsyncSession] = None):
    order = 4 if cfg.order is None else cfg.order
    mass = cfg.params.mass_fraction()
    sol = await obtain_metric(session, _metric_order_for(order), mass)
    expansion = hermitian_equivalent(sol, order)
    h_dim = unscale(expansion.series, cfg.params, QuantityKind.ENERGY, mass=mass)
    logger.info(f"Hamiltonian through eps^{order}: {len(h_dim.terms)} dimensionful terms")
    publish(cfg, outputs, json_text(h_dim.to_json()), "json", cfg.out)


@router.command("observables")
async def cmd_observables(cfg: RunConfig, outputs: OutputTracker, session: Optional[AsyncSession] = None):
    order = 2 if cfg.order is None else cfg.order
    mass = cfg.params.mass_fraction()
    sol = await obtain_metric(session, _metric_order_for(order), mass)
    pair = observable_pair(sol, order)
    payload = {
        "X": unscale(pair.X, cfg.params, QuantityKind.POSITION, mass=mass).to_json(),
        "P": unscale(pair.P, cfg.params, QuantityKind.MOMENTUM, mass=mass).to_json(),
    }
    publish(cfg, outputs, json_text(payload), "json", cfg.out)
