import asyncio
import logging
from pathlib import Path
from typing import List, Optional

from cli.config import RunConfig
from cli.dispatcher import CommandRouter
from cli.handlers import publish
from cli.utils import OutputTracker, csv_text, format_number, json_text
from services.classical import OrbitTrace, e_star, integrate_orbit
from services.density import GaussianState, probability_density
from services.spectral_oracle import spectrum_report

router = CommandRouter("numeric")
logger = logging.getLogger(__name__)


def _spectrum_table(report) -> str:
    lines = ["n  Re E              Im E        formula           dev"]
    for n, (e, f, d) in enumerate(zip(report.lowest, report.formula, report.deviations)):
        lines.append(f"{n:<2} {e.real:<17.12f} {e.imag:<11.3e} {f:<17.12f} {d:.3e}")
    for n, gap in enumerate(report.hermitian_gap):
        lines.append(f"h gap level {n}: {gap:.3e}")
    return "\n".join(lines) + "\n"


@router.command("spectrum")
async def cmd_spectrum(cfg: RunConfig, outputs: OutputTracker):
    report = await asyncio.to_thread(spectrum_report, cfg.params, cfg.basis, cfg.levels, cfg.pad)
    if not report.is_real():
        logger.warning(f"Lowest {cfg.levels} eigenvalues are not real: max |Im| = {report.max_imag:.3e}")
    if cfg.json_output or cfg.out is not None:
        publish(cfg, outputs, json_text(report.to_json()), "json", cfg.out)
    else:
        print(_spectrum_table(report), end="")


def _orbit_path(base: Optional[Path], energy: float, count: int) -> Optional[Path]:
    if base is None or count == 1:
        return base
    return base.with_name(f"{base.stem}_E{format_number(energy)}{base.suffix or '.csv'}")


@router.command("orbit")
async def cmd_orbit(cfg: RunConfig, outputs: OutputTracker):
    bound = e_star(cfg.params, pre_erratum=cfg.pre_erratum)
    logger.info(f"E* = {bound:.6g}{' (pre-erratum)' if cfg.pre_erratum else ''}")
    for energy in cfg.E:
        if energy >= bound:
            logger.warning(f"E = {energy} is not below E* = {bound:.6g}; the eps expansion is unreliable there")

    semaphore = asyncio.Semaphore(cfg.jobs)

    async def run(energy: float) -> OrbitTrace:
        async with semaphore:
            return await asyncio.to_thread(integrate_orbit, cfg.params, energy, 0.0, cfg.dt, cfg.steps)

    traces: List[OrbitTrace] = await asyncio.gather(*(run(e) for e in cfg.E))
    for trace in traces:
        closure = "open" if trace.closure is None else f"closure {trace.closure:.3e}, period {trace.period:.9f}"
        logger.info(f"Orbit E = {trace.energy}: {closure}, drift {trace.max_drift:.3e}")
        if cfg.csv is None and len(traces) > 1:
            continue
        text = csv_text(("t", "x", "p", "H"), trace.rows())
        publish(cfg, outputs, text, "csv", _orbit_path(cfg.csv, trace.energy, len(traces)), tag=f"E={trace.energy}")


@router.command("density")
async def cmd_density(cfg: RunConfig, outputs: OutputTracker):
    state = GaussianState.named(cfg.state)
    grid = [cfg.xmin + (cfg.xmax - cfg.xmin) * i / (cfg.points - 1) for i in range(cfg.points)]
    order = 3 if cfg.order is None else cfg.order
    curve = await asyncio.to_thread(probability_density, state, cfg.params, order, grid)
    checks = curve.normalization_checks()
    logger.info(f"Normalization: quad {checks['quad']:.12f}, hermite {checks['hermite']:.12f}")
    text = csv_text(("x", "re_psi", "im_psi", "rho"), curve.rows())
    publish(cfg, outputs, text, "csv", cfg.csv or cfg.out)
