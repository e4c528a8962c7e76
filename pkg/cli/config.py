"""
Run configuration: command-line flags > JSON config file > defaults.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import settings
from errors import UsageError
from services.metric_solver import ModelParams

COMMANDS = ("metric", "hamiltonian", "observables", "spectrum", "orbit", "density", "verify")
PARAM_KEYS = ("m", "mu", "epsilon", "hbar", "ell")
FILE_KEYS = frozenset(PARAM_KEYS + ("order", "basis", "levels", "E", "dt", "steps", "xmin", "xmax", "points"))


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["metric", "hamiltonian", "observables", "spectrum", "orbit", "density", "verify"]
    params: ModelParams = ModelParams()

    order: Optional[int] = None
    basis: int = Field(default_factory=lambda: settings.default_basis)
    pad: int = Field(default_factory=lambda: settings.default_pad)
    levels: int = 5
    E: List[float] = [1.0]
    dt: float = 1e-3
    steps: int = 20000
    xmin: float = -4.0
    xmax: float = 4.0
    points: int = 400
    state: Literal["ground", "first"] = "ground"
    pre_erratum: bool = False

    out: Optional[Path] = None
    csv: Optional[Path] = None
    json_output: bool = False
    jobs: int = 1
    use_cache: bool = True
    golden: Optional[Literal["record", "check"]] = None

    @field_validator("basis")
    @classmethod
    def _basis(cls, value: int) -> int:
        if value < 2:
            raise ValueError("basis size must be at least 2")
        return value

    @field_validator("pad", "order")
    @classmethod
    def _nonnegative(cls, value: Optional[int], info) -> Optional[int]:
        if value is not None and value < 0:
            raise ValueError(f"{info.field_name} must be nonnegative")
        return value

    @field_validator("levels", "steps", "jobs")
    @classmethod
    def _positive_int(cls, value: int, info) -> int:
        if value < 1:
            raise ValueError(f"{info.field_name} must be at least 1")
        return value

    @field_validator("dt")
    @classmethod
    def _positive_step(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("dt must be positive")
        return value

    @field_validator("E")
    @classmethod
    def _energies(cls, value: List[float]) -> List[float]:
        if not value or any(not e > 0 for e in value):
            raise ValueError("energies must be positive")
        return value

    @model_validator(mode="after")
    def _grid(self) -> "RunConfig":
        if self.points < 2:
            raise ValueError("points must be at least 2")
        if not self.xmin < self.xmax:
            raise ValueError("xmin must be smaller than xmax")
        return self


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="JSON file with parameter overrides")
    for key in PARAM_KEYS:
        common.add_argument(f"--{key}", type=float)
    common.add_argument("--order", type=int)
    common.add_argument("--no-cache", dest="use_cache", action="store_false")
    common.add_argument("--golden", choices=("record", "check"))
    common.add_argument("--out", type=Path)
    common.add_argument("--jobs", type=int)

    parser = _Parser(prog="ptcubic", description="PT-symmetric cubic oscillator toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("metric", "hamiltonian", "observables", "verify"):
        sub.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS)

    spectrum = sub.add_parser("spectrum", parents=[common], argument_default=argparse.SUPPRESS)
    spectrum.add_argument("--basis", type=int)
    spectrum.add_argument("--pad", type=int)
    spectrum.add_argument("--levels", type=int)
    spectrum.add_argument("--json", dest="json_output", action="store_true")

    orbit = sub.add_parser("orbit", parents=[common], argument_default=argparse.SUPPRESS)
    orbit.add_argument("--E", nargs="+", type=float)
    orbit.add_argument("--dt", type=float)
    orbit.add_argument("--steps", type=int)
    orbit.add_argument("--csv", type=Path)
    orbit.add_argument("--pre-erratum", dest="pre_erratum", action="store_true")

    density = sub.add_parser("density", parents=[common], argument_default=argparse.SUPPRESS)
    density.add_argument("--state", choices=("ground", "first"))
    density.add_argument("--xmin", type=float)
    density.add_argument("--xmax", type=float)
    density.add_argument("--points", type=int)
    density.add_argument("--csv", type=Path)
    return parser


def load_config_file(path: Path) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - FILE_KEYS)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    if "E" in data and not isinstance(data["E"], list):
        data["E"] = [data["E"]]
    return data


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(loc) for loc in item["loc"])
        parts.append(f"{where}: {item['msg']}" if where else item["msg"])
    return "; ".join(parts)


def parse_config(argv: Optional[Sequence[str]] = None, config_file: Optional[Path] = None) -> RunConfig:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        argv = ["verify"]
    flags = vars(build_parser().parse_args(argv))
    path = flags.pop("config", None) or config_file
    merged: Dict[str, Any] = load_config_file(path) if path else {}
    merged.update(flags)

    params = {key: merged.pop(key) for key in PARAM_KEYS if key in merged}
    try:
        return RunConfig(params=ModelParams(**params), **merged)
    except ValidationError as e:
        raise UsageError(_validation_message(e))
