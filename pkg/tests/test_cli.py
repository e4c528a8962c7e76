import asyncio
import json
import os

import pytest

from cli.config import RunConfig, parse_config
from cli.dispatcher import CommandRouter, Dispatcher, exit_code_for
from cli.utils import GoldenStore, OutputTracker, atomic_write_text, csv_text, format_number, json_text
from errors import (
    AlgebraError,
    ClassicalError,
    DensityError,
    DimensionalError,
    MetricSolverError,
    SpectralError,
    UsageError,
    VerificationError,
)


def test_flags_override_defaults():
    cfg = parse_config(["spectrum", "--epsilon", "0.1", "--basis", "80"])
    assert cfg.command == "spectrum"
    assert cfg.params.epsilon == 0.1
    assert cfg.basis == 80
    assert cfg.params.m == 1.0
    assert cfg.levels == 5


def test_no_arguments_runs_verify_with_defaults():
    cfg = parse_config([])
    assert cfg.command == "verify"
    assert (cfg.params.m, cfg.params.mu, cfg.params.hbar, cfg.params.ell, cfg.params.epsilon) == (1.0, 1.0, 1.0, 1.0, 0.1)


def test_config_file_precedence(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"epsilon": 0.2, "basis": 60, "E": 5}))
    cfg = parse_config(["spectrum", "--config", str(path), "--basis", "90"])
    assert cfg.params.epsilon == 0.2
    assert cfg.basis == 90
    assert cfg.E == [5.0]


def test_zero_mu_in_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"mu": 0}))
    with pytest.raises(UsageError, match="mu must be nonzero"):
        parse_config(["metric"], config_file=path)


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--basis", "-3"],
        ["spectrum", "--basis", "many"],
        ["orbit", "--E", "-1"],
        ["density", "--xmin", "2", "--xmax", "1"],
        ["plot"],
    ],
)
def test_invalid_values(argv):
    with pytest.raises(UsageError):
        parse_config(argv)


def test_unknown_config_keys(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"basis": 60, "colour": "red"}))
    with pytest.raises(UsageError, match="colour"):
        parse_config(["spectrum", "--config", str(path)])


@pytest.mark.parametrize(
    "error, code",
    [
        (UsageError("x"), 2),
        (MetricSolverError("x"), 3),
        (DimensionalError("x"), 4),
        (SpectralError("x"), 5),
        (ClassicalError("x"), 6),
        (DensityError("x"), 7),
        (VerificationError("x"), 8),
        (AlgebraError("x"), 1),
        (RuntimeError("x"), 1),
    ],
)
def test_exit_codes(error, code):
    assert exit_code_for(error) == code


def _dispatcher(handler, name="spectrum"):
    router = CommandRouter("test")
    router.command(name)(handler)
    dp = Dispatcher()
    dp.include_router(router)
    return dp


def test_failed_command_removes_partial_outputs(tmp_path):
    target = tmp_path / "out.csv"

    async def handler(cfg: RunConfig, outputs: OutputTracker):
        outputs.write(target, "t,x\n")
        raise ClassicalError("start point outside orbit")

    code = asyncio.run(_dispatcher(handler).feed(RunConfig(command="spectrum")))
    assert code == 6
    assert not target.exists()


def test_middleware_injects_arguments():
    seen = {}

    async def handler(cfg: RunConfig, session):
        seen["session"] = session

    async def middleware(inner, cfg, data):
        data["session"] = "db"
        return await inner(cfg, data)

    dp = _dispatcher(handler)
    dp.middleware(middleware)
    assert asyncio.run(dp.feed(RunConfig(command="spectrum"))) == 0
    assert seen["session"] == "db"


def test_unregistered_command():
    dp = Dispatcher()
    assert asyncio.run(dp.feed(RunConfig(command="metric"))) == 2


def test_unexpected_exception_maps_to_one():
    async def handler():
        raise KeyError("surprise")

    assert asyncio.run(_dispatcher(handler).feed(RunConfig(command="spectrum"))) == 1


def test_number_format_is_reproducible():
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(1 / 3)) == 1 / 3
    assert csv_text(("x", "y"), [(1.0, 2.5)]) == "x,y\n1,2.5\n"
    assert json_text({"b": 1, "a": [1, 2]}) == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_atomic_write_leaves_no_temporaries(tmp_path):
    path = tmp_path / "nested" / "q.json"
    atomic_write_text(path, "{}\n")
    atomic_write_text(path, "[]\n")
    assert path.read_text() == "[]\n"
    assert os.listdir(path.parent) == ["q.json"]


def test_golden_store(tmp_path):
    store = GoldenStore(tmp_path)
    params = {"epsilon": 0.1}
    assert store.matches_json("metric", params, "{}\n") is None
    store.record("metric", params, '{"a": 1}\n', "json")
    assert store.matches_json("metric", params, '{"a": 1}\n')
    assert not store.matches_json("metric", params, '{"a":1}\n')

    store.record("orbit", params, csv_text(("t", "x"), [(0.0, 1.0)]), "csv")
    assert store.matches_csv("orbit", params, "t,x\n0,1.0000000000001\n")
    assert not store.matches_csv("orbit", params, "t,x\n0,1.001\n")
    assert not store.matches_csv("orbit", params, "t,p\n0,1\n")
    assert store.key("orbit", params) != store.key("orbit", {"epsilon": 0.2})
