import argparse
import io
import json
import logging

import numpy as np
import pytest

from common.exception import ConfigError, NoSolution
from common.param_parser import load_config, parse_model
from common.res_decorator import cli_resp, dump_json, format_cell, write_csv
from config.load_env import load_env
from model.schemas import ProblemConfig, SolverConfig


@pytest.mark.parametrize(
    "value, text",
    [(True, "true"), (np.bool_(False), "false"), (3, "3"), (np.int64(7), "7"), (0.1, "0.10000000000000001"), (-0.75, "-0.75"), ("", "")],
)
def test_format_cell(value, text):
    assert format_cell(value) == text


def test_write_csv_uses_lf(tmp_path):
    target = tmp_path / "out.csv"
    write_csv(str(target), ["a", "b"], [(1, 0.5), (2, True)])
    assert target.read_bytes() == b"a,b\n1,0.5\n2,true\n"


def test_dump_json_handles_models_and_arrays():
    stream = io.StringIO()
    dump_json({"solver": SolverConfig(), "values": np.arange(3.0), "n": np.int32(4)}, stream)
    data = json.loads(stream.getvalue())
    assert data["solver"]["starts"] == [0.01, 0.1, 1.0, 10.0]
    assert data["values"] == [0.0, 1.0, 2.0]
    assert data["n"] == 4


def test_cli_resp_maps_exceptions_to_exit_codes(capsys):
    @cli_resp
    def ok():
        return None

    @cli_resp
    def no_solution():
        raise NoSolution("nothing")

    @cli_resp
    def crash():
        raise RuntimeError("boom")

    assert ok() == 0
    assert no_solution() == 5
    assert "error: NO_SOLUTION: nothing" in capsys.readouterr().err
    assert crash() == 1


def test_cli_resp_json_mode_uses_exception_dict(capsys):
    @cli_resp
    def no_solution(args):
        raise NoSolution("nothing")

    assert no_solution(argparse.Namespace(json=True)) == 5
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1]) == {
        "error": "NO_SOLUTION",
        "code": 5,
        "message": "nothing",
    }
    assert no_solution(argparse.Namespace(json=False)) == 5
    assert capsys.readouterr().err.endswith("error: NO_SOLUTION: nothing\n")


def test_config_alias_and_defaults():
    config = parse_model({"nu": 1.5, "b": 4, "lambda": 2.0, "h": "1", "f": "y"}, ProblemConfig)
    assert config.lambda_ == 2.0
    assert config.solver.method == "newton"
    assert config.solver.tol == 1e-10
    assert not config.sigma_unweighted
    assert config.model_dump(by_alias=True)["lambda"] == 2.0


@pytest.mark.parametrize(
    "data, fragment",
    [
        ([1, 2], "JSON 对象"),
        ({"nu": 1.5, "b": 4, "lambda": 2.0, "h": "1", "f": "y", "extra": 1}, "extra:"),
        ({"nu": 1.5, "b": 4, "lambda": 2.0, "h": "1", "f": "2t"}, "f:"),
    ],
)
def test_parse_model_errors(data, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_model(data, ProblemConfig)
    assert fragment in exc.value.message


def test_load_config_reads_file(write_config):
    config = load_config(write_config(**{"lambda": 0.02}))
    assert config.nu == 1.25 and config.b == 5 and config.lambda_ == 0.02


def test_load_env_level(monkeypatch):
    monkeypatch.setenv("FRACBVP_LOG_LEVEL", "debug")
    load_env()
    assert logging.getLogger().level == logging.DEBUG
    load_env("not-a-level")
    assert logging.getLogger().level == logging.WARNING
    monkeypatch.delenv("FRACBVP_LOG_LEVEL")
    load_env()
    assert logging.getLogger().level == logging.WARNING
