import json

import pytest

from services.green_service import Problem

# 性质测试使用的 (ν, b) 网格
NU_VALUES = (1.1, 1.25, 1.5, 1.75, 2.0)
B_VALUES = tuple(range(1, 9))

EXAMPLE_NU = 1.25
EXAMPLE_B = 5
EXAMPLE_H = "exp(t)"
EXAMPLE_F = "(1/100)*t*(y^0.5 + y^2)"


def example_problem(lambda_: float = 1.0) -> Problem:
    """ν = 5/4, b = 5, h = e^t, f = t(y^0.5 + y^2)/100"""
    return Problem.create(EXAMPLE_NU, EXAMPLE_B, lambda_, EXAMPLE_H, EXAMPLE_F)


def classical_problem(f: str = "1", lambda_: float = 1.0, b: int = 3) -> Problem:
    """ν = 2, h ≡ 1"""
    return Problem.create(2.0, b, lambda_, "1", f)


@pytest.fixture
def write_config(tmp_path):
    """写出配置文件并返回路径，关键字参数覆盖默认的示例配置"""

    def _write(**overrides) -> str:
        config = {
            "nu": EXAMPLE_NU,
            "b": EXAMPLE_B,
            "lambda": 1.0,
            "h": EXAMPLE_H,
            "f": EXAMPLE_F,
        }
        config.update(overrides)
        config = {k: v for k, v in config.items() if v is not None}
        path = tmp_path / "problem.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        return str(path)

    return _write
