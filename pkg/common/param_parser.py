"""
配置解析
读取 JSON 配置文件并校验为 ProblemConfig，校验失败时给出出错字段
"""

import json
import logging
from pathlib import Path
from typing import Any, Type, TypeVar

from pydantic import BaseModel, ValidationError

from common.exception import ConfigError
from model.schemas import ProblemConfig

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)


def parse_model(data: Any, model: Type[M]) -> M:
    """把已解析的 JSON 数据校验为 Pydantic 模型"""
    if not isinstance(data, dict):
        raise ConfigError(f"配置必须是 JSON 对象, 实际为 {type(data).__name__}")
    try:
        return model.model_validate(data)
    except ValidationError as e:
        errors = []
        for error in e.errors():
            field = ".".join(str(x) for x in error["loc"]) or "<root>"
            msg = error["msg"]
            errors.append(f"{field}: {msg}")
        raise ConfigError(f"参数验证失败: {'; '.join(errors)}")


def load_config(path: str) -> ProblemConfig:
    """
    读取并校验问题配置文件
    :param path: JSON 文件路径
    :return: ProblemConfig
    """
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"无法读取配置文件 {path}: {e.strerror or e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置文件 {path} 不是合法的 JSON: 第 {e.lineno} 行第 {e.colno} 列 {e.msg}")
    config = parse_model(data, ProblemConfig)
    logger.info(f"[CONFIG] 已加载 {path}: ν={config.nu}, b={config.b}, λ={config.lambda_}")
    return config
