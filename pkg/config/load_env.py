import io
import logging
import logging.config
import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(levelname)-8s | %(asctime)s | [PID:%(process)d] | %(filename)s:%(lineno)d | %(funcName)s() | %(message)s"

CONFIG_PATH = Path(__file__).resolve().parent / "logging.conf"


def load_env(level: Optional[str] = None):
    """
    加载 .env 文件与日志配置
    日志统一输出到 stderr，stdout 只用于报告与 CSV

    :param level: 日志级别，缺省时取环境变量 FRACBVP_LOG_LEVEL，再缺省为 WARNING
    """
    # 根据环境变量 ENV 的值选择加载哪个 .env 文件
    dotenv_path = f'.env.{os.getenv("ENV", "dev")}'
    load_dotenv(dotenv_path)
    level = (level or os.getenv("FRACBVP_LOG_LEVEL") or "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"

    try:
        # 检查 colorlog 是否可用
        try:
            import colorlog  # noqa: F401

            colorlog_available = True
        except ImportError:
            colorlog_available = False

        if not CONFIG_PATH.exists():
            raise FileNotFoundError(f"logging.conf not found at {CONFIG_PATH}")

        # 清除所有现有的 handler，避免重复
        root_logger = logging.getLogger()
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        config_content = CONFIG_PATH.read_text(encoding="utf-8")
        if not colorlog_available:
            # 替换 coloredFormatter 为 fileFormatter
            config_content = config_content.replace("formatter=coloredFormatter", "formatter=fileFormatter")
        logging.config.fileConfig(io.StringIO(config_content), disable_existing_loggers=False)

        root_logger = logging.getLogger()
        root_logger.setLevel(level)
        if not root_logger.handlers:
            raise RuntimeError("Root logger has no handlers after loading logging.conf")

        logging.getLogger("config_loader").debug(
            f"Logging configuration loaded from {CONFIG_PATH}, colorlog_available={colorlog_available}"
        )
    except Exception as e:
        # 如果配置文件加载失败，使用备用配置
        logging.basicConfig(
            level=level,
            format=LOG_FORMAT,
            datefmt="%Y-%m-%d %H:%M:%S",
            stream=sys.stderr,
            force=True,
        )
        logging.warning(f"Failed to load logging.conf: {e}, using basicConfig instead")

    logging.debug(f"""====当前配置文件是:{dotenv_path}====""")
