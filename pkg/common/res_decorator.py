import csv
import json
import logging
import sys
from functools import wraps
from typing import IO, Any, Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from common.exception import MyException
from constants.code_enum import SysCodeEnum

logger = logging.getLogger(__name__)


class CustomJSONEncoder(json.JSONEncoder):
    """
    自定义的 JSON 编码器，用于处理 numpy 标量/数组和 Pydantic 模型
    """

    def default(self, obj):
        """

        :param obj:
        :return:
        """
        if isinstance(obj, BaseModel):
            # 处理 Pydantic 模型
            return obj.model_dump(by_alias=True)
        elif isinstance(obj, np.generic):
            # numpy 标量
            return obj.item()
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, (set, frozenset)):
            return sorted(obj)
        elif hasattr(obj, "tolist"):
            # 处理其他可以转换为列表的对象
            return obj.tolist()
        return super().default(obj)


def dump_json(obj: Any, stream: Optional[IO[str]] = None) -> None:
    """按声明顺序输出单个 JSON 对象"""
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, cls=CustomJSONEncoder, ensure_ascii=False, indent=2))
    stream.write("\n")


def format_cell(value: Any) -> str:
    """浮点数输出 17 位有效数字，与区域设置无关"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(target: Optional[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """
    写 CSV，换行符固定为 LF
    :param target: 文件路径；None 或 "-" 表示标准输出
    """
    if target is None or target == "-":
        _write_rows(sys.stdout, header, rows)
        return
    with open(target, "w", encoding="utf-8", newline="") as f:
        _write_rows(f, header, rows)
    logger.info(f"[CSV] 已写入 {target}")


def _write_rows(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])


def cli_resp(func):
    """
    Decorator for command handlers: 把异常折算为退出码
    MyException -> e.code，并在 stderr 输出一行诊断 (命令带 --json 时为 JSON 对象)；其他异常 -> c_9999 并记录堆栈
    """

    @wraps(func)
    def cli_res_wrapper(*args, **kwargs) -> int:
        """
        :param args:
        :param kwargs:
        :return: 进程退出码
        """
        try:
            code = func(*args, **kwargs)
            return SysCodeEnum.c_0.value[0] if code is None else code

        except MyException as e:
            logger.info(f"❌ {func.__name__} 失败: {e}")
            if args and getattr(args[0], "json", False):
                print(json.dumps(e.to_dict(), ensure_ascii=False), file=sys.stderr)
            else:
                print(f"error: {e.ex_code.name}: {e.message}", file=sys.stderr)
            return e.code

        except Exception as e:
            logger.exception(f"❌ {func.__name__} 出现未预期的异常: {e}")
            print(f"error: {SysCodeEnum.c_9999.value[1]}: {e}", file=sys.stderr)
            return SysCodeEnum.c_9999.value[0]

    return cli_res_wrapper
