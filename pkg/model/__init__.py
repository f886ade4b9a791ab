"""
数据模型模块
网格/网格函数 (grid_models) 与配置、报告 Schema (schemas)
"""
from model.grid_models import FracOrder, GridFunction, ShiftedGrid  # noqa: F401

__all__ = [
    "FracOrder",
    "GridFunction",
    "ShiftedGrid",
]
