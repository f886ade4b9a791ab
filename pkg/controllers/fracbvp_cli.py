"""
fracbvp 命令行入口
Usage: fracbvp <green|constants|check|solve|sweep|probe> --config problem.json [options]

退出码: 0 成功, 1 未预期异常, 2 配置/参数错误, 3 Green 函数校验失败, 4 锥退化, 5 无解
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from common.exception import NoSolution
from common.param_parser import load_config
from common.res_decorator import cli_resp, dump_json, write_csv
from config.load_env import load_env
from model.schemas import ConditionReport, ProblemConfig
from services.condition_service import (
    DEFAULT_GROWTH_FACTOR,
    DEFAULT_H3_RANGE,
    DEFAULT_H4_RANGE,
    check_conditions,
)
from services.green_service import (
    Problem,
    build_green,
    cone_constants,
    green_printed_variant,
    probe_shell,
)
from services.solver_service import find_positive_solutions
from services.sweep_service import lambda_grid, sweep_lambda, sweep_table

logger = logging.getLogger(__name__)

DEFAULT_RADII = (0.1, 1.0, 10.0)


def _float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' 不是逗号分隔的数字列表")
    if not values:
        raise argparse.ArgumentTypeError("列表不能为空")
    return values


def _float_pair(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"'{text}' 必须是两个数字 lo,hi")
    return values[0], values[1]


def _load(args) -> tuple[ProblemConfig, Problem]:
    config = load_config(args.config)
    if args.sigma_unweighted:
        config = config.model_copy(update={"sigma_unweighted": True})
    return config, Problem.from_config(config)


def _print_lines(lines: Sequence[str]) -> None:
    sys.stdout.write("\n".join(lines) + "\n")


@cli_resp
def cmd_green(args) -> None:
    """输出 Green 函数表 t,s,G"""
    config, problem = _load(args)
    if args.variant == "printed":
        G = green_printed_variant(problem.nu, problem.b)
    else:
        G = build_green(problem.nu, problem.b)
    points = G.grid.points
    if args.json:
        dump_json(
            {
                "nu": G.nu,
                "b": G.b,
                "variant": G.variant,
                "discrepancy": G.discrepancy,
                "t": points,
                "G": G.values,
            }
        )
        return
    rows = [(points[i], s, G.values[i, s]) for i in range(G.b + 3) for s in range(G.b + 1)]
    write_csv(args.out, ["t", "s", "G"], rows)


@cli_resp
def cmd_constants(args) -> None:
    """输出 γ、η、σ、四分区间与 t*"""
    config, problem = _load(args)
    G = build_green(problem.nu, problem.b)
    C = cone_constants(problem, G)
    if args.json:
        dump_json(C)
        return
    rows = [
        ("gamma", C.gamma),
        ("eta", C.eta),
        ("sigma", C.sigma),
        ("quarter_points", " ".join(format(p, ".17g") for p in C.quarter_points)),
        ("t_star", C.midpoint),
        ("t_star_in_quarter", C.midpoint_in_quarter),
        ("sigma_limits", f"{C.s_lo} {C.s_hi}"),
        ("sigma_unweighted", C.sigma_unweighted),
    ]
    write_csv(None, ["name", "value"], rows)


def format_report(report: ConditionReport) -> list[str]:
    """把条件检查报告整理为逐行文本"""

    def verdict(ok: bool) -> str:
        return "holds" if ok else "fails"

    lines = []
    h1 = report.h1
    if h1.holds:
        tight = " (tight)" if h1.tight else ""
        lines.append(f"H1: holds{tight} at r={h1.radius:.17g}, max f / (eta r / lambda) = {h1.max_f_over_threshold:.17g}")
    else:
        lines.append("H1: fails at every sampled radius")
    h2 = report.h2
    if h2.holds:
        lines.append(f"H2: holds at r={h2.radius:.17g}, min f / (sigma r / lambda) = {h2.min_f_over_threshold:.17g}")
    else:
        lines.append("H2: fails at every sampled radius")
    for name, growth in (("H3", report.h3), ("H4", report.h4)):
        lines.append(
            f"{name}: heuristically {verdict(growth.heuristic)} "
            f"(extreme ratio {growth.ratios[0 if name == 'H3' else -1]:.6g} vs threshold {growth.threshold:.6g})"
        )
    lines.append(f"f_positive: {str(report.f_positive).lower()}")
    bracket = f" with r1={report.r1:.17g}, r2={report.r2:.17g}" if report.theorem_3_2_applicable else ""
    lines.append(f"theorem_3_2_applicable: {str(report.theorem_3_2_applicable).lower()}{bracket}")
    lines.append(f"theorem_3_3_applicable: {str(report.theorem_3_3_applicable).lower()} (heuristic)")
    lines.append(f"theorem_3_4_applicable: {str(report.theorem_3_4_applicable).lower()} (heuristic)")
    if report.m is not None:
        lines.append(f"m: {report.m:.17g}")
    lines.append(f"samples per radius: {report.samples}")
    lines.append("radius,h1,h1_max_f,h1_threshold,h2,h2_min_f,h2_threshold")
    for e in report.evidence:
        lines.append(
            f"{e.radius:.17g},{verdict(e.h1_holds)},{e.h1_max_f:.17g},{e.h1_threshold:.17g},"
            f"{verdict(e.h2_holds)},{e.h2_min_f:.17g},{e.h2_threshold:.17g}"
        )
    return lines


def _report(args, problem: Problem, G, C) -> ConditionReport:
    return check_conditions(
        problem,
        args.radii,
        args.samples,
        G,
        C,
        h3_range=args.h3_range,
        h4_range=args.h4_range,
        factor=args.factor,
    )


@cli_resp
def cmd_check(args) -> None:
    """输出 H1–H4 检查报告；条件是否成立不影响退出码"""
    config, problem = _load(args)
    G = build_green(problem.nu, problem.b)
    C = cone_constants(problem, G)
    report = _report(args, problem, G, C)
    if args.json:
        dump_json(report)
    else:
        _print_lines(format_report(report))


def _solution_path(prefix: str, index: int) -> Path:
    path = Path(prefix)
    stem = path.stem if path.suffix == ".csv" else path.name
    return path.with_name(f"{stem}_{index}.csv")


@cli_resp
def cmd_solve(args) -> None:
    """多初值搜索正解；找不到任何解时退出码为 5"""
    config, problem = _load(args)
    solver = config.solver
    G = build_green(problem.nu, problem.b)
    C = cone_constants(problem, G)

    bracket = None
    m = None
    if args.radii:
        report = _report(args, problem, G, C)
        if report.theorem_3_2_applicable:
            bracket = (report.r1, report.r2)
        m = report.m

    result = find_positive_solutions(
        problem,
        solver.starts,
        solver.tol,
        solver.max_iter,
        solver.damping,
        solver.method,
        G,
        C,
        bracket,
        m,
    )
    if not result.solutions:
        raise NoSolution(f"{len(result.outcomes)} 个初值均未得到正解")

    points = G.grid.points
    if args.out:
        for index, solution in enumerate(result.solutions, 1):
            write_csv(str(_solution_path(args.out, index)), ["t", "y"], zip(points, solution.y.values))

    reports = [s.to_report(i) for i, s in enumerate(result.solutions, 1)]
    if args.json:
        dump_json({"solutions": reports, "starts": result.outcomes})
        return
    header = ["index", "norm", "residual", "in_cone", "method", "iterations"]
    rows = [(r.index, r.norm, r.residual_norm, r.in_cone, r.method, r.iterations) for r in reports]
    if bracket is not None:
        header.append("in_bracket")
        rows = [row + (r.in_bracket,) for row, r in zip(rows, reports)]
    if m is not None:
        header.append("above_m")
        rows = [row + (r.above_m,) for row, r in zip(rows, reports)]
    write_csv(None, header, rows)


@cli_resp
def cmd_sweep(args) -> None:
    """几何 λ 网格上的解个数与范数表"""
    config, problem = _load(args)
    lambdas = lambda_grid(args.lambda_from, args.lambda_to, args.steps)
    G = build_green(problem.nu, problem.b)
    C = cone_constants(problem, G)
    rows = sweep_lambda(problem, lambdas, config.solver, G, C, parallel=not args.serial)
    if args.json:
        dump_json([{"lambda": r.lambda_, "num_solutions": r.num_solutions, "norms": r.norms} for r in rows])
        return
    header, table = sweep_table(rows)
    write_csv(args.out, header, table)


@cli_resp
def cmd_probe(args) -> None:
    """半径 r 的球壳上 ‖Fy‖/‖y‖ 的抽样"""
    config, problem = _load(args)
    G = build_green(problem.nu, problem.b)
    C = cone_constants(problem, G)
    probe = probe_shell(problem, G, C, args.radius, args.samples)
    if args.json:
        dump_json(probe)
        return
    write_csv(None, list(probe.model_dump().keys()), [list(probe.model_dump().values())])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracbvp", description="Discrete fractional boundary value problem toolkit")
    parser.add_argument("--log-level", default=None, help="日志级别 (默认取 FRACBVP_LOG_LEVEL 或 WARNING)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="问题配置 JSON 文件")
        sub.add_argument("--json", action="store_true", help="Output as JSON")
        sub.add_argument("--sigma-unweighted", action="store_true", help="σ 的求和不乘 h")
        sub.set_defaults(handler=handler)
        return sub

    def check_options(sub: argparse.ArgumentParser, radii_default) -> None:
        sub.add_argument("--radii", type=_float_list, default=radii_default, help="逗号分隔的半径列表")
        sub.add_argument("--samples", type=int, default=64, help="每个半径的 y 样本数")
        sub.add_argument("--h3-range", type=_float_pair, default=DEFAULT_H3_RANGE, help="H3 抽样区间 lo,hi")
        sub.add_argument("--h4-range", type=_float_pair, default=DEFAULT_H4_RANGE, help="H4 抽样区间 lo,hi")
        sub.add_argument("--factor", type=float, default=DEFAULT_GROWTH_FACTOR, help="H3/H4 阈值系数")

    green = command("green", cmd_green, "输出 Green 函数表")
    green.add_argument("--out", default=None, help="CSV 输出路径 (默认标准输出)")
    green.add_argument("--variant", choices=["derived", "printed"], default="derived", help="Green 函数形式")

    command("constants", cmd_constants, "输出锥常数 γ、η、σ")

    check = command("check", cmd_check, "检查增长条件 H1–H4")
    check_options(check, list(DEFAULT_RADII))

    solve = command("solve", cmd_solve, "搜索正解")
    solve.add_argument("--out", default=None, help="解的 CSV 路径前缀, 生成 <stem>_1.csv, <stem>_2.csv, ...")
    check_options(solve, None)

    sweep = command("sweep", cmd_sweep, "λ 扫描")
    sweep.add_argument("--lambda-from", type=float, required=True)
    sweep.add_argument("--lambda-to", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--out", default=None, help="CSV 输出路径 (默认标准输出)")
    sweep.add_argument("--serial", action="store_true", help="不使用线程池")

    probe = command("probe", cmd_probe, "球壳探测 ‖Fy‖/‖y‖")
    probe.add_argument("--radius", type=float, required=True)
    probe.add_argument("--samples", type=int, default=64)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    load_env(args.log_level)
    logger.debug(f"[CLI] {args.command}: {vars(args)}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
