import pytest

from common.exception import ConfigError
from conftest import EXAMPLE_B, EXAMPLE_H, EXAMPLE_NU, classical_problem, example_problem
from model.schemas import SolverConfig
from services.green_service import Problem, build_green, cone_constants
from services.sweep_service import SweepRow, lambda_grid, sweep_lambda, sweep_table


def test_lambda_grid_is_geometric_and_hits_endpoints():
    grid = lambda_grid(1e-3, 1e1, 5)
    assert grid[0] == 1e-3
    assert grid[-1] == 1e1
    assert grid == pytest.approx([1e-3, 1e-2, 1e-1, 1.0, 1e1], rel=1e-12)


@pytest.mark.parametrize("lo, hi, steps", [(1.0, 0.5, 3), (0.0, 1.0, 3), (0.1, 1.0, 1)])
def test_lambda_grid_rejects_bad_ranges(lo, hi, steps):
    with pytest.raises(ConfigError):
        lambda_grid(lo, hi, steps)


def test_sweep_table_pads_missing_norms():
    header, table = sweep_table([SweepRow(0.1, [0.0, 2.5]), SweepRow(0.2, [0.0])])
    assert header == ["lambda", "num_solutions", "norm_1", "norm_2"]
    assert table[0] == [0.1, 2, 0.0, 2.5]
    assert table[1] == [0.2, 1, 0.0, ""]


def test_sweep_keeps_lambda_order_in_parallel():
    P = example_problem()
    G = build_green(P.nu, P.b)
    C = cone_constants(P, G)
    solver = SolverConfig(starts=[0.01, 0.1], max_iter=200)
    lambdas = [0.04, 0.01, 0.02]
    parallel = sweep_lambda(P, lambdas, solver, G, C)
    serial = sweep_lambda(P, lambdas, solver, G, C, parallel=False)
    assert [r.lambda_ for r in parallel] == lambdas
    assert parallel == serial
    assert all(r.norms[0] == 0.0 for r in parallel)


def test_zero_f_sweep_keeps_only_the_zero_solution():
    P = Problem.create(EXAMPLE_NU, EXAMPLE_B, 1.0, EXAMPLE_H, "0")
    G = build_green(P.nu, P.b)
    C = cone_constants(P, G)
    rows = sweep_lambda(P, lambda_grid(0.01, 1.0, 3), SolverConfig(starts=[0.01, 0.1, 1.0]), G, C)
    assert [r.num_solutions for r in rows] == [1, 1, 1]
    assert all(r.norms == [0.0] for r in rows)


def test_y_independent_f_norm_is_proportional_to_lambda():
    # ν = 2, h = f = 1: y = λ·[0, 2, 3, 3, 2, 0]
    P = classical_problem(f="1")
    G = build_green(P.nu, P.b)
    C = cone_constants(P, G)
    lambdas = lambda_grid(0.5, 4.0, 4)
    rows = sweep_lambda(P, lambdas, SolverConfig(starts=[0.1, 1.0]), G, C)
    assert all(r.num_solutions == 1 for r in rows)
    assert [r.norms[0] / r.lambda_ for r in rows] == pytest.approx([3.0] * 4, rel=1e-10)


def test_example_sweep_has_a_two_solution_regime():
    P = example_problem()
    G = build_green(P.nu, P.b)
    C = cone_constants(P, G)
    rows = sweep_lambda(P, lambda_grid(0.01, 0.04, 3), SolverConfig(starts=[0.01, 0.1], max_iter=200), G, C)
    pairs = [r for r in rows if r.num_solutions == 2]
    assert pairs
    for row in pairs:
        assert row.norms[0] == 0.0 < row.norms[1]
