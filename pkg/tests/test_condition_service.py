import pytest

from common.exception import DomainError
from conftest import EXAMPLE_B, EXAMPLE_H, EXAMPLE_NU, classical_problem, example_problem
from services.condition_service import check_conditions
from services.green_service import Problem, build_green, cone_constants

RADII = [0.1, 1.0, 10.0]


@pytest.fixture(scope="module")
def example_report():
    return check_conditions(example_problem(lambda_=0.02), RADII, 64, h3_range=(1e-12, 1e-6))


def test_zero_f_satisfies_h1_everywhere_and_h2_nowhere():
    P = Problem.create(EXAMPLE_NU, EXAMPLE_B, 1.0, EXAMPLE_H, "0")
    report = check_conditions(P, RADII)
    assert all(e.h1_holds for e in report.evidence)
    assert not any(e.h2_holds for e in report.evidence)
    assert report.h1.holds and report.h1.radius == 0.1
    assert not report.h2.holds and report.h2.radius is None
    assert not report.f_positive
    assert not report.h3.heuristic and not report.h4.heuristic
    assert not report.theorem_3_2_applicable
    assert report.m is None


def test_constant_f_is_tight_at_its_radius():
    lam, r0 = 0.5, 2.0
    G = build_green(EXAMPLE_NU, EXAMPLE_B)
    C = cone_constants(Problem.create(EXAMPLE_NU, EXAMPLE_B, lam, EXAMPLE_H, "0"), G)
    value = C.eta * r0 / lam
    P = Problem.create(EXAMPLE_NU, EXAMPLE_B, lam, EXAMPLE_H, repr(value))
    report = check_conditions(P, [r0 / 2, r0, 2 * r0], 64, G, C)

    holds = [e.h1_holds for e in report.evidence]
    assert holds == [False, True, True]
    assert report.h1.radius == r0
    assert report.h1.tight
    assert report.h1.max_f_over_threshold == pytest.approx(1.0, abs=1e-12)
    assert not report.evidence[2].h1_tight


def test_example_satisfies_h1_and_h3(example_report):
    report = example_report
    assert report.h1.holds
    assert report.h1.radius == 1.0
    assert not report.h1.tight
    assert [e.h1_holds for e in report.evidence] == [False, True, False]
    # max f on [0, 1] sits at t = ν + b - 1, y = 1
    assert report.evidence[1].h1_witness == pytest.approx([5.25, 1.0])
    assert report.evidence[1].h1_max_f == pytest.approx(0.105, rel=1e-12)
    assert report.h3.heuristic
    assert report.h3.ratios[0] == pytest.approx(2500.0, rel=1e-9)
    assert report.h4.heuristic
    assert report.f_positive
    assert report.theorem_3_3_applicable
    assert report.m == 1.0
    assert report.samples == 64
    assert len(report.evidence) == 3


def test_default_h3_range_is_too_coarse_for_the_example():
    report = check_conditions(example_problem(lambda_=0.02), RADII, 64)
    assert not report.h3.heuristic
    assert not report.theorem_3_3_applicable


def test_classical_constants():
    P = classical_problem(f="y^2")
    C = cone_constants(P, build_green(2.0, 3))
    assert C.gamma == pytest.approx(0.5, rel=1e-12)
    assert C.eta == pytest.approx(0.25, rel=1e-12)
    assert C.sigma == pytest.approx(1.0 / 1.3, rel=1e-12)


def test_superlinear_f_brackets_two_radii():
    # H1 at r ≤ η/λ = 0.25, H2 at r ≥ σ/(λγ²) ≈ 3.08
    report = check_conditions(classical_problem(f="y^2"), [0.1, 1e4])
    assert report.theorem_3_2_applicable
    assert (report.r1, report.r2) == (0.1, 1e4)
    assert report.h2.radius == 1e4
    assert not report.h3.heuristic
    assert report.h4.heuristic
    assert report.theorem_3_4_applicable
    assert report.m == 1e4


def test_bracket_needs_h1_below_h2():
    # H1 只在大半径成立而 H2 只在小半径成立时不构成区间
    report = check_conditions(classical_problem(f="1"), [0.1, 10.0])
    assert report.h1.radius == 10.0
    assert report.h2.radius == 0.1
    assert not report.theorem_3_2_applicable
    assert report.r1 is None and report.r2 is None


@pytest.mark.parametrize(
    "radii, samples",
    [([], 64), ([1.0, 0.5], 64), ([-1.0, 1.0], 64), ([1.0], 1), ([1.0], 63)],
)
def test_invalid_sampling_is_rejected(radii, samples):
    with pytest.raises(DomainError):
        check_conditions(classical_problem(), radii, samples)


def test_invalid_growth_range_is_rejected():
    with pytest.raises(DomainError):
        check_conditions(classical_problem(), [1.0], h3_range=(1e-2, 1e-8))
