import pytest

import numpy

from asymconv.common import BoundDirection, SamplerConfig
from asymconv.extremal import (
    ConstraintKind,
    EvenPolynomial,
    ExtremalException,
    ExtremalProblem,
    chebyshev_lobatto_grid,
    discretization_tolerance,
    gap_witness,
    membership_check,
    refinement_check,
    scale_invariance_check,
    solve_extremal,
)
from asymconv.normcore import NormDescriptor, SymmetricForm

FAST = SamplerConfig(samples=512, seed=17, refine_iters=20)

SEXTIC = EvenPolynomial.from_mapping(6, {2: 5.0 / 6.0, 4: -5.0 / 3.0, 6: 2.0})


def test_quartic_optimum() -> "None":
    result = solve_extremal(ExtremalProblem(4, 1.0))
    assert result.q == pytest.approx(2.0, abs=1e-6)
    assert result.K == pytest.approx(1.0, abs=1e-6)
    assert result.polynomial.coefficient(2) == pytest.approx(0.0, abs=1e-6)
    assert result.polynomial.coefficient(4) == 2.0
    assert result.min_value >= -1e-9
    assert result.min_convexity >= -1e-9
    assert len(result.active) > 0


def test_sextic_optimum() -> "None":
    result = solve_extremal(ExtremalProblem(6, 1.0))
    assert result.q == pytest.approx(7.0 / 6.0, abs=2e-3)
    assert result.K == pytest.approx(12.0 / 7.0, abs=3e-3)
    assert result.polynomial.coefficient(4) == pytest.approx(-5.0 / 3.0, abs=5e-3)
    assert result.polynomial.coefficient(2) == pytest.approx(5.0 / 6.0, abs=5e-3)
    assert result.T >= 2.0
    assert result.bound_rounds >= 1


def test_result_marshalling() -> "None":
    doc = solve_extremal(ExtremalProblem(4, 1.0, density=257))._marshall()
    assert set(doc) == {"N", "t0", "q", "K", "coefficients", "grid", "diagnostics", "normalization"}
    assert set(doc["coefficients"]) == {"2", "4"}
    assert doc["grid"]["density"] == 257
    assert "leading coefficient" in doc["normalization"]


def test_fixed_window() -> "None":
    result = solve_extremal(ExtremalProblem(4, 1.0, T=3.0, density=513))
    assert result.T == 3.0
    assert result.bound_rounds == 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"N": 2, "t0": 1.0},
        {"N": 5, "t0": 1.0},
        {"N": 4, "t0": 0.0},
        {"N": 4, "t0": 1.0, "density": 2},
        {"N": 4, "t0": 2.0, "T": 3.0},
    ],
)
def test_problem_validation(kwargs: "dict") -> "None":
    with pytest.raises(ExtremalException):
        ExtremalProblem(**kwargs)


def test_scale_invariance() -> "None":
    report = scale_invariance_check(6, (0.5, 1.0, 2.0))
    assert report.spread <= 1e-4
    assert report.passed
    assert report.normalized[1] == pytest.approx(7.0 / 6.0, abs=5e-3)


def test_refinement_only_raises_q() -> "None":
    report = refinement_check(ExtremalProblem(6, 1.0, density=513))
    assert report.nondecreasing
    assert report.fine >= report.coarse - 1e-9


def test_chebyshev_grids_are_nested() -> "None":
    coarse = chebyshev_lobatto_grid(3.0, 9)
    fine = chebyshev_lobatto_grid(3.0, 17)
    assert coarse[0] == 0.0
    assert coarse[-1] == 3.0
    assert fine[::2] == pytest.approx(coarse)
    assert numpy.all(numpy.diff(fine) > 0)


def test_grid_optimum_is_member_within_discretization() -> "None":
    result = solve_extremal(ExtremalProblem(6, 1.0))
    slack = discretization_tolerance(result)
    assert 0.0 < slack < 1e-2
    checked = membership_check(result.polynomial, slack=slack)
    assert checked.member
    assert checked.min_convexity > -slack
    off_by_far = EvenPolynomial.from_mapping(6, {2: 0.5, 4: -5.0 / 3.0, 6: 2.0})
    assert not membership_check(off_by_far, slack=slack).member


def test_membership_of_known_members() -> "None":
    assert membership_check(EvenPolynomial.from_mapping(4, {4: 2.0})).member
    assert membership_check(SEXTIC).member


@pytest.mark.parametrize(
    ["coeffs", "kind"],
    [
        ({2: -1.0, 4: 1.0}, ConstraintKind.Value),
        ({4: -1.0}, ConstraintKind.Value),
        ({2: 1.0, 4: -1.0, 6: 0.3}, ConstraintKind.Convexity),
    ],
)
def test_membership_failures(coeffs: "dict", kind: "ConstraintKind") -> "None":
    result = membership_check(EvenPolynomial.from_mapping(6 if 6 in coeffs else 4, coeffs))
    assert not result.member
    assert result.kind == kind
    assert result.witness is not None


def test_class_is_convex() -> "None":
    quartic_like = EvenPolynomial.from_mapping(6, {6: 2.0})
    for lam in (0.0, 0.25, 0.5, 1.0):
        assert membership_check(SEXTIC.combine(quartic_like, lam)).member


def test_combine_validation() -> "None":
    with pytest.raises(ExtremalException):
        SEXTIC.combine(EvenPolynomial.from_mapping(4, {4: 2.0}), 0.5)
    with pytest.raises(ExtremalException):
        SEXTIC.combine(SEXTIC, 1.5)


def test_even_polynomial_validation() -> "None":
    with pytest.raises(ExtremalException):
        EvenPolynomial.from_mapping(4, {3: 1.0})
    with pytest.raises(ExtremalException):
        EvenPolynomial(4, (1.0,))
    assert SEXTIC.coefficient(3) == 0.0
    assert SEXTIC.evaluate(1.0) == pytest.approx(7.0 / 6.0)


def test_gap_witness_on_l4() -> "None":
    norm = NormDescriptor.poly(SymmetricForm.power_sum(4, 2), FAST)
    report = gap_witness(norm, 1.0, FAST, density=513)
    assert report.passed
    assert report.min_gap >= report.q - 1e-9
    assert report.bound_direction == BoundDirection.Upper


def test_gap_witness_needs_polynomial_norm() -> "None":
    with pytest.raises(ExtremalException):
        gap_witness(NormDescriptor.lp(4.0, 2), 1.0, FAST)
