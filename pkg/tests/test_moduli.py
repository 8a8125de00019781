import math

import pytest

import numpy

from asymconv.common import BoundDirection, SamplerConfig
from asymconv.moduli import (
    ModuliException,
    ModulusCurve,
    NonConvexFunctionException,
    RhoVariant,
    delta_curve,
    delta_fn,
    delta_norm,
    gap_identity_error,
    monotone_violation,
    power_fit,
    puc_constant,
    rho_norm,
    verify_puc,
)
from asymconv.normcore import (
    FunctionDescriptor,
    NormDescriptor,
    SymmetricForm,
    affine_function,
    norm_power_function,
)

FAST = SamplerConfig(samples=256, seed=11, refine_iters=20)


@pytest.mark.parametrize("eps", [0.05, 0.5, 1.0, 2.0])
def test_delta_of_euclidean_plane(eps: "float") -> "None":
    estimate = delta_norm(NormDescriptor.lp(2.0, 2), None, eps, FAST)
    assert estimate.value == pytest.approx(1.0 - math.sqrt(1.0 - eps**2 / 4.0), abs=1e-9)
    assert estimate.bound_direction == BoundDirection.Upper
    x, y = estimate.witness
    assert numpy.linalg.norm(x - y) == pytest.approx(eps, abs=1e-9)
    assert estimate.metadata["seed"] == 11


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_delta_at_full_diameter(p: "float") -> "None":
    estimate = delta_norm(NormDescriptor.lp(p, 2), None, 2.0, FAST)
    assert estimate.value == pytest.approx(1.0, abs=1e-9)
    x, y = estimate.witness
    assert numpy.allclose(y, -x, atol=1e-9)

@pytest.mark.parametrize("norm", [NormDescriptor.sup(2), NormDescriptor.lp(1.0, 2)])
def test_flat_norms_have_vanishing_delta(norm: "NormDescriptor") -> "None":
    assert delta_norm(norm, None, 0.5, FAST).value <= 1e-9


def test_delta_of_sequence_norm_needs_dimension() -> "None":
    with pytest.raises(ModuliException):
        delta_norm(NormDescriptor.lp(2.0), None, 0.5, FAST)
    estimate = delta_norm(NormDescriptor.lp(2.0), 3, 0.5, FAST)
    assert estimate.value == pytest.approx(1.0 - math.sqrt(1.0 - 0.0625), abs=1e-9)


@pytest.mark.parametrize("eps", [0.0, -1.0, 2.5])
def test_delta_parameter_range(eps: "float") -> "None":
    with pytest.raises(ModuliException):
        delta_norm(NormDescriptor.lp(2.0, 2), None, eps, FAST)


@pytest.mark.parametrize("tau", [0.1, 0.5, 1.0])
def test_rho_of_euclidean_plane(tau: "float") -> "None":
    norm = NormDescriptor.lp(2.0, 2)
    standard = rho_norm(norm, None, tau, RhoVariant.Standard, FAST)
    literal = rho_norm(norm, None, tau, RhoVariant.PaperLiteral, FAST)
    assert standard.value == pytest.approx(math.sqrt(1.0 + tau**2) - 1.0, abs=1e-9)
    assert standard.bound_direction == BoundDirection.Lower
    assert literal.value <= standard.value + 1e-9
    assert literal.metadata["variant"] == "paper_literal"


@pytest.mark.parametrize("norm", [NormDescriptor.sup(2), NormDescriptor.lp(4.0, 3)])
def test_rho_never_exceeds_tau(norm: "NormDescriptor") -> "None":
    for tau in (0.2, 1.0):
        assert 0.0 <= rho_norm(norm, None, tau, RhoVariant.Standard, FAST).value <= tau


def test_delta_fn_of_squared_norm() -> "None":
    f = norm_power_function(NormDescriptor.lp(2.0, 2), 2.0)
    result = delta_fn(f, 0.4, sampler=FAST)
    assert result.value == pytest.approx(0.04, abs=1e-9)
    assert result.normalized == pytest.approx(0.25, abs=1e-8)
    assert result.power == 2.0
    assert "uniformly convex" in result.statement


def test_delta_fn_of_affine_function_vanishes() -> "None":
    f = affine_function([1.0, -2.0], 3.0, NormDescriptor.lp(2.0, 2))
    result = delta_fn(f, 0.5, sampler=FAST)
    assert result.value == pytest.approx(0.0, abs=1e-9)
    assert result.normalized is None


def test_delta_fn_rejects_nonconvex() -> "None":
    f = FunctionDescriptor(
        name="concave",
        evaluate=lambda x: -numpy.sum(numpy.asarray(x) ** 2, axis=-1),
        convex=False,
        norm=NormDescriptor.lp(2.0, 2),
    )
    with pytest.raises(NonConvexFunctionException) as excinfo:
        delta_fn(f, 0.5, sampler=FAST)
    assert excinfo.value.gap < 0


def test_delta_fn_needs_a_dimension() -> "None":
    f = FunctionDescriptor(name="bare", evaluate=lambda x: x, convex=True)
    with pytest.raises(ModuliException):
        delta_fn(f, 0.5, sampler=FAST)


def test_puc_constant_of_euclidean_plane() -> "None":
    result = puc_constant(NormDescriptor.lp(2.0, 2), 2.0, sampler=FAST)
    assert result.uniformly_convex
    assert result.constant == pytest.approx(1.0, abs=1e-9)
    assert result.bound_direction == BoundDirection.Lower


def test_l1_is_not_uniformly_convex() -> "None":
    result = puc_constant(NormDescriptor.lp(1.0, 2), 2.0, sampler=FAST)
    assert not result.uniformly_convex
    assert math.isinf(result.constant)
    x, y = result.witness
    assert x.tolist() == [0.5, 0.5]
    assert y.tolist() == [0.5, -0.5]


def test_puc_needs_p_above_one() -> "None":
    with pytest.raises(ModuliException):
        puc_constant(NormDescriptor.lp(2.0, 2), 1.0, sampler=FAST)


def test_verify_puc() -> "None":
    norm = NormDescriptor.lp(2.0, 2)
    check = verify_puc(norm, 2.0, 1.0, sample_count=4000, seed=5)
    assert check.passed
    assert check.witness is None
    assert check.samples == 4000

    failed = verify_puc(norm, 2.0, 0.5, sample_count=4000, seed=5)
    assert not failed.passed
    assert failed.violation > 0
    # the x = 0 block comes first
    assert failed.witness[0].tolist() == [0.0, 0.0]


def test_power_fit_recovers_exponent() -> "None":
    t = numpy.geomspace(0.01, 0.5, 8)
    curve = ModulusCurve("t", t, 3.0 * t**2.5, BoundDirection.Upper)
    fit = power_fit(curve)
    assert fit.exponent == pytest.approx(2.5)
    assert fit.constant == pytest.approx(3.0)
    assert fit.residual <= 1e-9
    assert fit.window == (pytest.approx(0.01), pytest.approx(0.5))


def test_power_fit_needs_samples() -> "None":
    t = numpy.array([0.1, 0.2, 0.3])
    with pytest.raises(ModuliException):
        power_fit(ModulusCurve("t", t, t, BoundDirection.Upper))
    t = numpy.geomspace(0.01, 0.5, 8)
    with pytest.raises(ModuliException):
        power_fit(ModulusCurve("t", t, numpy.zeros(8), BoundDirection.Upper))


def test_monotone_violation() -> "None":
    curve = ModulusCurve(
        "eps", [0.1, 0.2, 0.3, 0.4], [1.0, 2.0, 1.5, 3.0], BoundDirection.Upper
    )
    assert monotone_violation(curve) == pytest.approx(0.5)


@pytest.mark.parametrize(
    ["t", "values"],
    [([0.2, 0.1], [1.0, 1.0]), ([0.0, 0.1], [1.0, 1.0]), ([1.0, 2.5], [1.0, 1.0]), ([0.1], [math.nan])],
)
def test_curve_validation(t: "list", values: "list") -> "None":
    with pytest.raises(ModuliException):
        ModulusCurve("t", t, values, BoundDirection.Upper)


def test_curve_json_and_csv() -> "None":
    curve = ModulusCurve("eps", [0.1, 0.2], [0.5, 1.5], BoundDirection.Upper, {"seed": 1})
    again = ModulusCurve.from_json(curve.to_json())
    assert again.samples() == curve.samples()
    assert again.metadata == {"seed": 1}
    assert curve.to_csv().splitlines() == ["t,value", "0.1,0.5", "0.2,1.5"]


def test_delta_curve_is_quadratic_for_l2() -> "None":
    grid = numpy.geomspace(0.01, 0.1, 6).tolist()
    curve = delta_curve(NormDescriptor.lp(2.0, 2), None, grid, FAST)
    assert monotone_violation(curve) <= 1e-12
    assert power_fit(curve).exponent == pytest.approx(2.0, abs=1e-2)


def test_gap_identity() -> "None":
    rng = numpy.random.default_rng(0)
    form = SymmetricForm.power_sum(6, 3)
    pairs = [(rng.normal(size=3), rng.normal(size=3)) for _ in range(32)]
    assert gap_identity_error(form, pairs) <= 1e-12
