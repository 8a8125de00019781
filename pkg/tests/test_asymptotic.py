import math

import pytest

import numpy

from asymconv.asymptotic import (
    AsymptoticModelException,
    ModulusMode,
    SequenceSpace,
    SpaceKind,
    TailSubspace,
    UNIFORM_LABEL,
    envelope_preserves_smoothness_demo,
    flatness_and_power,
    polynomial_tail_bounds,
    sample_radial_set,
    sample_unit_set,
    tail_delta_norm,
    tail_modulus_fn,
    tail_rho_norm,
    uniform_tail_modulus,
)
from asymconv.common import BoundDirection, SamplerConfig
from asymconv.envelope import GridFunction1D
from asymconv.normcore import SparseSequence, norm_function

FAST = SamplerConfig(samples=256, seed=13, refine_iters=0, tail_width=8, tail_samples=16)

E1 = SparseSequence({1: 1.0})


@pytest.mark.parametrize(
    ["label", "kind", "p", "short"],
    [("c0", SpaceKind.C0, None, "c0"), ("lp:4", SpaceKind.Lp, 4.0, "l4"), ("lp:1.5", SpaceKind.Lp, 1.5, "l1.5")],
)
def test_parse_spaces(label: "str", kind: "SpaceKind", p: "float", short: "str") -> "None":
    space = SequenceSpace.parse(label)
    assert space.kind == kind
    assert space.p == p
    assert space.label == short


@pytest.mark.parametrize("label", ["lq:2", "lp:", "lp:0.5", "lp:abc", "c1"])
def test_parse_rejects(label: "str") -> "None":
    with pytest.raises(AsymptoticModelException):
        SequenceSpace.parse(label)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 3.0])
def test_closed_form_lp(t: "float") -> "None":
    space = SequenceSpace.parse("lp:4")
    expected = (1.0 + t**4) ** 0.25 - 1.0
    rho = tail_rho_norm(space, E1, t)
    delta = tail_delta_norm(space, E1, t)
    assert rho.value == pytest.approx(expected, rel=1e-9)
    assert delta.value == pytest.approx(expected, rel=1e-9)
    assert rho.analytic and delta.analytic
    assert rho.bound_direction == BoundDirection.Exact
    assert rho.mode == ModulusMode.RhoBar
    assert delta.mode == ModulusMode.DeltaBar
    assert rho.subspace_index >= 1


def test_rho_at_one_on_l4() -> "None":
    value = tail_rho_norm(SequenceSpace.parse("lp:4"), E1, 1.0).value
    assert value == pytest.approx(2.0**0.25 - 1.0, abs=1e-12)


@pytest.mark.parametrize(["t", "expected"], [(0.5, 0.0), (1.0, 0.0), (2.0, 1.0)])
def test_closed_form_c0(t: "float", expected: "float") -> "None":
    space = SequenceSpace.parse("c0")
    assert tail_rho_norm(space, E1, t).value == expected
    assert tail_delta_norm(space, E1, t).value == expected


def test_point_must_be_unit() -> "None":
    with pytest.raises(AsymptoticModelException):
        tail_rho_norm(SequenceSpace.parse("lp:2"), SparseSequence({1: 2.0}), 0.5)
    with pytest.raises(AsymptoticModelException):
        tail_delta_norm(SequenceSpace.parse("lp:2"), E1, 0.0)


def test_tail_subspace() -> "None":
    H = TailSubspace(2)
    assert H.contains(SparseSequence({3: 1.0, 7: 2.0}))
    assert not H.contains(SparseSequence({2: 1.0}))
    assert H.embed([1.0, 2.0], 5).tolist() == [[0.0, 0.0, 1.0, 2.0, 0.0]]
    with pytest.raises(AsymptoticModelException):
        H.embed([1.0, 2.0, 3.0, 4.0], 5)
    with pytest.raises(AsymptoticModelException):
        TailSubspace(-1)


@pytest.mark.parametrize("mode", [ModulusMode.RhoBar, ModulusMode.DeltaBar])
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_sampled_path_agrees_with_closed_form(mode: "ModulusMode", t: "float") -> "None":
    space = SequenceSpace.parse("lp:4")
    x = SparseSequence({1: 0.6, 2: -(1.0 - 0.6**4) ** 0.25})
    f = norm_function(space.norm())
    sampled = tail_modulus_fn(f, x, t, mode=mode, sampler=FAST)
    exact = (tail_rho_norm if mode == ModulusMode.RhoBar else tail_delta_norm)(space, x, t)
    assert sampled.value == pytest.approx(exact.value, rel=1e-9, abs=1e-14)
    assert not sampled.analytic
    expected_direction = (
        BoundDirection.Upper if mode == ModulusMode.RhoBar else BoundDirection.Lower
    )
    assert sampled.bound_direction == expected_direction


def test_c0_norm_is_flat() -> "None":
    space = SequenceSpace.parse("c0")
    S = sample_unit_set(space, 6, seed=2)
    report = flatness_and_power(norm_function(space.norm()), S, [0.1, 0.5, 1.0], FAST)
    assert report.flat
    assert report.fit is None


def test_l4_norm_has_power_type_four() -> "None":
    space = SequenceSpace.parse("lp:4")
    S = sample_unit_set(space, 4, seed=2)
    grid = numpy.geomspace(0.05, 0.2, 5).tolist()
    report = flatness_and_power(norm_function(space.norm()), S, grid, FAST)
    assert not report.flat
    assert report.fit is not None
    assert report.fit.exponent == pytest.approx(4.0, abs=0.05)


def test_flatness_radii() -> "None":
    space = SequenceSpace.parse("c0")
    f = norm_function(space.norm())
    with pytest.raises(AsymptoticModelException):
        flatness_and_power(f, [E1], [1.5], FAST)
    with pytest.raises(AsymptoticModelException):
        flatness_and_power(f, [], [0.5], FAST)


def test_uniform_modulus_label() -> "None":
    space = SequenceSpace.parse("lp:2")
    f = norm_function(space.norm())
    S = sample_unit_set(space, 3, seed=4)
    result = uniform_tail_modulus(f, S, 0.5, sampler=FAST)
    assert result.at == UNIFORM_LABEL
    assert result.value == pytest.approx(math.sqrt(1.25) - 1.0, rel=1e-9)
    with pytest.raises(AsymptoticModelException):
        uniform_tail_modulus(f, [], 0.5, sampler=FAST)


def test_sample_sets() -> "None":
    space = SequenceSpace.parse("lp:3")
    norm = space.norm()
    units = sample_unit_set(space, 5, support=3, seed=1)
    assert all(max(x.support) <= 3 for x in units)
    assert [float(norm.evaluate(x.nonzero_values())) for x in units] == pytest.approx([1.0] * 5)
    radial = sample_radial_set(space, 20, seed=1)
    radii = [float(norm.evaluate(x.nonzero_values())) for x in radial]
    assert all(abs(r - 1.0) >= 0.05 - 1e-12 for r in radii)


def test_envelope_preserves_smoothness() -> "None":
    phi = GridFunction1D.from_function(lambda r: (r**2 - 1.0) ** 2, 0.0, 4.0, 801)
    report = envelope_preserves_smoothness_demo(phi, 4.0, sampler=FAST)
    assert report.passed
    assert 3.6 <= report.f_fit.exponent <= 4.4
    assert 3.6 <= report.conv_fit.exponent <= 4.4
    assert report.conv_constant <= report.factor * report.f_constant
    assert len(report.sample_set) == 10


def test_unbounded_profile_is_rejected() -> "None":
    phi = GridFunction1D.from_function(lambda r: -r, 0.0, 2.0, 21)
    with pytest.raises(AsymptoticModelException):
        envelope_preserves_smoothness_demo(phi, 2.0, sampler=FAST)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_polynomial_tail_band(N: "int") -> "None":
    report = polynomial_tail_bounds(N, [0.1, 0.5, 1.0], FAST)
    assert report.passed
    assert report.middle_term_max <= 1e-12
    assert all(lo <= r <= up for lo, r, up in zip(report.lower, report.rho, report.upper))


def test_polynomial_tail_needs_even_degree() -> "None":
    with pytest.raises(AsymptoticModelException):
        polynomial_tail_bounds(3, [0.5], FAST)
