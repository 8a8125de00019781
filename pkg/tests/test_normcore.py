import math

import pytest

import numpy
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from asymconv.common import SamplerConfig
from asymconv.normcore import (
    FormDimensionException,
    NonHomogeneousPolynomialException,
    NonSeparatingFormException,
    NormCoreException,
    NormDescriptor,
    NormKind,
    SparseSequence,
    SymmetricForm,
    UncertifiedNormException,
    binomial_expand,
    certify_form,
    eval_form,
    check_convexity,
    eval_norm,
    form_function,
    is_separating,
    homogeneous_terms,
    minkowski_norm,
    multiplicity,
    norm_power_function,
    polarize,
)

FAST = SamplerConfig(samples=512, seed=3, refine_iters=50)

QUARTIC = {(4, 0): 1.0, (2, 2): 1.0, (0, 4): 1.0}

vectors2 = arrays(
    numpy.float64,
    (2,),
    elements=st.floats(min_value=-3.0, max_value=3.0).filter(
        lambda v: v == 0.0 or abs(v) > 1e-3
    ),
)


def test_sparse_sequence_drops_zeros() -> "None":
    seq = SparseSequence({1: 1.0, 3: 0.0, 5: -2.0})
    assert seq.support == (1, 5)
    assert seq.coordinate(3) == 0.0
    assert seq.max_index == 5
    assert seq.to_dense(5).tolist() == [1.0, 0.0, 0.0, 0.0, -2.0]
    assert seq + SparseSequence({1: -1.0}) == SparseSequence({5: -2.0})
    assert seq.scaled(2.0)[5] == -4.0


def test_sparse_sequence_from_dense() -> "None":
    assert SparseSequence.from_dense([0.0, 3.0], offset=2) == SparseSequence({4: 3.0})


@pytest.mark.parametrize("entries", [{0: 1.0}, {1.5: 1.0}, {2: math.inf}])
def test_sparse_sequence_rejects(entries: "dict") -> "None":
    with pytest.raises(NormCoreException):
        SparseSequence(entries)


def test_to_dense_too_short() -> "None":
    with pytest.raises(FormDimensionException):
        SparseSequence({4: 1.0}).to_dense(3)


@pytest.mark.parametrize(
    ["index", "expected"],
    [((1, 1, 1, 1), 1), ((1, 1, 2, 2), 6), ((1, 2, 3, 4), 24), ((1, 1, 1, 2), 4)],
)
def test_multiplicity(index: "tuple", expected: "int") -> "None":
    assert multiplicity(index) == expected


def test_power_sum() -> "None":
    A = SymmetricForm.power_sum(4, 2)
    assert A.diagonal([1.0, 2.0]) == pytest.approx(17.0)
    assert A.evaluate([[1.0, 2.0]] * 4) == pytest.approx(17.0)
    assert A.coefficient((2, 2, 2, 2)) == 1.0
    assert A.coefficient((1, 2, 1, 2)) == 0.0


@pytest.mark.parametrize(
    ["A", "args", "expected"],
    [
        (SymmetricForm.power_sum(2, 1), [[1.0], [1.0]], 1.0),
        (SymmetricForm.power_sum(4, 2), [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]], 0.0),
        (SymmetricForm.power_sum(4, 2), [[1.0, 1.0], [1.0, 1.0], [1.0, -1.0], [1.0, -1.0]], 2.0),
    ],
)
def test_eval_form(A: "SymmetricForm", args: "list", expected: "float") -> "None":
    assert eval_form(A, args) == pytest.approx(expected, abs=1e-12)


def test_polarization_of_quartic() -> "None":
    A = polarize(QUARTIC, 4, 2)
    assert A.coefficient((1, 1, 1, 1)) == pytest.approx(1.0)
    assert A.coefficient((1, 1, 2, 2)) == pytest.approx(1.0 / 6.0)
    assert A.coefficient((1, 1, 1, 2)) == 0.0


@given(x=vectors2)
def test_polarized_form_matches_polynomial(x: "numpy.ndarray") -> "None":
    A = polarize(QUARTIC, 4, 2)
    expected = x[0] ** 4 + x[0] ** 2 * x[1] ** 2 + x[1] ** 4
    assert A.diagonal(x) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@given(x=vectors2, h=vectors2)
def test_form_is_symmetric(x: "numpy.ndarray", h: "numpy.ndarray") -> "None":
    A = polarize(QUARTIC, 4, 2)
    a = A.evaluate([x, x, h, h])
    b = A.evaluate([h, x, h, x])
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


@given(x=vectors2, h=vectors2, t=st.floats(min_value=-2.0, max_value=2.0))
def test_binomial_expansion(x: "numpy.ndarray", h: "numpy.ndarray", t: "float") -> "None":
    A = SymmetricForm.power_sum(4, 2)
    coeffs = binomial_expand(A, x, h)
    expanded = sum(c * t**i for i, c in enumerate(coeffs))
    assert expanded == pytest.approx(A.diagonal(x + t * h), rel=1e-8, abs=1e-8)
    terms = homogeneous_terms(A, x)
    assert [term.degree for term in terms] == [1, 2, 3]
    assert terms[1].evaluate(h) == pytest.approx(coeffs[2], rel=1e-9, abs=1e-9)


def test_non_homogeneous_polynomial() -> "None":
    with pytest.raises(NonHomogeneousPolynomialException):
        polarize({(2, 0): 1.0, (4, 0): 1.0}, 4, 2)


def test_odd_degree_rejected() -> "None":
    with pytest.raises(NormCoreException):
        SymmetricForm.power_sum(3, 2)


def test_form_json() -> "None":
    A = polarize(QUARTIC, 4, 2)
    again = SymmetricForm.from_json(A.to_json())
    assert again == A
    doc = {"degree": 4, "dimension": 2, "monomials": [{"exponents": [4, 0], "coeff": 1.0}]}
    assert SymmetricForm.from_json(doc).coefficient((1, 1, 1, 1)) == 1.0


def test_l4_form_is_certified() -> "None":
    A = SymmetricForm.power_sum(4, 2)
    certificate = certify_form(A, FAST)
    assert certificate.certified
    # the minimum of x^4 + y^4 on the Euclidean sphere is 1/2
    assert certificate.separation.alpha == pytest.approx(0.5, abs=1e-3)
    assert certificate.separation.alpha >= 0.5 - 1e-12
    assert certificate.separation.sup_value == pytest.approx(1.0, abs=1e-9)


def test_indefinite_form_is_not_separating() -> "None":
    A = polarize({(2, 0): 1.0, (0, 2): -1.0}, 2, 2)
    certificate = certify_form(A, FAST)
    assert not certificate.separation.separating
    with pytest.raises(NonSeparatingFormException) as excinfo:
        minkowski_norm(A, [1.0, 0.0], sampler=FAST)
    assert excinfo.value.witness.shape == (2,)


def test_nonconvex_form_is_not_certified() -> "None":
    A = polarize({(4, 0): 1.0, (2, 2): -1.9, (0, 4): 1.0}, 4, 2)
    certificate = certify_form(A, FAST)
    assert certificate.separation.separating
    assert not certificate.convexity.convex
    assert certificate.convexity.witness is not None
    with pytest.raises(UncertifiedNormException):
        minkowski_norm(A, [1.0, 1.0], sampler=FAST)
    with pytest.raises(UncertifiedNormException):
        NormDescriptor.poly(A, FAST).evaluate([1.0, 1.0])


@given(x=vectors2)
@settings(deadline=None)
def test_minkowski_gauge_of_l4(x: "numpy.ndarray") -> "None":
    A = SymmetricForm.power_sum(4, 2)
    value = minkowski_norm(A, x, sampler=FAST, verify=bool(numpy.any(x)))
    assert value == pytest.approx(
        float(numpy.sum(x**4) ** 0.25), rel=1e-9, abs=1e-12
    )


def test_minkowski_dimension() -> "None":
    with pytest.raises(FormDimensionException):
        minkowski_norm(SymmetricForm.power_sum(4, 2), [1.0, 0.0, 0.0], sampler=FAST)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, 7.0])
def test_lp_norms(p: "float") -> "None":
    norm = NormDescriptor.lp(p, 3)
    x = numpy.array([0.3, -1.2, 2.0])
    assert norm.evaluate(x) == pytest.approx(float(numpy.linalg.norm(x, ord=p)))
    assert norm.label == f"l{p:g}_d3"


def test_lp_requires_p_at_least_one() -> "None":
    with pytest.raises(NormCoreException):
        NormDescriptor.lp(0.5)


def test_huge_entries_do_not_overflow() -> "None":
    assert NormDescriptor.lp(4.0, 2).evaluate([1e200, 1e200]) == pytest.approx(
        2.0**0.25 * 1e200
    )


def test_sequence_norms() -> "None":
    seq = SparseSequence({2: 3.0, 40: -4.0})
    assert eval_norm(NormDescriptor.lp(2.0), seq) == pytest.approx(5.0)
    assert eval_norm(NormDescriptor.sup(), seq) == 4.0
    assert NormDescriptor.sup().label == "sup_dsequence"


def test_grid2d_gauge_of_circle() -> "None":
    angles = numpy.linspace(0.0, numpy.pi, 180, endpoint=False)
    norm = NormDescriptor.grid2d(angles, numpy.ones_like(angles))
    assert norm.evaluate([3.0, 4.0]) == pytest.approx(5.0, rel=1e-3)
    assert norm.evaluate([0.0, 0.0]) == 0.0


def test_norm_json() -> "None":
    norm = NormDescriptor.lp(3.0, 2)
    assert NormDescriptor.from_json(norm.to_json()) == norm
    assert NormDescriptor.from_json({"kind": "sup"}).kind == NormKind.Sup


def test_norm_power_function() -> "None":
    f = norm_power_function(NormDescriptor.lp(2.0, 2), 3.0)
    assert f.evaluate(numpy.array([3.0, 4.0])) == pytest.approx(125.0)
    assert f.convex
    with pytest.raises(NormCoreException):
        norm_power_function(NormDescriptor.lp(2.0, 2), 0.5)


def test_form_function() -> "None":
    f = form_function(SymmetricForm.power_sum(4, 2), FAST)
    assert f.evaluate(numpy.array([1.0, -2.0])) == pytest.approx(17.0)
    assert f.convex
    assert f.power == 4.0
    assert f.norm is not None and f.norm.kind == NormKind.Poly


def test_is_separating() -> "None":
    result = is_separating(SymmetricForm.power_sum(4, 2), sampler=FAST)
    assert result.separating
    # min of x^4 + y^4 on the unit circle, at the diagonal
    assert result.alpha == pytest.approx(0.5, abs=1e-3)
    assert result.alpha >= 0.5 - 1e-9

    indefinite = is_separating(polarize({(4, 0): 1.0, (0, 4): -1.0}, 4, 2), sampler=FAST)
    assert not indefinite.separating
    assert indefinite.alpha < 0


def test_check_convexity() -> "None":
    result = check_convexity(SymmetricForm.power_sum(4, 2), FAST)
    assert result.convex
    assert result.witness is None
    assert result.min_form_value >= -1e-12
    assert result.pairs > 0
