#!/usr/bin/env python
# -*- coding: utf-8 -*-

# SPDX-License-Identifier: Apache-2.0
# Copyright 2024 The AsymConv developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
The acceptance suite: closed form values and property checks which
exercise every module, each one reported as a row of a summary table.
"""

from __future__ import absolute_import

import logging
import math
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy

if TYPE_CHECKING:
    from typing import (
        Any,
        Callable,
        List,
        Optional,
        Sequence,
        Tuple,
    )

    from typing_extensions import (
        Final,
        TypeAlias,
    )

    import numpy.typing as npt

    FloatArray: TypeAlias = npt.NDArray[numpy.float64]

from .asymptotic import (
    ModulusMode,
    SequenceSpace,
    envelope_preserves_smoothness_demo,
    radial_function,
    sample_unit_set,
    tail_delta_norm,
    tail_modulus_fn,
    tail_rho_norm,
)
from .common import (
    BoundDirection,
    DEFAULT_SAMPLER,
    SamplerConfig,
)
from .envelope import (
    GridFunction1D,
    GridFunction2D,
    biconjugate,
    caratheodory_envelope_at,
    grid_tolerance,
    lower_convex_hull_1d,
    one_sided_slopes,
    window_sweep,
)
from .extremal import (
    ExtremalProblem,
    scale_invariance_check,
    solve_extremal,
)
from .moduli import (
    ModulusCurve,
    delta_curve,
    gap_identity_error,
    power_fit,
    puc_constant,
    verify_puc,
)
from .normcore import (
    NormDescriptor,
    SparseSequence,
    SymmetricForm,
    norm_function,
)
from .sampling import (
    STREAM_PARTNERS,
    STREAM_POINTS,
    box_points,
)

logger = logging.getLogger(__name__)

IDENTITY_PAIRS: "Final[int]" = 100000
IDENTITY_BLOCK: "Final[int]" = 4096
IDENTITY_SPOT_PAIRS: "Final[int]" = 64
PIECEWISE_FUNCTIONS: "Final[int]" = 20
PIECEWISE_KNOTS: "Final[int]" = 201
CERTIFICATE_POINTS: "Final[int]" = 3
RADIAL_FUNCTIONS: "Final[int]" = 20
SWEEP_WINDOWS: "Final[Tuple[float, ...]]" = (4.0, 8.0, 16.0)


class ClaimRow(NamedTuple):
    """
    claim: identifier of the checked claim
    anchor: the statement, in a few words
    computed: the value obtained
    expected: the value expected
    tolerance: the allowed deviation, already scaled
    passed: whether computed is within tolerance of expected
    witness: sample behind a failure, or behind a one-sided value
    detail: absolute figures behind a relative computed value
    """

    claim: "str"
    anchor: "str"
    computed: "Any"
    expected: "Any"
    tolerance: "float"
    passed: "bool"
    witness: "Any" = None
    detail: "Optional[str]" = None


class VerificationSummary(NamedTuple):
    rows: "Sequence[ClaimRow]"
    seed: "int"
    scale: "float"

    @property
    def passed(self) -> "bool":
        return all(row.passed for row in self.rows)

    @property
    def failed(self) -> "Sequence[ClaimRow]":
        return [row for row in self.rows if not row.passed]

    def table(self) -> "str":
        lines = ["claim\tanchor\tcomputed\texpected\ttolerance\tstatus\tdetail"]
        for row in self.rows:
            lines.append(
                f"{row.claim}\t{row.anchor}\t{row.computed}\t{row.expected}\t{row.tolerance:g}\t{'PASS' if row.passed else 'FAIL'}\t{row.detail or ''}"
            )
        return "\n".join(lines)


def _near(
    claim: "str",
    anchor: "str",
    computed: "float",
    expected: "float",
    tol: "float",
    scale: "float",
    witness: "Any" = None,
) -> "ClaimRow":
    tolerance = tol * scale
    return ClaimRow(
        claim=claim,
        anchor=anchor,
        computed=float(computed),
        expected=float(expected),
        tolerance=tolerance,
        passed=bool(abs(computed - expected) <= tolerance),
        witness=witness,
    )


def _within(
    claim: "str",
    anchor: "str",
    computed: "float",
    lower: "float",
    upper: "float",
    scale: "float",
) -> "ClaimRow":
    """
    Interval checks, the half width being the tolerance
    """
    return _near(claim, anchor, computed, 0.5 * (lower + upper), 0.5 * (upper - lower), scale)


def _holds(
    claim: "str", anchor: "str", computed: "Any", condition: "bool", witness: "Any" = None
) -> "ClaimRow":
    return ClaimRow(
        claim=claim,
        anchor=anchor,
        computed=computed,
        expected=True,
        tolerance=0.0,
        passed=bool(condition),
        witness=witness,
    )


def check_lp_tail_moduli(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    rows = []
    x = SparseSequence({1: 1.0})
    for p in (1.0, 2.0, 4.0):
        space = SequenceSpace.parse(f"lp:{p:g}")
        f = norm_function(space.norm())
        for t in (0.1, 0.5, 1.0):
            expected = (1.0 + t**p) ** (1.0 / p) - 1.0
            for mode, analytic in (
                (ModulusMode.RhoBar, tail_rho_norm),
                (ModulusMode.DeltaBar, tail_delta_norm),
            ):
                rows.append(
                    _near(
                        f"lp-tail/{space.label}/{mode.value}/t={t:g}/analytic",
                        "(1+t^p)^{1/p}-1",
                        analytic(space, x, t).value,
                        expected,
                        1e-12,
                        scale,
                    )
                )
                rows.append(
                    _near(
                        f"lp-tail/{space.label}/{mode.value}/t={t:g}/sampled",
                        "(1+t^p)^{1/p}-1",
                        tail_modulus_fn(f, x, t, mode=mode, sampler=sampler).value,
                        expected,
                        1e-9,
                        scale,
                    )
                )
    return rows


def check_c0_flatness(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    rows = []
    space = SequenceSpace.parse("c0")
    f = norm_function(space.norm())
    x = SparseSequence({1: 1.0})
    for t in (0.25, 0.5, 1.0):
        values = [
            tail_rho_norm(space, x, t).value,
            tail_delta_norm(space, x, t).value,
            tail_modulus_fn(f, x, t, mode=ModulusMode.RhoBar, sampler=sampler).value,
            tail_modulus_fn(f, x, t, mode=ModulusMode.DeltaBar, sampler=sampler).value,
        ]
        rows.append(
            _holds(
                f"c0-flat/t={t:g}",
                "rho_bar(t) = delta_bar(t) = 0",
                values,
                all(v == 0.0 for v in values),
            )
        )
    return rows


def _even_expansion_error(
    form: "SymmetricForm", x: "FloatArray", h: "FloatArray"
) -> "float":
    """
    Largest relative deviation from P(x+h) + P(x-h) = 2 sum_{i even} C(N,i) A(x^{N-i}, h^i),
    evaluated by blocks
    """
    N = form.degree
    worst = 0.0
    for start in range(0, x.shape[0], IDENTITY_BLOCK):
        xb = x[start : start + IDENTITY_BLOCK]
        hb = h[start : start + IDENTITY_BLOCK]
        lhs = numpy.asarray(form.diagonal(xb + hb)) + numpy.asarray(form.diagonal(xb - hb))
        rhs = numpy.zeros(xb.shape[0])
        for i in range(0, N + 1, 2):
            rhs += math.comb(N, i) * numpy.asarray(
                form.evaluate([xb] * (N - i) + [hb] * i)
            )
        rhs *= 2.0
        worst = max(worst, float((numpy.abs(lhs - rhs) / numpy.maximum(1.0, numpy.abs(lhs))).max()))
    return worst


def check_constant_one(
    N: "int", sampler: "SamplerConfig", scale: "float"
) -> "List[ClaimRow]":
    norm = NormDescriptor.lp(float(N), 3)
    check = verify_puc(norm, float(N), 1.0, IDENTITY_PAIRS, sampler.seed, 3, sampler.radius)
    x = box_points(IDENTITY_PAIRS, 3, sampler.seed, sampler.radius, STREAM_POINTS)
    h = box_points(IDENTITY_PAIRS, 3, sampler.seed, sampler.radius, STREAM_PARTNERS)
    form = SymmetricForm.power_sum(N, 3)
    identity = max(
        _even_expansion_error(form, x, h),
        gap_identity_error(
            form, list(zip(x[:IDENTITY_SPOT_PAIRS], h[:IDENTITY_SPOT_PAIRS]))
        ),
    )
    slack = -check.violation
    return [
        ClaimRow(
            claim=f"constant-one/N={N}/inequality",
            anchor="2|x|^N + 2|h|^N <= |x+h|^N + |x-h|^N",
            computed=slack,
            expected=-1e-9,
            tolerance=1e-9 * scale,
            passed=bool(check.passed and slack >= -1e-9 * scale),
            witness=check.witness,
        ),
        _near(
            f"constant-one/N={N}/identity",
            "P(x+h) + P(x-h) = 2 sum of even binomial terms",
            identity,
            0.0,
            1e-9,
            scale,
        ),
    ]


def check_extremal(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    four = solve_extremal(ExtremalProblem(4, 1.0))
    six = solve_extremal(ExtremalProblem(6, 1.0))
    invariance = scale_invariance_check(6, (0.5, 1.0, 2.0))
    return [
        _near("extremal/q(4,1)", "minimum attained, q > 0", four.q, 2.0, 1e-6, scale),
        _near("extremal/N=4/a2", "optimal polynomial 2t^4", four.polynomial.coefficient(2), 0.0, 1e-6, scale),
        _near("extremal/q(6,1)", "minimum attained, q > 0", six.q, 7.0 / 6.0, 2e-3, scale),
        _near("extremal/K(6)", "K(N,t0) > 0", six.K, 12.0 / 7.0, 3e-3, scale),
        _near("extremal/N=6/a4", "optimal polynomial", six.polynomial.coefficient(4), -5.0 / 3.0, 5e-3, scale),
        _near("extremal/N=6/a2", "optimal polynomial", six.polynomial.coefficient(2), 5.0 / 6.0, 5e-3, scale),
        ClaimRow(
            claim="extremal/N=6/scale-invariance",
            anchor="q(t0) / t0^N constant in t0",
            computed=invariance.spread,
            expected=0.0,
            tolerance=1e-4 * scale,
            passed=bool(invariance.spread <= 1e-4 * scale),
            witness=list(zip(invariance.t0, invariance.normalized)),
        ),
    ]


def check_power_types(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    eps_grid = [float(e) for e in numpy.geomspace(0.01, 0.1, 6)]
    delta = power_fit(delta_curve(NormDescriptor.lp(4.0, 2), 2, eps_grid, sampler))
    space = SequenceSpace.parse("lp:4")
    x = SparseSequence({1: 1.0})
    tail = ModulusCurve(
        parameter="t",
        t=numpy.asarray(eps_grid),
        values=numpy.asarray([tail_rho_norm(space, x, t).value for t in eps_grid]),
        bound_direction=BoundDirection.Exact,
    )
    tail_fit = power_fit(tail)
    return [
        _within("power-type/delta-l4-d2", "modulus of convexity of power type 4", delta.exponent, 3.8, 4.2, scale),
        _within("power-type/tail-l4", "asymptotic modulus of power type 4", tail_fit.exponent, 3.9, 4.1, scale),
    ]


def _piecewise_function(params: "FloatArray") -> "Callable[[FloatArray], FloatArray]":
    a1, c1, b1, a2, c2, b2, s, c3 = params

    def fn(x: "FloatArray") -> "FloatArray":
        first = (1.0 + abs(a1)) * (x - c1) ** 2 + b1
        second = (1.0 + abs(a2)) * (x - c2) ** 2 + b2
        return cast("FloatArray", numpy.minimum(first, second) + abs(s) * numpy.abs(x - c3))

    return fn


def check_envelopes(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    quartic = GridFunction1D.from_function(lambda x: (x**2 - 1.0) ** 2, -2.0, 2.0, 801)
    at_zero = float(cast("float", lower_convex_hull_1d(quartic).evaluate(0.0)))
    rows = [
        _near("envelope/double-well-at-0", "conv((x^2-1)^2)(0) = 0", at_zero, 0.0, 1e-9, scale)
    ]

    params = box_points(PIECEWISE_FUNCTIONS, 8, sampler.seed, 1.0, STREAM_POINTS)
    sample_points = box_points(
        PIECEWISE_FUNCTIONS * CERTIFICATE_POINTS, 1, sampler.seed, 1.5, STREAM_PARTNERS
    ).reshape(PIECEWISE_FUNCTIONS, CERTIFICATE_POINTS)
    worst_ratio = 0.0
    worst_discrepancy = 0.0
    worst_tolerance = 0.0
    worst_support = 0
    witness = None
    for k in range(PIECEWISE_FUNCTIONS):
        f = GridFunction1D.from_function(_piecewise_function(params[k]), -2.0, 2.0, PIECEWISE_KNOTS)
        tol = max(grid_tolerance(f), 1e-12)
        hull = lower_convex_hull_1d(f)
        biconj = cast("GridFunction1D", biconjugate(f))
        discrepancies = [float(numpy.abs(hull.values - biconj.values).max())]
        for point in sample_points[k]:
            cert = caratheodory_envelope_at(f, float(point))
            hull_at = float(cast("float", hull.evaluate(float(point))))
            biconj_at = float(cast("float", biconj.evaluate(float(point))))
            discrepancies.append(abs(cert.value - hull_at))
            discrepancies.append(abs(cert.value - biconj_at))
            worst_support = max(worst_support, len(cert.combination))
        ratio = max(discrepancies) / tol
        if ratio >= worst_ratio:
            worst_ratio = ratio
            worst_discrepancy = max(discrepancies)
            worst_tolerance = tol
            witness = params[k]
    rows.append(
        _near(
            "envelope/methods-agree",
            "hull, biconjugate and Caratheodory LP agree (in grid tolerances)",
            worst_ratio,
            0.0,
            1.0,
            scale,
            witness,
        )._replace(
            detail=f"discrepancy {worst_discrepancy:.3g} against grid tolerance {worst_tolerance:.3g}"
        )
    )
    rows.append(
        _holds(
            "envelope/caratheodory-support",
            "at most n+1 points",
            worst_support,
            worst_support <= 2,
        )
    )
    return rows


def _kinked(x: "FloatArray", y: "FloatArray") -> "FloatArray":
    return cast("FloatArray", numpy.sqrt(x**2 + numpy.exp(-(y**2))))


def check_kink(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    sweep = window_sweep(_kinked, (0.0, 0.0), SWEEP_WINDOWS)
    values = [w.value for w in sweep]
    R = SWEEP_WINDOWS[-1]
    g = GridFunction2D.from_function(
        _kinked, numpy.linspace(-2.0, 2.0, 801), numpy.linspace(-R, R, 801)
    )
    slopes = one_sided_slopes(cast("GridFunction2D", biconjugate(g)), (0.0, 0.0), axis=0)
    smallest = min(abs(slopes.left), abs(slopes.right))
    return [
        _holds(
            "kink/monotone-windows",
            "envelope at the origin decreases with the window",
            values,
            all(b <= a + 1e-12 for a, b in zip(values, values[1:])),
        ),
        ClaimRow(
            claim="kink/value-at-R=16",
            anchor="envelope at the origin tends to 0",
            computed=values[-1],
            expected=0.0,
            tolerance=0.15 * scale,
            passed=bool(values[-1] <= 0.15 * scale),
        ),
        _holds(
            "kink/one-sided-slopes",
            "conv f is not differentiable at the origin",
            [slopes.left, slopes.right],
            smallest >= 0.9,
        ),
    ]


def check_envelope_smoothness(
    sampler: "SamplerConfig", scale: "float"
) -> "List[ClaimRow]":
    phi = GridFunction1D.from_function(lambda r: (r**2 - 1.0) ** 2, 0.0, 4.0, 801)
    report = envelope_preserves_smoothness_demo(phi, 4.0, sampler=sampler)
    return [
        _within("envelope-smoothness/f-exponent", "f asymptotically 4-smooth", report.f_fit.exponent, 3.6, 4.4, scale),
        _within("envelope-smoothness/conv-exponent", "conv f asymptotically 4-smooth", report.conv_fit.exponent, 3.6, 4.4, scale),
        ClaimRow(
            claim="envelope-smoothness/constants",
            anchor="conv f constant within the factor of the f constant",
            computed=report.conv_constant,
            expected=report.factor * report.f_constant,
            tolerance=0.0,
            passed=report.passed,
        ),
    ]


def check_absolute_integrand(
    sampler: "SamplerConfig", scale: "float"
) -> "List[ClaimRow]":
    space = SequenceSpace.parse("lp:4")
    norm = space.norm()
    coeffs = numpy.abs(box_points(RADIAL_FUNCTIONS, 3, sampler.seed, 1.0, STREAM_PARTNERS))
    points = sample_unit_set(space, RADIAL_FUNCTIONS, seed=sampler.seed)
    worst = 0.0
    witness = None
    for k in range(RADIAL_FUNCTIONS):
        a, b, c = coeffs[k]
        profile = GridFunction1D.from_function(
            lambda r: a * r + b * r**2 + c * r**4, 0.0, 8.0, 801
        )
        f = radial_function(profile, norm, convex=True, name=f"radial-{k}")
        for t in (0.1, 0.5):
            plain = tail_modulus_fn(f, points[k], t, use_absolute=False, sampler=sampler)
            absolute = tail_modulus_fn(f, points[k], t, use_absolute=True, sampler=sampler)
            gap = abs(plain.value - absolute.value)
            if gap > worst:
                worst = gap
                witness = (coeffs[k], points[k], t)
    return [
        _near(
            "absolute-integrand/convex-radial",
            "alternative description of the pointwise modulus",
            worst,
            0.0,
            1e-12,
            scale,
            witness,
        )
    ]


def check_puc_constants(sampler: "SamplerConfig", scale: "float") -> "List[ClaimRow]":
    l2 = puc_constant(NormDescriptor.lp(2.0, 2), 2.0, sampler=sampler)
    l4 = puc_constant(NormDescriptor.lp(4.0, 2), 4.0, sampler=sampler)
    l1_norm = NormDescriptor.lp(1.0, 2)
    l1 = puc_constant(l1_norm, 2.0, sampler=sampler)
    x, y = l1.witness
    depth = (
        float(cast("float", l1_norm.evaluate(x + y))) ** 2
        + float(cast("float", l1_norm.evaluate(x - y))) ** 2
        - 2.0 * float(cast("float", l1_norm.evaluate(x))) ** 2
    )
    flat_verified = (
        not l1.uniformly_convex
        and float(cast("float", l1_norm.evaluate(y))) > 0.0
        and abs(depth) <= 1e-12
    )
    return [
        _near("puc/l2-p2", "the norm is Hilbertian", l2.constant, 1.0, 1e-12, scale, l2.witness),
        _near("puc/l4-p4", "p-uniform convexity constant of the norm", l4.constant, 1.0, 1e-6, scale, l4.witness),
        _holds("puc/l1-p2", "not 2-uniformly convex, flat face", depth, flat_verified, l1.witness),
    ]


ACCEPTANCE_CHECKS: "Final[Sequence[Tuple[str, Callable[[SamplerConfig, float], List[ClaimRow]]]]]" = (
    ("lp tail moduli", check_lp_tail_moduli),
    ("c0 flatness", check_c0_flatness),
    ("constant one, N=4", lambda s, sc: check_constant_one(4, s, sc)),
    ("constant one, N=6", lambda s, sc: check_constant_one(6, s, sc)),
    ("extremal problem", check_extremal),
    ("power types", check_power_types),
    ("envelope correctness", check_envelopes),
    ("kink of the envelope", check_kink),
    ("envelope and asymptotic smoothness", check_envelope_smoothness),
    ("absolute integrand", check_absolute_integrand),
    ("p-uniform convexity constants", check_puc_constants),
)


def verify_all(
    sampler: "SamplerConfig" = DEFAULT_SAMPLER, scale: "float" = 1.0
) -> "VerificationSummary":
    rows: "List[ClaimRow]" = []
    for name, check in ACCEPTANCE_CHECKS:
        logger.info(f"Checking {name}")
        for row in check(sampler, scale):
            if not row.passed:
                logger.error(
                    f"{row.claim} failed: computed {row.computed}, expected {row.expected} (tolerance {row.tolerance}), witness {row.witness}"
                )
            rows.append(row)
    return VerificationSummary(rows=rows, seed=sampler.seed, scale=scale)
