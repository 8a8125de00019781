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
The extremal problem over the class C_N of convex, nonnegative, even
polynomials without constant term

    q(t0) = min p(t0)   with   p(t) = 2 t^N + a_{N-2} t^{N-2} + ... + a_2 t^2

as a semi-infinite linear program: p >= 0 and p'' >= 0 are imposed on a
Chebyshev-Lobatto grid over [0, T]. The dual, with one nonnegative
variable per grid constraint, is solved in standard form, and the
optimal coefficients are read from its simplex multipliers.
"""

from __future__ import absolute_import

from dataclasses import dataclass
import logging
import math
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy
from numpy.polynomial import Polynomial

if TYPE_CHECKING:
    from typing import (
        Any,
        List,
        Mapping,
        Optional,
        Sequence,
        Tuple,
    )

    import numpy.typing as npt

    from typing_extensions import (
        Final,
        TypeAlias,
    )

    FloatArray: TypeAlias = npt.NDArray[numpy.float64]

    from .normcore import NormDescriptor

from .common import (
    AbstractAsymConvException,
    BoundDirection,
    DEFAULT_SAMPLER,
    SamplerConfig,
    StrDocEnum,
)
from .normcore import NormKind
from .sampling import (
    STREAM_POINTS,
    box_points,
    sphere_directions,
)
from .simplex import (
    LPStatus,
    solve_standard_form,
)

logger = logging.getLogger(__name__)

LEADING_COEFFICIENT: "Final[float]" = 2.0
DEFAULT_DENSITY: "Final[int]" = 2048
MEMBERSHIP_DENSITY: "Final[int]" = 4097
CONSTRAINT_TOLERANCE: "Final[float]" = 1e-9
POSITIVITY_MARGIN: "Final[float]" = 1e-6
REFINEMENT_TOLERANCE: "Final[float]" = 1e-4
SCALE_TOLERANCE: "Final[float]" = 1e-4
GAP_TOLERANCE: "Final[float]" = 1e-9
MAX_BOUND_ROUNDS: "Final[int]" = 10
NORMALIZATION: "Final[str]" = (
    "leading coefficient a_N = 2, |h| = 1 (t^N coefficient of P(z+th)+P(z-th)-2P(z))"
)


class ExtremalException(AbstractAsymConvException):
    pass


class ConstraintKind(StrDocEnum):
    Value = ("value", "p(t) >= 0")
    Convexity = ("convexity", "p''(t) >= 0")


@dataclass(frozen=True)
class EvenPolynomial:
    """
    p(t) = a_2 t^2 + a_4 t^4 + ... + a_N t^N, coefficients stored from a_2 on
    """

    N: "int"
    coefficients: "Tuple[float, ...]"

    def __post_init__(self) -> "None":
        if self.N < 2 or self.N % 2 != 0:
            raise ExtremalException(f"Even polynomials need an even degree, got {self.N}")
        if len(self.coefficients) != self.N // 2:
            raise ExtremalException(
                f"Degree {self.N} needs {self.N // 2} coefficients, got {len(self.coefficients)}"
            )

    @classmethod
    def from_mapping(cls, N: "int", coeffs: "Mapping[int, float]") -> "EvenPolynomial":
        for k in coeffs:
            if k % 2 != 0 or not 2 <= k <= N:
                raise ExtremalException(f"Term of degree {k} is not allowed in C_{N}")
        return cls(N, tuple(float(coeffs.get(k, 0.0)) for k in range(2, N + 1, 2)))

    def coefficient(self, k: "int") -> "float":
        if k % 2 != 0 or not 2 <= k <= self.N:
            return 0.0
        return self.coefficients[k // 2 - 1]

    def as_mapping(self) -> "Mapping[int, float]":
        return {2 * (i + 1): a for i, a in enumerate(self.coefficients)}

    def polynomial(self) -> "Polynomial":
        full = numpy.zeros(self.N + 1)
        full[2::2] = self.coefficients
        return Polynomial(full)

    def evaluate(self, t: "npt.ArrayLike") -> "FloatArray":
        return cast("FloatArray", self.polynomial()(numpy.asarray(t, dtype=numpy.float64)))

    def second_derivative(self, t: "npt.ArrayLike") -> "FloatArray":
        return cast(
            "FloatArray",
            self.polynomial().deriv(2)(numpy.asarray(t, dtype=numpy.float64)),
        )

    def combine(self, other: "EvenPolynomial", lam: "float") -> "EvenPolynomial":
        """
        lam * self + (1 - lam) * other
        """
        if other.N != self.N:
            raise ExtremalException("Only polynomials of the same degree bound combine")
        if not 0.0 <= lam <= 1.0:
            raise ExtremalException(f"Convex weights lie in [0, 1], got {lam}")
        return EvenPolynomial(
            self.N,
            tuple(
                lam * a + (1.0 - lam) * b
                for a, b in zip(self.coefficients, other.coefficients)
            ),
        )

    def cauchy_bound(self) -> "float":
        """
        Bound on the real roots of p and p'' from their coefficients
        """
        bounds = [1.0]
        for poly in (self.polynomial(), self.polynomial().deriv(2)):
            coef = poly.trim().coef
            if coef.size > 1 and coef[-1] != 0:
                bounds.append(1.0 + float(numpy.abs(coef[:-1]).max() / abs(coef[-1])))
        return max(bounds)


@dataclass(frozen=True)
class ExtremalProblem:
    """
    N: even degree, at least 4
    t0: evaluation point of the objective
    leading: the fixed coefficient a_N
    T: constraint window [0, T], derived from root bounds when None
    density: number of grid points
    """

    N: "int"
    t0: "float"
    leading: "float" = LEADING_COEFFICIENT
    T: "Optional[float]" = None
    density: "int" = DEFAULT_DENSITY

    def __post_init__(self) -> "None":
        if self.N < 4 or self.N % 2 != 0:
            raise ExtremalException(f"The extremal problem needs even N >= 4, got {self.N}")
        if not self.t0 > 0:
            raise ExtremalException(f"t0 must be positive, got {self.t0}")
        if self.density < 3:
            raise ExtremalException("The constraint grid needs at least three points")
        if self.T is not None and self.T < self.min_window:
            raise ExtremalException(
                f"T = {self.T} below the minimal window {self.min_window}"
            )

    @property
    def min_window(self) -> "float":
        return max(2.0, 2.0 * self.t0)


class ActiveConstraint(NamedTuple):
    kind: "ConstraintKind"
    t: "float"
    multiplier: "float"


class ExtremalResult(NamedTuple):
    """
    N, t0: the problem
    q: optimal value of p(t0)
    K: 2 t0^N / q
    polynomial: the optimal polynomial
    active: constraints carrying a positive dual weight
    T: constraint window actually used
    density: grid points
    iterations: simplex pivots of the last solve
    bound_rounds: solves spent while enlarging T
    min_value, min_convexity: smallest p and p'' on the grid
    normalization: the normalization of the problem
    """

    N: "int"
    t0: "float"
    q: "float"
    K: "float"
    polynomial: "EvenPolynomial"
    active: "Sequence[ActiveConstraint]"
    T: "float"
    density: "int"
    iterations: "int"
    bound_rounds: "int"
    min_value: "float"
    min_convexity: "float"
    normalization: "str" = NORMALIZATION

    def _marshall(self) -> "Mapping[str, Any]":
        return {
            "N": self.N,
            "t0": self.t0,
            "q": self.q,
            "K": self.K,
            "coefficients": {str(k): v for k, v in self.polynomial.as_mapping().items()},
            "grid": {"T": self.T, "density": self.density},
            "diagnostics": {
                "iterations": self.iterations,
                "bound_rounds": self.bound_rounds,
                "min_value": self.min_value,
                "min_convexity": self.min_convexity,
                "active": [
                    {"kind": a.kind.value, "t": a.t, "multiplier": a.multiplier}
                    for a in self.active
                ],
            },
            "normalization": self.normalization,
        }


def chebyshev_lobatto_grid(T: "float", density: "int") -> "FloatArray":
    """
    Chebyshev-Lobatto points of [0, T]. The grid of density 2n-1 contains
    the grid of density n.
    """
    j = numpy.arange(density)
    grid = 0.5 * T * (1.0 - numpy.cos(math.pi * j / (density - 1)))
    grid[0] = 0.0
    grid[-1] = T
    return grid


def _constraint_rows(
    N: "int", leading: "float", grid: "FloatArray"
) -> "Tuple[FloatArray, FloatArray, List[Tuple[ConstraintKind, float]]]":
    """
    Rows G and offsets h of G a + h >= 0, a = (a_2, ..., a_{N-2})
    """
    degrees = numpy.arange(2, N, 2)
    value_rows = grid[:, None] ** degrees[None, :]
    value_h = leading * grid**N
    conv_rows = (degrees * (degrees - 1))[None, :] * grid[:, None] ** (
        degrees - 2
    )[None, :]
    conv_h = leading * N * (N - 1) * grid ** (N - 2)
    G = numpy.concatenate([value_rows, conv_rows])
    h = numpy.concatenate([value_h, conv_h])
    labels = [(ConstraintKind.Value, float(t)) for t in grid] + [
        (ConstraintKind.Convexity, float(t)) for t in grid
    ]
    return G, h, labels


def _solve_on_grid(
    N: "int", t0: "float", leading: "float", grid: "FloatArray"
) -> "Tuple[EvenPolynomial, float, Sequence[ActiveConstraint], int]":
    degrees = numpy.arange(2, N, 2)
    G, h, labels = _constraint_rows(N, leading, grid)
    scale = numpy.maximum(numpy.abs(G).max(axis=1), numpy.abs(h))
    scale = numpy.where(scale > 0, scale, 1.0)
    G = G / scale[:, None]
    h = h / scale
    c = t0**degrees

    # Dual: min h.y  s.t.  G.T y = c, y >= 0
    solution = solve_standard_form(h, G.T, c)
    if solution.status == LPStatus.Infeasible:
        raise ExtremalException(
            "Extremal LP reported infeasible, yet the zero tail polynomial is feasible"
        )
    if solution.status == LPStatus.Unbounded:
        raise ExtremalException(
            "Extremal LP reported unbounded, yet p(t0) >= 0 bounds it below"
        )
    solution.raise_for_status()

    coefficients = -solution.multipliers
    poly = EvenPolynomial(N, tuple(float(a) for a in coefficients) + (leading,))
    q = leading * t0**N - solution.objective
    active = [
        ActiveConstraint(labels[j][0], labels[j][1], float(solution.x[j] / scale[j]))
        for j in solution.support()
    ]
    return poly, float(q), active, solution.iterations


def solve_extremal(problem: "ExtremalProblem") -> "ExtremalResult":
    """
    Enlarges the window T until it covers the root bound of the optimal
    polynomial, so p and p'' cannot turn negative beyond the grid
    """
    N = problem.N
    T = problem.T if problem.T is not None else problem.min_window
    rounds = 0
    while True:
        rounds += 1
        grid = chebyshev_lobatto_grid(T, problem.density)
        poly, q, active, iterations = _solve_on_grid(N, problem.t0, problem.leading, grid)
        bound = poly.cauchy_bound()
        if problem.T is not None or bound <= T or rounds >= MAX_BOUND_ROUNDS:
            if bound > T:
                logger.warning(f"Root bound {bound} exceeds the constraint window {T}")
            break
        logger.debug(f"Window {T} below root bound {bound}, solving again")
        T = bound

    values = poly.evaluate(grid)
    convexity = poly.second_derivative(grid)
    tol_value = CONSTRAINT_TOLERANCE * max(1.0, problem.leading * T**N)
    tol_conv = CONSTRAINT_TOLERANCE * max(1.0, problem.leading * N * N * T ** (N - 2))
    if values.min() < -tol_value or convexity.min() < -tol_conv:
        raise ExtremalException(
            f"Optimal polynomial violates the grid constraints: min p = {values.min()}, min p'' = {convexity.min()}"
        )
    if q <= POSITIVITY_MARGIN * problem.t0**N:
        raise ExtremalException(f"q(t0) = {q} is not positive")

    logger.debug(f"q({N}, {problem.t0}) = {q} on {problem.density} points over [0, {T}]")
    return ExtremalResult(
        N=N,
        t0=problem.t0,
        q=q,
        K=problem.leading * problem.t0**N / q,
        polynomial=poly,
        active=active,
        T=float(T),
        density=problem.density,
        iterations=iterations,
        bound_rounds=rounds,
        min_value=float(values.min()),
        min_convexity=float(convexity.min()),
    )


class ScaleInvarianceReport(NamedTuple):
    N: "int"
    t0: "Sequence[float]"
    q: "Sequence[float]"
    normalized: "Sequence[float]"
    K: "Sequence[float]"
    spread: "float"
    passed: "bool"


def scale_invariance_check(
    N: "int",
    t0_list: "Sequence[float]",
    density: "int" = DEFAULT_DENSITY,
    tol: "float" = SCALE_TOLERANCE,
) -> "ScaleInvarianceReport":
    """
    q(t0) / t0^N should not depend on t0, since p(t) -> s^-N p(s t) maps
    C_N onto itself keeping the leading coefficient
    """
    if len(t0_list) == 0:
        raise ExtremalException("Scale checks need at least one t0")
    results = [solve_extremal(ExtremalProblem(N, t0, density=density)) for t0 in t0_list]
    normalized = [r.q / r.t0**N for r in results]
    reference = normalized[0]
    spread = max(abs(v - reference) / reference for v in normalized)
    return ScaleInvarianceReport(
        N=N,
        t0=list(t0_list),
        q=[r.q for r in results],
        normalized=normalized,
        K=[r.K for r in results],
        spread=spread,
        passed=spread <= tol,
    )


class RefinementReport(NamedTuple):
    """
    Adding grid points adds constraints, so q can only grow
    """

    coarse: "float"
    fine: "float"
    difference: "float"
    nondecreasing: "bool"
    passed: "bool"


def refinement_check(
    problem: "ExtremalProblem", tol: "float" = REFINEMENT_TOLERANCE
) -> "RefinementReport":
    coarse = solve_extremal(problem)
    fine = solve_extremal(
        ExtremalProblem(
            problem.N,
            problem.t0,
            problem.leading,
            T=coarse.T,
            density=2 * problem.density - 1,
        )
    )
    difference = fine.q - coarse.q
    slack = 1e-9 * max(1.0, abs(coarse.q))
    nondecreasing = difference >= -slack
    return RefinementReport(
        coarse=coarse.q,
        fine=fine.q,
        difference=difference,
        nondecreasing=nondecreasing,
        passed=nondecreasing and abs(difference) < tol,
    )


class MembershipResult(NamedTuple):
    """
    member: p >= 0 and p'' >= 0 on the real line
    witness: a point where one of them is negative
    kind: which condition fails
    min_value, min_convexity: smallest p and p'' on the candidates
    """

    member: "bool"
    witness: "Optional[float]"
    kind: "Optional[ConstraintKind]"
    min_value: "float"
    min_convexity: "float"


def _real_roots_in(poly: "Polynomial", lower: "float", upper: "float") -> "FloatArray":
    if poly.degree() < 1:
        return numpy.zeros(0)
    roots = poly.roots()
    real = roots[numpy.abs(roots.imag) <= 1e-9 * (1.0 + numpy.abs(roots.real))].real
    return real[(real >= lower) & (real <= upper)]


def membership_check(
    p: "EvenPolynomial",
    density: "int" = MEMBERSHIP_DENSITY,
    slack: "float" = 0.0,
) -> "MembershipResult":
    """
    Checks p and p'' on a dense grid of [0, T], T the Cauchy bound, and at
    the real critical points of both. Even symmetry covers t < 0.
    slack is an absolute allowance added to the rounding tolerance;
    polynomials given by hand are checked with none.
    """
    poly = p.polynomial().trim()
    second = poly.deriv(2) if poly.degree() >= 2 else Polynomial([0.0])
    lead = float(poly.coef[-1]) if poly.degree() >= 1 else 0.0
    T = p.cauchy_bound()
    if lead < 0:
        t = 2.0 * T
        return MembershipResult(
            member=False,
            witness=t,
            kind=ConstraintKind.Value,
            min_value=float(poly(t)),
            min_convexity=float(second(t)),
        )

    candidates = numpy.unique(
        numpy.concatenate(
            [
                numpy.linspace(0.0, T, density),
                _real_roots_in(poly.deriv(1), 0.0, T),
                _real_roots_in(second.deriv(1), 0.0, T),
            ]
        )
    )
    values = poly(candidates)
    convexity = second(candidates)
    scale = max(1.0, float(numpy.abs(poly.coef).max()))
    tol = CONSTRAINT_TOLERANCE * scale * max(1.0, T ** max(poly.degree(), 1)) + slack

    if values.min() < -tol:
        k = int(values.argmin())
        return MembershipResult(
            False, float(candidates[k]), ConstraintKind.Value, float(values.min()), float(convexity.min())
        )
    if convexity.min() < -tol:
        k = int(convexity.argmin())
        return MembershipResult(
            False,
            float(candidates[k]),
            ConstraintKind.Convexity,
            float(values.min()),
            float(convexity.min()),
        )
    return MembershipResult(True, None, None, float(values.min()), float(convexity.min()))


def discretization_tolerance(result: "ExtremalResult") -> "float":
    """
    Bound on how far p or p'' of a grid optimum may dip below zero between
    consecutive knots: g >= 0 at both ends of a step h gives g >= -h^2/8 max|g''|
    inside it, with g = p and g = p''.
    """
    knots = chebyshev_lobatto_grid(result.T, result.density)
    h = float(numpy.diff(knots).max())
    poly = result.polynomial.polynomial()
    dense = numpy.linspace(0.0, result.T, MEMBERSHIP_DENSITY)
    curvature = max(
        float(numpy.abs(poly.deriv(2)(dense)).max()),
        float(numpy.abs(poly.deriv(4)(dense)).max()),
    )
    return h * h / 8.0 * curvature


class GapWitnessReport(NamedTuple):
    """
    q: the extremal lower bound for the gap
    min_gap: smallest sampled P(z+t0 h) + P(z-t0 h) - 2P(z), |h| = 1
    witness: the (z, h) pair attaining it
    passed: min_gap >= q - tolerance
    bound_direction: min_gap is an upper bound of the true infimum
    samples: pairs evaluated
    """

    N: "int"
    t0: "float"
    q: "float"
    min_gap: "float"
    witness: "Tuple[FloatArray, FloatArray]"
    passed: "bool"
    bound_direction: "BoundDirection"
    samples: "int"


def gap_witness(
    norm: "NormDescriptor",
    t0: "float",
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
    density: "int" = DEFAULT_DENSITY,
) -> "GapWitnessReport":
    if norm.kind != NormKind.Poly or norm.form is None:
        raise ExtremalException("Gap witnesses need a polynomial norm")
    if norm.certificate is None or not norm.certificate.certified:
        raise ExtremalException("Gap witnesses need a certified polynomial norm")
    form = norm.form
    d = form.dimension
    result = solve_extremal(ExtremalProblem(form.degree, t0, density=density))

    h = sphere_directions(norm.evaluate, sampler.samples, d, sampler.seed)
    z = numpy.concatenate(
        [
            numpy.zeros((1, d)),
            box_points(h.shape[0] - 1, d, sampler.seed, sampler.radius, STREAM_POINTS),
        ]
    )
    gaps = (
        numpy.asarray(form.diagonal(z + t0 * h))
        + numpy.asarray(form.diagonal(z - t0 * h))
        - 2.0 * numpy.asarray(form.diagonal(z))
    )
    k = int(gaps.argmin())
    min_gap = float(gaps[k])
    passed = min_gap >= result.q - GAP_TOLERANCE * max(1.0, result.q)
    if not passed:
        logger.error(
            f"Falsification candidate: gap {min_gap} below q = {result.q} at z={z[k].tolist()}, h={h[k].tolist()}"
        )
    return GapWitnessReport(
        N=form.degree,
        t0=t0,
        q=result.q,
        min_gap=min_gap,
        witness=(z[k], h[k]),
        passed=passed,
        bound_direction=BoundDirection.Upper,
        samples=int(z.shape[0]),
    )
