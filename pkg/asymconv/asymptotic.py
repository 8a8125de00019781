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
Asymptotic moduli on the finitely supported model of l_p and c_0.

The inf or sup over finite codimensional subspaces is taken over the
tail subspaces span{e_k : k > m}. Norm moduli have closed forms on
this model. Generic functions are evaluated on a dense truncation of
length m + tail_width, with sampled tail directions and the single
coordinate extremes.
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

if TYPE_CHECKING:
    from typing import (
        Any,
        Mapping,
        Optional,
        Sequence,
        Tuple,
        Union,
    )

    import numpy.typing as npt

    from typing_extensions import (
        Final,
        TypeAlias,
    )

    FloatArray: TypeAlias = npt.NDArray[numpy.float64]

    from .envelope import GridFunction1D

from .common import (
    AbstractAsymConvException,
    BoundDirection,
    DEFAULT_SAMPLER,
    SamplerConfig,
    StrDocEnum,
)
from .envelope import radial_envelope
from .moduli import (
    ModulusCurve,
    PowerFit,
    power_fit,
)
from .normcore import (
    FunctionDescriptor,
    NormDescriptor,
    SparseSequence,
    SymmetricForm,
    eval_norm,
    homogeneous_terms,
)
from .sampling import (
    STREAM_POINTS,
    STREAM_TAIL,
    gaussian_points,
    sobol_points,
)

logger = logging.getLogger(__name__)

UNIT_TOLERANCE: "Final[float]" = 1e-12
FLATNESS_TOLERANCE: "Final[float]" = 1e-12
EXTRA_SUBSPACES: "Final[int]" = 4
RHO_SCALES: "Final[Tuple[float, ...]]" = (0.25, 0.5, 0.75, 1.0)
DELTA_SCALES: "Final[Tuple[float, ...]]" = (1.0, 1.5, 2.0, 4.0)
UNIFORM_LABEL: "Final[str]" = "uniform over sample set S"
TAIL_MODEL: "Final[str]" = "tail"
DEFAULT_ENVELOPE_FACTOR: "Final[float]" = 4.0


class AsymptoticModelException(AbstractAsymConvException):
    pass


class SpaceKind(StrDocEnum):
    Lp = ("lp", "The space l_p, p >= 1")
    C0 = ("c0", "The space c_0 of null sequences")


class ModulusMode(StrDocEnum):
    RhoBar = ("rho_bar", "Pointwise modulus of asymptotic smoothness")
    DeltaBar = ("delta_bar", "Pointwise modulus of asymptotic convexity")


class SequenceSpace(NamedTuple):
    kind: "SpaceKind"
    p: "Optional[float]" = None

    @classmethod
    def parse(cls, label: "str") -> "SequenceSpace":
        """
        Accepts c0 and lp:<p>
        """
        if label == SpaceKind.C0.value:
            return cls(SpaceKind.C0)
        kind, _, p = label.partition(":")
        if kind != SpaceKind.Lp.value or p == "":
            raise AsymptoticModelException(f"Unknown sequence space {label!r}")
        try:
            value = float(p)
        except ValueError as ve:
            raise AsymptoticModelException(f"Invalid exponent in {label!r}") from ve
        if not value >= 1.0:
            raise AsymptoticModelException(f"l_p spaces need p >= 1, got {value}")
        return cls(SpaceKind.Lp, value)

    @property
    def label(self) -> "str":
        if self.kind == SpaceKind.C0:
            return "c0"
        return f"l{self.p:g}"

    def norm(self) -> "NormDescriptor":
        if self.kind == SpaceKind.C0:
            return NormDescriptor.sup()
        assert self.p is not None
        return NormDescriptor.lp(self.p)

    def tail_norm_excess(self, s: "float") -> "float":
        """
        |x + h| - 1 for a unit x and h of norm s with disjoint supports
        """
        if self.kind == SpaceKind.C0:
            return max(1.0, s) - 1.0
        assert self.p is not None
        if s == 0.0:
            return 0.0
        return math.expm1(math.log1p(s**self.p) / self.p)


@dataclass(frozen=True)
class TailSubspace:
    """
    span{e_k : k > m}
    """

    m: "int"

    def __post_init__(self) -> "None":
        if self.m < 0:
            raise AsymptoticModelException(f"Tail subspaces need m >= 0, got {self.m}")

    def contains(self, h: "SparseSequence") -> "bool":
        return all(k > self.m for k in h.support)

    def embed(self, tail: "npt.ArrayLike", length: "int") -> "FloatArray":
        """
        Dense vectors of the given length with the tail coordinates
        placed from index m+1 on
        """
        arr = numpy.atleast_2d(numpy.asarray(tail, dtype=numpy.float64))
        if self.m + arr.shape[1] > length:
            raise AsymptoticModelException("Tail directions do not fit the truncation")
        dense = numpy.zeros((arr.shape[0], length))
        dense[:, self.m : self.m + arr.shape[1]] = arr
        return dense


class AsymptoticModulusResult(NamedTuple):
    """
    t: the radius
    value: the modulus value
    mode: rho_bar or delta_bar
    at: the point, or the uniform label for sample sets
    subspace_index: m of the tail subspace attaining the value
    analytic: closed form (True) or sampled (False)
    bound_direction: exact for closed forms, one-sided for sampled values
    model: always the tail model
    """

    t: "float"
    value: "float"
    mode: "ModulusMode"
    at: "Union[SparseSequence, str]"
    subspace_index: "int"
    analytic: "bool"
    bound_direction: "BoundDirection"
    model: "str" = TAIL_MODEL


def _check_unit(space: "SequenceSpace", x: "SparseSequence") -> "None":
    length = eval_norm(space.norm(), x)
    if abs(length - 1.0) > UNIT_TOLERANCE:
        raise AsymptoticModelException(f"Point of norm {length}, unit norm required")


def _check_radius(t: "float") -> "None":
    if not t > 0:
        raise AsymptoticModelException(f"t must be positive, got {t}")


def _subspace_range(x: "SparseSequence") -> "Sequence[int]":
    first = x.max_index
    return range(first, first + EXTRA_SUBSPACES + 1)


def tail_delta_norm(
    space: "SequenceSpace", x: "SparseSequence", t: "float"
) -> "AsymptoticModulusResult":
    """
    delta_bar(t; x) = sup_m inf {|x + h| - 1 : h in H_m, |h| >= t}, in
    closed form since |x + h| only depends on |h| beyond the support
    """
    _check_unit(space, x)
    _check_radius(t)
    best_m = x.max_index
    best = -math.inf
    for m in _subspace_range(x):
        # the excess is nondecreasing in |h|, so |h| = t is the infimum
        value = space.tail_norm_excess(t)
        if value > best:
            best, best_m = value, m
    return AsymptoticModulusResult(
        t=t,
        value=best,
        mode=ModulusMode.DeltaBar,
        at=x,
        subspace_index=best_m,
        analytic=True,
        bound_direction=BoundDirection.Exact,
    )


def tail_rho_norm(
    space: "SequenceSpace", x: "SparseSequence", t: "float"
) -> "AsymptoticModulusResult":
    """
    rho_bar(t; x) = inf_m sup {|x + h| - 1 : h in H_m, |h| <= t}
    """
    _check_unit(space, x)
    _check_radius(t)
    best_m = x.max_index
    best = math.inf
    for m in _subspace_range(x):
        value = space.tail_norm_excess(t)
        if value < best:
            best, best_m = value, m
    return AsymptoticModulusResult(
        t=t,
        value=best,
        mode=ModulusMode.RhoBar,
        at=x,
        subspace_index=best_m,
        analytic=True,
        bound_direction=BoundDirection.Exact,
    )


def tail_directions(
    norm: "NormDescriptor", sampler: "SamplerConfig" = DEFAULT_SAMPLER
) -> "FloatArray":
    """
    Unit tail directions over tail_width coordinates: +-e_1 first, then
    low-discrepancy Gaussian directions, each with its opposite
    """
    width = sampler.tail_width
    eye = numpy.eye(width)[:1]
    raw = gaussian_points(sampler.tail_samples, width, sampler.seed, STREAM_TAIL)
    directions = numpy.concatenate([eye, -eye, raw, -raw])
    lengths = numpy.asarray(norm.evaluate(directions))
    keep = lengths > 0
    return cast("FloatArray", directions[keep] / lengths[keep][:, None])


def _sampled_tail_modulus(
    f: "FunctionDescriptor",
    x: "SparseSequence",
    t: "float",
    mode: "ModulusMode",
    use_absolute: "bool",
    sampler: "SamplerConfig",
) -> "Tuple[float, int]":
    if f.norm is None:
        raise AsymptoticModelException(
            f"Function {f.name} carries no norm to measure tail directions"
        )
    directions = tail_directions(f.norm, sampler)
    scales = RHO_SCALES if mode == ModulusMode.RhoBar else DELTA_SCALES
    tails = numpy.concatenate([s * t * directions for s in scales])

    best_m = x.max_index
    best = math.inf if mode == ModulusMode.RhoBar else -math.inf
    for m in _subspace_range(x):
        length = m + sampler.tail_width
        base = x.to_dense(length)
        moved = base[None, :] + TailSubspace(m).embed(tails, length)
        diffs = numpy.asarray(f.evaluate(moved)) - float(
            cast("float", f.evaluate(base))
        )
        if use_absolute:
            diffs = numpy.abs(diffs)
        if mode == ModulusMode.RhoBar:
            value = float(diffs.max())
            if value < best:
                best, best_m = value, m
        else:
            value = float(diffs.min())
            if value > best:
                best, best_m = value, m
    return best, best_m


def tail_modulus_fn(
    f: "FunctionDescriptor",
    x: "SparseSequence",
    t: "float",
    use_absolute: "bool" = False,
    mode: "ModulusMode" = ModulusMode.RhoBar,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "AsymptoticModulusResult":
    """
    rho_bar_f(t; x) = inf_m sup {f(x+h) - f(x) : h in H_m, |h| <= t} or
    delta_bar_f(t; x) = sup_m inf {f(x+h) - f(x) : h in H_m, |h| >= t},
    with |f(x+h) - f(x)| as integrand when use_absolute is set.
    Sampled values are one-sided: an upper bound for rho_bar, a lower
    bound for delta_bar.
    """
    _check_radius(t)
    if not f.convex and not use_absolute:
        logger.warning(
            f"{f.name} is not certified convex, the absolute integrand is used"
        )
        use_absolute = True
    value, m = _sampled_tail_modulus(f, x, t, mode, use_absolute, sampler)
    return AsymptoticModulusResult(
        t=t,
        value=value,
        mode=mode,
        at=x,
        subspace_index=m,
        analytic=False,
        bound_direction=BoundDirection.Upper
        if mode == ModulusMode.RhoBar
        else BoundDirection.Lower,
    )


def uniform_tail_modulus(
    f: "FunctionDescriptor",
    S: "Sequence[SparseSequence]",
    t: "float",
    mode: "ModulusMode" = ModulusMode.RhoBar,
    use_absolute: "bool" = False,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "AsymptoticModulusResult":
    """
    sup over S of rho_bar_f(t; x), or inf over S of delta_bar_f(t; x)
    """
    if len(S) == 0:
        raise AsymptoticModelException("Uniform moduli need a nonempty sample set")
    results = [tail_modulus_fn(f, x, t, use_absolute, mode, sampler) for x in S]
    if mode == ModulusMode.RhoBar:
        chosen = max(results, key=lambda r: r.value)
    else:
        chosen = min(results, key=lambda r: r.value)
    return chosen._replace(at=UNIFORM_LABEL)


def sample_unit_set(
    space: "SequenceSpace",
    count: "int",
    support: "int" = 4,
    seed: "int" = DEFAULT_SAMPLER.seed,
) -> "Sequence[SparseSequence]":
    """
    Unit vectors with support in {1..support}
    """
    raw = gaussian_points(count, support, seed, STREAM_POINTS)
    norm = space.norm()
    return [
        SparseSequence.from_dense(row / float(norm.evaluate(row))) for row in raw
    ]


def sample_radial_set(
    space: "SequenceSpace",
    count: "int",
    support: "int" = 4,
    seed: "int" = DEFAULT_SAMPLER.seed,
    radii: "Tuple[float, float]" = (0.5, 1.5),
) -> "Sequence[SparseSequence]":
    """
    Unit directions scaled to radii in the given range, keeping away
    from radius 1
    """
    units = sample_unit_set(space, count, support, seed)
    u = sobol_points(count, 1, seed, STREAM_TAIL)[:, 0]
    r = radii[0] + (radii[1] - radii[0]) * u
    r = numpy.where(numpy.abs(r - 1.0) < 0.05, r + 0.1, r)
    return [x.scaled(float(s)) for x, s in zip(units, r)]


class FlatnessReport(NamedTuple):
    """
    flat: rho_bar_f(t; x) vanished on the whole grid and sample set
    fit: power fit of the uniform curve when not flat
    curve: sup over S of rho_bar_f(t; x), per t
    """

    flat: "bool"
    fit: "Optional[PowerFit]"
    curve: "ModulusCurve"


def _uniform_curve(
    f: "FunctionDescriptor",
    S: "Sequence[SparseSequence]",
    t_grid: "Sequence[float]",
    use_absolute: "bool",
    sampler: "SamplerConfig",
) -> "ModulusCurve":
    values = [
        uniform_tail_modulus(f, S, t, ModulusMode.RhoBar, use_absolute, sampler).value
        for t in t_grid
    ]
    meta = dict(sampler.metadata())
    meta["function"] = f.name
    meta["model"] = TAIL_MODEL
    meta["sample_set_size"] = len(S)
    return ModulusCurve(
        parameter="t",
        t=numpy.asarray(t_grid, dtype=numpy.float64),
        values=numpy.asarray(values),
        bound_direction=BoundDirection.Upper,
        metadata=meta,
    )


def flatness_and_power(
    f: "FunctionDescriptor",
    S: "Sequence[SparseSequence]",
    t_grid: "Sequence[float]",
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "FlatnessReport":
    if len(S) == 0 or len(t_grid) == 0:
        raise AsymptoticModelException("Flatness checks need points and radii")
    if any(not (0.0 < t <= 1.0) for t in t_grid):
        raise AsymptoticModelException("Flatness radii must lie in (0, 1]")
    curve = _uniform_curve(f, S, t_grid, False, sampler)
    if bool(numpy.all(curve.values <= FLATNESS_TOLERANCE)):
        logger.info(f"{f.name} is asymptotically flat on the sample set")
        return FlatnessReport(flat=True, fit=None, curve=curve)
    return FlatnessReport(flat=False, fit=power_fit(curve), curve=curve)


def radial_function(
    profile: "GridFunction1D",
    norm: "NormDescriptor",
    convex: "bool" = False,
    name: "Optional[str]" = None,
) -> "FunctionDescriptor":
    """
    x -> profile(|x|), with the profile interpolated on its knots
    """

    def evaluate(x: "FloatArray") -> "Union[float, FloatArray]":
        return profile.evaluate(numpy.asarray(norm.evaluate(x)))

    return FunctionDescriptor(
        name=name if name is not None else f"radial[{norm.label}]",
        evaluate=evaluate,
        convex=convex,
        norm=norm,
        power=None,
    )


class EnvelopeDemoReport(NamedTuple):
    """
    f_curve, conv_curve: sup over S of rho_bar for f and for conv f
    f_fit, conv_fit: their power fits
    f_constant: max over the grid of rho_bar_f / t^p
    conv_constant: max over the grid of rho_bar_conv / t^p
    factor: allowed ratio between both constants
    passed: rho_bar_conv(t) <= factor * f_constant * t^p on the grid
    sample_set: the points of S
    """

    f_curve: "ModulusCurve"
    conv_curve: "ModulusCurve"
    f_fit: "PowerFit"
    conv_fit: "PowerFit"
    f_constant: "float"
    conv_constant: "float"
    factor: "float"
    passed: "bool"
    sample_set: "Sequence[SparseSequence]"


DEFAULT_DEMO_T_GRID: "Final[Tuple[float, ...]]" = tuple(
    float(t) for t in numpy.geomspace(0.02, 0.2, 8)
)


def envelope_preserves_smoothness_demo(
    phi: "GridFunction1D",
    p: "float",
    S: "Optional[Sequence[SparseSequence]]" = None,
    t_grid: "Sequence[float]" = DEFAULT_DEMO_T_GRID,
    factor: "float" = DEFAULT_ENVELOPE_FACTOR,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "EnvelopeDemoReport":
    """
    For f = phi(|x|_p) on the l_p model, conv f = psi(|x|_p) with psi the
    radial envelope of phi. Compares the uniform rho_bar curves of f and
    conv f over S.
    """
    if phi.knots.size >= 2 and phi.values[-1] < phi.values[-2] and int(
        numpy.argmin(phi.values)
    ) == phi.knots.size - 1:
        raise AsymptoticModelException(
            "The profile still decreases at the end of its grid, it looks unbounded below"
        )
    space = SequenceSpace(SpaceKind.Lp, p)
    norm = space.norm()
    if S is None:
        S = sample_radial_set(space, 10, seed=sampler.seed)
    psi = radial_envelope(phi)
    f = radial_function(phi, norm, convex=False, name="phi(|x|)")
    conv_f = radial_function(psi, norm, convex=True, name="psi(|x|)")

    f_curve = _uniform_curve(f, S, t_grid, True, sampler)
    conv_curve = _uniform_curve(conv_f, S, t_grid, False, sampler)
    t = f_curve.t
    f_constant = float((f_curve.values / t**p).max())
    conv_constant = float((conv_curve.values / t**p).max())
    passed = bool(
        numpy.all(conv_curve.values <= factor * f_constant * t**p * (1.0 + 1e-12))
    )
    if not passed:
        logger.error(
            f"conv f constant {conv_constant} exceeds {factor} x f constant {f_constant}"
        )
    return EnvelopeDemoReport(
        f_curve=f_curve,
        conv_curve=conv_curve,
        f_fit=power_fit(f_curve),
        conv_fit=power_fit(conv_curve),
        f_constant=f_constant,
        conv_constant=conv_constant,
        factor=factor,
        passed=passed,
        sample_set=list(S),
    )


class PolynomialTailReport(NamedTuple):
    """
    N: degree of the l_N model norm
    t: radii checked
    rho: closed form rho_bar values
    lower, upper: c_N t^N and C_N t^N
    middle_term_max: largest |P_{i,x}(h)| for h in a tail subspace, 0 < i < N
    passed: band holds and middle terms vanish
    """

    N: "int"
    t: "Sequence[float]"
    rho: "Sequence[float]"
    lower: "Sequence[float]"
    upper: "Sequence[float]"
    middle_term_max: "float"
    passed: "bool"


def polynomial_tail_constants(N: "int") -> "Tuple[float, float]":
    """
    (c_N, C_N) bounding rho_bar of a degree N polynomial norm by powers of t
    """
    alpha = 2.0 ** (1.0 / N - 1.0) / N
    beta = 1.0 / N
    return alpha / 2.0, 1.5 * beta


def polynomial_tail_bounds(
    N: "int",
    t_grid: "Sequence[float]",
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
    support: "int" = 2,
) -> "PolynomialTailReport":
    """
    Checks c_N t^N <= rho_bar(t) <= C_N t^N on the l_N model, and that
    the middle binomial terms P_{i,x}(h) vanish for h on a tail subspace
    """
    if N < 2 or N % 2 != 0:
        raise AsymptoticModelException(f"Polynomial norms need an even degree, got {N}")
    if any(not (0.0 < t <= 1.0) for t in t_grid):
        raise AsymptoticModelException("Radii must lie in (0, 1]")
    space = SequenceSpace(SpaceKind.Lp, float(N))
    lower_c, upper_c = polynomial_tail_constants(N)
    x0 = SparseSequence({1: 1.0})
    rho = [tail_rho_norm(space, x0, t).value for t in t_grid]
    lower = [lower_c * t**N for t in t_grid]
    upper = [upper_c * t**N for t in t_grid]
    band = all(lo <= r <= up for lo, r, up in zip(lower, rho, upper))

    form = SymmetricForm.power_sum(N, 2 * support)
    points = gaussian_points(8, support, sampler.seed, STREAM_POINTS)
    tails = gaussian_points(8, support, sampler.seed, STREAM_TAIL)
    middle = 0.0
    for head, tail in zip(points, tails):
        x = numpy.concatenate([head, numpy.zeros(support)])
        h = TailSubspace(support).embed(tail, 2 * support)[0]
        for term in homogeneous_terms(form, x):
            middle = max(middle, abs(term.evaluate(h)))
    passed = band and middle <= 1e-12
    return PolynomialTailReport(
        N=N,
        t=list(t_grid),
        rho=rho,
        lower=lower,
        upper=upper,
        middle_term_max=middle,
        passed=passed,
    )
