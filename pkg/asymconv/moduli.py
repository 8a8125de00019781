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
Moduli of uniform convexity and smoothness of finite dimensional norms,
modulus of convexity of convex functions, p-uniform convexity constants
and power-type fits of modulus curves.

Every estimate comes from sampling plus a local polish, so it only
certifies one side: infima are upper bounds, suprema lower bounds.
"""

from __future__ import absolute_import

from dataclasses import (
    dataclass,
    field,
)
import csv
import io
import logging
import math
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy
from scipy.optimize import brentq

if TYPE_CHECKING:
    from typing import (
        Any,
        Callable,
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
    Pair: TypeAlias = Tuple[FloatArray, FloatArray]

    from .normcore import (
        FunctionDescriptor,
        NormDescriptor,
        SymmetricForm,
    )

from .common import (
    AbstractAsymConvException,
    BoundDirection,
    DEFAULT_SAMPLER,
    SamplerConfig,
    StrDocEnum,
)
from .normcore import (
    binomial_expand,
    l2_norm,
)
from .sampling import (
    STREAM_DIRECTIONS,
    STREAM_PARTNERS,
    STREAM_POINTS,
    box_points,
    coordinate_polish,
    gaussian_points,
    sphere_directions,
)
from .utils.misc import atomic_write_text

logger = logging.getLogger(__name__)

CHORD_BISECTION_STEPS: "Final[int]" = 60
CHORD_ANTIPODE_TOLERANCE: "Final[float]" = 1e-12
CONVEXITY_GAP_TOLERANCE: "Final[float]" = 1e-9
PUC_INEQUALITY_TOLERANCE: "Final[float]" = 1e-9
FLAT_DENOMINATOR_RTOL: "Final[float]" = 1e-12
DEFAULT_PUC_SAMPLES: "Final[int]" = 100000
MIN_FIT_SAMPLES: "Final[int]" = 4


class ModuliException(AbstractAsymConvException):
    pass


class NonConvexFunctionException(ModuliException):
    def __init__(self, message: "str", witness: "Pair", gap: "float"):
        super().__init__(message)
        self.witness = witness
        self.gap = gap


class RhoVariant(StrDocEnum):
    PaperLiteral = (
        "paper_literal",
        "Supremum restricted to unit pairs with |x - y| = tau",
    )
    Standard = ("standard", "Lindenstrauss modulus, unconstrained unit pairs")


@dataclass(frozen=True, eq=False)
class ModulusCurve:
    """
    Sampled modulus values over a parameter grid inside (0, 2]
    """

    parameter: "str"
    t: "FloatArray"
    values: "FloatArray"
    bound_direction: "BoundDirection"
    metadata: "Mapping[str, Any]" = field(default_factory=dict)

    def __post_init__(self) -> "None":
        t = numpy.asarray(self.t, dtype=numpy.float64).reshape(-1)
        values = numpy.asarray(self.values, dtype=numpy.float64).reshape(-1)
        if t.shape != values.shape:
            raise ModuliException(f"{t.size} parameters but {values.size} values")
        if numpy.any(numpy.diff(t) <= 0):
            raise ModuliException("Curve parameters must be strictly increasing")
        if t.size > 0 and (t[0] <= 0.0 or t[-1] > 2.0):
            raise ModuliException("Curve parameters must lie in (0, 2]")
        if not numpy.all(numpy.isfinite(values)):
            raise ModuliException("Curve values must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)

    def samples(self) -> "Sequence[Tuple[float, float]]":
        return list(zip(self.t.tolist(), self.values.tolist()))

    def to_csv(self) -> "str":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "value"])
        for t, v in self.samples():
            writer.writerow([repr(t), repr(v)])
        return buf.getvalue()

    def sidecar(self) -> "Mapping[str, Any]":
        return {
            "parameter": self.parameter,
            "bound_direction": self.bound_direction.value,
            "metadata": dict(self.metadata),
        }

    def _marshall(self) -> "Mapping[str, Any]":
        return self.to_json()

    def to_json(self) -> "Mapping[str, Any]":
        doc = dict(self.sidecar())
        doc["samples"] = [list(s) for s in self.samples()]
        return doc

    @classmethod
    def from_json(cls, doc: "Mapping[str, Any]") -> "ModulusCurve":
        samples = numpy.asarray(doc["samples"], dtype=numpy.float64).reshape(-1, 2)
        return cls(
            parameter=doc["parameter"],
            t=samples[:, 0],
            values=samples[:, 1],
            bound_direction=BoundDirection(doc["bound_direction"]),
            metadata=doc.get("metadata", {}),
        )

    def save_csv(self, path: "str") -> "None":
        atomic_write_text(path, self.to_csv())


def monotone_violation(curve: "ModulusCurve") -> "float":
    """
    Largest decrease along the curve, zero for nondecreasing curves
    """
    if curve.values.size < 2:
        return 0.0
    running = numpy.maximum.accumulate(curve.values)
    return float(max(0.0, (running[:-1] - curve.values[1:]).max()))


class ModulusEstimate(NamedTuple):
    """
    value: the empirical infimum or supremum
    witness: the pair (x, y) attaining it
    bound_direction: upper for infima, lower for suprema
    samples: pairs evaluated on the sampling stage
    metadata: seed and sampler sizes
    """

    value: "float"
    witness: "Pair"
    bound_direction: "BoundDirection"
    samples: "int"
    metadata: "Mapping[str, Any]"


class DeltaFnResult(NamedTuple):
    """
    value: empirical infimum of the midpoint gap over pairs at distance t
    witness: the pair (x, y) attaining it
    bound_direction: always upper
    power: p when f is a p-th power of a norm
    normalized: value / t^p, positive exactly when f is p-uniformly convex
    statement: human readable reading of normalized
    """

    value: "float"
    witness: "Pair"
    bound_direction: "BoundDirection"
    power: "Optional[float]"
    normalized: "Optional[float]"
    statement: "Optional[str]"


class PucResult(NamedTuple):
    """
    p: the exponent
    constant: estimated best constant K, infinite when not p-uniformly convex
    witness: pair (x, y) attaining the estimate, or a flat pair
    bound_direction: lower, the true best constant can only be larger
    uniformly_convex: False when a flat pair was found
    samples: pairs evaluated on the sampling stage
    """

    p: "float"
    constant: "float"
    witness: "Pair"
    bound_direction: "BoundDirection"
    uniformly_convex: "bool"
    samples: "int"


class PucCheck(NamedTuple):
    passed: "bool"
    witness: "Optional[Pair]"
    violation: "float"
    samples: "int"


class PowerFit(NamedTuple):
    """
    exponent: least squares slope on log-log samples
    constant: min over the window of value / t^exponent
    residual: largest deviation of log value from the fitted line
    window: (t_min, t_max)
    """

    exponent: "float"
    constant: "float"
    residual: "float"
    window: "Tuple[float, float]"


def _check_radius(value: "float", label: "str") -> "None":
    if not (0.0 < value <= 2.0):
        raise ModuliException(f"{label} must lie in (0, 2], got {value}")


def _resolve_dimension(norm: "NormDescriptor", dimension: "Optional[int]") -> "int":
    if norm.dimension is not None:
        if dimension is not None and dimension != norm.dimension:
            raise ModuliException(
                f"Norm on R^{norm.dimension} asked for dimension {dimension}"
            )
        return norm.dimension
    if dimension is None:
        raise ModuliException("Sequence space norms need an explicit dimension")
    return dimension


def _metadata(
    norm: "NormDescriptor", dimension: "int", sampler: "SamplerConfig"
) -> "Mapping[str, Any]":
    meta = dict(sampler.metadata())
    meta["norm"] = norm.label
    meta["dimension"] = dimension
    return meta


def _normalized_rows(norm: "NormDescriptor", raw: "FloatArray") -> "FloatArray":
    lengths = numpy.asarray(norm.evaluate(raw))
    return raw / numpy.where(lengths > 0, lengths, 1.0)[..., None]


def _orthogonal_partners(x: "FloatArray", u: "FloatArray") -> "FloatArray":
    """
    Removes the Euclidean component of u along x, so that cos(s) x + sin(s) u
    never vanishes on [0, pi]
    """
    proj = numpy.sum(u * x, axis=-1) / numpy.sum(x * x, axis=-1)
    return cast("FloatArray", u - proj[..., None] * x)


def _chord_point(
    norm: "NormDescriptor", x: "FloatArray", u: "FloatArray", theta: "FloatArray"
) -> "FloatArray":
    raw = numpy.cos(theta)[..., None] * x + numpy.sin(theta)[..., None] * u
    return _normalized_rows(norm, raw)


def _chord_partners(
    norm: "NormDescriptor", x: "FloatArray", u: "FloatArray", distance: "float"
) -> "FloatArray":
    """
    Unit vectors y on the arc from x to -x spanned by u with |x - y| = distance,
    by bisection on the arc parameter over the whole batch
    """
    lo = numpy.zeros(x.shape[0])
    hi = numpy.full(x.shape[0], math.pi)
    for _ in range(CHORD_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        dist = numpy.asarray(norm.evaluate(x - _chord_point(norm, x, u, mid)))
        below = dist < distance
        lo = numpy.where(below, mid, lo)
        hi = numpy.where(below, hi, mid)
    return _chord_point(norm, x, u, hi)


def _chord_pair(
    norm: "NormDescriptor", params: "FloatArray", distance: "float"
) -> "Optional[Pair]":
    """
    Pair at exact distance from unconstrained polish parameters (x_raw, u_raw)
    """
    d = params.shape[0] // 2
    x_raw = params[:d]
    x_len = float(norm.evaluate(x_raw))
    if x_len == 0.0:
        return None
    x = x_raw / x_len
    u = _orthogonal_partners(x[None, :], params[None, d:])[0]
    if float(numpy.linalg.norm(u)) < 1e-12:
        return None

    def gap(theta: "float") -> "float":
        y = _chord_point(norm, x[None, :], u[None, :], numpy.array([theta]))[0]
        return float(norm.evaluate(x - y)) - distance

    far = gap(math.pi)
    if far >= -CHORD_ANTIPODE_TOLERANCE * max(1.0, distance):
        theta = math.pi
    else:
        theta = brentq(gap, 0.0, math.pi, xtol=1e-15)
    y = _chord_point(norm, x[None, :], u[None, :], numpy.array([theta]))[0]
    return x, y


def _sample_chord_pairs(
    norm: "NormDescriptor", dimension: "int", distance: "float", sampler: "SamplerConfig"
) -> "Tuple[FloatArray, FloatArray, FloatArray]":
    x = sphere_directions(norm.evaluate, sampler.samples, dimension, sampler.seed)
    u_raw = gaussian_points(x.shape[0], dimension, sampler.seed, STREAM_PARTNERS)
    u = _orthogonal_partners(x, u_raw)
    keep = numpy.linalg.norm(u, axis=-1) > 1e-12
    x = x[keep]
    u = u[keep]
    y = _chord_partners(norm, x, u, distance)
    return x, u, y


def _polish_best(
    objective: "Callable[[FloatArray], float]",
    starts: "FloatArray",
    order: "FloatArray",
    sampler: "SamplerConfig",
) -> "Tuple[Optional[FloatArray], float]":
    """
    Polishes the refine_top best starts, returning the best polished
    parameters and their objective value
    """
    best_params = None
    best_value = math.inf
    if sampler.refine_iters <= 0:
        return best_params, best_value
    for idx in order[: sampler.refine_top]:
        polished = coordinate_polish(objective, starts[idx], sampler.refine_iters)
        if polished.value < best_value:
            best_value = polished.value
            best_params = polished.point
    return best_params, best_value


def delta_norm(
    norm: "NormDescriptor",
    dimension: "Optional[int]",
    eps: "float",
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "ModulusEstimate":
    """
    delta(eps) = inf {1 - |x + y|/2 : |x| = |y| = 1, |x - y| = eps}
    """
    _check_radius(eps, "eps")
    d = _resolve_dimension(norm, dimension)
    if d < 2:
        raise ModuliException("Moduli of norms need dimension at least 2")

    x, u, y = _sample_chord_pairs(norm, d, eps, sampler)
    values = 1.0 - 0.5 * numpy.asarray(norm.evaluate(x + y))
    order = numpy.argsort(values, kind="stable")
    best = int(order[0])
    value = float(values[best])
    witness = (x[best], y[best])
    logger.debug(f"delta({eps}) sampling stage: {value} over {x.shape[0]} pairs")

    def objective(params: "FloatArray") -> "float":
        pair = _chord_pair(norm, params, eps)
        if pair is None:
            return math.inf
        return 1.0 - 0.5 * float(norm.evaluate(pair[0] + pair[1]))

    starts = numpy.concatenate([x, u], axis=1)
    params, polished = _polish_best(objective, starts, order, sampler)
    if params is not None and polished < value:
        pair = _chord_pair(norm, params, eps)
        assert pair is not None
        logger.debug(f"delta({eps}) refined from {value} to {polished}")
        value = polished
        witness = pair

    return ModulusEstimate(
        value=value,
        witness=witness,
        bound_direction=BoundDirection.Upper,
        samples=int(x.shape[0]),
        metadata=_metadata(norm, d, sampler),
    )


def _rho_values(
    norm: "NormDescriptor", x: "FloatArray", y: "FloatArray", tau: "float"
) -> "FloatArray":
    return cast(
        "FloatArray",
        0.5
        * (
            numpy.asarray(norm.evaluate(x + tau * y))
            + numpy.asarray(norm.evaluate(x - tau * y))
        )
        - 1.0,
    )


def rho_norm(
    norm: "NormDescriptor",
    dimension: "Optional[int]",
    tau: "float",
    variant: "RhoVariant" = RhoVariant.PaperLiteral,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "ModulusEstimate":
    """
    rho(tau) = sup {(|x + tau y| + |x - tau y|)/2 - 1 : |x| = |y| = 1},
    restricted to |x - y| = tau in the paper_literal variant
    """
    _check_radius(tau, "tau")
    d = _resolve_dimension(norm, dimension)
    if d < 2:
        raise ModuliException("Moduli of norms need dimension at least 2")

    objective: "Callable[[FloatArray], float]"
    if variant == RhoVariant.PaperLiteral:
        x, u, y = _sample_chord_pairs(norm, d, tau, sampler)
        starts = numpy.concatenate([x, u], axis=1)

        def objective(params: "FloatArray") -> "float":
            pair = _chord_pair(norm, params, tau)
            if pair is None:
                return math.inf
            return -float(_rho_values(norm, pair[0][None], pair[1][None], tau)[0])

        def to_pair(params: "FloatArray") -> "Pair":
            pair = _chord_pair(norm, params, tau)
            assert pair is not None
            return pair

    else:
        axes = sphere_directions(norm.evaluate, 0, d, sampler.seed)
        ax_x = numpy.repeat(axes, axes.shape[0], axis=0)
        ax_y = numpy.tile(axes, (axes.shape[0], 1))
        x = numpy.concatenate(
            [
                ax_x,
                sphere_directions(
                    norm.evaluate,
                    sampler.samples,
                    d,
                    sampler.seed,
                    STREAM_DIRECTIONS,
                    include_axes=False,
                ),
            ]
        )
        y = numpy.concatenate(
            [
                ax_y,
                sphere_directions(
                    norm.evaluate,
                    sampler.samples,
                    d,
                    sampler.seed,
                    STREAM_PARTNERS,
                    include_axes=False,
                ),
            ]
        )
        starts = numpy.concatenate([x, y], axis=1)

        def unit_pair(params: "FloatArray") -> "Optional[Pair]":
            xs = params[:d]
            ys = params[d:]
            lx = float(norm.evaluate(xs))
            ly = float(norm.evaluate(ys))
            if lx == 0.0 or ly == 0.0:
                return None
            return xs / lx, ys / ly

        def objective(params: "FloatArray") -> "float":
            pair = unit_pair(params)
            if pair is None:
                return math.inf
            return -float(_rho_values(norm, pair[0][None], pair[1][None], tau)[0])

        def to_pair(params: "FloatArray") -> "Pair":
            pair = unit_pair(params)
            assert pair is not None
            return pair

    values = _rho_values(norm, x, y, tau)
    bound = tau * (1.0 + 1e-12) + 1e-15
    if numpy.any(values > bound):
        bad = int(numpy.argmax(values))
        raise ModuliException(
            f"rho({tau}) sample {values[bad]} exceeds tau at x={x[bad].tolist()}, y={y[bad].tolist()}"
        )
    order = numpy.argsort(-values, kind="stable")
    best = int(order[0])
    value = float(values[best])
    witness = (x[best], y[best])
    logger.debug(f"rho({tau}, {variant.value}) sampling stage: {value}")

    params, polished = _polish_best(objective, starts, order, sampler)
    if params is not None and -polished > value:
        if -polished > bound:
            raise ModuliException(f"rho({tau}) refinement {-polished} exceeds tau")
        logger.debug(f"rho({tau}) refined from {value} to {-polished}")
        value = -polished
        witness = to_pair(params)

    meta = dict(_metadata(norm, d, sampler))
    meta["variant"] = variant.value
    return ModulusEstimate(
        value=value,
        witness=witness,
        bound_direction=BoundDirection.Lower,
        samples=int(x.shape[0]),
        metadata=meta,
    )


def _reference_norm(f: "FunctionDescriptor", dimension: "int") -> "NormDescriptor":
    if f.norm is not None:
        return f.norm
    return l2_norm(dimension)


def delta_fn(
    f: "FunctionDescriptor",
    t: "float",
    dimension: "Optional[int]" = None,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "DeltaFnResult":
    """
    delta_f(t) = inf {f(x)/2 + f(y)/2 - f((x+y)/2) : |x - y| = t},
    sampled as x, y = z +- t h / 2 with z in a box (z = 0 first) and
    h a unit vector
    """
    if t <= 0:
        raise ModuliException(f"t must be positive, got {t}")
    if dimension is None:
        if f.norm is None or f.norm.dimension is None:
            raise ModuliException("The dimension of the function domain is unknown")
        dimension = f.norm.dimension
    d = dimension
    ref = _reference_norm(f, d)

    h = sphere_directions(ref.evaluate, sampler.samples, d, sampler.seed)
    z = numpy.concatenate(
        [
            numpy.zeros((1, d)),
            box_points(h.shape[0] - 1, d, sampler.seed, sampler.radius, STREAM_POINTS),
        ]
    )

    def gaps(zs: "FloatArray", hs: "FloatArray") -> "FloatArray":
        half = 0.5 * t * hs
        return cast(
            "FloatArray",
            0.5 * numpy.asarray(f.evaluate(zs + half))
            + 0.5 * numpy.asarray(f.evaluate(zs - half))
            - numpy.asarray(f.evaluate(zs)),
        )

    values = gaps(z, h)
    order = numpy.argsort(values, kind="stable")
    best = int(order[0])
    value = float(values[best])
    witness = (z[best] + 0.5 * t * h[best], z[best] - 0.5 * t * h[best])

    def objective(params: "FloatArray") -> "float":
        hv = params[d:]
        length = float(ref.evaluate(hv))
        if length == 0.0:
            return math.inf
        return float(gaps(params[None, :d], (hv / length)[None, :])[0])

    params, polished = _polish_best(
        objective, numpy.concatenate([z, h], axis=1), order, sampler
    )
    if params is not None and polished < value:
        hv = params[d:] / float(ref.evaluate(params[d:]))
        value = polished
        witness = (params[:d] + 0.5 * t * hv, params[:d] - 0.5 * t * hv)

    scale = max(1.0, float(numpy.abs(f.evaluate(witness[0]))))
    if value < -CONVEXITY_GAP_TOLERANCE * scale:
        logger.error(
            f"Negative midpoint gap {value} for {f.name} at x={witness[0].tolist()}, y={witness[1].tolist()}"
        )
        raise NonConvexFunctionException(
            f"{f.name} is not convex: midpoint gap {value}", witness, value
        )

    normalized = None
    statement = None
    if f.power is not None:
        normalized = value / t**f.power
        statement = (
            f"{f.name} is {f.power:g}-uniformly convex iff delta_f(t)/t^{f.power:g} > 0; "
            f"sampled value {normalized}"
        )
    return DeltaFnResult(
        value=value,
        witness=witness,
        bound_direction=BoundDirection.Upper,
        power=f.power,
        normalized=normalized,
        statement=statement,
    )


def _puc_ratio_parts(
    norm: "NormDescriptor", x: "FloatArray", y: "FloatArray", p: "float"
) -> "Tuple[FloatArray, FloatArray, FloatArray]":
    plus = numpy.asarray(norm.evaluate(x + y)) ** p
    minus = numpy.asarray(norm.evaluate(x - y)) ** p
    numerator = 2.0 * numpy.asarray(norm.evaluate(y)) ** p
    denominator = plus + minus - 2.0 * numpy.asarray(norm.evaluate(x)) ** p
    return numerator, denominator, plus + minus


def puc_constant(
    norm: "NormDescriptor",
    p: "float",
    dimension: "Optional[int]" = None,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "PucResult":
    """
    Best constant K in 2|x|^p + (2/K)|y|^p <= |x+y|^p + |x-y|^p, estimated
    as the supremum of 2|y|^p / (|x+y|^p + |x-y|^p - 2|x|^p). A pair with
    vanishing denominator means the norm is not p-uniformly convex.
    """
    if p <= 1:
        raise ModuliException(f"p-uniform convexity needs p > 1, got {p}")
    d = _resolve_dimension(norm, dimension)

    eye = numpy.eye(d)
    pairs_i, pairs_j = numpy.triu_indices(d, k=1)
    flat_x = 0.5 * (eye[pairs_i] + eye[pairs_j])
    flat_y = 0.5 * (eye[pairs_i] - eye[pairs_j])
    y = sphere_directions(norm.evaluate, sampler.samples, d, sampler.seed)
    x = numpy.concatenate(
        [
            numpy.zeros((1, d)),
            box_points(y.shape[0] - 1, d, sampler.seed, sampler.radius, STREAM_POINTS),
        ]
    )
    x = numpy.concatenate([x, flat_x])
    y = numpy.concatenate([y, flat_y])

    numerator, denominator, scale = _puc_ratio_parts(norm, x, y, p)
    flat = numpy.flatnonzero(denominator <= FLAT_DENOMINATOR_RTOL * scale)
    if flat.size > 0:
        k = int(flat[0])
        logger.info(
            f"Norm {norm.label} not {p:g}-uniformly convex: flat pair x={x[k].tolist()}, y={y[k].tolist()}"
        )
        return PucResult(
            p=p,
            constant=math.inf,
            witness=(x[k], y[k]),
            bound_direction=BoundDirection.Lower,
            uniformly_convex=False,
            samples=int(x.shape[0]),
        )

    ratios = numerator / denominator
    # x = 0 gives ratio 1
    if not ratios[0] >= 1.0 - 1e-12:
        raise ModuliException(f"Ratio {ratios[0]} at x = 0 should be 1")
    order = numpy.argsort(-ratios, kind="stable")
    best = int(order[0])
    constant = float(ratios[best])
    witness = (x[best], y[best])

    def objective(params: "FloatArray") -> "float":
        yv = params[d:]
        length = float(norm.evaluate(yv))
        if length == 0.0:
            return math.inf
        num, den, sc = _puc_ratio_parts(norm, params[None, :d], (yv / length)[None, :], p)
        if den[0] <= FLAT_DENOMINATOR_RTOL * sc[0]:
            return math.inf
        return -float(num[0] / den[0])

    params, polished = _polish_best(
        objective, numpy.concatenate([x, y], axis=1), order, sampler
    )
    if params is not None and -polished > constant:
        yv = params[d:] / float(norm.evaluate(params[d:]))
        constant = -polished
        witness = (params[:d], yv)

    return PucResult(
        p=p,
        constant=max(constant, 1.0),
        witness=witness,
        bound_direction=BoundDirection.Lower,
        uniformly_convex=True,
        samples=int(x.shape[0]),
    )


def verify_puc(
    norm: "NormDescriptor",
    p: "float",
    K: "float",
    sample_count: "int" = DEFAULT_PUC_SAMPLES,
    seed: "int" = DEFAULT_SAMPLER.seed,
    dimension: "Optional[int]" = None,
    radius: "float" = DEFAULT_SAMPLER.radius,
) -> "PucCheck":
    """
    Checks 2|x|^p + (2/K)|y|^p <= |x+y|^p + |x-y|^p on sampled pairs,
    the x = 0 block first, and returns the first violation found
    """
    if K <= 0:
        raise ModuliException(f"K must be positive, got {K}")
    d = _resolve_dimension(norm, dimension)
    zero_block = max(1, sample_count // 16)
    y = numpy.concatenate(
        [
            sphere_directions(norm.evaluate, zero_block, d, seed, STREAM_DIRECTIONS)[
                :zero_block
            ],
            box_points(sample_count - zero_block, d, seed, radius, STREAM_PARTNERS),
        ]
    )
    x = numpy.concatenate(
        [
            numpy.zeros((zero_block, d)),
            box_points(sample_count - zero_block, d, seed, radius, STREAM_POINTS),
        ]
    )
    lhs = (
        2.0 * numpy.asarray(norm.evaluate(x)) ** p
        + (2.0 / K) * numpy.asarray(norm.evaluate(y)) ** p
    )
    rhs = (
        numpy.asarray(norm.evaluate(x + y)) ** p
        + numpy.asarray(norm.evaluate(x - y)) ** p
    )
    excess = lhs - rhs - PUC_INEQUALITY_TOLERANCE * numpy.maximum(1.0, rhs)
    bad = numpy.flatnonzero(excess > 0)
    if bad.size > 0:
        k = int(bad[0])
        logger.info(
            f"Inequality with K={K} violated by {lhs[k] - rhs[k]} at x={x[k].tolist()}, y={y[k].tolist()}"
        )
        return PucCheck(
            passed=False,
            witness=(x[k], y[k]),
            violation=float(lhs[k] - rhs[k]),
            samples=int(x.shape[0]),
        )
    return PucCheck(
        passed=True,
        witness=None,
        violation=float((lhs - rhs).max()),
        samples=int(x.shape[0]),
    )


def power_fit(
    curve: "ModulusCurve", window: "Optional[Tuple[float, float]]" = None
) -> "PowerFit":
    if window is None:
        window = (float(curve.t[0]), float(curve.t[-1]))
    mask = (curve.t >= window[0]) & (curve.t <= window[1])
    t = curve.t[mask]
    values = curve.values[mask]
    if t.size < MIN_FIT_SAMPLES:
        raise ModuliException(
            f"Power fits need {MIN_FIT_SAMPLES} samples in the window, got {t.size}"
        )
    if numpy.any(values <= 0):
        raise ModuliException("Power fits need positive values in the window")
    log_t = numpy.log(t)
    log_v = numpy.log(values)
    slope, intercept = numpy.polyfit(log_t, log_v, 1)
    residual = float(numpy.abs(log_v - (slope * log_t + intercept)).max())
    return PowerFit(
        exponent=float(slope),
        constant=float((values / t**slope).min()),
        residual=residual,
        window=(float(window[0]), float(window[1])),
    )


def delta_curve(
    norm: "NormDescriptor",
    dimension: "Optional[int]",
    eps_grid: "Sequence[float]",
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "ModulusCurve":
    d = _resolve_dimension(norm, dimension)
    values = [delta_norm(norm, d, eps, sampler).value for eps in eps_grid]
    return ModulusCurve(
        parameter="eps",
        t=numpy.asarray(eps_grid),
        values=numpy.asarray(values),
        bound_direction=BoundDirection.Upper,
        metadata=_metadata(norm, d, sampler),
    )


def rho_curve(
    norm: "NormDescriptor",
    dimension: "Optional[int]",
    tau_grid: "Sequence[float]",
    variant: "RhoVariant" = RhoVariant.PaperLiteral,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
) -> "ModulusCurve":
    d = _resolve_dimension(norm, dimension)
    values = [rho_norm(norm, d, tau, variant, sampler).value for tau in tau_grid]
    meta = dict(_metadata(norm, d, sampler))
    meta["variant"] = variant.value
    return ModulusCurve(
        parameter="tau",
        t=numpy.asarray(tau_grid),
        values=numpy.asarray(values),
        bound_direction=BoundDirection.Lower,
        metadata=meta,
    )


def gap_identity_error(
    form: "SymmetricForm", pairs: "Sequence[Pair]"
) -> "float":
    """
    Largest relative deviation from P(x+h) + P(x-h) = 2 (c_0 + c_2 + ... + c_N)
    with c_i the binomial coefficients of P(x+th)
    """
    worst = 0.0
    for x, h in pairs:
        coeffs = binomial_expand(form, x, h)
        lhs = cast("float", form.diagonal(numpy.asarray(x) + numpy.asarray(h))) + cast(
            "float", form.diagonal(numpy.asarray(x) - numpy.asarray(h))
        )
        rhs = 2.0 * sum(coeffs[0::2])
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst
