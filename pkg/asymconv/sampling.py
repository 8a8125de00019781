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
Deterministic samplers and derivative-free refinement shared by the
estimators: scrambled Sobol points, sphere directions, golden-section
line searches and a coordinate-wise polish built on top of them.
"""

from __future__ import absolute_import

import logging
import math
from typing import (
    NamedTuple,
    TYPE_CHECKING,
)

import numpy
from scipy.stats import norm as gaussian
from scipy.stats import qmc

if TYPE_CHECKING:
    from typing import (
        Callable,
        Tuple,
    )

    import numpy.typing as npt

    from typing_extensions import (
        Final,
    )

logger = logging.getLogger(__name__)

INV_PHI: "Final[float]" = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE: "Final[float]" = (3 - math.sqrt(5)) / 2  # 1 / phi^2

# Named streams, so independent draws never share a scrambling
STREAM_POINTS: "Final[int]" = 0
STREAM_DIRECTIONS: "Final[int]" = 1
STREAM_PARTNERS: "Final[int]" = 2
STREAM_TAIL: "Final[int]" = 3


def _stream_rng(seed: "int", stream: "int") -> "numpy.random.Generator":
    return numpy.random.default_rng([seed, stream])


def sobol_points(
    count: "int", dim: "int", seed: "int", stream: "int" = STREAM_POINTS
) -> "npt.NDArray[numpy.float64]":
    """
    First count points of a scrambled Sobol sequence in [0,1)^dim.
    Prefixes are nested: the first n points never depend on count.
    """
    if count <= 0:
        return numpy.empty((0, dim))
    engine = qmc.Sobol(d=dim, scramble=True, seed=_stream_rng(seed, stream))
    m = max(0, int(math.ceil(math.log2(count))))
    return numpy.asarray(engine.random_base2(m=m)[:count], dtype=numpy.float64)


def gaussian_points(
    count: "int", dim: "int", seed: "int", stream: "int" = STREAM_POINTS
) -> "npt.NDArray[numpy.float64]":
    u = numpy.clip(sobol_points(count, dim, seed, stream), 1e-12, 1.0 - 1e-12)
    return numpy.asarray(gaussian.ppf(u), dtype=numpy.float64)


def box_points(
    count: "int",
    dim: "int",
    seed: "int",
    radius: "float",
    stream: "int" = STREAM_POINTS,
) -> "npt.NDArray[numpy.float64]":
    return (2.0 * sobol_points(count, dim, seed, stream) - 1.0) * radius


def axis_directions(dim: "int") -> "npt.NDArray[numpy.float64]":
    """
    The 2*dim signed coordinate vectors, +e_1, -e_1, +e_2, ...
    """
    eye = numpy.eye(dim)
    return numpy.stack([eye, -eye], axis=1).reshape(2 * dim, dim)


def sphere_directions(
    normalize: "Callable[[npt.NDArray[numpy.float64]], npt.NDArray[numpy.float64]]",
    count: "int",
    dim: "int",
    seed: "int",
    stream: "int" = STREAM_DIRECTIONS,
    include_axes: "bool" = True,
) -> "npt.NDArray[numpy.float64]":
    """
    Unit vectors of a norm: the signed axes (when requested) followed by
    low-discrepancy Gaussian directions, all divided by their norm,
    which is computed by the normalize callable over the last axis.
    """
    raw = gaussian_points(count, dim, seed, stream)
    if include_axes:
        raw = numpy.concatenate([axis_directions(dim), raw], axis=0)
    lengths = normalize(raw)
    keep = lengths > 0
    return raw[keep] / lengths[keep][:, None]


def golden_section_search(
    f: "Callable[[float], float]", a: "float", b: "float", tol: "float" = 1e-5
) -> "Tuple[float, float]":
    """
    Golden-section search.

    Given a function f with a single local minimum in the interval [a,b],
    it returns the best evaluated abscissa and its value, after shrinking
    the bracket below tol. The midpoint of the bracket is also evaluated,
    so a flat objective returns the centre.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    x_best = 0.5 * (a + b)
    y_best = f(x_best)
    if h <= tol:
        return x_best, y_best

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    for x, y in ((c, yc), (d, yd)):
        if y < y_best:
            x_best, y_best = x, y
    return x_best, y_best


class PolishResult(NamedTuple):
    """
    point: best parameter vector found
    value: objective value at point
    line_searches: golden-section line searches spent
    improvements: how many of them moved the point
    """

    point: "npt.NDArray[numpy.float64]"
    value: "float"
    line_searches: "int"
    improvements: "int"


def coordinate_polish(
    objective: "Callable[[npt.NDArray[numpy.float64]], float]",
    start: "npt.NDArray[numpy.float64]",
    iterations: "int",
    radius: "float" = 0.25,
    shrink: "float" = 0.5,
    min_radius: "float" = 1e-12,
    tol_ratio: "float" = 1e-3,
) -> "PolishResult":
    """
    Minimizes objective by cycling golden-section searches over each
    coordinate in [-radius, radius]. The radius shrinks after every
    cycle without improvement. Moves are only accepted when they lower
    the value, so the result is never worse than the start.
    """
    point = numpy.array(start, dtype=numpy.float64)
    value = float(objective(point))
    line_searches = 0
    improvements = 0
    r = radius
    while line_searches < iterations and r > min_radius:
        improved = False
        for i in range(point.shape[0]):
            if line_searches >= iterations:
                break

            def along(s: "float") -> "float":
                moved = point.copy()
                moved[i] += s
                return float(objective(moved))

            step, step_value = golden_section_search(along, -r, r, tol=r * tol_ratio)
            line_searches += 1
            if step_value < value:
                point[i] += step
                value = step_value
                improved = True
                improvements += 1
        if not improved:
            r *= shrink

    logger.debug(
        f"Polish finished after {line_searches} line searches ({improvements} improvements), value {value}"
    )
    return PolishResult(
        point=point,
        value=value,
        line_searches=line_searches,
        improvements=improvements,
    )
