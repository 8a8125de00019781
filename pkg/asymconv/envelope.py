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
Convex envelopes of sampled functions.

One dimensional envelopes come from the lower convex hull of the graph,
two dimensional ones from a discrete biconjugation done as two passes of
one dimensional transforms. A linear program over the grid gives
pointwise envelope values together with a Caratheodory combination.
"""

from __future__ import absolute_import

import csv
from dataclasses import dataclass
import io
import logging
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy
from scipy.interpolate import RegularGridInterpolator

if TYPE_CHECKING:
    from typing import (
        Any,
        Callable,
        List,
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
    GridFunction: TypeAlias = Union["GridFunction1D", "GridFunction2D"]

from .common import (
    AbstractAsymConvException,
    BoundDirection,
)
from .simplex import (
    LPStatus,
    solve_standard_form,
)
from .utils.misc import atomic_write_text

logger = logging.getLogger(__name__)

HULL_CROSS_TOLERANCE: "Final[float]" = 1e-12
DEFAULT_GRID_KNOTS: "Final[int]" = 801
COMBINATION_TOLERANCE: "Final[float]" = 1e-9


class EnvelopeException(AbstractAsymConvException):
    pass


class EnvelopeInfeasibleException(EnvelopeException):
    pass


def _strict_knots(values: "npt.ArrayLike", label: "str") -> "FloatArray":
    knots = numpy.asarray(values, dtype=numpy.float64).reshape(-1)
    if knots.size == 0:
        raise EnvelopeException(f"Empty {label} grid")
    if not numpy.all(numpy.isfinite(knots)):
        raise EnvelopeException(f"Non finite {label} knots")
    if numpy.any(numpy.diff(knots) <= 0):
        raise EnvelopeException(f"{label} knots are not strictly increasing")
    return knots


@dataclass(frozen=True, eq=False)
class GridFunction1D:
    knots: "FloatArray"
    values: "FloatArray"

    def __post_init__(self) -> "None":
        knots = _strict_knots(self.knots, "x")
        values = numpy.asarray(self.values, dtype=numpy.float64).reshape(-1)
        if values.shape != knots.shape:
            raise EnvelopeException(
                f"{knots.size} knots but {values.size} values"
            )
        if not numpy.all(numpy.isfinite(values)):
            raise EnvelopeException("Grid functions take finite values")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls,
        fn: "Callable[[FloatArray], FloatArray]",
        lower: "float",
        upper: "float",
        count: "int" = DEFAULT_GRID_KNOTS,
    ) -> "GridFunction1D":
        knots = numpy.linspace(lower, upper, count)
        return cls(knots, numpy.asarray(fn(knots), dtype=numpy.float64))

    @property
    def spacing(self) -> "float":
        return float(numpy.diff(self.knots).max(initial=0.0))

    def secant_slopes(self) -> "FloatArray":
        return cast("FloatArray", numpy.diff(self.values) / numpy.diff(self.knots))

    def evaluate(self, x: "npt.ArrayLike") -> "Union[float, FloatArray]":
        """
        Piecewise linear interpolation, only inside the knot range
        """
        arr = numpy.asarray(x, dtype=numpy.float64)
        if numpy.any(arr < self.knots[0]) or numpy.any(arr > self.knots[-1]):
            raise EnvelopeException(
                f"Evaluation outside [{self.knots[0]}, {self.knots[-1]}]"
            )
        result = numpy.interp(arr, self.knots, self.values)
        if arr.ndim == 0:
            return float(result)
        return result

    def to_csv(self) -> "str":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, v in zip(self.knots, self.values):
            writer.writerow([repr(float(x)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, content: "str") -> "GridFunction1D":
        rows = list(csv.reader(io.StringIO(content)))
        if len(rows) == 0 or rows[0] != ["x", "value"]:
            raise EnvelopeException("1D grid CSV must start with the header x,value")
        data = numpy.array([[float(c) for c in row] for row in rows[1:] if row])
        return cls(data[:, 0], data[:, 1])

    def _marshall(self) -> "Mapping[str, Any]":
        return self.to_json()

    def to_json(self) -> "Mapping[str, Any]":
        return {"knots": self.knots.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, doc: "Mapping[str, Any]") -> "GridFunction1D":
        return cls(numpy.asarray(doc["knots"]), numpy.asarray(doc["values"]))

    def save_csv(self, path: "str") -> "None":
        atomic_write_text(path, self.to_csv())


@dataclass(frozen=True, eq=False)
class GridFunction2D:
    """
    values[i, j] is the value at (x_knots[i], y_knots[j])
    """

    x_knots: "FloatArray"
    y_knots: "FloatArray"
    values: "FloatArray"

    def __post_init__(self) -> "None":
        xk = _strict_knots(self.x_knots, "x")
        yk = _strict_knots(self.y_knots, "y")
        values = numpy.asarray(self.values, dtype=numpy.float64)
        if values.shape != (xk.size, yk.size):
            raise EnvelopeException(
                f"Values of shape {values.shape} on a {xk.size}x{yk.size} grid"
            )
        if not numpy.all(numpy.isfinite(values)):
            raise EnvelopeException("Grid functions take finite values")
        object.__setattr__(self, "x_knots", xk)
        object.__setattr__(self, "y_knots", yk)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls,
        fn: "Callable[[FloatArray, FloatArray], FloatArray]",
        x_knots: "npt.ArrayLike",
        y_knots: "npt.ArrayLike",
    ) -> "GridFunction2D":
        xk = numpy.asarray(x_knots, dtype=numpy.float64)
        yk = numpy.asarray(y_knots, dtype=numpy.float64)
        X, Y = numpy.meshgrid(xk, yk, indexing="ij")
        return cls(xk, yk, numpy.broadcast_to(fn(X, Y), X.shape).astype(numpy.float64))

    @property
    def spacing(self) -> "float":
        return float(
            max(
                numpy.diff(self.x_knots).max(initial=0.0),
                numpy.diff(self.y_knots).max(initial=0.0),
            )
        )

    def points(self) -> "FloatArray":
        X, Y = numpy.meshgrid(self.x_knots, self.y_knots, indexing="ij")
        return numpy.stack([X.reshape(-1), Y.reshape(-1)], axis=1)

    def evaluate(self, points: "npt.ArrayLike") -> "Union[float, FloatArray]":
        """
        Bilinear interpolation at points of shape (2,) or (n, 2)
        """
        arr = numpy.asarray(points, dtype=numpy.float64)
        if self.x_knots.size < 2 or self.y_knots.size < 2:
            raise EnvelopeException("Bilinear evaluation needs two knots per axis")
        interp = RegularGridInterpolator(
            (self.x_knots, self.y_knots), self.values, bounds_error=False
        )
        result = interp(arr.reshape(-1, 2))
        if numpy.any(numpy.isnan(result)):
            raise EnvelopeException("Evaluation outside the grid window")
        if arr.ndim == 1:
            return float(result[0])
        return cast("FloatArray", result)

    def to_csv(self) -> "str":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "value"])
        for i, x in enumerate(self.x_knots):
            for j, y in enumerate(self.y_knots):
                writer.writerow(
                    [repr(float(x)), repr(float(y)), repr(float(self.values[i, j]))]
                )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, content: "str") -> "GridFunction2D":
        rows = list(csv.reader(io.StringIO(content)))
        if len(rows) == 0 or rows[0] != ["x", "y", "value"]:
            raise EnvelopeException(
                "2D grid CSV must start with the header x,y,value"
            )
        data = numpy.array([[float(c) for c in row] for row in rows[1:] if row])
        xk = numpy.unique(data[:, 0])
        yk = numpy.unique(data[:, 1])
        if data.shape[0] != xk.size * yk.size:
            raise EnvelopeException("2D grid CSV does not describe a rectangular grid")
        values = numpy.full((xk.size, yk.size), numpy.nan)
        values[numpy.searchsorted(xk, data[:, 0]), numpy.searchsorted(yk, data[:, 1])] = data[:, 2]
        return cls(xk, yk, values)

    def _marshall(self) -> "Mapping[str, Any]":
        return self.to_json()

    def to_json(self) -> "Mapping[str, Any]":
        return {
            "x_knots": self.x_knots.tolist(),
            "y_knots": self.y_knots.tolist(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json(cls, doc: "Mapping[str, Any]") -> "GridFunction2D":
        return cls(
            numpy.asarray(doc["x_knots"]),
            numpy.asarray(doc["y_knots"]),
            numpy.asarray(doc["values"]),
        )

    def save_csv(self, path: "str") -> "None":
        atomic_write_text(path, self.to_csv())


class CombinationPoint(NamedTuple):
    weight: "float"
    point: "FloatArray"
    value: "float"


class EnvelopeCertificate(NamedTuple):
    """
    point: where the envelope was evaluated
    value: sum of weight * f(point) over the combination
    combination: at most n+1 grid points with their convex weights
    window: bounds of the grid, one (lower, upper) pair per axis
    bound_direction: truncation to a window only overestimates
    """

    point: "FloatArray"
    value: "float"
    combination: "Sequence[CombinationPoint]"
    window: "Sequence[Tuple[float, float]]"
    bound_direction: "BoundDirection"

    def feasibility_error(self) -> "float":
        weights = numpy.array([c.weight for c in self.combination])
        points = numpy.array([c.point for c in self.combination])
        return float(
            max(
                abs(weights.sum() - 1.0),
                float(numpy.abs(weights @ points - self.point).max()),
                float(-weights.min()),
            )
        )


class WindowValue(NamedTuple):
    """
    Envelope value at a point for one truncation window
    """

    window: "float"
    value: "float"
    grid: "int"
    bound_direction: "BoundDirection"


class OneSidedSlopes(NamedTuple):
    left: "float"
    right: "float"
    step: "float"

    @property
    def jump(self) -> "float":
        return self.right - self.left


def _lower_hull_indices(
    knots: "FloatArray", values: "FloatArray", tol: "float" = HULL_CROSS_TOLERANCE
) -> "List[int]":
    """
    Andrew monotone chain over points already sorted by abscissa.
    Interior collinear points are dropped.
    """
    xs = knots.tolist()
    ys = values.tolist()
    hull: "List[int]" = []
    for k in range(len(xs)):
        xk = xs[k]
        yk = ys[k]
        while len(hull) >= 2:
            o = hull[-2]
            a = hull[-1]
            cross = (xs[a] - xs[o]) * (yk - ys[o]) - (ys[a] - ys[o]) * (xk - xs[o])
            if cross <= tol:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def lower_convex_hull_1d(f: "GridFunction1D") -> "GridFunction1D":
    if f.knots.size < 2:
        raise EnvelopeException("The lower convex hull needs at least two knots")
    idx = _lower_hull_indices(f.knots, f.values)
    values = numpy.interp(f.knots, f.knots[idx], f.values[idx])
    return GridFunction1D(f.knots, numpy.minimum(values, f.values))


def _hull_slopes(knots: "FloatArray", values: "FloatArray") -> "FloatArray":
    idx = _lower_hull_indices(knots, values)
    return cast(
        "FloatArray", numpy.diff(values[idx]) / numpy.diff(knots[idx])
    )


def _conjugate_1d(
    knots: "FloatArray", values: "FloatArray", slopes: "FloatArray"
) -> "FloatArray":
    """
    max over knots of s*x - f(x), found through the hull vertex whose
    adjacent hull slopes bracket s
    """
    idx = numpy.asarray(_lower_hull_indices(knots, values), dtype=numpy.intp)
    hx = knots[idx]
    hy = values[idx]
    if idx.size == 1:
        return cast("FloatArray", slopes * hx[0] - hy[0])
    hull_slopes = numpy.diff(hy) / numpy.diff(hx)
    vertex = numpy.searchsorted(hull_slopes, slopes, side="left")
    return cast("FloatArray", slopes * hx[vertex] - hy[vertex])


def default_slope_grid(
    knots: "FloatArray", values: "FloatArray", count: "Optional[int]" = None
) -> "FloatArray":
    """
    Uniform slopes over the secant range, together with the slopes of the
    lower hull, so the biconjugate reproduces the hull exactly.
    """
    if knots.size < 2:
        return numpy.zeros(1)
    secants = numpy.diff(values) / numpy.diff(knots)
    if count is None:
        count = 2 * knots.size - 1
    uniform = numpy.linspace(secants.min(), secants.max(), count)
    return numpy.unique(numpy.concatenate([uniform, _hull_slopes(knots, values)]))


def _cover_secants(slopes: "FloatArray", secants: "FloatArray") -> "FloatArray":
    extra = []
    if secants.size > 0:
        if slopes[0] > secants.min():
            extra.append(secants.min())
        if slopes[-1] < secants.max():
            extra.append(secants.max())
    if len(extra) > 0:
        logger.debug(f"Slope grid extended to cover secants {extra}")
        return numpy.unique(numpy.concatenate([slopes, extra]))
    return slopes


def legendre_conjugate(
    f: "GridFunction",
    slopes: "Optional[Union[npt.ArrayLike, Tuple[npt.ArrayLike, npt.ArrayLike]]]" = None,
) -> "GridFunction":
    """
    Discrete Legendre-Fenchel transform f*(s) = max over knots of <s,x> - f(x).
    A given slope grid is extended to the secant slope range of f when
    it falls short. Two dimensional transforms run one pass along y for
    every x knot, then one pass along x for every y slope.
    """
    if isinstance(f, GridFunction1D):
        if slopes is None:
            grid = default_slope_grid(f.knots, f.values)
        else:
            grid = _cover_secants(_strict_knots(slopes, "slope"), f.secant_slopes())
        return GridFunction1D(grid, _conjugate_1d(f.knots, f.values, grid))

    if slopes is None:
        sx = numpy.linspace(
            *_secant_range(f.values, f.x_knots, axis=0), 2 * f.x_knots.size - 1
        )
        sy = numpy.linspace(
            *_secant_range(f.values, f.y_knots, axis=1), 2 * f.y_knots.size - 1
        )
        sx = numpy.unique(sx)
        sy = numpy.unique(sy)
    else:
        raw_sx, raw_sy = cast("Tuple[npt.ArrayLike, npt.ArrayLike]", slopes)
        sx = _strict_knots(raw_sx, "x slope")
        sy = _strict_knots(raw_sy, "y slope")

    # Pass along y: g[i, l] = max_j t_l y_j - f(x_i, y_j)
    partial = numpy.empty((f.x_knots.size, sy.size))
    for i in range(f.x_knots.size):
        partial[i] = _conjugate_1d(f.y_knots, f.values[i], sy)
    # Pass along x: f*(s_k, t_l) = max_i s_k x_i + g[i, l]
    result = numpy.empty((sx.size, sy.size))
    for col in range(sy.size):
        result[:, col] = _conjugate_1d(f.x_knots, -partial[:, col], sx)
    return GridFunction2D(sx, sy, result)


def _secant_range(
    values: "FloatArray", knots: "FloatArray", axis: "int"
) -> "Tuple[float, float]":
    if knots.size < 2:
        return 0.0, 0.0
    shape = [1, 1]
    shape[axis] = knots.size - 1
    secants = numpy.diff(values, axis=axis) / numpy.diff(knots).reshape(shape)
    return float(secants.min()), float(secants.max())


def biconjugate(f: "GridFunction") -> "GridFunction":
    """
    f** on the knots of f, by conjugating twice. It is the largest convex
    minorant of f on the grid. On a truncated window it overestimates
    the envelope of the untruncated function.
    """
    if isinstance(f, GridFunction1D):
        conj = cast("GridFunction1D", legendre_conjugate(f))
        values = _conjugate_1d(conj.knots, conj.values, f.knots)
        return GridFunction1D(f.knots, numpy.minimum(values, f.values))

    conj2 = cast("GridFunction2D", legendre_conjugate(f))
    back = cast(
        "GridFunction2D", legendre_conjugate(conj2, (f.x_knots, f.y_knots))
    )
    return GridFunction2D(f.x_knots, f.y_knots, numpy.minimum(back.values, f.values))


def grid_tolerance(f: "GridFunction1D") -> "float":
    """
    Cross-method agreement tolerance: 4 * spacing * Lipschitz estimate
    """
    return 4.0 * f.spacing * float(numpy.abs(f.secant_slopes()).max(initial=0.0))


def caratheodory_envelope_at(
    f: "GridFunction", x: "npt.ArrayLike"
) -> "EnvelopeCertificate":
    """
    Envelope value at x from the linear program

        minimize sum_j l_j f(x_j)  s.t.  sum_j l_j x_j = x, sum_j l_j = 1, l >= 0

    over every grid point. Basic solutions use at most n+1 points.
    """
    point = numpy.atleast_1d(numpy.asarray(x, dtype=numpy.float64))
    points: "FloatArray"
    window: "List[Tuple[float, float]]"
    if isinstance(f, GridFunction1D):
        points = f.knots[:, None]
        values = f.values
        window = [(float(f.knots[0]), float(f.knots[-1]))]
    else:
        points = f.points()
        values = f.values.reshape(-1)
        window = [
            (float(f.x_knots[0]), float(f.x_knots[-1])),
            (float(f.y_knots[0]), float(f.y_knots[-1])),
        ]
    n = points.shape[1]
    if point.shape != (n,):
        raise EnvelopeException(f"Point of dimension {point.size}, grid of dimension {n}")

    A = numpy.vstack([points.T, numpy.ones(points.shape[0])])
    b = numpy.concatenate([point, [1.0]])
    solution = solve_standard_form(values, A, b)
    if solution.status == LPStatus.Infeasible:
        raise EnvelopeInfeasibleException(
            f"Point {point.tolist()} lies outside the convex hull of the grid"
        )
    solution.raise_for_status()

    support = solution.support()
    weights = solution.x[support]
    weights = weights / weights.sum()
    combination = [
        CombinationPoint(float(w), points[j], float(values[j]))
        for w, j in zip(weights, support)
    ]
    certificate = EnvelopeCertificate(
        point=point,
        value=float(weights @ values[support]),
        combination=combination,
        window=window,
        bound_direction=BoundDirection.Upper,
    )
    error = certificate.feasibility_error()
    if error > COMBINATION_TOLERANCE:
        raise EnvelopeException(
            f"Carathéodory combination infeasible by {error} at {point.tolist()}"
        )
    logger.debug(
        f"Envelope at {point.tolist()} = {certificate.value} from {len(combination)} points"
    )
    return certificate


def radial_envelope(phi: "GridFunction1D") -> "GridFunction1D":
    """
    Greatest convex nondecreasing minorant of a profile on [0, R]:
    the lower hull, flattened left of its global minimum
    """
    if phi.knots[0] != 0.0:
        raise EnvelopeException("Radial profiles are sampled from r = 0")
    if phi.knots.size == 1:
        return phi
    hull = lower_convex_hull_1d(phi)
    values = hull.values.copy()
    lowest = int(numpy.argmin(values))
    values[:lowest] = values[lowest]
    return GridFunction1D(phi.knots, values)


def window_sweep(
    fn: "Callable[[FloatArray, FloatArray], FloatArray]",
    point: "npt.ArrayLike",
    windows: "Sequence[float]",
    grid: "int" = DEFAULT_GRID_KNOTS,
    x_half: "float" = 2.0,
) -> "List[WindowValue]":
    """
    Biconjugate of fn on [-x_half, x_half] x [-R, R] at a point, for each
    window half-height R. Each value is an upper bound of the envelope
    of the untruncated function.
    """
    results = []
    for R in windows:
        g = GridFunction2D.from_function(
            fn, numpy.linspace(-x_half, x_half, grid), numpy.linspace(-R, R, grid)
        )
        env = cast("GridFunction2D", biconjugate(g))
        value = cast("float", env.evaluate(numpy.asarray(point, dtype=numpy.float64)))
        logger.info(
            f"Envelope at {list(point)} truncated to |y| <= {R}: {value} (upper bound)"
        )
        results.append(WindowValue(float(R), value, grid, BoundDirection.Upper))
    return results


def one_sided_slopes(
    g: "GridFunction2D", point: "npt.ArrayLike", axis: "int"
) -> "OneSidedSlopes":
    """
    Backward and forward difference quotients along an axis, at the knot
    nearest to the point
    """
    p = numpy.asarray(point, dtype=numpy.float64)
    i = int(numpy.abs(g.x_knots - p[0]).argmin())
    j = int(numpy.abs(g.y_knots - p[1]).argmin())
    knots = g.x_knots if axis == 0 else g.y_knots
    k = i if axis == 0 else j
    if k == 0 or k == knots.size - 1:
        raise EnvelopeException("One-sided slopes need neighbours on both sides")
    line = g.values[:, j] if axis == 0 else g.values[i, :]
    left = (line[k] - line[k - 1]) / (knots[k] - knots[k - 1])
    right = (line[k + 1] - line[k]) / (knots[k + 1] - knots[k])
    return OneSidedSlopes(
        float(left), float(right), float(max(knots[k] - knots[k - 1], knots[k + 1] - knots[k]))
    )
