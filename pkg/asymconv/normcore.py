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
Norm evaluation, symmetric multilinear forms and polynomial norms.

A symmetric N-linear form A on R^d is stored through one coefficient
per orbit of index permutations, keyed by the sorted multi-index (1-based).
The coefficient is the common tensor entry of the whole orbit, so the
diagonal P(x) = A(x, ..., x) weights every orbit with its multinomial
multiplicity.
"""

from __future__ import absolute_import

import collections.abc
from dataclasses import dataclass, field
import functools
import itertools
import logging
import math
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy
from scipy.optimize import bisect
from scipy.spatial import ConvexHull

if TYPE_CHECKING:
    from typing import (
        Any,
        Callable,
        Iterator,
        List,
        Mapping,
        MutableMapping,
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

    MultiIndex: TypeAlias = Tuple[int, ...]
    Exponents: TypeAlias = Tuple[int, ...]
    FloatArray: TypeAlias = npt.NDArray[numpy.float64]
    VectorLike: TypeAlias = Union["SparseSequence", npt.ArrayLike]

from .common import (
    AbstractAsymConvException,
    BoundDirection,
    DEFAULT_SAMPLER,
    SamplerConfig,
    StrDocEnum,
)
from .sampling import (
    STREAM_PARTNERS,
    STREAM_POINTS,
    coordinate_polish,
    gaussian_points,
    sphere_directions,
)

logger = logging.getLogger(__name__)

SEPARATION_TOLERANCE: "Final[float]" = 1e-9
CONVEXITY_TOLERANCE: "Final[float]" = 1e-10
MINKOWSKI_TOLERANCE: "Final[float]" = 1e-9
SANDWICH_RTOL: "Final[float]" = 1e-6
SEQUENCE_DIMENSION: "Final[str]" = "sequence"


class NormCoreException(AbstractAsymConvException):
    pass


class FormDimensionException(NormCoreException):
    pass


class NonHomogeneousPolynomialException(NormCoreException):
    pass


class UncertifiedNormException(NormCoreException):
    pass


class NonSeparatingFormException(UncertifiedNormException):
    def __init__(self, message: "str", witness: "FloatArray"):
        super().__init__(message)
        self.witness = witness


class SparseSequence(collections.abc.Mapping):  # type: ignore[type-arg]
    """
    Finitely supported real sequence, indexed from 1. Zeros are never stored.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: "Optional[Mapping[int, float]]" = None):
        clean = {}
        if entries is not None:
            for key, value in entries.items():
                index = int(key)
                if index < 1 or index != key:
                    raise NormCoreException(
                        f"Sequence indices are positive integers, got {key!r}"
                    )
                fvalue = float(value)
                if not math.isfinite(fvalue):
                    raise NormCoreException(f"Non finite value at index {index}")
                if fvalue != 0.0:
                    clean[index] = fvalue
        self._entries: "Mapping[int, float]" = dict(sorted(clean.items()))

    @classmethod
    def from_dense(
        cls, values: "npt.ArrayLike", offset: "int" = 0
    ) -> "SparseSequence":
        """
        values[k] becomes the entry at index offset + k + 1
        """
        arr = numpy.asarray(values, dtype=numpy.float64).reshape(-1)
        return cls({offset + k + 1: float(v) for k, v in enumerate(arr) if v != 0.0})

    def __getitem__(self, index: "int") -> "float":
        return self._entries[index]

    def __iter__(self) -> "Iterator[int]":
        return iter(self._entries)

    def __len__(self) -> "int":
        return len(self._entries)

    def __repr__(self) -> "str":
        return f"SparseSequence({dict(self._entries)!r})"

    def __eq__(self, other: "object") -> "bool":
        if isinstance(other, SparseSequence):
            return dict(self._entries) == dict(other._entries)
        return NotImplemented

    def __hash__(self) -> "int":
        return hash(tuple(self._entries.items()))

    def coordinate(self, index: "int") -> "float":
        return self._entries.get(index, 0.0)

    @property
    def support(self) -> "Tuple[int, ...]":
        return tuple(self._entries.keys())

    @property
    def max_index(self) -> "int":
        return max(self._entries.keys(), default=0)

    def nonzero_values(self) -> "FloatArray":
        return numpy.fromiter(self._entries.values(), dtype=numpy.float64)

    def to_dense(self, length: "int") -> "FloatArray":
        if length < self.max_index:
            raise FormDimensionException(
                f"Support reaches index {self.max_index}, beyond length {length}"
            )
        dense = numpy.zeros(length)
        for index, value in self._entries.items():
            dense[index - 1] = value
        return dense

    def __add__(self, other: "SparseSequence") -> "SparseSequence":
        merged = dict(self._entries)
        for index, value in other.items():
            merged[index] = merged.get(index, 0.0) + value
        return SparseSequence(merged)

    def scaled(self, factor: "float") -> "SparseSequence":
        return SparseSequence({k: factor * v for k, v in self._entries.items()})

    def _marshall(self) -> "Mapping[str, float]":
        return {str(k): v for k, v in self._entries.items()}


def multiplicity(index: "MultiIndex") -> "int":
    """
    Number of distinct permutations of a multi-index
    """
    result = math.factorial(len(index))
    for _, group in itertools.groupby(sorted(index)):
        result //= math.factorial(len(list(group)))
    return result


def exponents_of(index: "MultiIndex", dimension: "int") -> "Exponents":
    counts = [0] * dimension
    for i in index:
        counts[i - 1] += 1
    return tuple(counts)


@dataclass(frozen=True)
class SymmetricForm:
    """
    Symmetric N-linear form on R^d (N even), one coefficient per orbit
    """

    degree: "int"
    dimension: "int"
    terms: "Tuple[Tuple[MultiIndex, float], ...]" = field(default=())

    def __post_init__(self) -> "None":
        if self.degree < 2 or self.degree % 2 != 0:
            raise NormCoreException(
                f"Symmetric forms housing polynomial norms need an even degree, got {self.degree}"
            )
        if self.dimension < 1:
            raise FormDimensionException(f"Invalid dimension {self.dimension}")
        seen = set()
        for index, _ in self.terms:
            if len(index) != self.degree:
                raise FormDimensionException(
                    f"Multi-index {index} has not length {self.degree}"
                )
            if tuple(sorted(index)) != index:
                raise NormCoreException(f"Multi-index {index} is not sorted")
            if index[0] < 1 or index[-1] > self.dimension:
                raise FormDimensionException(
                    f"Multi-index {index} out of range 1..{self.dimension}"
                )
            if index in seen:
                raise NormCoreException(f"Multi-index {index} repeated")
            seen.add(index)

    @classmethod
    def build(
        cls,
        degree: "int",
        dimension: "int",
        coefficients: "Mapping[Sequence[int], float]",
    ) -> "SymmetricForm":
        """
        Any index permutation is accepted as the orbit key
        """
        terms = {}
        for index, coeff in coefficients.items():
            key = tuple(sorted(int(i) for i in index))
            if key in terms:
                raise NormCoreException(f"Orbit {key} given twice")
            if coeff != 0.0:
                terms[key] = float(coeff)
        return cls(
            degree=degree, dimension=dimension, terms=tuple(sorted(terms.items()))
        )

    def coefficient(self, index: "Sequence[int]") -> "float":
        key = tuple(sorted(index))
        for term_index, coeff in self.terms:
            if term_index == key:
                return coeff
        return 0.0

    @functools.cached_property
    def tensor(self) -> "FloatArray":
        """
        Dense symmetric tensor, shape (d,)*N
        """
        coeffs = dict(self.terms)
        dense = numpy.zeros((self.dimension,) * self.degree)
        for idx in itertools.product(range(self.dimension), repeat=self.degree):
            key = tuple(sorted(i + 1 for i in idx))
            coeff = coeffs.get(key)
            if coeff is not None:
                dense[idx] = coeff
        return dense

    @functools.cached_property
    def _diagonal_plan(self) -> "Tuple[npt.NDArray[numpy.intp], FloatArray]":
        if len(self.terms) == 0:
            return numpy.zeros((0, self.degree), dtype=numpy.intp), numpy.zeros(0)
        indices = numpy.array([index for index, _ in self.terms], dtype=numpy.intp) - 1
        weights = numpy.array(
            [multiplicity(index) * coeff for index, coeff in self.terms]
        )
        return indices, weights

    @property
    def scale(self) -> "float":
        """
        Largest monomial coefficient in absolute value
        """
        return max(
            (abs(multiplicity(index) * coeff) for index, coeff in self.terms),
            default=0.0,
        )

    def monomials(self) -> "Mapping[Exponents, float]":
        return {
            exponents_of(index, self.dimension): multiplicity(index) * coeff
            for index, coeff in self.terms
        }

    def diagonal(self, x: "npt.ArrayLike") -> "Union[float, FloatArray]":
        """
        P(x) = A(x, ..., x) from the monomial expansion, over the last axis
        """
        arr = numpy.asarray(x, dtype=numpy.float64)
        if arr.shape[-1] != self.dimension:
            raise FormDimensionException(
                f"Vector of dimension {arr.shape[-1]}, form of dimension {self.dimension}"
            )
        indices, weights = self._diagonal_plan
        batch = arr.reshape(-1, self.dimension)
        values = numpy.prod(batch[:, indices], axis=-1) @ weights
        if arr.ndim == 1:
            return float(values[0])
        return values.reshape(arr.shape[:-1])

    def evaluate(self, args: "Sequence[npt.ArrayLike]") -> "Union[float, FloatArray]":
        """
        A(v_1, ..., v_N); each argument is a vector or a batch of vectors
        of the same shape
        """
        if len(args) != self.degree:
            raise FormDimensionException(
                f"Form of degree {self.degree} evaluated with {len(args)} arguments"
            )
        arrays = [numpy.asarray(arg, dtype=numpy.float64) for arg in args]
        shape = arrays[0].shape
        for arr in arrays:
            if arr.shape != shape or arr.shape[-1] != self.dimension:
                raise FormDimensionException(
                    f"Arguments must share shape (..., {self.dimension}), got {arr.shape}"
                )
        batches = [arr.reshape(-1, self.dimension) for arr in arrays]
        partial = numpy.tensordot(batches[0], self.tensor, axes=([1], [0]))
        for batch in batches[1:]:
            partial = numpy.einsum("nj...,nj->n...", partial, batch)
        if len(shape) == 1:
            return float(partial[0])
        return partial.reshape(shape[:-1])

    def _marshall(self) -> "Mapping[str, Any]":
        return self.to_json()

    def to_json(self) -> "Mapping[str, Any]":
        return {
            "degree": self.degree,
            "dimension": self.dimension,
            "terms": [
                {"index": list(index), "coeff": coeff} for index, coeff in self.terms
            ],
        }

    @classmethod
    def from_json(cls, doc: "Mapping[str, Any]") -> "SymmetricForm":
        degree = int(doc["degree"])
        dimension = int(doc["dimension"])
        if "monomials" in doc:
            return polarize(
                {
                    tuple(int(e) for e in mono["exponents"]): float(mono["coeff"])
                    for mono in doc["monomials"]
                },
                degree,
                dimension,
            )
        return cls.build(
            degree,
            dimension,
            {tuple(term["index"]): float(term["coeff"]) for term in doc["terms"]},
        )

    @classmethod
    def power_sum(cls, degree: "int", dimension: "int") -> "SymmetricForm":
        """
        The form of sum_i x_i^N, that is, of the l_N norm
        """
        return cls.build(
            degree, dimension, {(i,) * degree: 1.0 for i in range(1, dimension + 1)}
        )


def _monomial_evaluator(
    monomials: "Mapping[Exponents, float]", dimension: "int"
) -> "Callable[[FloatArray], FloatArray]":
    exps = numpy.array(list(monomials.keys()), dtype=numpy.float64).reshape(
        -1, dimension
    )
    coeffs = numpy.array(list(monomials.values()), dtype=numpy.float64)

    def evaluate(points: "FloatArray") -> "FloatArray":
        powers = numpy.prod(points[:, None, :] ** exps[None, :, :], axis=-1)
        return cast("FloatArray", powers @ coeffs)

    return evaluate


def polarize(
    monomials: "Mapping[Sequence[int], float]", degree: "int", dimension: "int"
) -> "SymmetricForm":
    """
    Symmetric form of an N-homogeneous polynomial given as a map from
    exponent tuples to coefficients, through the polarization identity

        A(v_1..v_N) = 1/(2^N N!) sum_{e in {-1,1}^N} e_1...e_N P(sum_k e_k v_k)

    evaluated at every orbit of basis vectors.
    """
    clean: "MutableMapping[Exponents, float]" = {}
    for exps, coeff in monomials.items():
        key = tuple(int(e) for e in exps)
        if len(key) != dimension or any(e < 0 for e in key):
            raise NonHomogeneousPolynomialException(
                f"Exponents {exps} do not describe a monomial on R^{dimension}"
            )
        if sum(key) != degree:
            raise NonHomogeneousPolynomialException(
                f"Monomial {exps} has degree {sum(key)}, expected {degree}"
            )
        clean[key] = clean.get(key, 0.0) + float(coeff)
    if degree < 2 or degree % 2 != 0:
        raise NormCoreException(f"Only even degrees are supported, got {degree}")

    poly = _monomial_evaluator(clean, dimension)
    scale = max((abs(c) for c in clean.values()), default=0.0)
    signs = numpy.array(list(itertools.product((1.0, -1.0), repeat=degree)))
    sign_products = numpy.prod(signs, axis=1)
    norm_factor = 2.0**degree * math.factorial(degree)
    eye = numpy.eye(dimension)

    coefficients = {}
    for orbit in itertools.combinations_with_replacement(
        range(1, dimension + 1), degree
    ):
        basis_rows = eye[[i - 1 for i in orbit]]
        value = float(sign_products @ poly(signs @ basis_rows)) / norm_factor
        if abs(value) > 1e-13 * scale:
            coefficients[orbit] = value

    return SymmetricForm.build(degree, dimension, coefficients)


def eval_form(A: "SymmetricForm", args: "Sequence[npt.ArrayLike]") -> "float":
    return cast("float", A.evaluate(args))


def binomial_expand(
    A: "SymmetricForm", x: "npt.ArrayLike", h: "npt.ArrayLike"
) -> "List[float]":
    """
    Coefficients c_0..c_N of P(x+th) = sum_i c_i t^i, where
    c_i = C(N,i) A(x,...,x,h,...,h) with i copies of h.
    """
    xv = numpy.asarray(x, dtype=numpy.float64)
    hv = numpy.asarray(h, dtype=numpy.float64)
    N = A.degree
    return [
        math.comb(N, i) * cast("float", A.evaluate([xv] * (N - i) + [hv] * i))
        for i in range(N + 1)
    ]


class HomogeneousTerm(NamedTuple):
    """
    degree: i, between 1 and N-1
    form: the symmetric form of P
    base: the base point x of the expansion
    """

    degree: "int"
    form: "SymmetricForm"
    base: "FloatArray"

    def evaluate(self, h: "npt.ArrayLike") -> "float":
        """
        P_{i,x}(h) = C(N,i) A(x^{N-i}, h^i)
        """
        hv = numpy.asarray(h, dtype=numpy.float64)
        N = self.form.degree
        return math.comb(N, self.degree) * cast(
            "float",
            self.form.evaluate([self.base] * (N - self.degree) + [hv] * self.degree),
        )


def homogeneous_terms(
    A: "SymmetricForm", x: "npt.ArrayLike"
) -> "List[HomogeneousTerm]":
    base = numpy.asarray(x, dtype=numpy.float64)
    return [HomogeneousTerm(i, A, base) for i in range(1, A.degree)]


class NormKind(StrDocEnum):
    Lp = ("lp", "l_p norm, p >= 1")
    Sup = ("sup", "Supremum norm")
    Poly = ("poly", "Polynomial norm P(x)^(1/N)")
    Grid2D = ("grid2d", "Gauge of a sampled planar unit ball")


class SeparationResult(NamedTuple):
    """
    separating: whether P stays above the tolerance on the sampled sphere
    alpha: empirical minimum of P on the reference unit sphere (upper bound)
    point: where alpha was found, a counterexample when not separating
    sup_value: empirical maximum of |P| on the sphere (lower bound of the norm of P)
    bound_direction: the side certified by alpha
    samples: sphere points evaluated before refinement
    """

    separating: "bool"
    alpha: "float"
    point: "FloatArray"
    sup_value: "float"
    bound_direction: "BoundDirection"
    samples: "int"


class ConvexityResult(NamedTuple):
    """
    convex: no violating pair was found
    witness: first violating (x, h) pair, in sampling order
    min_form_value: smallest sampled A(x^{N-2}, h, h) over unit pairs
    min_second_difference: smallest sampled P(x+eh)+P(x-eh)-2P(x)
    pairs: number of pairs checked
    """

    convex: "bool"
    witness: "Optional[Tuple[FloatArray, FloatArray]]"
    min_form_value: "float"
    min_second_difference: "float"
    pairs: "int"


class FormCertificate(NamedTuple):
    separation: "SeparationResult"
    convexity: "ConvexityResult"

    @property
    def certified(self) -> "bool":
        return self.separation.separating and self.convexity.convex


@dataclass(frozen=True)
class NormDescriptor:
    """
    Finite dimensional or sequence space norm. dimension None stands for
    the sequence space model, only meaningful for l_p and sup norms.
    """

    kind: "NormKind"
    dimension: "Optional[int]" = None
    p: "Optional[float]" = None
    form: "Optional[SymmetricForm]" = None
    certificate: "Optional[FormCertificate]" = field(default=None, compare=False)
    angles: "Tuple[float, ...]" = ()
    radii: "Tuple[float, ...]" = ()

    def __post_init__(self) -> "None":
        if self.kind == NormKind.Lp:
            if self.p is None or not self.p >= 1.0:
                raise NormCoreException(f"l_p norms require p >= 1, got {self.p}")
        elif self.kind == NormKind.Poly:
            if self.form is None:
                raise NormCoreException("Polynomial norms need their symmetric form")
            if self.dimension != self.form.dimension:
                raise FormDimensionException(
                    f"Norm dimension {self.dimension} and form dimension {self.form.dimension} differ"
                )
        elif self.kind == NormKind.Grid2D:
            if self.dimension != 2 or len(self.angles) != len(self.radii):
                raise NormCoreException("Grid2D gauges are planar, one radius per angle")
            if len(self.angles) < 2 or min(self.radii) <= 0:
                raise NormCoreException("Grid2D gauges need positive radii")
        if self.dimension is not None and self.dimension < 1:
            raise FormDimensionException(f"Invalid dimension {self.dimension}")

    @classmethod
    def lp(cls, p: "float", dimension: "Optional[int]" = None) -> "NormDescriptor":
        return cls(kind=NormKind.Lp, dimension=dimension, p=float(p))

    @classmethod
    def sup(cls, dimension: "Optional[int]" = None) -> "NormDescriptor":
        return cls(kind=NormKind.Sup, dimension=dimension)

    @classmethod
    def poly(
        cls, form: "SymmetricForm", sampler: "SamplerConfig" = DEFAULT_SAMPLER
    ) -> "NormDescriptor":
        """
        Polynomial norm, certified (separating against l_2, and convex)
        by sampling. The certificate is kept even when it fails, and
        evaluation refuses uncertified forms.
        """
        return cls(
            kind=NormKind.Poly,
            dimension=form.dimension,
            form=form,
            certificate=certify_form(form, sampler),
        )

    @classmethod
    def grid2d(
        cls, angles: "Sequence[float]", radii: "Sequence[float]"
    ) -> "NormDescriptor":
        return cls(
            kind=NormKind.Grid2D,
            dimension=2,
            angles=tuple(float(a) for a in angles),
            radii=tuple(float(r) for r in radii),
        )

    @property
    def label(self) -> "str":
        dim = SEQUENCE_DIMENSION if self.dimension is None else str(self.dimension)
        if self.kind == NormKind.Lp:
            return f"l{self.p:g}_d{dim}"
        if self.kind == NormKind.Poly:
            assert self.form is not None
            return f"poly{self.form.degree}_d{dim}"
        return f"{self.kind.value}_d{dim}"

    @functools.cached_property
    def _facets(self) -> "FloatArray":
        # Symmetrized boundary samples, hull facets scaled to level 1
        angles = numpy.asarray(self.angles)
        radii = numpy.asarray(self.radii)
        pts = numpy.stack([radii * numpy.cos(angles), radii * numpy.sin(angles)], 1)
        hull = ConvexHull(numpy.concatenate([pts, -pts], axis=0))
        offsets = -hull.equations[:, 2]
        if numpy.any(offsets <= 0):
            raise NormCoreException("The sampled unit ball has no interior origin")
        return cast("FloatArray", hull.equations[:, :2] / offsets[:, None])

    def evaluate(self, x: "npt.ArrayLike") -> "Union[float, FloatArray]":
        """
        Norm over the last axis
        """
        arr = numpy.asarray(x, dtype=numpy.float64)
        if self.dimension is not None and arr.shape[-1] != self.dimension:
            raise FormDimensionException(
                f"Vector of dimension {arr.shape[-1]} for a norm on R^{self.dimension}"
            )
        values: "FloatArray"
        if self.kind == NormKind.Lp:
            assert self.p is not None
            absx = numpy.abs(arr)
            top = absx.max(axis=-1, initial=0.0)
            safe = numpy.where(top > 0, top, 1.0)
            if self.p == 1.0:
                values = absx.sum(axis=-1)
            else:
                ratio = absx / safe[..., None]
                values = top * numpy.sum(ratio**self.p, axis=-1) ** (1.0 / self.p)
        elif self.kind == NormKind.Sup:
            values = numpy.abs(arr).max(axis=-1, initial=0.0)
        elif self.kind == NormKind.Poly:
            assert self.form is not None
            if self.certificate is None or not self.certificate.certified:
                raise UncertifiedNormException(
                    "The polynomial norm form is not certified separating and convex"
                )
            pvals = numpy.asarray(self.form.diagonal(arr))
            values = numpy.maximum(pvals, 0.0) ** (1.0 / self.form.degree)
        else:
            values = numpy.maximum(arr @ self._facets.T, 0.0).max(axis=-1)

        if numpy.ndim(values) == 0:
            return float(values)
        return values

    def _marshall(self) -> "Mapping[str, Any]":
        return self.to_json()

    def to_json(self) -> "Mapping[str, Any]":
        doc: "MutableMapping[str, Any]" = {
            "kind": self.kind.value,
            "dimension": SEQUENCE_DIMENSION
            if self.dimension is None
            else self.dimension,
        }
        if self.p is not None:
            doc["p"] = self.p
        if self.form is not None:
            doc["form"] = self.form.to_json()
        if self.kind == NormKind.Grid2D:
            doc["angles"] = list(self.angles)
            doc["radii"] = list(self.radii)
        return doc

    @classmethod
    def from_json(
        cls, doc: "Mapping[str, Any]", sampler: "SamplerConfig" = DEFAULT_SAMPLER
    ) -> "NormDescriptor":
        kind = NormKind(doc["kind"])
        raw_dim = doc.get("dimension", SEQUENCE_DIMENSION)
        dimension = None if raw_dim == SEQUENCE_DIMENSION else int(raw_dim)
        if kind == NormKind.Lp:
            return cls.lp(float(doc["p"]), dimension)
        if kind == NormKind.Sup:
            return cls.sup(dimension)
        if kind == NormKind.Poly:
            return cls.poly(SymmetricForm.from_json(doc["form"]), sampler)
        return cls.grid2d(doc["angles"], doc["radii"])


def as_vector(x: "VectorLike", dimension: "Optional[int]") -> "FloatArray":
    """
    Dense view of a vector or of a finitely supported sequence
    """
    if isinstance(x, SparseSequence):
        if dimension is None:
            return x.nonzero_values()
        return x.to_dense(dimension)
    arr = numpy.asarray(x, dtype=numpy.float64)
    if dimension is not None and arr.shape[-1] != dimension:
        raise FormDimensionException(
            f"Vector of dimension {arr.shape[-1]} where {dimension} was expected"
        )
    return arr


def eval_norm(norm: "NormDescriptor", x: "VectorLike") -> "float":
    return cast("float", norm.evaluate(as_vector(x, norm.dimension)))


def l2_norm(dimension: "Optional[int]" = None) -> "NormDescriptor":
    return NormDescriptor.lp(2.0, dimension)


def is_separating(
    A: "SymmetricForm",
    reference_norm: "Optional[NormDescriptor]" = None,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
    tol: "float" = SEPARATION_TOLERANCE,
) -> "SeparationResult":
    """
    Empirical minimum of P on the unit sphere of the reference norm
    (l_2 by default): signed axes, low-discrepancy directions and a
    coordinate polish of the best ones.
    """
    if reference_norm is None:
        reference_norm = l2_norm(A.dimension)
    ref = reference_norm

    def normalize(v: "FloatArray") -> "FloatArray":
        return numpy.asarray(ref.evaluate(v))

    dirs = sphere_directions(normalize, sampler.samples, A.dimension, sampler.seed)
    values = numpy.asarray(A.diagonal(dirs))
    order = numpy.argsort(values, kind="stable")
    alpha = float(values[order[0]])
    point = dirs[order[0]]

    def on_sphere(v: "FloatArray", sign: "float") -> "float":
        length = float(ref.evaluate(v))
        if length == 0.0:
            return math.inf
        return sign * cast("float", A.diagonal(v / length))

    if alpha > tol and sampler.refine_iters > 0:
        for idx in order[: sampler.refine_top]:
            polished = coordinate_polish(
                lambda v: on_sphere(v, 1.0), dirs[idx], sampler.refine_iters
            )
            if polished.value < alpha:
                alpha = polished.value
                point = polished.point / float(ref.evaluate(polished.point))

    sup_value = float(numpy.abs(values).max())
    if sampler.refine_iters > 0:
        top = int(numpy.argmax(numpy.abs(values)))
        sign = 1.0 if values[top] >= 0 else -1.0
        polished = coordinate_polish(
            lambda v: on_sphere(v, -sign), dirs[top], sampler.refine_iters
        )
        sup_value = max(sup_value, -polished.value)

    separating = alpha > tol
    if not separating:
        logger.info(f"Form not separating: P({point.tolist()}) = {alpha}")
    return SeparationResult(
        separating=separating,
        alpha=alpha,
        point=point,
        sup_value=sup_value,
        bound_direction=BoundDirection.Upper,
        samples=int(dirs.shape[0]),
    )


def _unit_rows(arr: "FloatArray") -> "FloatArray":
    lengths = numpy.linalg.norm(arr, axis=-1)
    return arr / numpy.where(lengths > 0, lengths, 1.0)[:, None]


def check_convexity(
    A: "SymmetricForm",
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
    tol: "float" = CONVEXITY_TOLERANCE,
    step: "float" = 1e-2,
) -> "ConvexityResult":
    """
    Samples pairs (x, h) of Euclidean unit vectors, the basis pairs first.
    A pair violates convexity when the Hessian form A(x^{N-2}, h, h) or
    the second difference P(x+eh)+P(x-eh)-2P(x) drops below -tol,
    relative to the coefficient scale of P.
    """
    d = A.dimension
    N = A.degree
    eye = numpy.eye(d)
    basis_x = numpy.repeat(eye, d, axis=0)
    basis_h = numpy.tile(eye, (d, 1))
    X = numpy.concatenate(
        [basis_x, _unit_rows(gaussian_points(sampler.samples, d, sampler.seed, STREAM_POINTS))]
    )
    H = numpy.concatenate(
        [
            basis_h,
            _unit_rows(gaussian_points(sampler.samples, d, sampler.seed, STREAM_PARTNERS)),
        ]
    )

    threshold = -tol * max(1.0, A.scale)
    hessian = numpy.asarray(A.evaluate([X] * (N - 2) + [H, H]))
    second = (
        numpy.asarray(A.diagonal(X + step * H))
        + numpy.asarray(A.diagonal(X - step * H))
        - 2.0 * numpy.asarray(A.diagonal(X))
    ) / step**2
    bad = numpy.flatnonzero((hessian < threshold) | (second < threshold))

    witness: "Optional[Tuple[FloatArray, FloatArray]]" = None
    if bad.size > 0:
        first = int(bad[0])
        witness = (X[first], H[first])
        logger.info(
            f"Convexity violated at x={X[first].tolist()}, h={H[first].tolist()}"
        )
    return ConvexityResult(
        convex=witness is None,
        witness=witness,
        min_form_value=float(hessian.min()),
        min_second_difference=float(second.min()),
        pairs=int(X.shape[0]),
    )


@functools.lru_cache(maxsize=64)
def certify_form(
    A: "SymmetricForm", sampler: "SamplerConfig" = DEFAULT_SAMPLER
) -> "FormCertificate":
    return FormCertificate(
        separation=is_separating(A, l2_norm(A.dimension), sampler),
        convexity=check_convexity(A, sampler),
    )


def minkowski_norm(
    A: "SymmetricForm",
    x: "npt.ArrayLike",
    certificate: "Optional[FormCertificate]" = None,
    sampler: "SamplerConfig" = DEFAULT_SAMPLER,
    verify: "bool" = False,
) -> "float":
    """
    Gauge inf{lambda > 0 : P(x/lambda) <= 1} = P(x)^(1/N) of a certified
    form. With verify, the gauge is also found by bisection, and the
    sandwich alpha |x|^N <= P(x) <= |P| |x|^N is checked with the
    Euclidean norm.
    """
    xv = numpy.asarray(x, dtype=numpy.float64)
    if xv.shape[-1] != A.dimension:
        raise FormDimensionException(
            f"Vector of dimension {xv.shape[-1]}, form of dimension {A.dimension}"
        )
    if not numpy.any(xv):
        return 0.0

    if certificate is None:
        certificate = certify_form(A, sampler)
    if not certificate.separation.separating:
        raise NonSeparatingFormException(
            "The form does not separate the origin from the unit sphere",
            certificate.separation.point,
        )
    if not certificate.convexity.convex:
        raise UncertifiedNormException("The form is not convex on the sampled pairs")

    N = A.degree
    pvalue = cast("float", A.diagonal(xv))
    value = max(pvalue, 0.0) ** (1.0 / N)

    if verify:
        solved = bisect(
            lambda lam: cast("float", A.diagonal(xv / lam)) - 1.0,
            value / 4.0,
            value * 4.0,
            xtol=1e-15 * value,
            maxiter=200,
        )
        if abs(solved - value) > MINKOWSKI_TOLERANCE * value:
            raise NormCoreException(
                f"Gauge by bisection {solved} and closed form {value} disagree"
            )
        length = float(numpy.linalg.norm(xv))
        lower = certificate.separation.alpha * length**N
        upper = certificate.separation.sup_value * length**N
        slack = SANDWICH_RTOL * max(abs(pvalue), 1.0)
        if not (lower - slack <= pvalue <= upper + slack):
            raise NormCoreException(
                f"Sandwich violated: {lower} <= {pvalue} <= {upper} does not hold"
            )

    return value


class FunctionDescriptor(NamedTuple):
    """
    Real function over the last axis of its argument.

    name: label used in reports
    evaluate: the function itself, vectorized over leading axes
    convex: whether the caller certifies convexity
    norm: the norm measuring distances between arguments
    power: when the function is norm**power, the exponent
    """

    name: "str"
    evaluate: "Callable[[FloatArray], Union[float, FloatArray]]"
    convex: "bool"
    norm: "Optional[NormDescriptor]" = None
    power: "Optional[float]" = None

    def _marshall(self) -> "Mapping[str, Any]":
        return {
            "name": self.name,
            "convex": self.convex,
            "norm": None if self.norm is None else self.norm.to_json(),
            "power": self.power,
        }


def norm_function(norm: "NormDescriptor") -> "FunctionDescriptor":
    return FunctionDescriptor(
        name=f"norm[{norm.label}]",
        evaluate=norm.evaluate,
        convex=True,
        norm=norm,
        power=1.0,
    )


def norm_power_function(norm: "NormDescriptor", p: "float") -> "FunctionDescriptor":
    if p < 1:
        raise NormCoreException(f"Powers of norms are convex for p >= 1, got {p}")

    def evaluate(x: "FloatArray") -> "Union[float, FloatArray]":
        return numpy.asarray(norm.evaluate(x)) ** p

    return FunctionDescriptor(
        name=f"norm[{norm.label}]^{p:g}",
        evaluate=evaluate,
        convex=True,
        norm=norm,
        power=float(p),
    )


def affine_function(
    slope: "npt.ArrayLike", offset: "float", norm: "NormDescriptor"
) -> "FunctionDescriptor":
    a = numpy.asarray(slope, dtype=numpy.float64)

    def evaluate(x: "FloatArray") -> "Union[float, FloatArray]":
        return numpy.asarray(x, dtype=numpy.float64) @ a + offset

    return FunctionDescriptor(
        name="affine", evaluate=evaluate, convex=True, norm=norm, power=None
    )


def form_function(
    A: "SymmetricForm", sampler: "SamplerConfig" = DEFAULT_SAMPLER
) -> "FunctionDescriptor":
    """
    P itself, that is, the N-th power of the polynomial norm
    """
    norm = NormDescriptor.poly(A, sampler)
    assert norm.certificate is not None
    return FunctionDescriptor(
        name=f"P[{norm.label}]",
        evaluate=A.diagonal,
        convex=norm.certificate.convexity.convex,
        norm=norm,
        power=float(A.degree),
    )
