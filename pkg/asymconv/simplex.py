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
Dense two-phase tableau simplex with Bland's anti-cycling rule.

It solves problems in standard form::

    minimize    c @ x
    subject to  A @ x = b,  x >= 0

Basic optimal solutions have at most rank(A) nonzero entries, which is
what the pointwise envelope certificates and the extremal problems rely on.
"""

from __future__ import absolute_import

import enum
import logging
from typing import (
    NamedTuple,
    TYPE_CHECKING,
)

import numpy

if TYPE_CHECKING:
    from typing import (
        List,
        Optional,
        Sequence,
        Tuple,
    )

    import numpy.typing as npt

from .common import AbstractAsymConvException

logger = logging.getLogger(__name__)


class LPException(AbstractAsymConvException):
    pass


class LPInfeasibleException(LPException):
    pass


class LPUnboundedException(LPException):
    pass


class LPStatus(enum.Enum):
    Optimal = "optimal"
    Infeasible = "infeasible"
    Unbounded = "unbounded"
    IterationLimit = "iteration-limit"


class LPSolution(NamedTuple):
    """
    status: how the solver finished
    x: primal solution (zeros unless optimal)
    objective: c @ x
    basis: column indices of the final basis
    multipliers: simplex multipliers y, with A.T @ y <= c at optimality
    iterations: pivots spent on both phases
    """

    status: "LPStatus"
    x: "npt.NDArray[numpy.float64]"
    objective: "float"
    basis: "Tuple[int, ...]"
    multipliers: "npt.NDArray[numpy.float64]"
    iterations: "int"

    def support(self, tol: "float" = 1e-12) -> "Sequence[int]":
        """
        Basic columns carrying a positive value
        """
        return [j for j in sorted(self.basis) if self.x[j] > tol]

    def raise_for_status(self) -> "None":
        if self.status == LPStatus.Infeasible:
            raise LPInfeasibleException("The linear program is infeasible")
        if self.status == LPStatus.Unbounded:
            raise LPUnboundedException("The linear program is unbounded")
        if self.status == LPStatus.IterationLimit:
            raise LPException(f"Simplex gave up after {self.iterations} pivots")


def _pivot(tableau: "npt.NDArray[numpy.float64]", row: "int", col: "int") -> "None":
    tableau[row] /= tableau[row, col]
    column = tableau[:, col].copy()
    column[row] = 0.0
    tableau -= numpy.outer(column, tableau[row])


def _bland(
    tableau: "npt.NDArray[numpy.float64]",
    basis: "List[int]",
    ncols: "int",
    tol: "float",
    max_iter: "int",
) -> "Tuple[LPStatus, int]":
    """
    Runs primal simplex pivots over the first ncols columns.
    The last tableau row keeps the reduced costs, the last column the
    basic values.
    """
    m = len(basis)
    for iteration in range(max_iter):
        reduced = tableau[m, :ncols]
        candidates = numpy.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return LPStatus.Optimal, iteration
        # Bland: lowest index entering variable
        col = int(candidates[0])

        column = tableau[:m, col]
        rows = numpy.flatnonzero(column > tol)
        if rows.size == 0:
            return LPStatus.Unbounded, iteration
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        # Bland: among tied rows, the one whose basic variable has lowest index
        row = int(min(tied, key=lambda r: basis[r]))

        _pivot(tableau, row, col)
        basis[row] = col

    return LPStatus.IterationLimit, max_iter


def solve_standard_form(
    c: "npt.ArrayLike",
    A: "npt.ArrayLike",
    b: "npt.ArrayLike",
    tol: "float" = 1e-9,
    max_iter: "Optional[int]" = None,
) -> "LPSolution":
    """
    Two-phase simplex. Phase one minimizes the sum of artificial
    variables, which are then driven out of the basis; redundant
    equality rows are dropped, and get a zero multiplier.
    """
    A_arr = numpy.array(A, dtype=numpy.float64, ndmin=2)
    b_arr = numpy.array(b, dtype=numpy.float64).reshape(-1)
    c_arr = numpy.array(c, dtype=numpy.float64).reshape(-1)
    m, n = A_arr.shape
    if b_arr.shape[0] != m or c_arr.shape[0] != n:
        raise LPException(
            f"Inconsistent LP shapes: A is {m}x{n}, b has {b_arr.shape[0]}, c has {c_arr.shape[0]}"
        )
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    # Rows with negative right hand side are flipped
    signs = numpy.where(b_arr < 0, -1.0, 1.0)
    A_arr = A_arr * signs[:, None]
    b_arr = b_arr * signs

    tableau = numpy.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = A_arr
    tableau[:m, n : n + m] = numpy.eye(m)
    tableau[:m, -1] = b_arr
    tableau[m, :n] = -A_arr.sum(axis=0)
    tableau[m, -1] = -b_arr.sum()
    basis = list(range(n, n + m))

    status, it1 = _bland(tableau, basis, n + m, tol, max_iter)
    if status == LPStatus.IterationLimit:
        logger.warning(f"Phase one hit the iteration limit ({max_iter})")
        return LPSolution(
            LPStatus.IterationLimit,
            numpy.zeros(n),
            float("nan"),
            tuple(basis),
            numpy.zeros(m),
            it1,
        )
    infeasibility = -tableau[m, -1]
    if infeasibility > tol * (1.0 + numpy.abs(b_arr).max(initial=0.0)):
        logger.debug(f"Phase one ended with infeasibility {infeasibility}")
        return LPSolution(
            LPStatus.Infeasible,
            numpy.zeros(n),
            float("nan"),
            tuple(basis),
            numpy.zeros(m),
            it1,
        )

    # Drive the artificial variables out of the basis
    kept_rows = list(range(m))
    redundant: "List[int]" = []
    for row in range(m):
        if basis[row] < n:
            continue
        candidates = numpy.flatnonzero(numpy.abs(tableau[row, :n]) > tol)
        if candidates.size > 0:
            col = int(candidates[0])
            _pivot(tableau, row, col)
            basis[row] = col
        else:
            redundant.append(row)
    if len(redundant) > 0:
        logger.debug(f"Dropping {len(redundant)} redundant equality rows")
        keep = [row for row in range(m) if row not in redundant]
        kept_rows = keep
        tableau = tableau[keep + [m]]
        basis = [basis[row] for row in keep]

    # Phase two over the original columns
    mk = len(basis)
    tableau = numpy.concatenate([tableau[:, :n], tableau[:, -1:]], axis=1)
    c_basis = c_arr[basis]
    tableau[mk, :n] = c_arr - c_basis @ tableau[:mk, :n]
    tableau[mk, -1] = -(c_basis @ tableau[:mk, -1])

    status, it2 = _bland(tableau, basis, n, tol, max_iter)
    iterations = it1 + it2

    x = numpy.zeros(n)
    x[basis] = numpy.maximum(tableau[:mk, -1], 0.0)
    multipliers = numpy.zeros(m)
    if mk > 0:
        B = A_arr[numpy.ix_(kept_rows, basis)]
        multipliers[kept_rows] = numpy.linalg.solve(B.T, c_arr[basis])
    multipliers *= signs

    logger.debug(
        f"Simplex {status.value} after {iterations} pivots ({it1} on phase one)"
    )
    return LPSolution(
        status=status,
        x=x,
        objective=float(c_arr @ x),
        basis=tuple(basis),
        multipliers=multipliers,
        iterations=iterations,
    )
