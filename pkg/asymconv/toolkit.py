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

from __future__ import absolute_import

import datetime
import inspect
import logging
import os
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy
import yaml

if TYPE_CHECKING:
    from typing import (
        Any,
        Callable,
        List,
        Mapping,
        MutableMapping,
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

# We have preference for the C based loader and dumper, but the code
# should fallback to default implementations when C ones are not present
try:
    from yaml import CLoader as YAMLLoader
except ImportError:
    from yaml import Loader as YAMLLoader  # type: ignore[assignment]

from . import get_AsymConv_version_str
from .asymptotic import (
    DEFAULT_DEMO_T_GRID,
    ModulusMode,
    SequenceSpace,
    SpaceKind,
    envelope_preserves_smoothness_demo,
    polynomial_tail_bounds,
    tail_delta_norm,
    tail_modulus_fn,
    tail_rho_norm,
)
from .common import (
    BoundDirection,
    DEFAULT_SAMPLER,
    SamplerConfig,
    ToleranceProfile,
    as_curve_name,
)
from .envelope import (
    EnvelopeException,
    GridFunction1D,
    GridFunction2D,
    biconjugate,
    caratheodory_envelope_at,
    grid_tolerance,
    lower_convex_hull_1d,
    one_sided_slopes,
    window_sweep,
)
from .experiment import (
    AssertionOutcome,
    Command,
    CurveKind,
    ExperimentConfig,
    ExperimentConfigException,
    ExperimentRecord,
    ExportFormat,
    RecordCurve,
    RecordStore,
    export_plots,
    sweep_curve,
    wall_clock,
)
from .extremal import (
    DEFAULT_DENSITY,
    EvenPolynomial,
    discretization_tolerance,
    ExtremalProblem,
    gap_witness,
    membership_check,
    refinement_check,
    scale_invariance_check,
    solve_extremal,
)
from .moduli import (
    ModuliException,
    ModulusCurve,
    RhoVariant,
    delta_curve,
    delta_fn,
    gap_identity_error,
    monotone_violation,
    power_fit,
    puc_constant,
    rho_curve,
    verify_puc,
)
from .normcore import (
    NormDescriptor,
    SparseSequence,
    SymmetricForm,
    certify_form,
    eval_norm,
    minkowski_norm,
    norm_power_function,
)
from .sampling import (
    STREAM_PARTNERS,
    STREAM_POINTS,
    box_points,
)
from .utils.expression import (
    compile_expression,
    tokenize,
)
from .utils.misc import (
    ConfigValidationException,
    config_validate,
)
from .verification import verify_all

DEFAULT_WINDOW: "Final[Tuple[float, float]]" = (-2.0, 2.0)
DEFAULT_LP_GRID: "Final[int]" = 101
DEFAULT_MODULUS_GRID: "Final[Tuple[float, ...]]" = tuple(
    float(t) for t in numpy.geomspace(0.01, 0.1, 6)
)
MONOTONE_NOISE_BAND: "Final[float]" = 1e-6
AGREEMENT_TOLERANCE: "Final[float]" = 1e-9
GAP_IDENTITY_PAIRS: "Final[int]" = 256
SYMMETRIC_FORM_SCHEMA: "Final[str]" = "symmetric-form.json"
DOUBLE_WELL_PROFILE: "Final[str]" = "(r^2-1)^2"


class RunOutcome(NamedTuple):
    results: "Mapping[str, Any]"
    assertions: "Sequence[AssertionOutcome]"
    curves: "Sequence[RecordCurve]"


def load_symmetric_form(filename: "str") -> "SymmetricForm":
    """
    Reads and validates a symmetric form document, JSON or YAML
    """
    try:
        with open(filename, mode="r", encoding="utf-8") as fH:
            doc = yaml.load(fH, Loader=YAMLLoader)
    except (OSError, yaml.YAMLError) as e:
        raise ExperimentConfigException(f"Unable to read form {filename}: {e}") from e
    errors = config_validate(doc, SYMMETRIC_FORM_SCHEMA)
    if len(errors) > 0:
        raise ExperimentConfigException(
            f"Invalid symmetric form {filename}", [e.message for e in errors]
        )
    return SymmetricForm.from_json(doc)


def parse_norm(
    label: "str", dimension: "int", sampler: "SamplerConfig" = DEFAULT_SAMPLER
) -> "NormDescriptor":
    """
    lp:<p>, sup or poly:<form file>
    """
    kind, _, arg = label.partition(":")
    if kind == "lp" and arg != "":
        return NormDescriptor.lp(float(arg), dimension)
    if kind == "sup" and arg == "":
        return NormDescriptor.sup(dimension)
    if kind == "poly" and arg != "":
        form = load_symmetric_form(arg)
        if form.dimension != dimension:
            raise ExperimentConfigException(
                f"Form {arg} lives on R^{form.dimension}, not on R^{dimension}"
            )
        return NormDescriptor.poly(form, sampler)
    raise ExperimentConfigException(f"Unknown norm {label!r}")


def parse_mode(label: "str") -> "ModulusMode":
    aliases = {"rho": ModulusMode.RhoBar, "delta": ModulusMode.DeltaBar}
    if label in aliases:
        return aliases[label]
    try:
        return ModulusMode(label)
    except ValueError as ve:
        raise ExperimentConfigException(f"Unknown asymptotic modulus {label!r}") from ve


def _window(value: "Any", default: "Tuple[float, float]") -> "Tuple[float, float]":
    if value is None:
        return default
    lower, upper = (float(v) for v in value)
    if not lower < upper:
        raise ExperimentConfigException(f"Empty window [{lower}, {upper}]")
    return lower, upper


def _as_list(value: "Any") -> "List[Any]":
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _outcome(name: "str", passed: "bool", witness: "Any" = None, detail: "Optional[str]" = None) -> "AssertionOutcome":
    return AssertionOutcome(name=name, passed=bool(passed), witness=witness, detail=detail)


def _modulus_record_curve(name: "str", curve: "ModulusCurve") -> "RecordCurve":
    return RecordCurve(as_curve_name(name), CurveKind.Modulus, curve.to_csv())


class AsymConvToolkit:
    """
    Runs experiment configurations and keeps their records. The local
    configuration provides defaults for the sampler, the tolerance
    profile and the output directory.
    """

    CONFIG_SCHEMA: "Final[str]" = "config.json"
    DEFAULT_OUTPUT_DIR: "Final[str]" = "."

    @classmethod
    def FromFile(cls, configFilename: "str") -> "AsymConvToolkit":
        with open(configFilename, mode="r", encoding="utf-8") as cf:
            local_config = yaml.load(cf, Loader=YAMLLoader)

        return cls(
            local_config,
            config_directory=os.path.dirname(os.path.abspath(configFilename)),
        )

    def __init__(
        self,
        local_config: "Optional[Mapping[str, Any]]" = None,
        config_directory: "Optional[str]" = None,
        out_dir: "Optional[str]" = None,
    ):
        # Getting a logger focused on specific classes
        self.logger = logging.getLogger(
            dict(inspect.getmembers(self))["__module__"]
            + "::"
            + self.__class__.__name__
        )

        if not isinstance(local_config, dict):
            local_config = {}

        # validate the local configuration object
        valErrors = config_validate(local_config, self.CONFIG_SCHEMA)
        if len(valErrors) > 0:
            for valError in valErrors:
                self.logger.error(f"ERROR in local configuration block: {valError.message}")
            raise ConfigValidationException(
                f"Invalid local configuration ({len(valErrors)} errors)"
            )
        self.local_config = local_config

        if config_directory is None:
            config_directory = os.getcwd()
        self.config_directory = config_directory

        if out_dir is None:
            out_dir = local_config.get("outputDir", self.DEFAULT_OUTPUT_DIR)
        if not os.path.isabs(out_dir):
            out_dir = os.path.normpath(os.path.join(config_directory, out_dir))
        self.store = RecordStore(out_dir)

        self.sampler = SamplerConfig(**local_config.get("sampler", {}))
        tolerance = local_config.get("tolerance", {})
        self.tolerance_profile = ToleranceProfile(
            tolerance.get("profile", ToleranceProfile.Default.value)
        )
        self.tolerance_scale: "Optional[float]" = tolerance.get("scale")

    def new_config(
        self,
        command: "Command",
        params: "Mapping[str, Any]",
        sampler: "Optional[SamplerConfig]" = None,
        tolerance_profile: "Optional[ToleranceProfile]" = None,
        tolerance_scale: "Optional[float]" = None,
    ) -> "ExperimentConfig":
        """
        Experiment configuration, filling what is not given from the
        local configuration
        """
        if tolerance_profile is None:
            tolerance_profile = self.tolerance_profile
            if tolerance_scale is None:
                tolerance_scale = self.tolerance_scale
        return ExperimentConfig(
            command=command,
            params=params,
            sampler=self.sampler if sampler is None else sampler,
            tolerance_profile=tolerance_profile,
            tolerance_scale=tolerance_scale,
        )

    def run(self, config: "ExperimentConfig") -> "ExperimentRecord":
        runners: "Mapping[Command, Callable[[ExperimentConfig], RunOutcome]]" = {
            Command.Envelope: self.run_envelope,
            Command.Moduli: self.run_moduli,
            Command.Asymptotic: self.run_asymptotic,
            Command.Extremal: self.run_extremal,
            Command.Polynorm: self.run_polynorm,
            Command.Verify: self.run_verify,
        }
        self.logger.info(
            f"Running {config.command.value} (record {config.record_id}, seed {config.sampler.seed})"
        )
        started = datetime.datetime.now(datetime.timezone.utc)
        outcome = runners[config.command](config)
        finished = datetime.datetime.now(datetime.timezone.utc)
        for assertion in outcome.assertions:
            if not assertion.passed:
                self.logger.error(
                    f"Assertion {assertion.name} failed ({assertion.detail}), witness {assertion.witness}"
                )
        return ExperimentRecord(
            config=config,
            toolkit_version=get_AsymConv_version_str(),
            results=outcome.results,
            assertions=outcome.assertions,
            curves=outcome.curves,
            wall_clock=wall_clock(started, finished),
        )

    def run_and_persist(
        self, config: "ExperimentConfig"
    ) -> "Tuple[ExperimentRecord, str]":
        record = self.run(config)
        return record, self.store.persist(record)

    def export(
        self, record_ref: "str", fmt: "ExportFormat" = ExportFormat.CSV
    ) -> "Sequence[str]":
        return export_plots(self.store, record_ref, fmt)

    def run_envelope(self, config: "ExperimentConfig") -> "RunOutcome":
        source = config.param("fn", "(x^2-1)^2")
        window = _window(config.param("window"), DEFAULT_WINDOW)
        grid = int(config.param("grid", 801))
        two_dimensional = config.param("y_window") is not None or any(
            tok.kind == "name" and tok.text == "y" for tok in tokenize(source)
        )
        if two_dimensional:
            return self._envelope_2d(config, source, window, grid)
        return self._envelope_1d(config, source, window, grid)

    def _envelope_1d(
        self,
        config: "ExperimentConfig",
        source: "str",
        window: "Tuple[float, float]",
        grid: "int",
    ) -> "RunOutcome":
        fn = compile_expression(source, ("x",))
        f = GridFunction1D.from_function(fn, window[0], window[1], grid)
        hull = lower_convex_hull_1d(f)
        biconj = cast("GridFunction1D", biconjugate(f))
        tol = grid_tolerance(f) * config.scale
        discrepancy = float(numpy.abs(hull.values - biconj.values).max())

        default_points = [0.0] if window[0] <= 0.0 <= window[1] else [0.5 * sum(window)]
        points = [
            float(v) for p in _as_list(config.param("at")) for v in _as_list(p)
        ] or default_points
        values_at = []
        certificates = []
        worst_lp = 0.0
        worst_support = 0
        for point in points:
            cert = caratheodory_envelope_at(f, point)
            hull_at = float(cast("float", hull.evaluate(point)))
            values_at.append(
                {
                    "x": point,
                    "function": float(fn(point)),
                    "hull": hull_at,
                    "biconjugate": float(cast("float", biconj.evaluate(point))),
                    "caratheodory": cert.value,
                }
            )
            certificates.append(cert)
            worst_lp = max(worst_lp, abs(cert.value - hull_at))
            worst_support = max(worst_support, len(cert.combination))

        below = float((hull.values - f.values).max())
        assertions = [
            _outcome("envelope_below_function", below <= AGREEMENT_TOLERANCE, detail=f"max(conv f - f) = {below}"),
            _outcome("hull_matches_biconjugate", discrepancy <= tol, detail=f"{discrepancy} against grid tolerance {tol}"),
            _outcome("caratheodory_matches_hull", worst_lp <= tol, detail=f"{worst_lp} against grid tolerance {tol}"),
            _outcome("caratheodory_support", worst_support <= 2, detail=f"{worst_support} points, at most 2"),
        ]
        results = {
            "dimension": 1,
            "fn": source,
            "window": list(window),
            "grid": grid,
            "grid_tolerance": tol,
            "discrepancy": discrepancy,
            "values_at": values_at,
            "certificates": certificates,
            "bound_direction": BoundDirection.Upper,
        }
        curves = [
            RecordCurve(as_curve_name("function"), CurveKind.Grid1D, f.to_csv()),
            RecordCurve(as_curve_name("envelope"), CurveKind.Grid1D, hull.to_csv()),
            RecordCurve(as_curve_name("biconjugate"), CurveKind.Grid1D, biconj.to_csv()),
        ]
        return RunOutcome(results, assertions, curves)

    def _envelope_2d(
        self,
        config: "ExperimentConfig",
        source: "str",
        window: "Tuple[float, float]",
        grid: "int",
    ) -> "RunOutcome":
        fn = compile_expression(source, ("x", "y"))
        y_window = _window(config.param("y_window"), window)
        g = GridFunction2D.from_function(
            fn, numpy.linspace(*window, grid), numpy.linspace(*y_window, grid)
        )
        env = cast("GridFunction2D", biconjugate(g))
        below = float((env.values - g.values).max())

        # Carathéodory certificates on a coarser grid, the LP being dense
        lp_grid = int(config.param("lp_grid", DEFAULT_LP_GRID))
        coarse = GridFunction2D.from_function(
            fn, numpy.linspace(*window, lp_grid), numpy.linspace(*y_window, lp_grid)
        )
        coarse_env = cast("GridFunction2D", biconjugate(coarse))
        gx = numpy.abs(numpy.diff(coarse.values, axis=0)).max() / numpy.diff(coarse.x_knots).min()
        gy = numpy.abs(numpy.diff(coarse.values, axis=1)).max() / numpy.diff(coarse.y_knots).min()
        tol = 4.0 * coarse.spacing * float(max(gx, gy)) * config.scale

        point = [float(v) for v in _as_list(config.param("point")) or [0.0, 0.0]]
        points = [
            [float(v) for v in p] for p in _as_list(config.param("at"))
        ] or [point]
        values_at = []
        worst_lp = 0.0
        worst_support = 0
        certificates = []
        for p in points:
            cert = caratheodory_envelope_at(coarse, p)
            env_at = float(cast("float", coarse_env.evaluate(numpy.asarray(p))))
            values_at.append(
                {
                    "point": p,
                    "function": float(fn(p[0], p[1])),
                    "biconjugate": float(cast("float", env.evaluate(numpy.asarray(p)))),
                    "caratheodory": cert.value,
                    "caratheodory_grid": lp_grid,
                }
            )
            certificates.append(cert)
            worst_lp = max(worst_lp, abs(cert.value - env_at))
            worst_support = max(worst_support, len(cert.combination))

        assertions = [
            _outcome("envelope_below_function", below <= AGREEMENT_TOLERANCE, detail=f"max(conv f - f) = {below}"),
            _outcome("caratheodory_matches_biconjugate", worst_lp <= tol, detail=f"{worst_lp} against grid tolerance {tol}"),
            _outcome("caratheodory_support", worst_support <= 3, detail=f"{worst_support} points, at most 3"),
        ]
        results: "MutableMapping[str, Any]" = {
            "dimension": 2,
            "fn": source,
            "window": [list(window), list(y_window)],
            "grid": grid,
            "values_at": values_at,
            "certificates": certificates,
            "bound_direction": BoundDirection.Upper,
        }
        try:
            results["slopes_x"] = one_sided_slopes(env, point, axis=0)
        except EnvelopeException as e:
            self.logger.info(f"No one-sided slopes at {point}: {e}")

        sweep = [float(R) for R in _as_list(config.param("sweep"))]
        if len(sweep) > 0:
            swept = window_sweep(fn, point, sweep, grid, max(abs(window[0]), abs(window[1])))
            results["window_sweep"] = swept
            values = [w.value for w in swept]
            assertions.append(
                _outcome(
                    "window_sweep_nonincreasing",
                    all(b <= a + AGREEMENT_TOLERANCE for a, b in zip(values, values[1:])),
                    witness=values,
                )
            )

        curves = [
            RecordCurve(as_curve_name("envelope_2d"), CurveKind.Grid2D, env.to_csv()),
        ]
        return RunOutcome(results, assertions, curves)

    def run_moduli(self, config: "ExperimentConfig") -> "RunOutcome":
        sampler = config.sampler
        dimension = int(config.param("dim", 2))
        norm = parse_norm(config.param("norm", "lp:2"), dimension, sampler)
        modulus = config.param("modulus", "delta")
        grid = [float(t) for t in _as_list(config.param("grid")) or DEFAULT_MODULUS_GRID]
        fit_window = config.param("fit_window")
        band = MONOTONE_NOISE_BAND * max(config.scale, 0.0)

        results: "MutableMapping[str, Any]" = {
            "norm": norm,
            "modulus": modulus,
            "dimension": dimension,
        }
        assertions = []
        curves = []
        curve: "Optional[ModulusCurve]" = None
        if modulus == "delta":
            curve = delta_curve(norm, dimension, grid, sampler)
        elif modulus == "rho":
            variant = RhoVariant(config.param("variant", RhoVariant.PaperLiteral.value))
            results["variant"] = variant
            curve = rho_curve(norm, dimension, grid, variant, sampler)
        elif modulus == "delta_fn":
            p = float(config.param("p", 2.0))
            f = norm_power_function(norm, p)
            estimates = [delta_fn(f, t, dimension, sampler) for t in grid]
            results["estimates"] = estimates
            curve = ModulusCurve(
                parameter="t",
                t=numpy.asarray(grid),
                values=numpy.asarray([e.value for e in estimates]),
                bound_direction=BoundDirection.Upper,
                metadata=dict(sampler.metadata(), function=f.name),
            )
        elif modulus == "puc":
            p = float(config.param("p", 2.0))
            estimate = puc_constant(norm, p, dimension, sampler)
            results["puc"] = estimate
            if estimate.uniformly_convex:
                check = verify_puc(norm, p, estimate.constant, seed=sampler.seed, dimension=dimension, radius=sampler.radius)
                results["verification"] = check
                assertions.append(
                    _outcome(
                        "puc_inequality_holds",
                        check.passed,
                        check.witness,
                        f"K = {estimate.constant} on {check.samples} pairs",
                    )
                )
            else:
                self.logger.info(f"{norm.label} is not {p:g}-uniformly convex")
            return RunOutcome(results, assertions, curves)
        else:
            raise ExperimentConfigException(f"Unknown modulus {modulus!r}")

        results["curve"] = curve
        violation = monotone_violation(curve)
        assertions.append(
            _outcome(
                "monotone_within_noise",
                violation <= band * max(1.0, float(curve.values.max())),
                detail=f"largest decrease {violation}",
            )
        )
        positive = curve.values > 0
        if int(positive.sum()) >= 4:
            window = None if fit_window is None else _window(fit_window, (0.0, 2.0))
            try:
                results["fit"] = power_fit(curve, window)
            except (ModuliException, numpy.linalg.LinAlgError) as e:
                self.logger.info(f"No power fit: {e}")
        curves.append(_modulus_record_curve(f"{modulus}_{norm.label}", curve))
        return RunOutcome(results, assertions, curves)

    def run_asymptotic(self, config: "ExperimentConfig") -> "RunOutcome":
        sampler = config.sampler
        space = SequenceSpace.parse(config.param("space", "lp:2"))
        mode = parse_mode(config.param("mode", "rho"))
        t_values = [float(t) for t in _as_list(config.param("t")) or [1.0]]
        norm = space.norm()
        raw_point = SparseSequence.from_dense(
            numpy.asarray(_as_list(config.param("point")) or [1.0], dtype=numpy.float64)
        )
        length = eval_norm(norm, raw_point)
        if length == 0.0:
            raise ExperimentConfigException("The base point must not vanish")
        x = raw_point.scaled(1.0 / length)
        if abs(length - 1.0) > 1e-12:
            self.logger.info(f"Base point rescaled from norm {length} to the unit sphere")

        analytic_op = tail_rho_norm if mode == ModulusMode.RhoBar else tail_delta_norm
        sampled = bool(config.param("sampled", True))
        tol = AGREEMENT_TOLERANCE * config.scale
        results: "MutableMapping[str, Any]" = {
            "space": space.label,
            "mode": mode,
            "point": x,
        }
        analytic = [analytic_op(space, x, t) for t in t_values]
        results["analytic"] = analytic
        assertions = []
        curves = []
        if sampled:
            f = norm_power_function(norm, 1.0)
            estimates = [tail_modulus_fn(f, x, t, mode=mode, sampler=sampler) for t in t_values]
            results["sampled"] = estimates
            worst = max(abs(a.value - s.value) for a, s in zip(analytic, estimates))
            assertions.append(
                _outcome("sampled_matches_closed_form", worst <= tol, detail=f"{worst} against {tol}")
            )
        if len(t_values) >= 2 and all(0.0 < t <= 2.0 for t in t_values) and t_values == sorted(set(t_values)):
            curve = ModulusCurve(
                parameter="t",
                t=numpy.asarray(t_values),
                values=numpy.asarray([a.value for a in analytic]),
                bound_direction=BoundDirection.Exact,
                metadata={"space": space.label, "model": "tail"},
            )
            curves.append(_modulus_record_curve(f"{mode.value}_{space.label}", curve))

        if bool(config.param("envelope_demo", False)):
            if space.kind != SpaceKind.Lp or space.p is None:
                raise ExperimentConfigException("The envelope demonstration needs an l_p space")
            phi = GridFunction1D.from_function(
                compile_expression(DOUBLE_WELL_PROFILE, ("r",)), 0.0, 4.0, 801
            )
            report = envelope_preserves_smoothness_demo(
                phi, space.p, t_grid=DEFAULT_DEMO_T_GRID, sampler=sampler
            )
            results["envelope_demo"] = report
            assertions.append(
                _outcome(
                    "envelope_keeps_power_type",
                    report.passed,
                    detail=f"conv f constant {report.conv_constant}, f constant {report.f_constant}",
                )
            )
            curves.append(_modulus_record_curve(f"rho_bar_f_{space.label}", report.f_curve))
            curves.append(_modulus_record_curve(f"rho_bar_conv_f_{space.label}", report.conv_curve))

        poly_degree = config.param("poly_degree")
        if poly_degree is not None:
            t_grid = [t for t in t_values if 0.0 < t <= 1.0] or [0.1, 0.5, 1.0]
            tail_report = polynomial_tail_bounds(int(poly_degree), t_grid, sampler)
            results["polynomial_tail"] = tail_report
            assertions.append(
                _outcome(
                    "polynomial_tail_band",
                    tail_report.passed,
                    detail=f"middle terms up to {tail_report.middle_term_max}",
                )
            )
        return RunOutcome(results, assertions, curves)

    def run_extremal(self, config: "ExperimentConfig") -> "RunOutcome":
        N = int(config.param("N", 4))
        t0_values = [float(t) for t in _as_list(config.param("t0")) or [1.0]]
        density = int(config.param("density", DEFAULT_DENSITY))
        T = config.param("T")
        problems = [
            ExtremalProblem(N, t0, T=None if T is None else float(T), density=density)
            for t0 in t0_values
        ]
        solutions = [solve_extremal(problem) for problem in problems]
        results: "MutableMapping[str, Any]" = {"solutions": solutions}
        assertions = []
        for solution in solutions:
            membership = membership_check(
                solution.polynomial, slack=discretization_tolerance(solution)
            )
            assertions.append(
                _outcome(
                    f"optimum_in_C{N}/t0={solution.t0:g}",
                    membership.member,
                    membership.witness,
                    None if membership.kind is None else membership.kind.value,
                )
            )

        # C_N is convex: mixing with 2t^N stays in the class
        leading_only = EvenPolynomial.from_mapping(N, {N: 2.0})
        mixed = solutions[0].polynomial.combine(leading_only, 0.5)
        closure = membership_check(mixed)
        results["closure"] = closure
        assertions.append(_outcome("class_closure", closure.member, closure.witness))

        if len(t0_values) > 1:
            invariance = scale_invariance_check(N, t0_values, density)
            results["scale_invariance"] = invariance
            tol = 1e-4 * config.scale
            assertions.append(
                _outcome(
                    "scale_invariance",
                    invariance.spread <= tol,
                    detail=f"relative spread {invariance.spread} against {tol}",
                )
            )
        if bool(config.param("refine", False)):
            refinement = refinement_check(problems[0])
            results["refinement"] = refinement
            tol = 1e-4 * config.scale
            assertions.append(
                _outcome(
                    "refinement_converges",
                    refinement.nondecreasing and abs(refinement.difference) <= tol,
                    detail=f"q from {refinement.coarse} to {refinement.fine}",
                )
            )

        rows = sorted((s.t0, s.q, s.K) for s in solutions)
        curves = [sweep_curve(f"extremal_N{N}", N, rows)]
        return RunOutcome(results, assertions, curves)

    def run_polynorm(self, config: "ExperimentConfig") -> "RunOutcome":
        sampler = config.sampler
        form_file = config.param("form")
        if form_file is not None:
            if not os.path.isabs(form_file):
                form_file = os.path.join(self.config_directory, form_file)
            form = load_symmetric_form(form_file)
        else:
            form = SymmetricForm.power_sum(
                int(config.param("degree", 4)), int(config.param("dim", 2))
            )
        certificate = certify_form(form, sampler)
        results: "MutableMapping[str, Any]" = {
            "form": form,
            "certificate": certificate,
        }
        assertions = [
            _outcome(
                "separating",
                certificate.separation.separating,
                certificate.separation.point,
                f"alpha = {certificate.separation.alpha}",
            ),
            _outcome(
                "convex",
                certificate.convexity.convex,
                certificate.convexity.witness,
                f"min A(x,...,x,h,h) = {certificate.convexity.min_form_value}",
            ),
        ]

        d = form.dimension
        x = box_points(GAP_IDENTITY_PAIRS, d, sampler.seed, sampler.radius, STREAM_POINTS)
        h = box_points(GAP_IDENTITY_PAIRS, d, sampler.seed, sampler.radius, STREAM_PARTNERS)
        identity = gap_identity_error(form, list(zip(x, h)))
        results["gap_identity_error"] = identity
        assertions.append(
            _outcome("gap_identity", identity <= AGREEMENT_TOLERANCE * config.scale, detail=str(identity))
        )
        if not certificate.certified:
            return RunOutcome(results, assertions, [])

        norm = NormDescriptor.poly(form, sampler)
        axes = numpy.eye(d)
        results["axis_norms"] = [
            minkowski_norm(form, axis, certificate, sampler, verify=True) for axis in axes
        ]
        gap_t0 = config.param("gap_t0")
        if gap_t0 is not None:
            witness = gap_witness(norm, float(gap_t0), sampler)
            results["gap_witness"] = witness
            assertions.append(
                _outcome(
                    "gap_above_extremal_bound",
                    witness.passed,
                    witness.witness,
                    f"min gap {witness.min_gap} against q = {witness.q}",
                )
            )
        if bool(config.param("puc", False)):
            p = float(form.degree)
            estimate = puc_constant(norm, p, d, sampler)
            results["puc"] = estimate
            if estimate.uniformly_convex:
                check = verify_puc(norm, p, estimate.constant, seed=sampler.seed, dimension=d, radius=sampler.radius)
                results["puc_verification"] = check
                assertions.append(
                    _outcome("puc_inequality_holds", check.passed, check.witness, f"K = {estimate.constant}")
                )
        return RunOutcome(results, assertions, [])

    def run_verify(self, config: "ExperimentConfig") -> "RunOutcome":
        summary = verify_all(config.sampler, config.scale)
        assertions = [
            _outcome(
                row.claim,
                row.passed,
                row.witness,
                f"computed {row.computed}, expected {row.expected}, tolerance {row.tolerance}"
                + ("" if row.detail is None else f", {row.detail}"),
            )
            for row in summary.rows
        ]
        return RunOutcome({"summary": summary}, assertions, [])
