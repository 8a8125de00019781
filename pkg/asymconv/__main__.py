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

import argparse
import logging
import os
import sys
from typing import (
    TYPE_CHECKING,
)

import numpy
import yaml

if TYPE_CHECKING:
    from typing import (
        Any,
        List,
        Mapping,
        MutableMapping,
        Optional,
        Sequence,
    )

    from typing_extensions import (
        Final,
        NotRequired,
        TypedDict,
    )

    class BasicLoggingConfigDict(TypedDict):
        filename: NotRequired[str]
        format: str
        level: int


# We have preference for the C based loader and dumper, but the code
# should fallback to default implementations when C ones are not present
try:
    from yaml import CLoader as YAMLLoader
except ImportError:
    from yaml import Loader as YAMLLoader  # type: ignore[assignment]

from . import get_AsymConv_version_str
from .common import (
    AbstractAsymConvException,
    ArgsDefaultWithRawHelpFormatter,
    SamplerConfig,
    StrDocEnum,
    ToleranceProfile,
)
from .experiment import (
    Command,
    ExperimentConfig,
    ExperimentConfigException,
    ExportFormat,
    UnknownRecordException,
)
from .moduli import RhoVariant
from .toolkit import AsymConvToolkit
from .utils.expression import ExpressionSyntaxException
from .utils.misc import ConfigValidationException


class AsymConv_Commands(StrDocEnum):
    Envelope = (Command.Envelope.value, Command.Envelope.description)
    Moduli = (Command.Moduli.value, Command.Moduli.description)
    Asymptotic = (Command.Asymptotic.value, Command.Asymptotic.description)
    Extremal = (Command.Extremal.value, Command.Extremal.description)
    Polynorm = (Command.Polynorm.value, Command.Polynorm.description)
    Verify = (Command.Verify.value, Command.Verify.description)
    Export = ("export", "Export the curves of a record as plot data")


DEFAULT_LOCAL_CONFIG_RELNAME = "asymconv_config.yml"
LOCAL_CONFIG_ENV: "Final[str]" = "ASYMCONV_CONFIG_FILE"
LOGGING_FORMAT = "%(asctime)-15s - [%(levelname)s] %(message)s"
DEBUG_LOGGING_FORMAT = (
    "%(asctime)-15s - [%(name)s %(funcName)s %(lineno)d][%(levelname)s] %(message)s"
)

# Options whose values may start with a minus sign, like -2:2
SIGNED_VALUE_OPTIONS: "Final[Sequence[str]]" = (
    "--window",
    "--y-window",
    "--at",
    "--point",
    "--fit-window",
    "--t",
    "--t0",
    "--grid",
    "--sweep",
)

EXIT_OK: "Final[int]" = 0
EXIT_FAILED: "Final[int]" = 1
EXIT_USAGE: "Final[int]" = 2


def range_arg(value: "str") -> "List[float]":
    """
    lower:upper
    """
    try:
        lower, upper = (float(v) for v in value.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a lower:upper range")
    if not lower < upper:
        raise argparse.ArgumentTypeError(f"Empty range {value!r}")
    return [lower, upper]


def float_list_arg(value: "str") -> "List[float]":
    """
    A single value, a comma separated list, or start:stop:count for
    a geometric progression
    """
    try:
        if value.count(":") == 2:
            start, stop, count = value.split(":")
            return [
                float(t)
                for t in numpy.geomspace(float(start), float(stop), int(count))
            ]
        return [float(v) for v in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a list of numbers")


def point_arg(value: "str") -> "List[float]":
    try:
        return [float(v) for v in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a comma separated point")


def genParserSub(
    sp: "argparse._SubParsersAction[argparse.ArgumentParser]",
    command: "AsymConv_Commands",
) -> "argparse.ArgumentParser":
    ap_ = sp.add_parser(
        command.value,
        formatter_class=ArgsDefaultWithRawHelpFormatter,
        allow_abbrev=False,
        help=command.description,
    )

    if command == AsymConv_Commands.Envelope:
        ap_.add_argument(
            "--fn",
            dest="fn",
            default="(x^2-1)^2",
            help="raw|Test function, in x (1D) or in x and y (2D).\nNumbers, + - * / ^, parentheses, sqrt, exp, abs, min and max",
        )
        ap_.add_argument("--grid", dest="grid", type=int, default=801, help="Knots per axis")
        ap_.add_argument("--window", dest="window", type=range_arg, default=[-2.0, 2.0], help="x window, as lower:upper")
        ap_.add_argument("--y-window", dest="y_window", type=range_arg, help="y window of 2D functions (the x window when not set)")
        ap_.add_argument(
            "--at",
            dest="at",
            type=point_arg,
            action="append",
            help="Point where a Carathéodory certificate is computed (repeatable)",
        )
        ap_.add_argument("--lp-grid", dest="lp_grid", type=int, help="Knots per axis of the grid of 2D certificates")
        ap_.add_argument("--point", dest="point", type=point_arg, help="Point of 2D one-sided slopes and window sweeps")
        ap_.add_argument("--sweep", dest="sweep", type=float_list_arg, help="Half heights of the y windows swept")

    elif command == AsymConv_Commands.Moduli:
        ap_.add_argument("--norm", dest="norm", default="lp:2", help="lp:<p>, sup or poly:<form file>")
        ap_.add_argument("--dim", dest="dim", type=int, default=2, help="Dimension of the space")
        ap_.add_argument(
            "--modulus",
            dest="modulus",
            choices=["delta", "rho", "delta_fn", "puc"],
            default="delta",
            help="What is estimated",
        )
        ap_.add_argument("--grid", dest="grid", type=float_list_arg, help="Parameter values, as a list or start:stop:count")
        ap_.add_argument(
            "--variant",
            dest="variant",
            type=RhoVariant.argtype,
            choices=list(RhoVariant),
            default=RhoVariant.PaperLiteral,
            help="Definition of the modulus of smoothness",
        )
        ap_.add_argument("--p", dest="p", type=float, help="Exponent of delta_fn powers and of p-uniform convexity")
        ap_.add_argument("--fit-window", dest="fit_window", type=range_arg, help="Window of the power fit")

    elif command == AsymConv_Commands.Asymptotic:
        ap_.add_argument("--space", dest="space", default="lp:2", help="c0 or lp:<p>")
        ap_.add_argument(
            "--mode",
            dest="mode",
            choices=["rho", "delta", "rho_bar", "delta_bar"],
            default="rho",
            help="Asymptotic modulus of smoothness or of convexity",
        )
        ap_.add_argument("--t", dest="t", type=float_list_arg, default=[1.0], help="Radii")
        ap_.add_argument("--point", dest="point", type=point_arg, help="Base point, rescaled to the unit sphere (e_1 by default)")
        ap_.add_argument(
            "--no-sampled",
            dest="sampled",
            action="store_false",
            default=True,
            help="Skip the sampled path",
        )
        ap_.add_argument(
            "--envelope-demo",
            dest="envelope_demo",
            action="store_true",
            default=False,
            help="Compare rho_bar of phi(|x|) and of its convex envelope, phi(r) = (r^2-1)^2",
        )
        ap_.add_argument("--poly-degree", dest="poly_degree", type=int, help="Check the power type band of the l_N model")

    elif command == AsymConv_Commands.Extremal:
        ap_.add_argument("--N", dest="N", type=int, default=4, help="Even degree")
        ap_.add_argument("--t0", dest="t0", type=float_list_arg, default=[1.0], help="Evaluation points")
        ap_.add_argument("--density", dest="density", type=int, help="Grid points")
        ap_.add_argument("--T", dest="T", type=float, help="Fixed constraint window [0, T]")
        ap_.add_argument(
            "--refine",
            dest="refine",
            action="store_true",
            default=False,
            help="Also solve on the refined grid",
        )

    elif command == AsymConv_Commands.Polynorm:
        ap_.add_argument("--form", dest="form", help="Symmetric form document (JSON or YAML)")
        ap_.add_argument("--degree", dest="degree", type=int, default=4, help="Degree of the l_N form, when no form is given")
        ap_.add_argument("--dim", dest="dim", type=int, default=2, help="Dimension of the l_N form, when no form is given")
        ap_.add_argument("--gap-t0", dest="gap_t0", type=float, help="Compare sampled gaps with the extremal bound at t0")
        ap_.add_argument(
            "--puc",
            dest="puc",
            action="store_true",
            default=False,
            help="Estimate and verify the p-uniform convexity constant, p = N",
        )

    elif command == AsymConv_Commands.Export:
        ap_.add_argument("record", help="Record id, or record directory")
        ap_.add_argument(
            "--format",
            dest="format",
            type=ExportFormat.argtype,
            choices=list(ExportFormat),
            default=ExportFormat.CSV,
            help="Plot data format",
        )

    return ap_


def _glue_signed_values(argv: "Sequence[str]") -> "List[str]":
    glued: "List[str]" = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in SIGNED_VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            glued.append(f"{arg}={argv[i + 1]}")
            i += 2
        else:
            glued.append(arg)
            i += 1
    return glued


def _command_params(args: "argparse.Namespace", command: "AsymConv_Commands") -> "Mapping[str, Any]":
    names = {
        AsymConv_Commands.Envelope: ("fn", "grid", "window", "y_window", "at", "lp_grid", "point", "sweep"),
        AsymConv_Commands.Moduli: ("norm", "dim", "modulus", "grid", "variant", "p", "fit_window"),
        AsymConv_Commands.Asymptotic: ("space", "mode", "t", "point", "sampled", "envelope_demo", "poly_degree"),
        AsymConv_Commands.Extremal: ("N", "t0", "density", "T", "refine"),
        AsymConv_Commands.Polynorm: ("form", "degree", "dim", "gap_t0", "puc"),
        AsymConv_Commands.Verify: (),
    }[command]
    params: "MutableMapping[str, Any]" = {}
    for name in names:
        value = getattr(args, name)
        if isinstance(value, StrDocEnum):
            value = value.value
        if value is not None:
            params[name] = value
    return params


def _resolve_form(params: "Mapping[str, Any]", base_dir: "str") -> "Mapping[str, Any]":
    form = params.get("form")
    if form is None or os.path.isabs(form):
        return params
    return {**params, "form": os.path.join(base_dir, form)}


def _sampler(args: "argparse.Namespace", base: "SamplerConfig") -> "SamplerConfig":
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.refine_iters is not None:
        overrides["refine_iters"] = args.refine_iters
    return base._replace(**overrides)


def processRunCommand(
    toolkit: "AsymConvToolkit", config: "ExperimentConfig", logLevel: "int"
) -> "int":
    """
    This method runs and persists an experiment, and returns the exit code
    to be used with sys.exit
    """
    record, record_path = toolkit.run_and_persist(config)
    if config.command == Command.Verify:
        print(record.results["summary"].table())
    print(f"* Record {config.record_id} stored at {record_path}", file=sys.stderr)
    if record.passed:
        return EXIT_OK
    for failed in record.failed:
        print(f"[FAILED] {failed.name}: {failed.detail}", file=sys.stderr)
    return EXIT_FAILED


def processExportCommand(
    toolkit: "AsymConvToolkit", args: "argparse.Namespace", logLevel: "int"
) -> "int":
    """
    This method exports the curves of a record, and returns the exit code
    to be used with sys.exit
    """
    for path in toolkit.export(args.record, args.format):
        print(path)
    return EXIT_OK


def main(argv: "Optional[Sequence[str]]" = None) -> None:
    verstr = get_AsymConv_version_str()

    defaultLocalConfigFilename = os.environ.get(LOCAL_CONFIG_ENV)
    if defaultLocalConfigFilename is None:
        defaultLocalConfigFilename = os.path.join(
            os.getcwd(), DEFAULT_LOCAL_CONFIG_RELNAME
        )
    elif not os.path.isabs(defaultLocalConfigFilename):
        defaultLocalConfigFilename = os.path.join(
            os.getcwd(), defaultLocalConfigFilename
        )
    ap = argparse.ArgumentParser(
        description="AsymConv toolkit, numerical experiments on convex envelopes and asymptotic moduli "
        + verstr,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        allow_abbrev=False,
    )
    ap.add_argument(
        "--log-file",
        dest="logFilename",
        help="Store messages in a file instead of using standard error and standard output",
    )
    ap.add_argument(
        "-q",
        "--quiet",
        dest="logLevel",
        action="store_const",
        const=logging.WARNING,
        help="Only show warnings and errors",
    )
    ap.add_argument(
        "-v",
        "--verbose",
        dest="logLevel",
        action="store_const",
        const=logging.INFO,
        help="Show verbose (informational) messages",
    )
    ap.add_argument(
        "-d",
        "--debug",
        dest="logLevel",
        action="store_const",
        const=logging.DEBUG,
        help="Show debug messages",
    )
    ap.add_argument(
        "-L",
        "--local-config",
        dest="localConfigFilename",
        default=defaultLocalConfigFilename,
        help=f"Local installation configuration file (can also be set up through {LOCAL_CONFIG_ENV} environment variable)",
    )
    ap.add_argument(
        "--config",
        dest="experimentConfigFilename",
        help="Experiment configuration file (JSON or YAML). It replaces the subcommand",
    )
    ap.add_argument("--out", dest="outDir", help="Output directory, where runs/ lives")
    ap.add_argument("--seed", dest="seed", type=int, help="Seed of every sampling stage")
    ap.add_argument("--samples", dest="samples", type=int, help="Size of the sampling stages")
    ap.add_argument(
        "--refine-iters",
        dest="refine_iters",
        type=int,
        help="Line searches of the local refinement (0 disables it)",
    )
    ap.add_argument(
        "--tolerance-profile",
        dest="toleranceProfile",
        type=ToleranceProfile.argtype,
        choices=list(ToleranceProfile),
        help="Tolerance profile of the assertions",
    )
    ap.add_argument(
        "--tolerance-scale",
        dest="toleranceScale",
        type=float,
        help="Explicit tolerance scale, overriding the profile",
    )

    ap.add_argument(
        "-V", "--version", action="version", version="%(prog)s version " + verstr
    )
    ap.add_argument(
        "--full-help",
        dest="fullHelp",
        action="store_true",
        default=False,
        help="It returns full help",
    )

    sp = ap.add_subparsers(
        dest="command",
        title="commands",
        description="Command to run. It must be one of these",
    )
    for command_choice in AsymConv_Commands:
        genParserSub(sp, command_choice)

    args = ap.parse_args(_glue_signed_values(sys.argv[1:] if argv is None else argv))

    fullHelp = args.fullHelp
    if args.command is None and args.experimentConfigFilename is None:
        fullHelp = True

    if fullHelp:
        print(ap.format_help())

        # retrieve subparsers from parser
        subparsers_actions = [
            action
            for action in ap._actions
            if isinstance(action, argparse._SubParsersAction)
        ]
        for subparsers_action in subparsers_actions:
            # get all subparsers and print help
            for choice, subparser in subparsers_action.choices.items():
                print("Subparser '{}'".format(choice))
                print(subparser.format_help())

        sys.exit(EXIT_OK)

    # Setting up the log
    logLevel = logging.INFO
    if args.logLevel:
        logLevel = args.logLevel

    if logLevel < logging.INFO:
        logFormat = DEBUG_LOGGING_FORMAT
    else:
        logFormat = LOGGING_FORMAT

    loggingConf: "BasicLoggingConfigDict" = {"format": logFormat, "level": logLevel}

    if args.logFilename is not None:
        loggingConf["filename"] = args.logFilename

    logging.basicConfig(**loggingConf)

    # First, try loading the configuration file
    localConfigFilename = args.localConfigFilename
    local_config: "Mapping[str, Any]" = {}
    if localConfigFilename and os.path.exists(localConfigFilename):
        try:
            with open(localConfigFilename, mode="r", encoding="utf-8") as cf:
                local_config = yaml.load(cf, Loader=YAMLLoader) or {}
        except yaml.YAMLError as ye:
            print(f"[ERROR] Unable to parse {localConfigFilename}: {ye}", file=sys.stderr)
            sys.exit(EXIT_USAGE)
    elif localConfigFilename != defaultLocalConfigFilename:
        print(
            "[WARNING] Configuration file {} does not exist".format(localConfigFilename),
            file=sys.stderr,
        )
    config_directory = os.path.dirname(os.path.abspath(localConfigFilename))

    try:
        toolkit = AsymConvToolkit(
            local_config,
            config_directory=config_directory,
            out_dir=None if args.outDir is None else os.path.abspath(args.outDir),
        )

        if args.command == AsymConv_Commands.Export.value:
            sys.exit(processExportCommand(toolkit, args, logLevel))

        if args.experimentConfigFilename is not None:
            config = ExperimentConfig.from_file(args.experimentConfigFilename)
            config = config._replace(
                params=_resolve_form(
                    config.params,
                    os.path.dirname(os.path.abspath(args.experimentConfigFilename)),
                ),
                sampler=_sampler(args, config.sampler),
            )
        else:
            command = AsymConv_Commands(args.command)
            config = toolkit.new_config(
                Command(command.value),
                _resolve_form(_command_params(args, command), os.getcwd()),
                sampler=_sampler(args, toolkit.sampler),
                tolerance_profile=args.toleranceProfile,
                tolerance_scale=args.toleranceScale,
            )
        if args.toleranceProfile is not None:
            config = config._replace(tolerance_profile=args.toleranceProfile)
        if args.toleranceScale is not None:
            config = config._replace(tolerance_scale=args.toleranceScale)

        retval = processRunCommand(toolkit, config, logLevel)
    except (
        ConfigValidationException,
        ExperimentConfigException,
        ExpressionSyntaxException,
        UnknownRecordException,
    ) as e:
        logging.error(str(e))
        for error in getattr(e, "errors", []):
            logging.error(f"  {error}")
        sys.exit(EXIT_USAGE)
    except AbstractAsymConvException as e:
        logging.exception(f"Experiment aborted: {e}")
        sys.exit(EXIT_FAILED)

    sys.exit(retval)


if __name__ == "__main__":
    main()
