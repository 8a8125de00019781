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

__author__ = "The AsymConv developers"
__copyright__ = "© 2024 The AsymConv developers"
__license__ = "Apache 2.0"

# https://www.python.org/dev/peps/pep-0396/
__version__ = "0.3.0"
__url__ = "https://github.com/asymconv/asymconv"
__official_name__ = "AsymConv-toolkit"

from typing import (
    TYPE_CHECKING,
)

if TYPE_CHECKING:
    from typing import (
        Optional,
        Tuple,
    )


def describeGitRepo(repo: "str") -> "Tuple[str, str]":
    """Describe the checked out revision of a git repository.

    Args:
    repo: git repository root
    Returns: a tuple with the full commit id and the active branch
    """
    import dulwich.porcelain

    if TYPE_CHECKING:
        import dulwich.repo

    active_branch = dulwich.porcelain.active_branch(repo)  # type: ignore[no-untyped-call]
    r: "dulwich.repo.Repo"
    with dulwich.porcelain.open_repo_closing(repo) as r:  # type: ignore[no-untyped-call]
        commit_id = r.head().decode("ascii")

    return commit_id, active_branch.decode("utf-8", errors="ignore")


def get_AsymConv_version() -> "Tuple[str, Optional[str], Optional[str]]":
    import os
    import dulwich.errors

    vertuple: "Tuple[str, Optional[str], Optional[str]]"
    vertuple = __version__, None, None

    checkout_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    if os.path.isdir(os.path.join(checkout_dir, ".git")):
        try:
            commit_id, branch = describeGitRepo(checkout_dir)
            vertuple = __version__, commit_id, branch
        except (dulwich.errors.NotGitRepository, KeyError):
            # Installed from an sdist or a wheel
            pass

    return vertuple


def get_AsymConv_version_str() -> "str":
    version, commit_id, branch = get_AsymConv_version()

    verstr = version
    if commit_id is not None:
        verstr += " (" + commit_id
        if branch is not None:
            verstr += ", branch " + branch
        verstr += ")"
    elif branch is not None:
        verstr += " (branch " + branch + ")"

    return verstr
