import pytest

import dulwich.porcelain

from asymconv import (
    __version__,
    describeGitRepo,
    get_AsymConv_version_str,
)


def test_describe_checkout(tmp_path) -> "None":
    repo = str(tmp_path)
    dulwich.porcelain.init(repo)
    (tmp_path / "README.md").write_text("toolkit\n", encoding="utf-8")
    dulwich.porcelain.add(repo, paths=[str(tmp_path / "README.md")])
    commit = dulwich.porcelain.commit(
        repo, message=b"Initial", author=b"Dev <dev@example.org>", committer=b"Dev <dev@example.org>"
    )
    commit_id, branch = describeGitRepo(repo)
    assert commit_id == commit.decode("ascii")
    assert branch == dulwich.porcelain.active_branch(repo).decode("utf-8")


def test_version_string() -> "None":
    assert get_AsymConv_version_str().startswith(__version__)
