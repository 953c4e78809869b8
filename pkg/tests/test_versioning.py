from __future__ import annotations

from pathlib import Path

import pytest

from scripts.version import VersionError, current_version, main, parse_version, set_version

ROOT = Path(__file__).resolve().parents[1]


def copy_version_files(tmp_path: Path) -> tuple[Path, Path]:
    package = tmp_path / "__init__.py"
    project = tmp_path / "pyproject.toml"
    package.write_text((ROOT / "thetastrat" / "__init__.py").read_text(encoding="utf-8"), encoding="utf-8")
    project.write_text((ROOT / "pyproject.toml").read_text(encoding="utf-8"), encoding="utf-8")
    return package, project


def test_repository_versions_are_consistent():
    version = current_version()
    assert len(version) == 3


def test_package_version_matches_the_module():
    from thetastrat import __version__

    assert parse_version(__version__) == current_version()


def test_set_version_updates_both_files(tmp_path: Path):
    package, project = copy_version_files(tmp_path)

    assert set_version("1.2.3", package, project) == (1, 2, 3)

    assert '__version__ = "1.2.3"' in package.read_text(encoding="utf-8")
    assert 'version = "1.2.3"' in project.read_text(encoding="utf-8")
    assert current_version(package, project) == (1, 2, 3)


def test_inconsistent_versions_are_rejected(tmp_path: Path):
    package, project = copy_version_files(tmp_path)
    text = package.read_text(encoding="utf-8")
    package.write_text(text.replace('__version__ = "', '__version__ = "9', 1), encoding="utf-8")

    with pytest.raises(VersionError, match="inconsistent"):
        current_version(package, project)


@pytest.mark.parametrize("value", ["1.2", "1.2.3.4", "01.2.3", "1.x.3", "v1.2.3"])
def test_invalid_release_versions_are_rejected(value: str):
    with pytest.raises(VersionError):
        parse_version(value)


def test_verify_requires_a_newer_version(tmp_path: Path, capsys):
    package, project = copy_version_files(tmp_path)
    set_version("0.3.0", package, project)
    argv = ["--package-file", str(package), "--project-file", str(project), "verify"]

    assert main([*argv, "--newer-than", "0.2.9"]) == 0
    assert capsys.readouterr().out.strip() == "0.3.0"
    assert main([*argv, "--newer-than", "0.3.0"]) == 1
    assert "must be greater" in capsys.readouterr().err
