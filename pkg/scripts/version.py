from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile
from pathlib import Path
from typing import Sequence

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_PACKAGE_FILE = ROOT / "thetastrat" / "__init__.py"
DEFAULT_PROJECT_FILE = ROOT / "pyproject.toml"
_VERSION_RE = re.compile(r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)$")

_PATTERNS = {
    "package": re.compile(r'(?m)^(__version__ = ")([^"]+)(")$'),
    "project": re.compile(r'(?m)^(version = ")([^"]+)(")$'),
}


class VersionError(ValueError):
    """Raised when the package and project versions are invalid or inconsistent."""


def parse_version(value: str) -> tuple[int, int, int]:
    match = _VERSION_RE.fullmatch(value.strip())
    if not match:
        raise VersionError("Version must be MAJOR.MINOR.PATCH, for example 0.1.0.")
    return tuple(int(part) for part in match.groups())  # type: ignore[return-value]


def format_version(parts: Sequence[int]) -> str:
    return ".".join(str(part) for part in parts)


def _files(package: Path, project: Path) -> dict[str, Path]:
    return {"package": package, "project": project}


def read_versions(
    package: Path = DEFAULT_PACKAGE_FILE,
    project: Path = DEFAULT_PROJECT_FILE,
) -> dict[str, tuple[int, int, int]]:
    values: dict[str, tuple[int, int, int]] = {}
    for field, path in _files(package, project).items():
        matches = list(_PATTERNS[field].finditer(path.read_text(encoding="utf-8")))
        if len(matches) != 1:
            raise VersionError(f"Expected exactly one version entry in {path}; found {len(matches)}.")
        values[field] = parse_version(matches[0].group(2))
    return values


def current_version(
    package: Path = DEFAULT_PACKAGE_FILE,
    project: Path = DEFAULT_PROJECT_FILE,
) -> tuple[int, int, int]:
    values = read_versions(package, project)
    unique = set(values.values())
    if len(unique) != 1:
        rendered = ", ".join(f"{field}={format_version(value)}" for field, value in values.items())
        raise VersionError(f"Version entries are inconsistent: {rendered}")
    return unique.pop()


def _write_atomic(path: Path, text: str) -> None:
    descriptor, temporary_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(descriptor, "w", encoding="utf-8", newline="\n") as stream:
            stream.write(text)
            stream.flush()
            os.fsync(stream.fileno())
        os.replace(temporary_name, path)
    finally:
        if os.path.exists(temporary_name):
            os.unlink(temporary_name)


def set_version(
    value: str,
    package: Path = DEFAULT_PACKAGE_FILE,
    project: Path = DEFAULT_PROJECT_FILE,
) -> tuple[int, int, int]:
    parts = parse_version(value)
    version = format_version(parts)
    updated: dict[Path, str] = {}
    for field, path in _files(package, project).items():
        text, count = _PATTERNS[field].subn(lambda match: f"{match.group(1)}{version}{match.group(3)}",
                                            path.read_text(encoding="utf-8"))
        if count != 1:
            raise VersionError(f"Expected exactly one version entry in {path}; found {count}.")
        updated[path] = text
    for path, text in updated.items():
        _write_atomic(path, text)

    verified = current_version(package, project)
    if verified != parts:
        raise VersionError("Version update did not verify successfully.")
    return verified


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Read, validate, or update the thetastrat version consistently.")
    parser.add_argument("--package-file", type=Path, default=DEFAULT_PACKAGE_FILE, help=argparse.SUPPRESS)
    parser.add_argument("--project-file", type=Path, default=DEFAULT_PROJECT_FILE, help=argparse.SUPPRESS)
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("get", help="Print the validated current version.")
    verify_parser = subparsers.add_parser("verify", help="Validate all version entries.")
    verify_parser.add_argument("--newer-than", help="Also require the current version to be greater than this version.")
    set_parser = subparsers.add_parser("set", help="Update all version entries atomically.")
    set_parser.add_argument("version", help="Semantic version, for example 0.2.0.")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "set":
            version = set_version(args.version, args.package_file, args.project_file)
        else:
            version = current_version(args.package_file, args.project_file)
            if args.command == "verify" and args.newer_than:
                baseline = parse_version(args.newer_than)
                if version <= baseline:
                    raise VersionError(
                        f"Version {format_version(version)} must be greater than {format_version(baseline)}."
                    )
    except (OSError, VersionError) as exc:
        print(f"Version validation failed: {exc}", file=sys.stderr)
        return 1
    print(format_version(version))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
