from __future__ import annotations

import hashlib
import json
import os
import tomllib
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Mapping

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, model_validator

from thetastrat import linalg
from thetastrat.errors import ConfigError, MathPreconditionError
from thetastrat.linalg import Matrix, Vector
from thetastrat.quadforms import WeightedRep, default_norm
from thetastrat.rootdata import DEFAULT_WEYL_CAP, RootDatum, build_root_datum

SCHEMA_VERSION = "v1"
DEFAULT_SEED = 20240601
DEFAULT_PRECISION = 128
DEFAULT_TRUNC_T = 8
DEFAULT_TRUNC_S = 2


def _to_camel(name: str) -> str:
    first, *rest = name.split("_")
    return first + "".join(part.capitalize() for part in rest)


def _parse_rational(value: Any) -> str:
    """Accept ``int`` or ``"p/q"``; floats are rejected so that every input stays exact."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError("Rationals must be integers or strings such as '3/2'; floats are not exact.")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        try:
            return str(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError("Not a rational number; use an integer or a string such as '3/2'.") from exc
    raise ValueError("Rationals must be integers or strings such as '3/2'.")


Rational = Annotated[str, BeforeValidator(_parse_rational)]


class StrictModel(BaseModel):
    model_config = ConfigDict(
        alias_generator=_to_camel,
        populate_by_name=True,
        extra="forbid",
        str_strip_whitespace=True,
        validate_assignment=True,
    )


class Command(str, Enum):
    STRATA = "strata"
    HN_OPT = "hn-opt"
    INDEX = "index"
    GGW = "ggw"
    CHECK = "check"


class IndexMode(str, Enum):
    TW = "tw"
    FULL = "full"
    ADAMS = "adams"
    AB = "ab"


class WeylSignChoice(str, Enum):
    UNITARY = "unitary"
    LITERAL = "literal"


class GroupConfig(StrictModel):
    type: str | None = None
    rank: Annotated[int | None, Field(ge=1)] = None
    roots: list[list[int]] = Field(default_factory=list)
    coroots: list[list[int]] = Field(default_factory=list)
    weyl_cap: Annotated[int, Field(gt=0)] = DEFAULT_WEYL_CAP

    @model_validator(mode="after")
    def validate_shape(self) -> "GroupConfig":
        if self.type is None and self.rank is None:
            raise ValueError("Give either a group type such as 'A1' or an explicit rank with roots and coroots.")
        if self.type is not None and (self.roots or self.coroots):
            raise ValueError("Explicit roots and coroots cannot be combined with a group type.")
        return self


class WeightConfig(StrictModel):
    weight: list[int]
    mult: int = 1


class HNConfig(StrictModel):
    delta_gen: Rational = "0"
    delta_mrk: Rational = "0"
    sigma_gen: list[list[Rational]] = Field(default_factory=list)
    sigma_mrk: list[list[Rational]] = Field(default_factory=list)


class TruncationConfig(StrictModel):
    t: Annotated[int, Field(ge=0)] = DEFAULT_TRUNC_T
    s: Annotated[int, Field(ge=0)] = DEFAULT_TRUNC_S
    q_margin: Annotated[int, Field(ge=0)] = 2


class ClassConfig(StrictModel):
    rank: int = 0
    degree: int | None = None


class RunConfig(StrictModel):
    group: GroupConfig
    x: list[WeightConfig] = Field(default_factory=list)
    v: list[WeightConfig] = Field(default_factory=list)
    b: list[list[Rational]] | None = None
    chi: list[Rational] | None = None
    degree: list[Rational] | None = None
    d_ker: list[Rational] | None = None
    gamma: Rational | None = None
    genus: Annotated[int, Field(ge=0)] = 0
    level: list[list[Rational]] | None = None
    level_scale: Annotated[int, Field(ge=1)] = 1
    u: list[WeightConfig] | None = None
    u_prime: list[WeightConfig] | None = None
    ab_class: ClassConfig = Field(default_factory=ClassConfig)
    index_mode: IndexMode = IndexMode.FULL
    power: Annotated[int, Field(ge=1)] = 1
    depth_limit: Annotated[int, Field(ge=0)] = 4
    point_class_factor: bool = True
    orientation: int = -1
    weyl_sign: WeylSignChoice = WeylSignChoice.UNITARY
    hn: HNConfig = Field(default_factory=HNConfig)
    truncation: TruncationConfig = Field(default_factory=TruncationConfig)
    precision: Annotated[int, Field(ge=32)] = DEFAULT_PRECISION
    seed: int = DEFAULT_SEED
    threads: Annotated[int, Field(ge=1)] = 1

    @model_validator(mode="after")
    def validate_cross_references(self) -> "RunConfig":
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be 1 or -1.")
        try:
            datum = self.datum()
        except MathPreconditionError as exc:
            raise ValueError(str(exc)) from exc
        n = datum.rank
        for label, reps in (("x", self.x), ("v", self.v), ("u", self.u or []), ("uPrime", self.u_prime or [])):
            for entry in reps:
                if len(entry.weight) != n:
                    raise ValueError(f"Every weight in {label} must have {n} entries.")
        for label, vector in (("chi", self.chi), ("degree", self.degree), ("dKer", self.d_ker)):
            if vector is not None and len(vector) != n:
                raise ValueError(f"{label} must have {n} entries.")
        for label, matrix in (("b", self.b), ("level", self.level)):
            if matrix is not None and (len(matrix) != n or any(len(row) != n for row in matrix)):
                raise ValueError(f"{label} must be a {n}x{n} matrix.")
        if self.chi is not None and not datum.is_weyl_invariant_character(linalg.vec(self.chi)):
            raise ValueError("chi must be Weyl-invariant: it must vanish on every simple coroot.")
        if self.degree is not None and not datum.is_central(linalg.vec(self.degree)):
            raise ValueError("degree must lie in N^W: it must pair to zero with every simple root.")
        return self

    def datum(self) -> RootDatum:
        group = self.group
        if group.type is not None:
            return build_root_datum(group.type, weyl_cap=group.weyl_cap)
        return build_root_datum(coroots=group.coroots, roots=group.roots, rank=group.rank, weyl_cap=group.weyl_cap)

    @staticmethod
    def _rep(entries: list[WeightConfig] | None) -> WeightedRep | None:
        if entries is None:
            return None
        return WeightedRep.from_pairs((entry.weight, entry.mult) for entry in entries)

    def x_rep(self) -> WeightedRep:
        return self._rep(self.x) or WeightedRep.empty()

    def v_rep(self) -> WeightedRep:
        return self._rep(self.v) or WeightedRep.empty()

    def u_rep(self) -> WeightedRep | None:
        return self._rep(self.u)

    def u_prime_rep(self) -> WeightedRep | None:
        return self._rep(self.u_prime)

    def norm(self, datum: RootDatum) -> Matrix:
        return linalg.mat(self.b) if self.b is not None else default_norm(datum)

    def chi_vector(self, n: int) -> Vector:
        return linalg.vec(self.chi) if self.chi is not None else linalg.zero_vector(n)

    def degree_vector(self, n: int) -> Vector:
        return linalg.vec(self.degree) if self.degree is not None else linalg.zero_vector(n)

    def d_ker_vector(self) -> Vector | None:
        return None if self.d_ker is None else linalg.vec(self.d_ker)

    def level_matrix(self) -> Matrix | None:
        return None if self.level is None else linalg.mat(self.level)


def _format_error(exc: ValidationError) -> str:
    lines = []
    for error in exc.errors(include_url=False, include_input=False, include_context=False):
        location = ".".join(str(part) for part in error.get("loc", ())) or "<root>"
        lines.append(f"{location}: {error.get('msg', 'invalid value')}")
    return "; ".join(lines)


def parse_run_config(payload: Mapping[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(dict(payload))
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration: {_format_error(exc)}") from exc


def load_run_config(path: Path | str) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as stream:
            payload = tomllib.load(stream)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"Cannot read configuration {path}: {exc.strerror or exc}") from exc
    return parse_run_config(payload)


def canonical_payload(config: RunConfig) -> dict[str, Any]:
    return config.model_dump(mode="json", by_alias=True, exclude_none=True)


def config_fingerprint(config: RunConfig) -> str:
    canonical = json.dumps(canonical_payload(config), ensure_ascii=True, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Return a copy with CLI overrides applied; ``None`` values leave the config untouched."""
    updates: dict[str, Any] = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "trunc_t":
            updates["truncation"] = config.truncation.model_copy(update={"t": value})
        else:
            updates[key] = value
    if not updates:
        return config
    payload = config.model_dump(by_alias=False)
    for key, value in updates.items():
        payload[key] = value.model_dump() if isinstance(value, BaseModel) else value
    return parse_run_config(payload)


def environment_default(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return fallback
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer.") from exc


__all__ = [
    "ClassConfig",
    "Command",
    "DEFAULT_PRECISION",
    "DEFAULT_SEED",
    "GroupConfig",
    "HNConfig",
    "IndexMode",
    "RunConfig",
    "SCHEMA_VERSION",
    "StrictModel",
    "TruncationConfig",
    "WeightConfig",
    "WeylSignChoice",
    "apply_overrides",
    "canonical_payload",
    "config_fingerprint",
    "environment_default",
    "load_run_config",
    "parse_run_config",
]
