"""Method names of the experiment grid, e.g. ``NoAdapt``, ``Ours(CC+I+SP)``, ``SPLndmk(CC)``."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import StrEnum

from curda.errors import ConfigError

_PATTERN = re.compile(r"^\s*(NoAdapt|Ours|SP\s*Lndmk|SP)\s*(?:\(([^()]*)\))?\s*$")


class Family(StrEnum):
    NO_ADAPT = "NoAdapt"
    OURS = "Ours"
    SP = "SP"
    SP_LANDMARK = "SPLndmk"


@dataclass(frozen=True)
class MethodSpec:
    family: Family
    cc: bool = False
    image_term: bool = False
    sp_term: bool = False

    @property
    def name(self) -> str:
        tokens = [token for token, on in (("CC", self.cc), ("I", self.image_term), ("SP", self.sp_term)) if on]
        return f"{self.family.value}({'+'.join(tokens)})" if tokens else self.family.value

    @property
    def slug(self) -> str:
        """Directory-safe form of the name."""
        return self.name.replace("(", "_").replace(")", "").replace("+", "-")

    @property
    def trains_network(self) -> bool:
        return self.family in (Family.NO_ADAPT, Family.OURS)

    @property
    def needs_landmarks(self) -> bool:
        return self.sp_term or self.family in (Family.SP, Family.SP_LANDMARK)

    def with_cc(self, cc: bool | None) -> MethodSpec:
        return self if cc is None else replace(self, cc=cc)


def parse_method(text: str) -> MethodSpec:
    """
    Parse a method name.

    Raises:
        ConfigError: naming ``methods`` when the name or its tokens are invalid.
    """
    match = _PATTERN.match(text)
    if match is None:
        raise ConfigError("methods", f"unknown method {text!r}")
    family = Family.SP_LANDMARK if match.group(1).replace(" ", "") == "SPLndmk" else Family(match.group(1))
    raw = match.group(2)
    tokens = [token.strip() for token in raw.split("+")] if raw and raw.strip() else []
    unknown = [token for token in tokens if token not in {"CC", "I", "SP"}]
    if unknown or len(set(tokens)) != len(tokens):
        raise ConfigError("methods", f"invalid options in {text!r}")
    spec = MethodSpec(family=family, cc="CC" in tokens, image_term="I" in tokens, sp_term="SP" in tokens)
    if family is Family.OURS and not (spec.image_term or spec.sp_term):
        raise ConfigError("methods", f"{text!r} needs at least one of I and SP")
    if family is not Family.OURS and (spec.image_term or spec.sp_term):
        raise ConfigError("methods", f"{text!r} only accepts the CC option")
    return spec


def parse_methods(names: tuple[str, ...] | list[str], cc: bool | None = None) -> list[MethodSpec]:
    """Parse and de-duplicate (after the CC override) in the given order."""
    specs: list[MethodSpec] = []
    for name in names:
        spec = parse_method(name).with_cc(cc)
        if spec not in specs:
            specs.append(spec)
    return specs
