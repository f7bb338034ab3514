"""Prompt construction and response parsing for the configuration LLM.

The model is asked for exactly one fenced block of ``id: level`` lines, for
example::

    ```config
    clique: aggressive
    gomory: off
    ```

Separators the model leaves out fall back to ``default``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..catalog import (
    Configuration,
    Provenance,
    SeparatorCatalog,
    SettingLevel,
    make_configuration,
)
from ..errors import (
    EmptyCatalog,
    EmptyHistogram,
    IllegalLevel,
    NoBlockFound,
    ParseError,
    UnknownSeparator,
    ValidationError,
)
from ..mps.classify import StructureHistogram

DEFAULT_TEMPERATURE = 1.0
DEFAULT_MODEL = "gpt-4o"

_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)
_LINE = re.compile(r"^\s*[-*]?\s*`?([A-Za-z0-9_./-]+)`?\s*[:=]\s*`?([A-Za-z]+)`?\s*[,;]?\s*(?:#.*)?$")


class CardSource(str, enum.Enum):
    AUTHORED = "authored"
    LLM_GENERATED = "llm_generated"


@dataclass(frozen=True)
class ProblemCard:
    title: str
    description: str
    latex_model: str = ""
    source: CardSource = CardSource.AUTHORED
    source_index: int | None = None

    def __post_init__(self):
        if self.source is CardSource.AUTHORED and not self.description.strip():
            raise ValidationError(f"problem card {self.title!r} has an empty description")

    def to_dict(self) -> dict:
        doc = {
            "title": self.title,
            "description": self.description,
            "latex_model": self.latex_model,
            "source": self.source.value,
        }
        if self.source_index is not None:
            doc["source_index"] = self.source_index
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemCard":
        try:
            return cls(
                title=str(doc.get("title", "")),
                description=str(doc["description"]),
                latex_model=str(doc.get("latex_model") or doc.get("latex") or ""),
                source=CardSource(doc.get("source", "authored")),
                source_index=doc.get("source_index"),
            )
        except KeyError as exc:
            raise ParseError(f"problem card lacks field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    @property
    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_card(path: str | Path) -> ProblemCard:
    """Read a problem card from YAML (``title``, ``description``, ``latex_model``)."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed card: {exc}", path=str(path)) from None
    if not isinstance(doc, dict):
        raise ParseError("card must be a mapping", path=str(path))
    return ProblemCard.from_dict(doc)


@dataclass(frozen=True)
class PromptFlags:
    separator_descriptions: bool = True
    problem_text: bool = True
    latex_model: bool = True

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_names(cls, off: list[str] | tuple[str, ...] = ()) -> "PromptFlags":
        """Flags with the named components switched off."""
        known = set(cls.__dataclass_fields__)
        bad = [n for n in off if n not in known]
        if bad:
            raise ValueError(f"unknown prompt component(s): {', '.join(bad)}")
        return cls(**{n: n not in off for n in known})


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    flags: PromptFlags
    temperature: float = DEFAULT_TEMPERATURE
    model_id: str = DEFAULT_MODEL

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def digest(self) -> str:
        """Hash of everything the endpoint sees; keys the replay store."""
        blob = json.dumps(
            [self.system_text, self.user_text, self.temperature, self.model_id],
            ensure_ascii=False,
        ).encode()
        return hashlib.sha256(blob).hexdigest()


CONFIG_SYSTEM = (
    "You are an expert in mixed integer linear programming and in tuning the cutting plane "
    "separators of branch-and-cut solvers. You answer with a separator configuration in the "
    "exact block format requested and nothing that would make that block ambiguous."
)

DESCRIPTION_SYSTEM = (
    "You are an expert in mixed integer linear programming modelling. Given structural "
    "statistics of an instance, you propose realistic optimization problems that would give "
    "rise to that structure."
)


def _separator_section(catalog: SeparatorCatalog, with_descriptions: bool) -> str:
    lines = []
    for spec in catalog.separators:
        head = f"- {spec.id} (parameter {spec.solver_param}): {spec.display_name}"
        if with_descriptions and spec.description:
            head += f". {spec.description}"
        lines.append(head)
    return "\n".join(lines)


def build_config_prompt(
    card: ProblemCard,
    catalog: SeparatorCatalog,
    flags: PromptFlags = PromptFlags(),
    *,
    temperature: float = DEFAULT_TEMPERATURE,
    model_id: str = DEFAULT_MODEL,
) -> PromptBundle:
    if len(catalog) == 0:
        raise EmptyCatalog("catalog has no separators")
    if flags.problem_text and not card.description.strip():
        raise ValidationError("problem text requested but the card has no description")

    levels = sorted(catalog.allowed_levels)
    level_words = ", ".join(lv.label for lv in levels)
    parts = [
        f"Solver: {catalog.solver.value} ({catalog.version_tag}).",
        "",
        "Available cutting plane separators:",
        _separator_section(catalog, flags.separator_descriptions),
    ]
    if flags.problem_text:
        title = f" ({card.title})" if card.title else ""
        parts += ["", f"Problem{title}:", card.description.strip()]
    if flags.latex_model and card.latex_model.strip():
        parts += ["", "Formulation:", "$$", card.latex_model.strip(), "$$"]
    if not flags.problem_text and not (flags.latex_model and card.latex_model.strip()):
        parts += ["", "No information about the problem is available; rely on the solver alone."]
    parts += [
        "",
        "Decide for each separator whether it should be " + level_words + " when solving "
        "instances of this problem. Think about which constraint structures the problem has "
        "and which cut families exploit them; switching off useless separators saves time.",
        "",
        "Reply with exactly one fenced code block tagged config. Inside it write one line per "
        "separator in the form `id: level`, using the ids listed above and one of: "
        + level_words + ". Separators you leave out keep their default setting.",
    ]
    # flags record what actually went in, so a card without LaTeX reports latex_model off
    included = PromptFlags(
        separator_descriptions=flags.separator_descriptions
        and any(s.description for s in catalog.separators),
        problem_text=flags.problem_text,
        latex_model=flags.latex_model and bool(card.latex_model.strip()),
    )
    return PromptBundle(CONFIG_SYSTEM, "\n".join(parts) + "\n", included, temperature, model_id)


def _first_block(raw: str) -> str:
    match = _FENCE.search(raw)
    if match is None:
        raise NoBlockFound("response contains no fenced block")
    return match.group(2)


def parse_config_response(
    raw: str, catalog: SeparatorCatalog, provenance: Provenance | None = None
) -> Configuration:
    """Turn a model reply into a validated configuration.

    Ids may be given as catalog ids or as the solver parameter name, in any
    case. Unknown names raise :class:`UnknownSeparator` listing all of them.
    """
    body = _first_block(raw)
    aliases: dict[str, str] = {}
    for spec in catalog.separators:
        aliases[spec.id.lower()] = spec.id
        aliases[spec.solver_param.lower()] = spec.id
    chosen: dict[str, SettingLevel] = {}
    unknown: list[str] = []
    for line in body.splitlines():
        if not line.strip() or line.strip().startswith("#"):
            continue
        match = _LINE.match(line)
        if match is None:
            raise IllegalLevel(f"cannot read block line {line.strip()!r}")
        name, level_text = match.groups()
        sep_id = aliases.get(name.lower())
        if sep_id is None:
            unknown.append(name)
            continue
        level = SettingLevel.parse(level_text)
        if sep_id in chosen and chosen[sep_id] != level:
            raise IllegalLevel(f"separator {sep_id!r} assigned two different levels")
        chosen[sep_id] = level
    if unknown:
        raise UnknownSeparator(unknown)
    levels = {i: chosen.get(i, SettingLevel.DEFAULT) for i in catalog.ids}
    return make_configuration(catalog, levels, provenance)


def build_description_prompt(
    hist: StructureHistogram,
    k_desc: int,
    *,
    temperature: float = DEFAULT_TEMPERATURE,
    model_id: str = DEFAULT_MODEL,
) -> PromptBundle:
    if k_desc < 1:
        raise ValueError("k_desc must be >= 1")
    present = hist.present()
    if not present:
        raise EmptyHistogram("histogram has no constraints")
    rows = [f"- {t.title}: {count}" for t, count in present]
    noun = "one description" if k_desc == 1 else f"{k_desc} distinct descriptions"
    parts = [
        f"An instance has {hist.n_vars} variables ({hist.n_binary} binary, {hist.n_integer} "
        f"general integer, {hist.n_continuous} continuous) and {hist.n_constrs} constraints.",
        "Constraint types present (MIPLIB 2017 classification) with counts:",
        *rows,
        "",
        f"Write {noun} of real optimization problems whose natural model has this structure. "
        "Each description should say what is decided, what is optimized and what the main "
        "constraints mean, in a short paragraph.",
        "",
        "Put each description in its own fenced code block tagged description, with the "
        "problem title on the first line.",
    ]
    bundle_flags = PromptFlags(separator_descriptions=False, problem_text=False, latex_model=False)
    return PromptBundle(DESCRIPTION_SYSTEM, "\n".join(parts) + "\n", bundle_flags, temperature, model_id)


def parse_descriptions(raw: str, k_desc: int) -> list[ProblemCard]:
    """Cards for the first ``k_desc`` non-empty fenced blocks in ``raw``."""
    cards = []
    for match in _FENCE.finditer(raw):
        text = match.group(2).strip()
        if not text:
            continue
        first, _, rest = text.partition("\n")
        title = first.strip().lstrip("#").strip().strip("*").strip()
        body = rest.strip() or text
        cards.append(
            ProblemCard(
                title=title,
                description=body,
                source=CardSource.LLM_GENERATED,
                source_index=len(cards),
            )
        )
        if len(cards) == k_desc:
            break
    if not cards:
        raise NoBlockFound("response contains no description blocks")
    return cards


__all__ = [
    "CardSource",
    "PromptBundle",
    "PromptFlags",
    "ProblemCard",
    "build_config_prompt",
    "build_description_prompt",
    "load_card",
    "parse_config_response",
    "parse_descriptions",
]
