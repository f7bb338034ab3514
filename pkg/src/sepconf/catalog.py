"""Separator catalogs, configurations, and solver settings rendering.

A catalog lists the cutting plane separators a solver exposes, the text shown
to the LLM for each one, and how each setting level is written into the
solver's native settings file. Catalogs are data (YAML files); three ship
with the package under ``sepconf/catalogs``.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import yaml

from .errors import (
    CatalogMismatch,
    IllegalLevel,
    ParseError,
    UnknownSeparator,
    ValidationError,
)

MAX_DESCRIPTION_WORDS = 200


class SettingLevel(enum.IntEnum):
    OFF = 0
    DEFAULT = 1
    AGGRESSIVE = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text) -> "SettingLevel":
        if isinstance(text, SettingLevel):
            return text
        key = str(text).strip().lower()
        for level in cls:
            if level.label == key:
                return level
        raise IllegalLevel(f"not a setting level: {text!r}")


class Solver(str, enum.Enum):
    SCIP = "scip"
    GUROBI = "gurobi"
    STUB = "stub"


@dataclass(frozen=True)
class SeparatorSpec:
    id: str
    solver_param: str
    display_name: str
    description: str
    renderings: Mapping[SettingLevel, tuple[tuple[str, str], ...]]
    stats_names: tuple[str, ...] = ()


@dataclass(frozen=True)
class CatalogRef:
    solver: Solver
    version_tag: str
    content_hash: str

    def to_dict(self) -> dict:
        return {
            "solver": self.solver.value,
            "version_tag": self.version_tag,
            "content_hash": self.content_hash,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CatalogRef":
        return cls(Solver(doc["solver"]), doc["version_tag"], doc["content_hash"])


@dataclass(frozen=True)
class SeparatorCatalog:
    solver: Solver
    version_tag: str
    separators: tuple[SeparatorSpec, ...]
    allowed_levels: frozenset[SettingLevel]
    content_hash: str

    @property
    def ref(self) -> CatalogRef:
        return CatalogRef(self.solver, self.version_tag, self.content_hash)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.separators)

    def __len__(self) -> int:
        return len(self.separators)

    def get(self, sep_id: str) -> SeparatorSpec:
        for spec in self.separators:
            if spec.id == sep_id:
                return spec
        raise UnknownSeparator([sep_id])

    def stats_name_map(self) -> dict[str, str]:
        """Map solver statistics row names to separator ids."""
        out = {}
        for spec in self.separators:
            for name in spec.stats_names:
                out[name.strip().lower()] = spec.id
        return out


@dataclass(frozen=True)
class Provenance:
    kind: str  # llm_sample | ensemble | baseline | manual
    index: int | None = None
    detail: str | None = None
    source: int | None = None

    @classmethod
    def llm_sample(cls, index: int, source: int | None = None) -> "Provenance":
        return cls("llm_sample", index=index, source=source)

    @classmethod
    def ensemble(cls, strategy: str) -> "Provenance":
        return cls("ensemble", detail=strategy)

    @classmethod
    def baseline(cls, name: str) -> "Provenance":
        return cls("baseline", detail=name)

    @classmethod
    def manual(cls) -> "Provenance":
        return cls("manual")

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Provenance":
        return cls(
            doc["kind"],
            index=doc.get("index"),
            detail=doc.get("detail"),
            source=doc.get("source"),
        )


@dataclass(frozen=True)
class Configuration:
    """One setting level per catalog separator.

    ``ids`` and ``vector`` are aligned and in catalog order. Provenance is
    carried along but ignored by equality and hashing, so two samples that
    chose the same levels compare equal.
    """

    catalog_ref: CatalogRef
    ids: tuple[str, ...]
    vector: tuple[SettingLevel, ...]
    provenance: Provenance = field(default_factory=Provenance.manual, compare=False)

    @property
    def levels(self) -> dict[str, SettingLevel]:
        return dict(zip(self.ids, self.vector))

    def level(self, sep_id: str) -> SettingLevel:
        try:
            return self.vector[self.ids.index(sep_id)]
        except ValueError:
            raise UnknownSeparator([sep_id]) from None

    def n_non_default(self) -> int:
        return sum(1 for lv in self.vector if lv != SettingLevel.DEFAULT)

    def n_enabled(self) -> int:
        return sum(1 for lv in self.vector if lv != SettingLevel.OFF)

    @property
    def digest(self) -> str:
        text = self.catalog_ref.content_hash + ":" + ",".join(lv.label for lv in self.vector)
        return hashlib.sha256(text.encode()).hexdigest()

    def with_provenance(self, provenance: Provenance) -> "Configuration":
        return Configuration(self.catalog_ref, self.ids, self.vector, provenance)

    def short(self) -> str:
        return " ".join(f"{i}={lv.label}" for i, lv in self.levels.items())


def make_configuration(
    catalog: SeparatorCatalog,
    levels: Mapping[str, SettingLevel | str],
    provenance: Provenance | None = None,
) -> Configuration:
    """Build a validated, total configuration from an id -> level mapping."""
    unknown = [k for k in levels if k not in catalog.ids]
    if unknown:
        raise UnknownSeparator(unknown)
    missing = [i for i in catalog.ids if i not in levels]
    if missing:
        raise ValidationError(f"configuration missing separators: {', '.join(missing)}")
    vector = []
    for sep_id in catalog.ids:
        lv = SettingLevel.parse(levels[sep_id])
        if lv not in catalog.allowed_levels:
            raise IllegalLevel(f"level {lv.label!r} not allowed for {sep_id!r} in this catalog")
        vector.append(lv)
    return Configuration(catalog.ref, catalog.ids, tuple(vector), provenance or Provenance.manual())


def require_same_catalog(a: Configuration | CatalogRef, b: Configuration | CatalogRef) -> None:
    ra = a.catalog_ref if isinstance(a, Configuration) else a
    rb = b.catalog_ref if isinstance(b, Configuration) else b
    if ra != rb:
        raise CatalogMismatch(
            f"catalog mismatch: {ra.solver.value}/{ra.version_tag}/{ra.content_hash[:12]} "
            f"vs {rb.solver.value}/{rb.version_tag}/{rb.content_hash[:12]}"
        )


# --------------------------------------------------------------------------
# Catalog files
# --------------------------------------------------------------------------


def _value_text(value) -> str:
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _canonical(doc: Mapping) -> dict:
    seps = []
    for s in doc["separators"]:
        seps.append(
            {
                "id": s.id,
                "solver_param": s.solver_param,
                "display_name": s.display_name,
                "description": s.description,
                "stats_names": list(s.stats_names),
                "levels": {
                    lv.label: [list(p) for p in s.renderings[lv]]
                    for lv in sorted(s.renderings)
                },
            }
        )
    return {
        "solver": doc["solver"].value,
        "version_tag": doc["version_tag"],
        "allowed_levels": [lv.label for lv in sorted(doc["allowed_levels"])],
        "separators": seps,
    }


def catalog_from_dict(doc: Mapping, source: str = "<catalog>") -> SeparatorCatalog:
    """Validate a parsed catalog document and compute its content hash."""
    if not isinstance(doc, Mapping):
        raise ParseError("catalog document must be a mapping", path=source)
    for key in ("solver", "version_tag", "separators"):
        if key not in doc:
            raise ParseError(f"catalog missing field {key!r}", path=source)
    try:
        solver = Solver(str(doc["solver"]).lower())
    except ValueError:
        raise ParseError(f"unknown solver {doc['solver']!r}", path=source) from None
    try:
        allowed = frozenset(
            SettingLevel.parse(x) for x in doc.get("allowed_levels", ["off", "default", "aggressive"])
        )
    except IllegalLevel as exc:
        raise ParseError(str(exc), path=source) from None
    if len(allowed) < 2 or SettingLevel.DEFAULT not in allowed:
        raise ValidationError("allowed_levels needs at least two levels including 'default'")

    raw_seps = doc["separators"]
    if not isinstance(raw_seps, list):
        raise ParseError("'separators' must be a list", path=source)
    if not raw_seps:
        raise ValidationError("catalog has no separators")

    seps = []
    seen_ids, seen_params = set(), set()
    for n, raw in enumerate(raw_seps):
        if not isinstance(raw, Mapping):
            raise ParseError(f"separator #{n} is not a mapping", path=source)
        for key in ("id", "solver_param", "levels"):
            if key not in raw:
                raise ParseError(f"separator #{n} missing field {key!r}", path=source)
        sep_id = str(raw["id"])
        param = str(raw["solver_param"]).strip()
        if not param:
            raise ValidationError(f"separator {sep_id!r} has an empty solver_param")
        if sep_id in seen_ids:
            raise ValidationError(f"duplicate separator id {sep_id!r}")
        if param in seen_params:
            raise ValidationError(f"duplicate solver_param {param!r}")
        seen_ids.add(sep_id)
        seen_params.add(param)

        description = " ".join(str(raw.get("description", "")).split())
        if len(description.split()) > MAX_DESCRIPTION_WORDS:
            raise ValidationError(
                f"description of {sep_id!r} exceeds {MAX_DESCRIPTION_WORDS} words"
            )

        raw_levels = raw["levels"]
        if not isinstance(raw_levels, Mapping):
            raise ParseError(f"levels of {sep_id!r} must be a mapping", path=source)
        renderings = {}
        for key, pairs in raw_levels.items():
            try:
                lv = SettingLevel.parse(key)
            except IllegalLevel as exc:
                raise ParseError(f"{sep_id}: {exc}", path=source) from None
            pairs = pairs or []
            rendered = []
            for pair in pairs:
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ParseError(
                        f"{sep_id}/{lv.label}: rendering entries are [path, value] pairs",
                        path=source,
                    )
                rendered.append((str(pair[0]), _value_text(pair[1])))
            renderings[lv] = tuple(rendered)
        missing = [lv.label for lv in sorted(allowed) if lv not in renderings]
        if missing:
            raise ValidationError(f"separator {sep_id!r} missing renderings for {missing}")

        stats = raw.get("stats_names") or []
        if isinstance(stats, str):
            stats = [stats]
        seps.append(
            SeparatorSpec(
                id=sep_id,
                solver_param=param,
                display_name=str(raw.get("display_name", sep_id)),
                description=description,
                renderings=renderings,
                stats_names=tuple(str(x) for x in stats),
            )
        )

    canon = _canonical(
        {
            "solver": solver,
            "version_tag": str(doc["version_tag"]),
            "allowed_levels": allowed,
            "separators": seps,
        }
    )
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    digest = hashlib.sha256(blob.encode("utf-8")).hexdigest()
    return SeparatorCatalog(
        solver=solver,
        version_tag=str(doc["version_tag"]),
        separators=tuple(seps),
        allowed_levels=allowed,
        content_hash=digest,
    )


def load_catalog(path: str | Path) -> SeparatorCatalog:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        line = getattr(getattr(exc, "problem_mark", None), "line", None)
        raise ParseError(f"malformed catalog: {exc}", line=None if line is None else line + 1,
                         path=str(path)) from None
    return catalog_from_dict(doc, source=str(path))


BUILTIN_CATALOGS = ("gurobi", "scip", "stub")


def builtin_catalog_path(name: str) -> Path:
    if name not in BUILTIN_CATALOGS:
        raise ValueError(f"no built-in catalog {name!r}; choose from {BUILTIN_CATALOGS}")
    return Path(str(resources.files("sepconf") / "catalogs" / f"{name}.yaml"))


def resolve_catalog(name_or_path: str | Path) -> SeparatorCatalog:
    """Load a built-in catalog by name, or a catalog file by path."""
    if str(name_or_path) in BUILTIN_CATALOGS:
        return load_catalog(builtin_catalog_path(str(name_or_path)))
    return load_catalog(name_or_path)


# --------------------------------------------------------------------------
# Configurations
# --------------------------------------------------------------------------


def default_configuration(catalog: SeparatorCatalog) -> Configuration:
    return Configuration(
        catalog.ref,
        catalog.ids,
        tuple(SettingLevel.DEFAULT for _ in catalog.separators),
        Provenance.manual(),
    )


def render_settings(config: Configuration, catalog: SeparatorCatalog) -> str:
    """Render the settings delta for ``config`` in the solver's file syntax.

    SCIP (and the stub) use ``path = value`` lines, Gurobi ``.prm`` files use
    ``Name value``. Output is deterministic for a given (config, catalog).
    """
    require_same_catalog(config.catalog_ref, catalog.ref)
    lines = []
    for spec, lv in zip(catalog.separators, config.vector):
        for path, value in spec.renderings.get(lv, ()):
            lines.append(format_setting(catalog.solver, path, value))
    return "".join(line + "\n" for line in lines)


def format_setting(solver: Solver, path: str, value) -> str:
    value = _value_text(value)
    if solver is Solver.GUROBI:
        return f"{path} {value}"
    return f"{path} = {value}"


def serialize_configuration(config: Configuration) -> str:
    doc = {
        "catalog": config.catalog_ref.content_hash,
        "partial": False,
        "levels": {i: lv.label for i, lv in zip(config.ids, config.vector)},
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_configuration(doc: str, catalog: SeparatorCatalog) -> Configuration:
    """Parse a configuration interchange document against ``catalog``.

    Missing separators are filled with ``default`` only when the document
    declares ``"partial": true``.
    """
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed configuration document: {exc.msg}", line=exc.lineno) from None
    if not isinstance(data, dict) or not isinstance(data.get("levels"), dict):
        raise ParseError("configuration document needs a 'levels' mapping")
    declared = data.get("catalog")
    if declared is not None and declared != catalog.content_hash:
        raise CatalogMismatch(
            f"document targets catalog {str(declared)[:12]}, got {catalog.content_hash[:12]}"
        )
    partial = data.get("partial", False)
    if not isinstance(partial, bool):
        raise ParseError("'partial' must be true or false")
    raw = data["levels"]
    unknown = [k for k in raw if k not in catalog.ids]
    if unknown:
        raise UnknownSeparator(unknown)
    missing = [i for i in catalog.ids if i not in raw]
    if missing and not partial:
        raise ParseError(f"document omits separators {missing} but is not marked partial")
    levels = {i: raw.get(i, "default") for i in catalog.ids}
    return make_configuration(catalog, levels, Provenance.manual())


def configurations_from_vectors(
    catalog: SeparatorCatalog, vectors: Iterable[Iterable[SettingLevel | str | int]]
) -> list[Configuration]:
    """Convenience constructor used by tests and the stub tables."""
    out = []
    for vec in vectors:
        vec = [SettingLevel(v) if isinstance(v, int) else SettingLevel.parse(v) for v in vec]
        out.append(make_configuration(catalog, dict(zip(catalog.ids, vec))))
    return out


@dataclass(frozen=True)
class ConfigurationPool:
    """Ordered multiset of configurations over one catalog.

    Duplicates are kept: they weight clusters during ensembling.
    """

    catalog_ref: CatalogRef
    configs: tuple[Configuration, ...]

    def __post_init__(self):
        for cfg in self.configs:
            require_same_catalog(cfg.catalog_ref, self.catalog_ref)

    @classmethod
    def of(cls, configs: Iterable[Configuration], catalog_ref: CatalogRef | None = None) -> "ConfigurationPool":
        configs = tuple(configs)
        if catalog_ref is None:
            if not configs:
                raise ValidationError("cannot infer the catalog of an empty pool")
            catalog_ref = configs[0].catalog_ref
        return cls(catalog_ref, configs)

    def __len__(self) -> int:
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)

    def __getitem__(self, i: int) -> Configuration:
        return self.configs[i]

    @property
    def digest(self) -> str:
        h = hashlib.sha256(self.catalog_ref.content_hash.encode())
        for cfg in self.configs:
            h.update(cfg.digest.encode())
        return h.hexdigest()
