"""Content-addressed artifact store.

Layout::

    <root>/<kind>/<content_hash>.json     one file per artifact, never rewritten
    <root>/<kind>/<content_hash>.csv      optional tabular companion
    <root>/runs.jsonl                     append-only index: run id, kind, hash, time

Artifact files hold only deterministic content, so replaying a command
with the same inputs yields byte-identical files. Run ids (timestamp plus
hash prefix) live in the index.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import __version__
from .catalog import CatalogRef, Configuration, ConfigurationPool, Provenance, SeparatorCatalog, \
    make_configuration
from .errors import SchemaMismatch

SCHEMA = 1
KINDS = ("pool", "selection", "eval", "textfree", "report")


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def content_hash(doc: Any) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.{threading.get_ident()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


class Artifact(dict):
    @property
    def hash(self) -> str:
        return self["content_hash"]

    @property
    def kind(self) -> str:
        return self["kind"]

    @property
    def inputs(self) -> dict:
        return self["inputs"]

    @property
    def outputs(self) -> dict:
        return self["outputs"]


class ArtifactStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    def path(self, kind: str, digest: str, suffix: str = ".json") -> Path:
        return self.root / kind / f"{digest}{suffix}"

    def put(self, kind: str, inputs: Mapping, outputs: Mapping, csv_text: str | None = None) -> tuple[Artifact, str]:
        """Write an artifact; returns it with its run id."""
        if kind not in KINDS:
            raise ValueError(f"unknown artifact kind {kind!r}")
        body = {"kind": kind, "schema": SCHEMA, "tool_version": __version__,
                "inputs": inputs, "outputs": outputs}
        # round-trip through JSON so the hash covers exactly what is stored
        body = json.loads(json.dumps(body))
        digest = content_hash(body)
        art = Artifact(body, content_hash=digest)
        text = canonical_json(art)
        path = self.path(kind, digest)
        with self._lock:
            if path.exists():
                if path.read_text() != text:
                    raise SchemaMismatch(f"artifact {path} exists with different content")
            else:
                _atomic_write(path, text)
            if csv_text is not None:
                cpath = self.path(kind, digest, ".csv")
                if not cpath.exists():
                    _atomic_write(cpath, csv_text)
            now = datetime.now(timezone.utc)
            run_id = f"{now.strftime('%Y%m%dT%H%M%S.%fZ')}-{digest[:12]}"
            self.root.mkdir(parents=True, exist_ok=True)
            with open(self.root / "runs.jsonl", "a") as fh:
                fh.write(json.dumps({"run_id": run_id, "kind": kind, "hash": digest,
                                     "created": now.isoformat()}) + "\n")
        return art, run_id

    def resolve(self, ref: str | Path, kind: str | None = None) -> Path:
        """Accept a file path, a full hash or a unique hash prefix."""
        p = Path(ref)
        if p.is_file():
            return p
        kinds = [kind] if kind else list(KINDS)
        hits = []
        for k in kinds:
            d = self.root / k
            if d.is_dir():
                hits += [f for f in d.glob(f"{ref}*.json")]
        if not hits:
            raise FileNotFoundError(f"no artifact matches {ref!r} in {self.root}")
        if len(hits) > 1:
            raise FileNotFoundError(f"artifact reference {ref!r} is ambiguous")
        return hits[0]

    def load(self, ref: str | Path, kind: str | None = None) -> Artifact:
        path = self.resolve(ref, kind)
        doc = json.loads(path.read_text())
        if doc.get("schema") != SCHEMA:
            raise SchemaMismatch(f"{path}: schema {doc.get('schema')} (expected {SCHEMA})")
        if kind is not None and doc.get("kind") != kind:
            raise SchemaMismatch(f"{path}: expected a {kind} artifact, found {doc.get('kind')}")
        return Artifact(doc)

    def runs(self) -> list[dict]:
        path = self.root / "runs.jsonl"
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


# -- (de)serialization of domain objects ----------------------------------------


def config_to_dict(cfg: Configuration) -> dict:
    return {
        "levels": [lv.label for lv in cfg.vector],
        "provenance": cfg.provenance.to_dict(),
        "digest": cfg.digest,
    }


def config_from_dict(doc: Mapping, catalog: SeparatorCatalog) -> Configuration:
    levels = dict(zip(catalog.ids, doc["levels"]))
    if len(doc["levels"]) != len(catalog.ids):
        raise SchemaMismatch("configuration length does not match the catalog")
    cfg = make_configuration(catalog, levels, Provenance.from_dict(doc.get("provenance", {"kind": "manual"})))
    if "digest" in doc and doc["digest"] != cfg.digest:
        raise SchemaMismatch("configuration digest mismatch; wrong catalog?")
    return cfg


def pool_to_dict(pool: ConfigurationPool) -> dict:
    return {
        "catalog": pool.catalog_ref.to_dict(),
        "ids": list(pool.configs[0].ids) if pool.configs else [],
        "configs": [config_to_dict(c) for c in pool],
        "digest": pool.digest,
    }


def pool_from_dict(doc: Mapping, catalog: SeparatorCatalog) -> ConfigurationPool:
    ref = CatalogRef.from_dict(doc["catalog"])
    if ref.content_hash != catalog.content_hash:
        raise SchemaMismatch("pool was generated for a different catalog")
    return ConfigurationPool(catalog.ref, tuple(config_from_dict(c, catalog) for c in doc["configs"]))


def records_csv(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    """CSV with floats in shortest round-trip form so values survive re-reading exactly."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in columns)])
    return buf.getvalue()
