"""Ingestion file formats and snapshot directories.

* interactions: CSV ``user_id,resource_id,timestamp_ms,kind`` with header
* resources: JSON lines ``{"resource_id", "title", "description", "categories"}``
* tags: CSV ``user_id,resource_id,tag,timestamp_ms`` with header

A snapshot directory holds the three files plus ``manifest.json`` with the
dataset counts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from socialrec.errors import ValidationError
from socialrec.store import DatasetStats, Interaction, Resource, Store, TagAssignment

INTERACTIONS_FILE = "interactions.csv"
RESOURCES_FILE = "resources.jsonl"
TAGS_FILE = "tags.csv"
MANIFEST_FILE = "manifest.json"

INTERACTION_HEADER = ["user_id", "resource_id", "timestamp_ms", "kind"]
TAG_HEADER = ["user_id", "resource_id", "tag", "timestamp_ms"]


@dataclass
class ParseResult:
    records: list[Any] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)


def _parse_int(value: str, name: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be an integer, got {value!r}") from None


def _csv_rows(text: str, header: list[str]) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    first = next(reader, None)
    if first is None or [c.strip() for c in first] != header:
        raise ValidationError(f"expected header row {','.join(header)}")
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        yield reader.line_num, row


def parse_interactions(text: str) -> ParseResult:
    result = ParseResult()
    for line, row in _csv_rows(text, INTERACTION_HEADER):
        try:
            if len(row) != 4:
                raise ValidationError(f"expected 4 fields, got {len(row)}")
            user, resource, ts, kind = row
            result.records.append(
                Interaction(user.strip(), resource.strip(), _parse_int(ts.strip(), "timestamp_ms"),
                            kind.strip() or "click")
            )
        except ValidationError as exc:
            result.rejected.append((line, str(exc)))
    return result


def parse_tags(text: str) -> ParseResult:
    result = ParseResult()
    for line, row in _csv_rows(text, TAG_HEADER):
        try:
            if len(row) != 4:
                raise ValidationError(f"expected 4 fields, got {len(row)}")
            user, resource, tag, ts = row
            result.records.append(
                TagAssignment(user.strip(), resource.strip(), tag, _parse_int(ts.strip(), "timestamp_ms"))
            )
        except ValidationError as exc:
            result.rejected.append((line, str(exc)))
    return result


def resource_from_obj(obj: Any) -> Resource:
    if not isinstance(obj, dict):
        raise ValidationError("resource record must be a JSON object")
    if "resource_id" not in obj:
        raise ValidationError("missing resource_id")
    categories = obj.get("categories") or []
    if not isinstance(categories, list) or not all(isinstance(c, str) for c in categories):
        raise ValidationError("categories must be a list of strings")
    title = obj.get("title", "")
    description = obj.get("description", "")
    if not isinstance(title, str) or not isinstance(description, str):
        raise ValidationError("title and description must be strings")
    return Resource(obj["resource_id"], title, description, frozenset(categories))


def parse_resources(text: str) -> ParseResult:
    result = ParseResult()
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON: {exc.msg}") from None
            result.records.append(resource_from_obj(obj))
        except ValidationError as exc:
            result.rejected.append((line, str(exc)))
    return result


def format_interactions(interactions: Iterable[Interaction]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INTERACTION_HEADER)
    for i in interactions:
        w.writerow([i.user_id, i.resource_id, i.timestamp, i.kind.value])
    return buf.getvalue()


def format_tags(tags: Iterable[TagAssignment]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TAG_HEADER)
    for t in tags:
        w.writerow([t.user_id, t.resource_id, t.tag, t.timestamp])
    return buf.getvalue()


def resource_to_obj(r: Resource) -> dict[str, Any]:
    return {
        "resource_id": r.resource_id,
        "title": r.title,
        "description": r.description,
        "categories": sorted(r.categories),
    }


def format_resources(resources: Iterable[Resource]) -> str:
    return "".join(json.dumps(resource_to_obj(r), ensure_ascii=False) + "\n" for r in resources)


@dataclass
class Dataset:
    interactions: list[Interaction] = field(default_factory=list)
    resources: list[Resource] = field(default_factory=list)
    tags: list[TagAssignment] = field(default_factory=list)

    def to_store(self, refresh_ms: int | None = None) -> Store:
        store = Store() if refresh_ms is None else Store(refresh_ms)
        store.add_resources(self.resources)
        store.add_interactions(self.interactions)
        store.add_tag_assignments(self.tags)
        return store

    @classmethod
    def from_store(cls, store: Store) -> "Dataset":
        return cls(store.interactions(), store.resources(), store.tag_events())


def _read_text(path: Path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _strict(result: ParseResult, path: Path) -> list[Any]:
    if result.rejected:
        line, msg = result.rejected[0]
        raise ValidationError(f"{path}:{line}: {msg}")
    return result.records


def load_files(
    interactions: str | Path | None = None,
    resources: str | Path | None = None,
    tags: str | Path | None = None,
) -> Dataset:
    """Read dataset files; any invalid record raises ``ValidationError``.

    Missing or unreadable files raise ``OSError``.
    """
    ds = Dataset()
    if interactions is not None:
        ds.interactions = _strict(parse_interactions(_read_text(Path(interactions))), Path(interactions))
    if resources is not None:
        ds.resources = _strict(parse_resources(_read_text(Path(resources))), Path(resources))
    if tags is not None:
        ds.tags = _strict(parse_tags(_read_text(Path(tags))), Path(tags))
    return ds


def write_snapshot(directory: str | Path, dataset: Dataset,
                   extra: dict[str, Any] | None = None) -> dict[str, Any]:
    """Write the three dataset files plus a manifest; returns the manifest."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / INTERACTIONS_FILE).write_text(format_interactions(dataset.interactions), encoding="utf-8")
    (out / RESOURCES_FILE).write_text(format_resources(dataset.resources), encoding="utf-8")
    (out / TAGS_FILE).write_text(format_tags(dataset.tags), encoding="utf-8")
    stats = dataset.to_store().compute_stats()
    manifest = {
        "files": {
            "interactions": INTERACTIONS_FILE,
            "resources": RESOURCES_FILE,
            "tags": TAGS_FILE,
        },
        "counts": {
            "interaction_rows": len(dataset.interactions),
            "resource_rows": len(dataset.resources),
            "tag_rows": len(dataset.tags),
        },
        "stats": stats.as_dict(),
        **(extra or {}),
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def read_manifest(directory: str | Path) -> dict[str, Any]:
    return json.loads(_read_text(Path(directory) / MANIFEST_FILE))


def load_snapshot(directory: str | Path) -> Dataset:
    d = Path(directory)
    files = read_manifest(d).get("files", {})
    return load_files(
        d / files.get("interactions", INTERACTIONS_FILE),
        d / files.get("resources", RESOURCES_FILE),
        d / files.get("tags", TAGS_FILE),
    )


def stats_from_manifest(manifest: dict[str, Any]) -> DatasetStats:
    s = manifest["stats"]
    return DatasetStats.from_counts(
        s["n_interactions"], s["n_users"], s["n_resources"], s["n_tag_assignments"]
    )
