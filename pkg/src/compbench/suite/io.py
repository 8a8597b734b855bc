"""Suite file formats.

Prompt files are UTF-8, one prompt per line. A sidecar
`<name>.structure.jsonl` carries one JSON object per prompt line with the
structured metadata (objects/relations, optionally id/novelty/source).
The full manifest serializes as a single JSON document.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

from .types import (
    AttributeSpec,
    ObjectSpec,
    PromptRecord,
    RelationSpec,
    SuiteError,
    SuiteManifest,
)

PathLike = Union[str, Path]

SIDECAR_SUFFIX = ".structure.jsonl"


def sidecar_path(prompt_path: PathLike) -> Path:
    p = Path(prompt_path)
    return p.with_name(p.stem + SIDECAR_SUFFIX)


def _parse_sidecar_line(line: str, lineno: int) -> dict:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as err:
        raise SuiteError(f"sidecar line {lineno}: invalid JSON ({err})") from err
    if not isinstance(data, dict):
        raise SuiteError(f"sidecar line {lineno}: expected a JSON object")
    return data


def load_prompt_file(
    path: PathLike,
    category: str,
    split: str,
    sidecar: Optional[PathLike] = None,
) -> list[PromptRecord]:
    """Load one prompt-per-line file, attaching sidecar structure when present.

    Records without sidecar structure are flagged `structure_missing` and are
    skipped by structure-dependent metrics. A line-count mismatch between the
    prompt file and its sidecar is an error, as is an empty prompt file or a
    duplicated prompt within the file.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    prompts = [line.strip() for line in lines if line.strip()]
    if not prompts:
        raise SuiteError(f"empty prompt file: {path}")
    if len(prompts) != len(set(prompts)):
        raise SuiteError(f"duplicate prompts in {path}")

    sidecar = Path(sidecar) if sidecar is not None else sidecar_path(path)
    structures: Optional[list[dict]] = None
    if sidecar.exists():
        raw = [l for l in sidecar.read_text(encoding="utf-8").splitlines() if l.strip()]
        if len(raw) != len(prompts):
            raise SuiteError(
                f"sidecar {sidecar} has {len(raw)} entries for {len(prompts)} prompts"
            )
        structures = [_parse_sidecar_line(l, i + 1) for i, l in enumerate(raw)]

    records = []
    stem = path.stem
    for i, text in enumerate(prompts):
        if structures is None:
            records.append(
                PromptRecord(
                    id=f"{stem}_{i:04d}",
                    category=category,
                    split=split,
                    text=text,
                    source="chatgpt",
                    structure_missing=True,
                )
            )
            continue
        meta = structures[i]
        objects = tuple(
            ObjectSpec(
                noun=o["noun"],
                attributes=tuple(
                    AttributeSpec(a["kind"], a["value"]) for a in o.get("attributes", [])
                ),
            )
            for o in meta.get("objects", [])
        )
        relations = tuple(
            RelationSpec(r["subject_index"], r["object_index"], r["word"], r["kind"])
            for r in meta.get("relations", [])
        )
        records.append(
            PromptRecord(
                id=meta.get("id", f"{stem}_{i:04d}"),
                category=category,
                split=split,
                novelty=meta.get("novelty", "not_applicable"),
                text=text,
                source=meta.get("source", "chatgpt"),
                objects=objects,
                relations=relations,
                structure_missing=not objects,
            )
        )
    return records


def write_prompt_file(records: list[PromptRecord], path: PathLike) -> None:
    """Write prompts one per line plus the structured sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(r.text + "\n" for r in records), encoding="utf-8")
    with sidecar_path(path).open("w", encoding="utf-8") as fh:
        for r in records:
            entry = {
                "id": r.id,
                "novelty": r.novelty,
                "source": r.source,
                "objects": [
                    {
                        "noun": o.noun,
                        "attributes": [{"kind": a.kind, "value": a.value} for a in o.attributes],
                    }
                    for o in r.objects
                ],
                "relations": [
                    {
                        "subject_index": rel.subject_index,
                        "object_index": rel.object_index,
                        "word": rel.word,
                        "kind": rel.kind,
                    }
                    for rel in r.relations
                ],
            }
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def save_manifest(manifest: SuiteManifest, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_manifest(path: PathLike) -> SuiteManifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return SuiteManifest.from_dict(data)
