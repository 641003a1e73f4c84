"""Declarative JSON group documents.

A group source is a catalog name, a path to a JSON file, or a JSON object::

    {"kind": "cyclic", "n": 4}                      # n = 0 is Z
    {"kind": "free_abelian", "rank": 2}
    {"kind": "permutation", "degree": 3, "generators": [[2, 3, 1], [2, 1, 3]]}
    {"kind": "table", "order": 2, "table": [0, 1, 1, 0]}      # row-major
    {"kind": "abelian_by_finite", "rank": 1, "top": {...},
     "action": [[h, [[-1]]], ...], "cocycle": [[h1, h2, [v]], ...]}
    {"kind": "wreath", "base": {...}, "top": {...}}
    {"kind": "catalog", "name": "S3"}

Permutations are one-line images on ``1..degree``; elements ``h`` of a top
group are written in its payload form (JSON lists for tuples).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from . import catalog
from .groups import (
    AbelianByFinite,
    Cyclic,
    FreeAbelian,
    Group,
    GroupError,
    Permutation,
    Table,
    Wreath,
    json_to_payload,
)


def group_from_doc(doc: dict) -> Group:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise GroupError("group document needs a 'kind'")
    kind = doc["kind"]
    try:
        if kind == "catalog":
            return catalog.get(doc["name"])
        if kind == "cyclic":
            return Cyclic(int(doc["n"]))
        if kind == "free_abelian":
            return FreeAbelian(int(doc["rank"]))
        if kind == "permutation":
            return Permutation.from_images(int(doc["degree"]), doc["generators"], doc.get("label", ""))
        if kind == "table":
            flat = [int(x) for x in doc["table"]]
            n = int(doc.get("order", math.isqrt(len(flat))))
            if n * n != len(flat):
                raise GroupError(f"table has {len(flat)} entries, expected {n * n}")
            rows = tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))
            return Table(n, rows, doc.get("label", ""))
        if kind == "abelian_by_finite":
            top = group_from_doc(doc["top"])
            action = {json_to_payload(h): mat for h, mat in doc.get("action", [])}
            cocycle = {(json_to_payload(a), json_to_payload(b)): tuple(v) for a, b, v in doc.get("cocycle", [])}
            return AbelianByFinite.build(int(doc["rank"]), top, action, cocycle, doc.get("label", ""))
        if kind == "wreath":
            return Wreath(group_from_doc(doc["base"]), group_from_doc(doc["top"]))
    except KeyError as exc:
        raise GroupError(f"{kind} document is missing {exc}") from None
    raise GroupError(f"unknown group kind {kind!r}")


def resolve_source(source: str | dict) -> str | dict:
    """Normalize a ``--group`` argument to a catalog name or an inline document."""
    if isinstance(source, dict):
        return source
    if source in catalog.CATALOG:
        return source
    path = Path(source)
    if path.is_file():
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise GroupError(f"{source}: not valid JSON ({exc.msg}, line {exc.lineno})") from None
    text = source.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise GroupError(f"inline group document is not valid JSON ({exc.msg})") from None
    raise GroupError(f"unknown group {source!r}: not a catalog name, file or JSON document")


def load_group(source: str | dict) -> Group:
    src = resolve_source(source)
    return catalog.get(src) if isinstance(src, str) else group_from_doc(src)
