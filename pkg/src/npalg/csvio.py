"""CSV instance directories.

One ``NAME.csv`` per relation (the relation is named after the upper-cased
file stem).  Header cells carry an optional ``:int`` or ``:str`` suffix;
unsuffixed columns hold strings.  An optional ``manifest.json`` may declare
key columns for range tables and override column types::

    {"keys": {"COLORS": ["id"]}, "types": {"NODES": {"n": "int"}}}
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .relation import Database, Relation, RelAlgError

MANIFEST = "manifest.json"
TYPES = ("int", "str")


class CsvError(RelAlgError):
    pass


@dataclass
class Instance:
    db: Database
    keys: dict = field(default_factory=dict)


def _split_header(cell: str, where: str) -> tuple[str, str]:
    name, sep, kind = cell.strip().rpartition(":")
    if not sep:
        return cell.strip(), "str"
    if kind not in TYPES:
        raise CsvError(f"{where}: bad type suffix {kind!r} on column {name!r} (use :int or :str)")
    return name, kind


def _convert(value: str, kind: str, where: str):
    if kind == "str":
        return value
    try:
        return int(value)
    except ValueError:
        raise CsvError(f"{where}: {value!r} is not an integer") from None


def _read_manifest(root: Path) -> dict:
    path = root / MANIFEST
    if not path.exists():
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CsvError(f"{path}: {exc}") from None
    if not isinstance(data, dict) or set(data) - {"keys", "types"}:
        raise CsvError(f"{path}: expected an object with optional 'keys' and 'types'")
    return data


def read_relation(path: Path, overrides: dict | None = None) -> Relation:
    overrides = {k.lower(): v for k, v in (overrides or {}).items()}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvError(f"{path}: missing header row") from None
        cols = [_split_header(c, f"{path}:1") for c in header]
        names = [n for n, _ in cols]
        if len(set(names)) != len(names):
            raise CsvError(f"{path}:1: duplicate column names {names}")
        kinds = []
        for n, k in cols:
            k = overrides.get(n.lower(), k)
            if k not in TYPES:
                raise CsvError(f"{path}: manifest type {k!r} for column {n!r} is not int or str")
            kinds.append(k)
        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(cols):
                raise CsvError(f"{path}:{line}: expected {len(cols)} fields, found {len(row)}")
            where = f"{path}:{line}"
            rows.append(tuple(_convert(v, k, where) for v, k in zip(row, kinds)))
    return Relation(names, rows)


def load_instance(path) -> Instance:
    root = Path(path)
    if not root.is_dir():
        raise CsvError(f"{root} is not a directory")
    manifest = _read_manifest(root)
    types = {k.upper(): v for k, v in manifest.get("types", {}).items()}
    relations: dict[str, Relation] = {}
    sources: dict[str, Path] = {}
    for f in sorted(root.iterdir()):
        if f.suffix.lower() != ".csv" or not f.is_file():
            continue
        name = f.stem.upper()
        if name in relations:
            raise CsvError(f"duplicate relation {name}: {sources[name].name} and {f.name}")
        relations[name] = read_relation(f, types.get(name))
        sources[name] = f
    keys = {}
    for table, cols in manifest.get("keys", {}).items():
        tname = table.upper()
        cols = [cols] if isinstance(cols, str) else list(cols)
        if tname not in relations:
            raise CsvError(f"manifest declares a key for unknown table {table}")
        schema = [c.lower() for c in relations[tname].schema]
        for c in cols:
            if c.lower() not in schema:
                raise CsvError(f"manifest key column {c!r} is not a column of {tname}")
        keys[tname] = cols
    return Instance(Database(relations), keys)


def load_db(path) -> Database:
    return load_instance(path).db


def _column_kind(rel: Relation, i: int) -> str:
    kinds = {"int" if isinstance(t[i], int) else "str" for t in rel.tuples}
    if len(kinds) > 1:
        raise CsvError(f"column {rel.schema[i]!r} mixes integers and strings; CSV columns have one type")
    return kinds.pop() if kinds else "str"


def save_db(db: Database, path, keys: dict | None = None) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for name in db.names():
        rel = db[name]
        header = [f"{col}:{_column_kind(rel, i)}" for i, col in enumerate(rel.schema)]
        with open(root / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rel.rows())
    if keys:
        (root / MANIFEST).write_text(json.dumps({"keys": keys}, indent=2) + "\n", encoding="utf-8")
