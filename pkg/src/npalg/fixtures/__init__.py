"""The worked-problem corpus shipped with the package.

Layout, relative to this directory:

index.json          one record per fixture
queries/NAME.sx     NP-Alg queries in the s-expression format
specs/*.sql         specification files
data/NAME/          CSV instance directories
circuits/*.json     adjacency circuits
eso/*.sx            ESO sentences

``scripts/build_fixtures.py`` regenerates everything but the specs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

ROOT = Path(__file__).resolve().parent


@dataclass(frozen=True)
class Fixture:
    name: str
    kind: str  # "npalg" or "consql"
    source: Path  # query or spec file
    data: Path
    expected: bool
    objective: Optional[int] = None
    witness: Optional[dict] = None
    fragment: Optional[str] = None
    extra: dict = field(default_factory=dict, compare=False)

    def load_query(self):
        from ..sexpr import parse_query

        return parse_query(self.source.read_text(encoding="utf-8"))

    def load_spec(self):
        from ..consql.parser import parse_spec

        return parse_spec(self.source.read_text(encoding="utf-8"))

    def load_instance(self):
        from ..csvio import load_instance

        return load_instance(self.data)

    def load_db(self):
        return self.load_instance().db

    def load_witness(self):
        from ..engine import witness_from

        if self.witness is None:
            return None
        return witness_from(self.load_query(), {k: [tuple(t) for t in v] for k, v in self.witness.items()})


def fixtures() -> list[Fixture]:
    records = json.loads((ROOT / "index.json").read_text(encoding="utf-8"))
    out = []
    for r in records:
        src = r.get("query") or r["spec"]
        out.append(
            Fixture(
                name=r["name"],
                kind=r["kind"],
                source=ROOT / src,
                data=ROOT / r["data"],
                expected=r["expected"],
                objective=r.get("objective"),
                witness=r.get("witness"),
                fragment=r.get("fragment"),
                extra={k: v for k, v in r.items() if k == "examined"},
            )
        )
    return out


def fixture(name: str) -> Fixture:
    for f in fixtures():
        if f.name == name:
            return f
    raise KeyError(f"no fixture named {name!r}")


def spec_path(name: str) -> Path:
    return ROOT / "specs" / name


def circuit_path(name: str) -> Path:
    return ROOT / "circuits" / f"{name}.json"


def eso_path(name: str) -> Path:
    return ROOT / "eso" / f"{name}.sx"
