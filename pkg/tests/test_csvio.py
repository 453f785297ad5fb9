import json

import pytest

from npalg.csvio import CsvError, load_db, load_instance, save_db
from npalg.fixtures import fixtures
from npalg.relation import Database, Relation


def write(path, text):
    path.write_text(text, encoding="utf-8")


def test_load_typed_columns(tmp_path):
    write(tmp_path / "colors.csv", "id:int,name:str\n1,red\n2,green\n")
    write(tmp_path / "Edges.csv", "f:int,t\n1,x\n")
    db = load_db(tmp_path)
    assert db.names() == ["COLORS", "EDGES"]
    assert db["COLORS"].schema == ("id", "name")
    assert sorted(db["COLORS"].rows()) == [(1, "red"), (2, "green")]
    assert db["EDGES"].rows() == [(1, "x")]


def test_round_trip(tmp_path):
    db = Database(
        {
            "A": Relation(("x", "y"), [(1, "p, q"), (2, 'say "hi"')]),
            "B": Relation(("n",), [(-3,), (0,)]),
            "EMPTY": Relation(("k",), []),
        }
    )
    save_db(db, tmp_path / "out", keys={"A": ["x"]})
    inst = load_instance(tmp_path / "out")
    assert inst.db == db
    assert inst.keys == {"A": ["x"]}


def test_fixture_dirs_round_trip(tmp_path):
    for f in fixtures():
        inst = f.load_instance()
        out = tmp_path / f.name
        save_db(inst.db, out, inst.keys or None)
        again = load_instance(out)
        assert again.db == inst.db, f.name


def test_empty_directory_is_empty_db(tmp_path):
    assert len(load_db(tmp_path).names()) == 0


def test_ragged_row_names_file_and_line(tmp_path):
    write(tmp_path / "R.csv", "a:int,b:int\n1,2\n3\n")
    with pytest.raises(CsvError, match=r"R\.csv:3"):
        load_db(tmp_path)


def test_bad_integer(tmp_path):
    write(tmp_path / "R.csv", "a:int\nseven\n")
    with pytest.raises(CsvError, match=r"R\.csv:2"):
        load_db(tmp_path)


def test_bad_suffix(tmp_path):
    write(tmp_path / "R.csv", "a:float\n1.5\n")
    with pytest.raises(CsvError, match="type suffix"):
        load_db(tmp_path)


def test_duplicate_relation(tmp_path):
    write(tmp_path / "r.csv", "a\nx\n")
    write(tmp_path / "R.CSV", "a\ny\n")
    with pytest.raises(CsvError, match="duplicate relation"):
        load_db(tmp_path)


def test_duplicate_columns(tmp_path):
    write(tmp_path / "R.csv", "a,a\nx,y\n")
    with pytest.raises(CsvError):
        load_db(tmp_path)


def test_missing_header(tmp_path):
    write(tmp_path / "R.csv", "")
    with pytest.raises(CsvError, match="header"):
        load_db(tmp_path)


def test_not_a_directory(tmp_path):
    with pytest.raises(CsvError):
        load_db(tmp_path / "missing")


def test_manifest_keys_and_types(tmp_path):
    write(tmp_path / "COLORS.csv", "name,id\nred,1\n")
    write(tmp_path / "manifest.json", json.dumps({"keys": {"colors": "id"}, "types": {"COLORS": {"id": "int"}}}))
    inst = load_instance(tmp_path)
    assert inst.keys == {"COLORS": ["id"]}
    assert inst.db["COLORS"].rows() == [("red", 1)]


@pytest.mark.parametrize(
    "manifest",
    [
        {"keys": {"NOPE": ["id"]}},
        {"keys": {"COLORS": ["missing"]}},
        {"extra": 1},
        {"types": {"COLORS": {"id": "float"}}},
    ],
)
def test_bad_manifest(tmp_path, manifest):
    write(tmp_path / "COLORS.csv", "id\n1\n")
    write(tmp_path / "manifest.json", json.dumps(manifest))
    with pytest.raises(CsvError):
        load_instance(tmp_path)


def test_malformed_manifest_json(tmp_path):
    write(tmp_path / "manifest.json", "{not json")
    with pytest.raises(CsvError):
        load_instance(tmp_path)


def test_mixed_column_cannot_be_saved(tmp_path):
    db = Database({"M": Relation(("v",), [(1,), ("a",)])})
    with pytest.raises(CsvError, match="mixes"):
        save_db(db, tmp_path / "m")
