import json
import subprocess
import sys

import pytest

from npalg.cli import main
from npalg.fixtures import ROOT, circuit_path, eso_path, fixture, spec_path
from npalg.polyfrag import classify
from npalg.sexpr import parse_query


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def solve_json(capsys, *argv):
    code, out, err = run(capsys, "solve", *argv)
    assert err == ""
    return code, json.loads(out)


def test_solve_query_yes(capsys):
    f = fixture("coloring-reference-3")
    code, rep = solve_json(capsys, f.source, "--data", f.data)
    assert code == 0
    assert rep["schema"] == 1 and rep["kind"] == "npalg" and rep["answer"] is True
    assert rep["complete"] is True
    assert set(rep["returns"]) == {"Q1", "Q2", "Q3"}


def test_solve_query_no(capsys):
    f = fixture("coloring-triangle-2")
    code, rep = solve_json(capsys, f.source, "--data", f.data)
    assert code == 1 and rep["answer"] is False and rep["returns"] == {}


def test_solve_poly(capsys):
    f = fixture("2-coloring-path")
    code, rep = solve_json(capsys, f.source, "--data", f.data, "--solver", "poly")
    assert code == 0 and rep["solver"] == "poly"


def test_poly_outside_fragment_is_an_error(capsys):
    f = fixture("coloring-reference-3")
    code, out, err = run(capsys, "solve", f.source, "--data", f.data, "--solver", "poly")
    assert code == 2 and err.startswith("error:")


@pytest.mark.parametrize("solver", ["hill", "tabu", "tandem"])
def test_solve_query_local_search(capsys, solver):
    f = fixture("coloring-reference-3")
    code, rep = solve_json(capsys, f.source, "--data", f.data, "--solver", solver, "--restarts", "10")
    # a verified witness makes a yes final whichever solver found it
    assert code == 0 and rep["answer"] is True and rep["complete"] is True


def test_local_search_no_is_incomplete(capsys):
    f = fixture("coloring-triangle-2")
    code, rep = solve_json(capsys, f.source, "--data", f.data, "--solver", "tabu", "--restarts", "2", "--max-iters", "20")
    assert code == 1 and rep["answer"] is False and rep["complete"] is False


def test_solve_spec_returns_solution(capsys):
    f = fixture("consql-graph-coloring")
    code, rep = solve_json(capsys, f.source, "--data", f.data)
    assert code == 0 and rep["complete"] is True
    sol = rep["returns"]["SOLUTION"]
    assert len(sol["rows"]) == 4
    assert rep["returns"]["ANSWER"]["rows"] == [[1]]


def test_solve_spec_no(capsys):
    f = fixture("consql-graph-coloring-triangle-2")
    code, rep = solve_json(capsys, f.source, "--data", f.data)
    assert code == 1 and rep["objective"] is None and rep["returns"] == {}


def test_tabu_output_is_byte_identical(capsys):
    f = fixture("consql-aircraft-two")
    argv = ("solve", f.source, "--data", f.data, "--solver", "tabu", "--seed", "0", "--restarts", "20", "--max-idle", "5")
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b
    rep = json.loads(a[1])
    assert a[0] == 0 and rep["objective"] == 2
    assert rep["complete"] is False  # tabu does not prove the optimum


def test_workers_do_not_change_output(capsys):
    f = fixture("consql-timetabling-toy")
    argv = ("solve", f.source, "--data", f.data, "--solver", "tabu", "--restarts", "8", "--max-idle", "5")
    assert run(capsys, *argv) == run(capsys, *argv, "--workers", "4")


def test_timing_adds_seconds(capsys):
    f = fixture("coloring-reference-3")
    _, rep = solve_json(capsys, f.source, "--data", f.data)
    assert "seconds" not in rep["stats"]
    _, rep = solve_json(capsys, f.source, "--data", f.data, "--timing")
    assert "seconds" in rep["stats"]


def test_json_file_matches_stdout(capsys, tmp_path):
    f = fixture("coloring-reference-3")
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "solve", f.source, "--data", f.data, "--json", out)
    assert code == 0 and json.loads(out.read_text()) == json.loads(stdout)


def test_budget_exhausted_is_an_error(capsys):
    f = fixture("hamiltonian-path-2")
    code, _, err = run(capsys, "solve", f.source, "--data", f.data, "--budget", "3")
    assert code == 2 and "error:" in err


def test_multi_spec_file_needs_spec(capsys, tmp_path):
    text = spec_path("graph_coloring.sql").read_text() + "\n" + spec_path("aircraft_landing_small.sql").read_text()
    p = tmp_path / "two.sql"
    p.write_text(text)
    f = fixture("consql-graph-coloring")
    code, _, err = run(capsys, "solve", p, "--data", f.data)
    assert code == 2 and "--spec" in err
    code, rep = solve_json(capsys, p, "--data", f.data, "--spec", "Graph_Coloring")
    assert code == 0 and rep["name"] == "Graph_Coloring"


def test_post_solve_statements(capsys, tmp_path):
    p = tmp_path / "gc.sql"
    p.write_text(spec_path("graph_coloring.sql").read_text() + "\nSELECT COUNT(*) FROM Graph_Coloring.SOLUTION;\n")
    f = fixture("consql-graph-coloring")
    code, rep = solve_json(capsys, p, "--data", f.data)
    assert code == 0 and rep["statements"][0]["rows"] == [[4]]


@pytest.mark.parametrize(
    "argv",
    [
        ("solve", "missing.sx"),
        ("solve", ROOT / "queries"),
        ("solve", ROOT / "specs" / "graph_coloring.sql", "--solver", "poly", "--data", fixture("consql-graph-coloring").data),
        ("classify", ROOT / "specs" / "graph_coloring.sql"),
        ("translate", ROOT / "index.json"),
    ],
)
def test_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_malformed_circuit(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 1, "gates": [["IN", 0, 0]]}')
    code, _, err = run(capsys, "gen-succinct", p)
    assert code == 2 and "input gates" in err


def test_check_verb(capsys, tmp_path):
    f = fixture("coloring-reference-3")
    good = tmp_path / "w.json"
    good.write_text(json.dumps(f.witness))
    code, out, _ = run(capsys, "check", f.source, "--data", f.data, "--witness", good)
    assert code == 0 and json.loads(out)["fail_rows"] == 0
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"Q1": [[1], [2]], "Q2": [], "Q3": []}))
    code, out, _ = run(capsys, "check", f.source, "--data", f.data, "--witness", bad)
    assert code == 1 and json.loads(out)["fail_rows"] > 0
    bad.write_text(json.dumps({"Q9": []}))
    assert run(capsys, "check", f.source, "--data", f.data, "--witness", bad)[0] == 2


def test_classify_text_and_json(capsys):
    code, out, _ = run(capsys, "classify", fixture("2-coloring-path").source)
    assert code == 0 and out.splitlines()[0] == "Eaa"
    code, out, _ = run(capsys, "classify", fixture("coloring-reference-3").source)
    assert out.splitlines()[0] == "General" and any(l.startswith("reason:") for l in out.splitlines())


def test_classify_json(capsys, tmp_path):
    out_path = tmp_path / "c.json"
    code, out, _ = run(capsys, "classify", fixture("disconnectivity-yes").source, "--json", out_path)
    rep = json.loads(out)
    assert rep["tag"] == "E1eStarAa" and json.loads(out_path.read_text()) == rep


def test_classify_spec(capsys):
    f = fixture("consql-graph-coloring")
    code, out, _ = run(capsys, "classify", f.source, "--data", f.data)
    assert code == 0 and out.splitlines()[0] in {"Eaa", "E1eStarAa", "General"}


def test_translate_eso(capsys, tmp_path):
    out = tmp_path / "q.sx"
    code, _, _ = run(capsys, "translate", eso_path("2-coloring"), "-o", out, "--name", "two")
    q = parse_query(out.read_text())
    assert code == 0 and q.name == "two" and classify(q).tag == "Eaa"


def test_translate_circuit(capsys):
    code, out, _ = run(capsys, "translate", circuit_path("and-of-inputs"))
    q = parse_query(out)
    assert code == 0 and len(q.guesses) == 6


def test_gen_succinct_solve(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-succinct", circuit_path("path-2"), "--solve", "--data-out", tmp_path / "d")
    rep = json.loads(out)
    assert code == 0 and rep["answer"] is True and rep["stats"]["nodes"] == 2
    assert (tmp_path / "d").is_dir()
    code, out, _ = run(capsys, "gen-succinct", circuit_path("k4"), "--solve")
    assert code == 1 and json.loads(out)["answer"] is False


def test_console_script_module_entry():
    f = fixture("coloring-triangle-2")
    r = subprocess.run(
        [sys.executable, "-m", "npalg.cli", "solve", str(f.source), "--data", str(f.data)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 1 and json.loads(r.stdout)["answer"] is False
