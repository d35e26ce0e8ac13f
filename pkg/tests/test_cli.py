import io
import json

import pytest

from graphmoves.cli import InputError, emit_graph, parse_graph, run
from graphmoves.core import DBPair, from_db, to_db
from graphmoves.extnat import INF
from graphmoves.matops import row_add_basic


def call(argv, stdin=""):
    out = io.StringIO()
    code = run(argv, out, io.StringIO(stdin))
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    def make(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return make


TWO_LOOPS = '{"adjacency":[[2]],"vertices":["v"]}\n'


def example_graph():
    return from_db(DBPair.make([[0, 1], [1, 0]], [1, 1], ["v0", "v1"], source_name="s"))


# -- parsing


def test_minimal_file_and_inf():
    g = parse_graph('{"vertices":["v"],"adjacency":[[1]]}')
    assert g.vertices == ("v",) and g.adjacency == ((1,),)
    g = parse_graph('{"vertices":["v"],"adjacency":[["inf"]]}')
    assert g.adjacency[0][0] is INF
    assert emit_graph(g) == b'{"adjacency":[["inf"]],"vertices":["v"]}\n'


@pytest.mark.parametrize(
    "text",
    [
        '{"vertices":["a","b"],"adjacency":[[1,0],[1]]}',
        '{"vertices":["a"],"adjacency":[[1]],"colour":"red"}',
        '{"vertices":["a"],"adjacency":[[-1]]}',
        '{"vertices":["a"],"adjacency":[["infinity"]]}',
        '{"vertices":["a"],"adjacency":[[1.5]]}',
        "[]",
    ],
)
def test_parse_errors(text):
    with pytest.raises(InputError):
        parse_graph(text)


def test_parse_error_has_position():
    with pytest.raises(InputError, match="line 2 column"):
        parse_graph('{"vertices": ["a"],\n "adjacency": [[1,]]}')


def test_emit_round_trip():
    g = example_graph()
    assert emit_graph(parse_graph(emit_graph(g))) == emit_graph(g)


# -- exit codes


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"], io.StringIO())
    assert exc.value.code == 2


def test_malformed_file_exits_1(files):
    path = files("bad.json", '{"vertices": [')
    code, out = call(["validate", path])
    assert code == 1
    assert "error" in json.loads(out)
    code, out = call(["info", "/nonexistent.json"])
    assert code == 1 and json.loads(out)["error"].startswith("cannot read")


# -- subcommands


def test_validate(files):
    assert call(["validate", files("g.json", TWO_LOOPS)]) == (0, "valid\n")
    code, out = call(["--machine", "validate", files("g.json", TWO_LOOPS)])
    assert code == 0 and json.loads(out) == {"valid": True, "problems": []}


def test_info_two_loops(files):
    code, out = call(["info", "--machine", files("g.json", TWO_LOOPS)])
    assert code == 0
    info = json.loads(out)
    assert info["k0"]["factors"] == [] and info["k0"]["free_rank"] == 0
    assert info["canonical"]["conditions"]["IV"]["pass"] is False
    code, out = call(["info", files("g.json", TWO_LOOPS)])
    assert code == 0 and "(IV) fails" in out


def test_to_db_and_back(files):
    g = example_graph()
    code, out = call(["to-db", files("g.json", emit_graph(g).decode())])
    assert code == 0
    pair = json.loads(out)
    assert pair["B"] == [[0, 1], [1, 0]] and pair["D"] == [1, 1]
    code, back = call(["from-db", files("p.json", out)])
    assert code == 0 and back.encode() == emit_graph(g)


def test_apply_empty_script_is_identity(files, tmp_path):
    g = files("g.json", emit_graph(example_graph()).decode())
    s = files("empty.jsonl", "")
    out = str(tmp_path / "out.json")
    assert call(["apply", g, s, "-o", out])[0] == 0
    assert open(out, "rb").read() == open(g, "rb").read()


def test_compile_op_row_add(files, tmp_path):
    g = files("g.json", emit_graph(example_graph()).decode())
    out, script = str(tmp_path / "r.json"), str(tmp_path / "r.jsonl")
    code, _ = call(["compile-op", g, '{"op":"rowAdd","src":0,"dst":1}', "-o", out, "-s", script])
    assert code == 0
    expect, _ = row_add_basic(to_db(example_graph()), 0, 1)
    assert to_db(parse_graph(open(out).read())) == expect
    again = str(tmp_path / "again.json")
    assert call(["apply", g, script, "-o", again])[0] == 0
    assert open(again, "rb").read() == open(out, "rb").read()


def test_compile_op_rejects_bad_op(files):
    g = files("g.json", emit_graph(example_graph()).decode())
    code, out = call(["compile-op", g, '{"op":"rowAdd","src":0,"dst":0}'])
    assert code == 1 and "error" in json.loads(out)
    code, out = call(["compile-op", g, '{"op":"shear","src":0,"dst":1}'])
    assert code == 1


def test_canonicalize_replays(files, tmp_path):
    g = files("g.json", TWO_LOOPS)
    out, script = str(tmp_path / "c.json"), str(tmp_path / "c.jsonl")
    assert call(["canonicalize", g, "-o", out, "-s", script])[0] == 0
    again = str(tmp_path / "again.json")
    assert call(["apply", g, script, "-o", again])[0] == 0
    assert open(again, "rb").read() == open(out, "rb").read()
    code, text = call(["check-canonical", "--machine", out])
    assert code == 0 and json.loads(text)["canonical"] is True


def test_canonicalize_budget(files):
    code, out = call(["canonicalize", files("g.json", TWO_LOOPS), "--step-budget", "1"])
    assert code == 1 and "budget" in json.loads(out)["error"]


def test_human_transform_output(files):
    code, out = call(["canonicalize", files("g.json", TWO_LOOPS)])
    assert code == 0
    lines = out.splitlines()
    assert json.loads(lines[0])["vertices"]
    assert lines[1].startswith("# ") and lines[1].endswith(" moves")
    code, out = call(["--machine", "canonicalize", files("g.json", TWO_LOOPS)])
    doc = json.loads(out)
    assert set(doc) == {"graph", "script", "pair"}


def test_verify_cert(files):
    pair = {"vertices": ["v"], "B": [[1]], "D": [1]}
    e = files("e.json", json.dumps(pair))
    good = files("c.json", json.dumps({"U": [[1]], "V": [[1]], "level": "SL+"}))
    code, out = call(["verify-cert", e, e, good])
    assert code == 0 and "strongest level: SL+" in out
    bad = files("bad.json", json.dumps({"U": [[2]], "V": [[1]], "level": "GL"}))
    code, out = call(["--machine", "verify-cert", e, e, bad])
    assert code == 1 and json.loads(out)["claim_holds"] is False


def test_repl_applies_and_refuses(files):
    g = files("g.json", '{"adjacency":[[1,1],[1,0]],"vertices":["u","w"]}')
    moves = "\n".join(
        [
            json.dumps({"move": "Rplus", "vertex": "w", "name": "w~", "at": 0}),
            json.dumps({"move": "Rplus", "vertex": "u", "name": "x", "at": 0}),
            "quit",
        ]
    )
    code, out = call(["--machine", "repl", g], stdin=moves + "\n")
    assert code == 0
    docs = [json.loads(line) for line in out.splitlines()]
    assert len(docs) == 3
    assert docs[1]["graph"]["vertices"] != docs[0]["graph"]["vertices"]
    assert "supports a loop" in docs[2]["refused"]
