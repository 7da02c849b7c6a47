"""Command-line surface and exit codes."""
from __future__ import annotations

from pathlib import Path

from dcnet.cli import main

DATA = Path(__file__).parent / "data"


def test_validate_ok(capsys):
    assert main(["validate", str(DATA / "face.kb")]) == 0
    out = capsys.readouterr().out
    assert "8 concepts" in out and "7 relations" in out


def test_validate_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.kb"
    bad.write_text("concept a\nrelation r kind=NOPE a=a b=a\n", encoding="utf-8")
    assert main(["validate", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_fit_meets_expectations(tmp_path, capsys):
    trace_file = tmp_path / "run.trace"
    code = main([
        "fit",
        "--kb", str(DATA / "face.kb"),
        "--scenario", str(DATA / "face.scenario"),
        "--trace", str(trace_file),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "face1 p=1.000000000 status=collapsed" in out
    assert "egg1 p=0.500000000 status=suppressed" in out
    lines = trace_file.read_text(encoding="utf-8").splitlines()
    assert lines and all(line.startswith("step=") for line in lines)


def test_fit_expectation_failure(tmp_path, capsys):
    scenario = tmp_path / "bad.scenario"
    scenario.write_text(
        (DATA / "face.scenario").read_text(encoding="utf-8") + "expect nose1 p=0.2\n",
        encoding="utf-8",
    )
    code = main(["fit", "--kb", str(DATA / "face.kb"), "--scenario", str(scenario)])
    assert code == 1
    assert "expectation failed" in capsys.readouterr().err


def test_fit_trace_determinism(tmp_path):
    traces = []
    for name in ("a.trace", "b.trace"):
        target = tmp_path / name
        main([
            "fit",
            "--kb", str(DATA / "face.kb"),
            "--scenario", str(DATA / "face.scenario"),
            "--trace", str(target),
        ])
        traces.append(target.read_bytes())
    assert traces[0] == traces[1]


def test_fit_session_resume(tmp_path, capsys):
    session = tmp_path / "run.session"
    code = main([
        "fit",
        "--kb", str(DATA / "face.kb"),
        "--scenario", str(DATA / "face.scenario"),
        "--session", str(session),
        "--max-fragments", "2",
    ])
    assert code == 0
    assert session.exists()
    capsys.readouterr()
    code = main([
        "fit",
        "--scenario", str(DATA / "face.scenario"),
        "--session", str(session),
    ])
    assert code == 0
    assert "face1 p=1.000000000 status=collapsed" in capsys.readouterr().out


def test_match_command(capsys, tmp_path):
    fragment = tmp_path / "frag.scenario"
    fragment.write_text("input eye p=1.0 as=eye1\n", encoding="utf-8")
    code = main([
        "match",
        "--kb", str(DATA / "face.kb"),
        "--fragment", str(fragment),
        "--base", "face",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "membership=1.000000000" in out
    assert "placed eye1 -> eye" in out


def test_query_command(tmp_path, capsys):
    store = tmp_path / "store.kb"
    store.write_text(
        "concept tom_age\n"
        "concept n15 value=15.0\n"
        "relation r_age kind=EQUAL a=tom_age b=n15 pba=1.0 pab=1.0\n",
        encoding="utf-8",
    )
    template = tmp_path / "query.scenario"
    template.write_text(
        "input tom_age p=1.0 as=qa\n"
        "input any p=1.0 as=qx var=true\n"
        "relation qr kind=EQUAL a=qa b=qx pba=1.0 pab=1.0\n",
        encoding="utf-8",
    )
    code = main(["query", "--kb", str(store), "--template", str(template)])
    assert code == 0
    assert "qx=n15" in capsys.readouterr().out


def test_learn_command(tmp_path, capsys):
    scenes_dir = tmp_path / "scenes"
    scenes_dir.mkdir()
    for n in range(3):
        lines = []
        for p in ("p1", "p2", "p3"):
            lines.append(f"input {p} p=1.0 as={p}_s{n}")
        ids = [f"{p}_s{n}" for p in ("p1", "p2", "p3")]
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                lines.append(f"relation adj_{a}_{b} kind=ADJOINING a={a} b={b} pba=1.0 pab=1.0")
        (scenes_dir / f"scene{n}.scenario").write_text("\n".join(lines) + "\n", encoding="utf-8")
    out_kb = tmp_path / "learned.kb"
    code = main(["learn", "--scenes", str(scenes_dir), "--out", str(out_kb)])
    assert code == 0
    out = capsys.readouterr().out
    assert "learned=1" in out
    text = out_kb.read_text(encoding="utf-8")
    assert "tree learned#1" in text


def test_exit_code_for_missing_file(capsys):
    assert main(["validate", "no-such-file.kb"]) == 2
