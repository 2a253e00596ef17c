import json
import math

import numpy as np
import pytest

from src.cli.runner import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main, parse_grid, read_sequence_csv
from src.cli.spec_file import load_spec_file, parse_dimension, parse_document
from src.domain.errors import DomainError, SpecError
from src.groups.models import GroupModel
from src.kernels.spec import Expansion, Sum
from src.schoenberg.sequence import INFINITY

EXP_DECAY_LINEAR = {
    "group": {"kind": "real"},
    "kernel": {
        "kind": "tensor",
        "spatial": {"kind": "monomial", "n": 1},
        "temporal": {"kind": "exp_decay", "a": 1},
    },
}

CONSTANT = {
    "group": {"kind": "real"},
    "kernel": {"kind": "tensor", "spatial": {"kind": "monomial", "n": 0}, "temporal": {"kind": "constant", "r": 1}},
}

CHEBYSHEV_TWO = {
    "group": {"kind": "cyclic", "m": 1},
    "kernel": {
        "kind": "tensor",
        "spatial": {"kind": "ultraspherical", "d": 1, "n": 2},
        "temporal": {"kind": "constant", "r": 1},
    },
}

MEMBER = {
    "group": {"kind": "real"},
    "kernel": {
        "kind": "tensor",
        "spatial": {"kind": "scaled_shift"},
        "temporal": {"kind": "gaussian", "a": 1},
    },
}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return str(path)


def test_eval_constant_kernel(tmp_path, capsys):
    spec = _write(tmp_path, "c.json", CONSTANT)
    assert main(["eval", "--spec", spec, "--x", "0.3", "--u", "1.5"]) == EXIT_OK
    assert capsys.readouterr().out == "1\n"


def test_eval_prints_value(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    assert main(["eval", "--spec", spec, "--x", "0.5", "--u", "2"]) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(0.5 * math.exp(-2.0), rel=1e-15)


def test_eval_prints_imaginary_part(tmp_path, capsys):
    doc = {
        "group": {"kind": "real"},
        "kernel": {
            "kind": "tensor",
            "spatial": {"kind": "monomial", "n": 0},
            "temporal": {"kind": "character_mix", "terms": [{"weight": 1, "frequency": 1}]},
        },
    }
    spec = _write(tmp_path, "mix.json", doc)
    assert main(["eval", "--spec", spec, "--x", "0", "--u", "1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert float(lines[0]) == pytest.approx(math.cos(1.0))
    assert lines[1].startswith("imag ")
    assert float(lines[1].split()[1]) == pytest.approx(math.sin(1.0))


def test_malformed_json_exits_2_without_output(tmp_path, capsys):
    spec = _write(tmp_path, "bad.json", '{"group": {"kind": "real"}, "kernel": ')
    assert main(["eval", "--spec", spec, "--x", "0.1", "--u", "0"]) == EXIT_INPUT
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "invalid JSON" in captured.err


def test_unknown_kind_names_the_path(tmp_path, capsys):
    doc = json.loads(json.dumps(EXP_DECAY_LINEAR))
    doc["kernel"]["spatial"]["kind"] = "legendre"
    spec = _write(tmp_path, "unknown.json", doc)
    assert main(["eval", "--spec", spec, "--x", "0.1", "--u", "0"]) == EXIT_INPUT
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "$.kernel.spatial.kind" in captured.err


def test_out_of_range_x_exits_2(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    assert main(["eval", "--spec", spec, "--x", "1.5", "--u", "0"]) == EXIT_INPUT
    assert capsys.readouterr().out == ""


def test_extract_writes_table_with_footers(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    assert main(["extract", "--spec", spec, "--d", "2", "--n-max", "3", "--grid", "real:0:1:0.5"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "n,u,re,im"
    body = [line for line in lines[1:] if not line.startswith("#")]
    assert len(body) == 4 * 3
    assert "#meta,d=2,n_max=3" in lines
    assert any(line.startswith("#tail_bound,") for line in lines)
    phi_one = [line.split(",") for line in body if line.startswith("1,")]
    values = {float(u): float(re) for _, u, re, _ in phi_one}
    assert values[0.5] == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert not any(line.startswith("#DIAGNOSTIC") for line in lines)


def test_extract_reports_diagnostic_footer(tmp_path, capsys):
    spec = _write(tmp_path, "t2.json", CHEBYSHEV_TWO)
    assert main(["extract", "--spec", spec, "--d", "2", "--n-max", "2", "--grid", "cyclic"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    diagnostics = [line for line in lines if line.startswith("#DIAGNOSTIC:nonmember")]
    assert len(diagnostics) == 1
    _, degree, value = diagnostics[0].split(",")
    assert degree == "0"
    assert float(value) == pytest.approx(-1.0 / 3.0, abs=1e-13)


def test_synth_round_trips_extract_table(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    table = str(tmp_path / "phi.csv")
    argv = ["extract", "--spec", spec, "--d", "3", "--n-max", "4", "--grid", "real:-1:1:0.25", "--out", table]
    assert main(argv) == EXIT_OK
    capsys.readouterr()
    for x in np.linspace(-1.0, 1.0, 20):
        for u in ("-1", "-0.5", "0", "0.75", "1"):
            assert main(["synth", "--csv", table, "--x", repr(float(x)), "--u", u]) == EXIT_OK
            value_line, bound_line = capsys.readouterr().out.splitlines()
            assert main(["eval", "--spec", spec, "--x", repr(float(x)), "--u", u]) == EXIT_OK
            expected = float(capsys.readouterr().out)
            assert float(value_line) == pytest.approx(expected, abs=1e-8), (x, u)
            assert bound_line.startswith("truncation_bound ")


def test_synth_rejects_truncated_table(tmp_path, capsys):
    table = _write(tmp_path, "cut.csv", 'n,u,re,im\n#meta,d=2\n#group,{"kind":"real"}\n')
    assert main(["synth", "--csv", table, "--x", "0.3", "--u", "0"]) == EXIT_INPUT
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "$.meta" in captured.err


def test_synth_rejects_table_without_value_columns(tmp_path, capsys):
    body = 'n,u\n0,0\n#meta,d=2,n_max=0\n#group,{"kind":"real"}\n'
    table = _write(tmp_path, "cols.csv", body)
    assert main(["synth", "--csv", table, "--x", "0.3", "--u", "0"]) == EXIT_INPUT
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "$.rows" in captured.err


def test_spec_path_that_is_a_directory_exits_2(tmp_path, capsys):
    assert main(["eval", "--spec", str(tmp_path), "--x", "0.3", "--u", "0"]) == EXIT_INPUT
    assert capsys.readouterr().out == ""



def test_synth_off_grid_exits_2(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    table = str(tmp_path / "phi.csv")
    assert main(["extract", "--spec", spec, "--d", "2", "--n-max", "2", "--grid", "real:0:1:0.5", "--out", table]) == 0
    assert main(["synth", "--csv", table, "--x", "0.3", "--u", "0.3"]) == EXIT_INPUT
    assert capsys.readouterr().out == ""


def test_read_sequence_csv_restores_sequence(tmp_path, capsys):
    spec = _write(tmp_path, "t2.json", CHEBYSHEV_TWO)
    table = tmp_path / "phi.csv"
    assert main(["extract", "--spec", spec, "--d", "2", "--n-max", "2", "--grid", "cyclic", "--out", str(table)]) == 0
    seq = read_sequence_csv(table)
    assert seq.d == 2 and seq.n_max == 2
    assert seq.group == GroupModel.cyclic(1)
    assert seq.value(2, 0).real == pytest.approx(4.0 / 3.0, abs=1e-13)


def test_check_passes_for_member(tmp_path, capsys):
    spec = _write(tmp_path, "m.json", MEMBER)
    assert main(["check", "--spec", spec, "--d", "2", "--trials", "10", "--points", "15"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "pass"
    assert report["witness"] is None


def test_witness_exits_4_with_configuration(tmp_path, capsys):
    spec = _write(tmp_path, "t2.json", CHEBYSHEV_TWO)
    assert main(["witness", "--spec", spec, "--d", "2", "--trials", "10"]) == EXIT_FAIL
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "fail"
    assert report["min_eig"] < -1e-6
    assert len(report["witness"]["points"]) >= 10


def test_stepup_writes_dimension_plus_two(tmp_path, capsys):
    spec = _write(tmp_path, "t2.json", CHEBYSHEV_TWO)
    assert main(["stepup", "--spec", spec, "--d", "1", "--n-max", "4", "--grid", "cyclic"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "#meta,d=3,n_max=2" in lines
    assert any(line.startswith("#DIAGNOSTIC:nonmember,0,") for line in lines)


def test_project_from_monomials(tmp_path, capsys):
    doc = {
        "group": {"kind": "real"},
        "kernel": {"kind": "tensor", "spatial": {"kind": "monomial", "n": 2}, "temporal": {"kind": "constant"}},
    }
    spec = _write(tmp_path, "sq.json", doc)
    assert main(["project", "--spec", spec, "--d", "1", "--grid", "points:[0]"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "#identity,0,0.5" in lines
    assert "#identity,2,0.5" in lines


def test_product_writes_coefficient_matrix(tmp_path, capsys):
    doc = {
        "bivariate": {
            "kind": "separable",
            "terms": [{"weight": 1, "x": {"kind": "monomial", "n": 1}, "y": {"kind": "monomial", "n": 1}}],
        }
    }
    spec = _write(tmp_path, "xy.json", doc)
    argv = ["product", "--spec", spec, "--d", "2", "--d-prime", "2", "--n-max", "2", "--m-max", "2"]
    assert main(argv) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,m,value"
    values = {tuple(map(int, line.split(",")[:2])): float(line.split(",")[2]) for line in lines[1:10]}
    assert values[(1, 1)] == pytest.approx(1.0, abs=1e-12)
    assert abs(values[(0, 0)]) <= 1e-12


def test_product_rejects_infinite_second_factor(tmp_path, capsys):
    term = {"x": {"kind": "monomial", "n": 1}, "y": {"kind": "monomial", "n": 1}}
    doc = {"bivariate": {"kind": "separable", "terms": [term]}}
    spec = _write(tmp_path, "xy.json", doc)
    argv = ["product", "--spec", spec, "--d", "2", "--d-prime", "infinity", "--n-max", "2", "--m-max", "2"]
    assert main(argv) == EXIT_INPUT
    assert capsys.readouterr().out == ""


def test_simulate_is_reproducible(tmp_path, capsys):
    spec = _write(tmp_path, "m.json", MEMBER)
    argv = ["simulate", "--spec", spec, "--d", "2", "--points", "5", "--samples", "50", "--seed", "9"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    lines = first.splitlines()
    assert lines[0] == "p0,p1,p2,p3,p4"
    assert sum(1 for line in lines if line.startswith("#point,")) == 5


def test_outputs_are_byte_identical_across_runs(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    argv = ["extract", "--spec", spec, "--d", "3", "--n-max", "5", "--grid", "real:-2:2:0.5"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first


def test_invalid_grid_exits_2(tmp_path, capsys):
    spec = _write(tmp_path, "k.json", EXP_DECAY_LINEAR)
    assert main(["extract", "--spec", spec, "--d", "2", "--n-max", "2", "--grid", "real:1:0:0.5"]) == EXIT_INPUT
    assert main(["extract", "--spec", spec, "--d", "2", "--n-max", "2", "--grid", "real:0.5:1:0.5"]) == EXIT_INPUT
    assert capsys.readouterr().out == ""


def test_parse_grid_kinds():
    assert parse_grid("real:0:1:0.25", GroupModel.real_line()) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("int:-2:2", GroupModel.integers()) == [-2, -1, 0, 1, 2]
    assert parse_grid("cyclic", GroupModel.cyclic(3)) == [0, 1, 2]
    assert len(parse_grid("vector:0:1:0.5", GroupModel.real_vector(2))) == 9
    assert parse_grid("points:[[0, 0], [1, 2]]", GroupModel.real_vector(2)) == [(0.0, 0.0), (1.0, 2.0)]
    with pytest.raises(DomainError, match="cyclic group"):
        parse_grid("cyclic", GroupModel.real_line())
    with pytest.raises(DomainError, match="unknown grid kind"):
        parse_grid("hex:0:1", GroupModel.real_line())


def test_parse_document_rejects_unknown_top_level_key():
    with pytest.raises(SpecError) as exc:
        parse_document({**CONSTANT, "kernels": {}})
    assert exc.value.path == "$.kernels"


def test_parse_document_reports_nested_paths():
    doc = {
        "group": {"kind": "real"},
        "kernel": {
            "kind": "sum",
            "terms": [
                CONSTANT["kernel"],
                {"kind": "scale", "r": -1, "child": CONSTANT["kernel"]},
            ],
        },
    }
    with pytest.raises(SpecError) as exc:
        parse_document(doc)
    assert exc.value.path == "$.kernel.terms[1]"

    doc["kernel"]["terms"][1] = {
        "kind": "tensor",
        "spatial": {"kind": "monomial", "n": 1.5},
        "temporal": {"kind": "constant"},
    }
    with pytest.raises(SpecError) as exc:
        parse_document(doc)
    assert exc.value.path == "$.kernel.terms[1].spatial.n"


def test_parse_document_builds_expansions(tmp_path):
    doc = {
        "group": {"kind": "integers"},
        "kernel": {
            "kind": "sum",
            "terms": [
                {
                    "kind": "expansion",
                    "d": 2,
                    "entries": [
                        {"n": 0, "phi": {"kind": "constant", "r": 0.5}},
                        {"n": 2, "phi": {"kind": "profile", "grid": [0, 1], "re": [1.0, 0.5]}},
                    ],
                },
                CONSTANT["kernel"],
            ],
        },
        "meta": {"note": "example"},
    }
    loaded = load_spec_file(_write(tmp_path, "e.json", doc))
    assert isinstance(loaded.kernel, Sum)
    assert isinstance(loaded.kernel.terms[0], Expansion)
    assert loaded.meta == {"note": "example"}
    assert loaded.group == GroupModel.integers()


def test_parse_dimension():
    assert parse_dimension(3) == 3
    assert parse_dimension("infinity") == INFINITY
    with pytest.raises(SpecError):
        parse_dimension(0)
    with pytest.raises(SpecError):
        parse_dimension(2.5)
