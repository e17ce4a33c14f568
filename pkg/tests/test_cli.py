import csv
import json

import pytest

from fpexpand.cli import (
    TRIAL_FIELDS,
    ConfigError,
    check_record,
    main,
    parse_rendered,
    read_config,
)


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_default_run(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, stdout, _ = run(["verify", "--p", "101", "--size", "8", "--trials", "50", "--variant", "both",
                           "--deterministic", "--selfcheck", "--out", str(out)], capsys)
    assert code == 0
    records = json.loads(out.read_text())
    assert len(records) == 100
    assert all(r["chain_ok"] for r in records)
    assert list(records[0]) == list(TRIAL_FIELDS)
    summary = json.loads(stdout)
    assert summary["all_chain_ok"] and summary["records"] == 100 and "generated" not in summary


def test_verify_singletons(tmp_path, capsys):
    out = tmp_path / "one.csv"
    code, _, _ = run(["verify", "--p", "13", "--size", "1", "--trials", "1", "--format", "csv",
                      "--deterministic", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2
    for r in rows:
        assert r["sum_E"] == r["E"] == r["incidences"] == r["size_R"] == r["k_exact"] == "1"


def test_composite_modulus_exit_2(capsys):
    code, _, err = run(["verify", "--p", "91"], capsys)
    assert code == 2
    assert "modulus not prime" in err


def test_bad_usage_exit_2(capsys):
    assert run(["verify", "--format", "xml"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["verify", "--trials", "0"], capsys)[0] == 2
    assert run(["verify", "--family-A", "subgroup:7", "--p", "101"], capsys)[0] == 2


def test_chain_failure_exit_1(tmp_path, capsys):
    # g h = 1 on a small subgroup: the collinearity step of the chain breaks
    code, _, _ = run(["verify", "--p", "31", "--g", "identity", "--h", "inverse", "--variant", "mult",
                      "--family-A", "subgroup:3", "--family-B", "A", "--family-C", "interval:11:1",
                      "--deterministic", "--out", str(tmp_path / "x.json")], capsys)
    assert code == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\np = 31\nvariant = add\nfamily-A = interval:4:2\ntrials = 2\nsize = 3\nformat = csv\n")
    assert read_config(cfg)["family_A"] == "interval:4:2"
    out = tmp_path / "r.csv"
    code, _, _ = run(["verify", "--config", str(cfg), "--trials", "3", "--deterministic", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 and {r["variant"] for r in rows} == {"add"}
    assert {r["size_A"] for r in rows} == {"4"} and {r["size_B"] for r in rows} == {"3"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        read_config(bad)
    assert run(["verify", "--config", str(bad)], capsys)[0] == 2


def test_csv_timestamp_only_without_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["verify", "--p", "31", "--size", "3", "--format", "csv", "--out", str(a)], capsys)
    run(["verify", "--p", "31", "--size", "3", "--format", "csv", "--deterministic", "--out", str(b)], capsys)
    first = a.read_text().splitlines()
    assert first[0].startswith("# generated")
    assert first[1:] == b.read_text().splitlines()


def test_experiment_grid_and_growth(tmp_path, capsys):
    out = tmp_path / "e.csv"
    code, _, _ = run(["experiment", "--p", "2003", "--sizes", "4,6", "--trials", "3", "--variant", "mult",
                      "--family-A", "geometric", "--family-B", "A", "--family-C", "A", "--growth",
                      "--format", "csv", "--deterministic", "--selfcheck", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert "predicted_exponent" in rows[0] and "eps_readback" in rows[0]
    for r in rows:
        eps = float(r["eps_readback"])
        assert float(r["predicted_exponent"]) == pytest.approx(1.25 + 2 * eps / 3, rel=1e-5)
        assert r["size_min_sum_prod"] == str(2 * int(r["size_A"]) - 1)
    agg = list(csv.DictReader((tmp_path / "e_aggregate.csv").open()))
    assert [a["size_A"] for a in agg] == ["4", "6"]


def test_experiment_single_grid_point(tmp_path, capsys):
    out = tmp_path / "e.json"
    code, _, _ = run(["experiment", "--p", "101", "--sizes", "5", "--trials", "2", "--variant", "add",
                      "--deterministic", "--out", str(out)], capsys)
    assert code == 0
    assert len(json.loads((tmp_path / "e_aggregate.json").read_text())) == 1


def test_incidence_command_tiny(tmp_path, capsys):
    out = tmp_path / "i.json"
    code, _, _ = run(["incidence", "--p", "5", "--family-A", "explicit:1", "--family-B", "explicit:1;2",
                      "--family-C", "explicit:1", "--variant", "mult", "--deterministic", "--out", str(out)], capsys)
    assert code == 0
    (rec,) = json.loads(out.read_text())
    assert rec["incidences"] == rec["oracle_incidences"] == 2
    assert rec["k_exact"] == 2
    assert rec["rudnev_rhs"] == pytest.approx(6.82843)


def test_incidence_command_oracle_many(tmp_path, capsys):
    out = tmp_path / "i.csv"
    code, _, _ = run(["incidence", "--p", "101", "--size", "5", "--trials", "15", "--g", "monomial:2",
                      "--h", "inverse", "--format", "csv", "--deterministic", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 30
    assert all(r["incidences"] == r["oracle_incidences"] for r in rows)


def test_bounds_command(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert main(["bounds", "--p", "101", "--sizes", "1,10,17", "--deterministic", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert rows[1]["bound_hh"] == pytest.approx(99.0099) and rows[1]["bound_new"] == pytest.approx(15.8489)
    assert rows[2]["gate_edge"] is True


def test_explicit_function_table(tmp_path, capsys):
    table = tmp_path / "g.csv"
    table.write_text("x,value\n" + "".join(f"{x},{(3 * x) % 31 or 1}\n" for x in range(1, 31)))
    code, _, _ = run(["verify", "--p", "31", "--g", f"explicit:{table}", "--h", "constant:2", "--size", "4",
                      "--trials", "3", "--deterministic", "--out", str(tmp_path / "o.json")], capsys)
    assert code == 0


def test_selfcheck_detects_bad_record():
    rec = dict(zip(TRIAL_FIELDS, [0] * len(TRIAL_FIELDS)))
    rec.update(size_A=1, size_B=1, size_C=1, m=1, sum_E=1, E=1, size_fAB=1, size_BC=1,
               size_R=1, size_S=1, incidences=1, k_exact=1, k_paper=1, measured_max=1, chain_ok=True)
    assert check_record(rec) == []
    assert "E > I(R,S)" in check_record({**rec, "E": 2, "sum_E": 1})
    parsed = parse_rendered("a,b,c\n1,true,x\n", "csv")
    assert parsed == [{"a": 1, "b": True, "c": "x"}]
